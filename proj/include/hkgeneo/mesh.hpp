// Copyright 2026 The hkgeneo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// \file mesh.hpp
/// \brief Structured P1 triangulation of the unit square.

#ifndef HKGENEO_MESH_HPP
#define HKGENEO_MESH_HPP

#include <array>
#include <cstdint>
#include <vector>

namespace hkgeneo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform n x n grid of square cells, each split along the lower-left to
/// upper-right diagonal. Vertex (i, j) has index j * (n + 1) + i; the two
/// triangles of cell (i, j) have indices 2 * (j * n + i) and 2 * (j * n + i) + 1.
struct Mesh {
  int n_per_side = 0;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  double h = 0.0;
  std::vector<std::uint8_t> boundary_vertex;

  // vertex -> incident triangles, CSR layout
  std::vector<int> patch_offsets;
  std::vector<int> patch_elements;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const;
  double longest_edge(int t) const;
  Point centroid(int t) const;
  std::array<Point, 3> corners(int t) const;

  /// Cell coordinates (i, j) of triangle t.
  std::array<int, 2> cell_of(int t) const {
    const int c = t / 2;
    return {c % n_per_side, c / n_per_side};
  }

  /// Triangles incident to vertex v (the support of its hat function).
  std::vector<int> patch(int v) const {
    return {patch_elements.begin() + patch_offsets[v],
            patch_elements.begin() + patch_offsets[v + 1]};
  }
};

/// Rejects n_per_side < 2 with ErrorCode::kConfig.
Mesh build_unit_square_mesh(int n_per_side);

/// Homogeneous Dirichlet P1 space: interior vertices only, lexicographic order.
struct FeSpace {
  static constexpr int kNoDof = -1;

  int n_dofs = 0;
  std::vector<int> dof_of_vertex;
  std::vector<int> vertex_of_dof;
};

FeSpace build_fe_space(const Mesh& mesh);

}  // namespace hkgeneo

#endif  // HKGENEO_MESH_HPP
