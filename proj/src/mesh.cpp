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

#include "hkgeneo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

std::array<Point, 3> Mesh::corners(int t) const {
  const auto& tri = triangles[t];
  return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
}

double Mesh::signed_area(int t) const {
  const auto [a, b, c] = corners(t);
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::longest_edge(int t) const {
  const auto [a, b, c] = corners(t);
  return std::max({dist(a, b), dist(b, c), dist(c, a)});
}

Point Mesh::centroid(int t) const {
  const auto [a, b, c] = corners(t);
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

Mesh build_unit_square_mesh(int n_per_side) {
  if (n_per_side < 2) {
    fail(ErrorCode::kConfig,
         "n_per_side must be at least 2, got " + std::to_string(n_per_side));
  }
  Mesh mesh;
  const int n = n_per_side;
  mesh.n_per_side = n;
  const int nv = (n + 1) * (n + 1);
  mesh.vertices.reserve(nv);
  mesh.boundary_vertex.reserve(nv);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      mesh.boundary_vertex.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }
  mesh.triangles.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * (n + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + (n + 1);
      const int v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  mesh.h = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) mesh.h = std::max(mesh.h, mesh.longest_edge(t));

  mesh.patch_offsets.assign(nv + 1, 0);
  for (const auto& tri : mesh.triangles)
    for (int v : tri) ++mesh.patch_offsets[v + 1];
  for (int v = 0; v < nv; ++v) mesh.patch_offsets[v + 1] += mesh.patch_offsets[v];
  mesh.patch_elements.resize(mesh.patch_offsets.back());
  std::vector<int> fill(mesh.patch_offsets.begin(), mesh.patch_offsets.end() - 1);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int v : mesh.triangles[t]) mesh.patch_elements[fill[v]++] = t;
  return mesh;
}

FeSpace build_fe_space(const Mesh& mesh) {
  FeSpace space;
  space.dof_of_vertex.assign(mesh.num_vertices(), FeSpace::kNoDof);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.boundary_vertex[v]) continue;
    space.dof_of_vertex[v] = space.n_dofs++;
    space.vertex_of_dof.push_back(v);
  }
  return space;
}

}  // namespace hkgeneo
