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

/// \file decomp.hpp
/// \brief Nested two-level overlapping box decomposition.
///
/// Coarse subdomains are M x M boxes of cells extended by `layers_c` element
/// layers. Every coarse subdomain is split into q x q fine groups (elements
/// of the extended region join the nearest box), and each group is extended
/// by `layers_f` layers and clipped back to its coarse subdomain, so the fine
/// subdomains of coarse subdomain i cover it exactly.

#ifndef HKGENEO_DECOMP_HPP
#define HKGENEO_DECOMP_HPP

#include <iosfwd>
#include <vector>

#include "hkgeneo/dense.hpp"
#include "hkgeneo/mesh.hpp"

namespace hkgeneo {

struct Subdomain {
  std::vector<int> elements;  // sorted triangle indices
  std::vector<int> ovdof;     // dofs whose support meets the subdomain, sorted
  std::vector<int> idof;      // dofs whose support lies inside it, sorted
  double diameter = 0.0;
};

/// Which local dof list a restriction selects.
enum class DofSet {
  kOverlap,   // ovdof: functions restricted to the subdomain
  kInterior,  // idof: functions vanishing on the subdomain boundary
};

struct TwoLevelDecomposition {
  int coarse_grid = 1;  // M
  int fine_grid = 1;    // q
  int layers_c = 1;
  int layers_f = 1;

  std::vector<Subdomain> coarse;
  std::vector<std::vector<Subdomain>> fine;

  std::vector<int> coarse_multiplicity;  // per dof
  std::vector<int> fine_multiplicity;    // per dof, over all (i, j)

  /// W_i aligned with coarse[i].ovdof: 1/mu^c on idof, 0 elsewhere.
  std::vector<Vector> coarse_pou;
  /// Aligned with fine[i][j].idof: 1/mu^f.
  std::vector<std::vector<Vector>> fine_pou;

  int lambda = 0;  // max number of fine subdomains containing one triangle
  double hc = 0.0;
  double hf = 0.0;

  int num_coarse() const { return static_cast<int>(coarse.size()); }
  int num_fine() const;
};

/// Support-union layer extension applied `layers` times. Returns a sorted set.
std::vector<int> extend_by_layers(const Mesh& mesh, std::vector<int> base, int layers);

/// Computes ovdof, idof and diameter for an element set.
Subdomain make_subdomain(const Mesh& mesh, const FeSpace& space, std::vector<int> elements);

/// Errors (kConfig): M or q < 1, M not dividing n, q not dividing n / M,
/// negative layer counts, empty fine subdomain.
TwoLevelDecomposition build_two_level(const Mesh& mesh, const FeSpace& space, int coarse_grid,
                                      int fine_grid, int layers_c, int layers_f);

Vector restrict_to(const Vector& v, const Subdomain& sub, DofSet set);
Vector extend_from(const Vector& local, const Subdomain& sub, DofSet set, Eigen::Index n);

/// One line per subdomain: "c i : ids" and "f i j : ids".
void dump_subdomains(std::ostream& out, const TwoLevelDecomposition& decomp);

}  // namespace hkgeneo

#endif  // HKGENEO_DECOMP_HPP
