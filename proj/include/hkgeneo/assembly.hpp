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

/// \file assembly.hpp
/// \brief P1 finite element assembly of the Helmholtz forms.
///
/// With a(u,v) = (a grad u, grad v) and the L2 product (u,v), the module
/// assembles A, S, B = A - k^2 S and D_k = A + k^2 S over interior dofs.
/// D_k induces the k-weighted energy norm in which GMRES and all estimates
/// are measured.

#ifndef HKGENEO_ASSEMBLY_HPP
#define HKGENEO_ASSEMBLY_HPP

#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hkgeneo/dense.hpp"
#include "hkgeneo/mesh.hpp"

namespace hkgeneo {

using SparseSymMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Mat3 = std::array<std::array<double, 3>, 3>;

enum class CoefficientKind { kConstant, kCheckerboard, kChannels };

/// Piecewise constant scalar diffusion a(x) I, normalized so that
/// min = 1 and max = contrast.
struct CoefficientField {
  CoefficientKind kind = CoefficientKind::kConstant;
  double contrast = 1.0;
  std::vector<double> per_element_value;
};

/// Checkerboard uses a 4x4 block pattern; channels are horizontal stripes
/// of width 1/8 (odd stripes carry the contrast). A constant field ignores
/// `contrast` and is identically 1.
CoefficientField make_coefficient(const Mesh& mesh, CoefficientKind kind, double contrast);

CoefficientKind parse_coefficient_kind(const std::string& name);
std::string to_string(CoefficientKind kind);

/// Exact P1 element matrices.
Mat3 p1_stiffness(const std::array<Point, 3>& corners, double a);
Mat3 p1_mass(const std::array<Point, 3>& corners);

struct AssembledForms {
  SparseSymMatrix stiffness;  // A
  SparseSymMatrix mass;       // S
  SparseSymMatrix helmholtz;  // B = A - k^2 S
  SparseSymMatrix dk;         // D_k = A + k^2 S
  double k = 0.0;
  std::vector<double> element_coeff;

  Eigen::Index size() const { return stiffness.rows(); }
};

/// Rejects k <= 0 (ErrorCode::kConfig).
AssembledForms assemble_forms(const Mesh& mesh, const FeSpace& space,
                              const CoefficientField& coeff, double k);

/// Load vector (f, phi_i) with the 3-point edge-midpoint rule.
Vector assemble_rhs(const Mesh& mesh, const FeSpace& space,
                    const std::function<double(Point)>& f);

double bform(const AssembledForms& forms, const Vector& u, const Vector& v);
double norm_1k(const AssembledForms& forms, const Vector& v);

/// Element-wise ("Neumann") assembly of b and (.,.)_{1,k} restricted to the
/// triangles `elements`, on the dof list `dofs` (global dof numbers; local
/// index = position in the list). Contributions to dofs outside the list are
/// dropped.
struct LocalForms {
  DenseMatrix helmholtz;
  DenseMatrix dk;
  DenseMatrix mass;
};

LocalForms assemble_local(const Mesh& mesh, const FeSpace& space, const AssembledForms& forms,
                          std::span<const int> elements, std::span<const int> dofs);

/// Dense principal submatrix M(dofs, dofs).
DenseMatrix principal_submatrix(const SparseSymMatrix& m, std::span<const int> dofs);

/// Matrix Market coordinate export (lower triangle, 1-based, "symmetric").
void write_matrix_market(std::ostream& out, const SparseSymMatrix& m);

}  // namespace hkgeneo

#endif  // HKGENEO_ASSEMBLY_HPP
