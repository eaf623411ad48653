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

/// \file dense.hpp
/// \brief Dense symmetric kernels (LAPACK-backed) shared by all modules.

#ifndef HKGENEO_DENSE_HPP
#define HKGENEO_DENSE_HPP

#include <Eigen/Dense>
#include <vector>

namespace hkgeneo {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Bunch-Kaufman LDL^T factorization of a dense symmetric matrix.
///
/// Works for indefinite matrices. After construction, `singular()` reports
/// whether some pivot block has an eigenvalue smaller in modulus than
/// `pivot_tol * ||A||_inf`; solving is still possible but meaningless then.
/// The inertia of A is read off the block diagonal D (Sylvester's law).
class SymmetricIndefiniteFactor {
 public:
  SymmetricIndefiniteFactor() = default;
  explicit SymmetricIndefiniteFactor(const DenseMatrix& a,
                                     double pivot_tol = 1e-12);

  Eigen::Index size() const { return factors_.rows(); }
  bool singular() const { return singular_; }
  /// Smallest |eigenvalue| over the 1x1 / 2x2 pivot blocks.
  double min_pivot() const { return min_pivot_; }
  double matrix_norm() const { return norm_; }
  int negative_count() const { return n_negative_; }
  bool positive_definite() const {
    return !singular_ && n_negative_ == 0 && size() > 0;
  }

  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;

 private:
  DenseMatrix factors_;
  std::vector<int> ipiv_;
  double min_pivot_ = 0.0;
  double norm_ = 0.0;
  int n_negative_ = 0;
  bool singular_ = true;
};

struct SymmetricEigen {
  Vector values;        // ascending
  DenseMatrix vectors;  // columns, orthonormal
};

/// Full eigendecomposition of a dense symmetric matrix (dsyevd).
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

/// Eigenvalues only, ascending.
Vector symmetric_eigenvalues(const DenseMatrix& a);

/// Eigenvalues of the definite pencil A x = lambda S x with S SPD (dsygvd),
/// ascending.
Vector generalized_eigenvalues(const DenseMatrix& a, const DenseMatrix& s);

/// Infinity norm (max absolute row sum).
double inf_norm(const DenseMatrix& a);

}  // namespace hkgeneo

#endif  // HKGENEO_DENSE_HPP
