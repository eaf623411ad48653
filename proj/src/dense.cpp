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

#include "hkgeneo/dense.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hkgeneo/error.hpp"

static_assert(sizeof(lapack_int) == sizeof(int), "expects 32-bit LAPACK ints");

namespace hkgeneo {

double inf_norm(const DenseMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

SymmetricIndefiniteFactor::SymmetricIndefiniteFactor(const DenseMatrix& a,
                                                     double pivot_tol)
    : factors_(a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) fail(ErrorCode::kInternal, "factor: matrix not square");
  norm_ = inf_norm(a);
  ipiv_.assign(static_cast<std::size_t>(n), 0);
  if (n == 0) {
    singular_ = false;
    min_pivot_ = std::numeric_limits<double>::infinity();
    return;
  }
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, factors_.data(),
                                         n, ipiv_.data());
  if (info < 0) fail(ErrorCode::kInternal, "dsytrf: illegal argument");

  min_pivot_ = std::numeric_limits<double>::infinity();
  n_negative_ = 0;
  for (lapack_int k = 0; k < n;) {
    if (ipiv_[k] > 0) {
      const double d = factors_(k, k);
      min_pivot_ = std::min(min_pivot_, std::abs(d));
      if (d < 0) ++n_negative_;
      k += 1;
    } else {
      // 2x2 block stored in the lower triangle.
      const double d11 = factors_(k, k);
      const double d21 = factors_(k + 1, k);
      const double d22 = factors_(k + 1, k + 1);
      const double mean = 0.5 * (d11 + d22);
      const double rad = std::hypot(0.5 * (d11 - d22), d21);
      const double e1 = mean - rad;
      const double e2 = mean + rad;
      min_pivot_ = std::min({min_pivot_, std::abs(e1), std::abs(e2)});
      n_negative_ += (e1 < 0) + (e2 < 0);
      k += 2;
    }
  }
  singular_ = info > 0 || !(min_pivot_ > pivot_tol * norm_);
}

Vector SymmetricIndefiniteFactor::solve(const Vector& b) const {
  Vector x = b;
  const auto n = static_cast<lapack_int>(size());
  if (n == 0) return x;
  const lapack_int info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, factors_.data(),
                                         n, ipiv_.data(), x.data(), n);
  if (info != 0) fail(ErrorCode::kInternal, "dsytrs failed");
  return x;
}

DenseMatrix SymmetricIndefiniteFactor::solve(const DenseMatrix& b) const {
  DenseMatrix x = b;
  const auto n = static_cast<lapack_int>(size());
  if (n == 0 || b.cols() == 0) return x;
  // dsytrs2 applies the factor with level-3 kernels; it overwrites a copy.
  DenseMatrix work = factors_;
  const lapack_int info =
      LAPACKE_dsytrs2(LAPACK_COL_MAJOR, 'L', n, static_cast<lapack_int>(b.cols()),
                      work.data(), n, ipiv_.data(), x.data(), n);
  if (info != 0) fail(ErrorCode::kInternal, "dsytrs failed");
  return x;
}

SymmetricEigen symmetric_eigen(const DenseMatrix& a) {
  SymmetricEigen out;
  const auto n = static_cast<lapack_int>(a.rows());
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                         out.vectors.data(), n, out.values.data());
  if (info != 0) fail(ErrorCode::kEigensolve, "dsyevd failed to converge");
  return out;
}

Vector symmetric_eigenvalues(const DenseMatrix& a) {
  DenseMatrix work = a;
  const auto n = static_cast<lapack_int>(a.rows());
  Vector w(n);
  if (n == 0) return w;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data());
  if (info != 0) fail(ErrorCode::kEigensolve, "dsyevd failed to converge");
  return w;
}

Vector generalized_eigenvalues(const DenseMatrix& a, const DenseMatrix& s) {
  DenseMatrix wa = a;
  DenseMatrix ws = s;
  const auto n = static_cast<lapack_int>(a.rows());
  Vector w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'L', n, wa.data(),
                                         n, ws.data(), n, w.data());
  if (info > n) fail(ErrorCode::kEigensolve, "dsygvd: right-hand matrix not positive definite");
  if (info != 0) fail(ErrorCode::kEigensolve, "dsygvd failed to converge");
  return w;
}

}  // namespace hkgeneo
