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

// Small problems and dense oracles shared by the unit tests and the
// acceptance suite.

#ifndef HKGENEO_TESTS_SUPPORT_HPP
#define HKGENEO_TESTS_SUPPORT_HPP

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "hkgeneo/analysis.hpp"
#include "hkgeneo/assembly.hpp"
#include "hkgeneo/decomp.hpp"
#include "hkgeneo/eigencoarse.hpp"
#include "hkgeneo/mesh.hpp"
#include "hkgeneo/schwarz.hpp"

namespace testing {

using hkgeneo::DenseMatrix;
using hkgeneo::Vector;

/// Mesh, forms, decomposition and (optionally) the coarse space for a
/// structured problem.
struct SmallProblem {
  hkgeneo::Mesh mesh;
  hkgeneo::FeSpace space;
  hkgeneo::AssembledForms forms;
  hkgeneo::TwoLevelDecomposition decomp;
  std::vector<hkgeneo::LocalGevp> gevps;
  std::vector<hkgeneo::LocalGevpResult> spectra;
  hkgeneo::ModeSelection selection;
  hkgeneo::CoarseSpace coarse;

  SmallProblem(int n, double k, int m, int q, int layers_c = 1, int layers_f = 1)
      : mesh(hkgeneo::build_unit_square_mesh(n)),
        space(hkgeneo::build_fe_space(mesh)),
        forms(hkgeneo::assemble_forms(
            mesh, space, hkgeneo::make_coefficient(mesh, hkgeneo::CoefficientKind::kConstant, 1.0),
            k)),
        decomp(hkgeneo::build_two_level(mesh, space, m, q, layers_c, layers_f)) {}

  void build_coarse(double tau_target) {
    gevps.clear();
    spectra.clear();
    for (int i = 0; i < decomp.num_coarse(); ++i) {
      gevps.push_back(hkgeneo::assemble_local_gevp(i, mesh, space, forms, decomp));
      spectra.push_back(hkgeneo::solve_local_gevp(gevps.back(), forms.k));
    }
    selection = hkgeneo::select_modes(spectra, tau_target);
    coarse = hkgeneo::build_coarse_space(spectra, selection, decomp, forms);
  }
};

struct PencilEigen {
  std::vector<double> values;       // finite, ascending
  std::vector<Vector> vectors;      // matching right eigenvectors
  int infinite = 0;
  double max_imag = 0.0;            // largest |imag part| among finite values
};

/// Generalized eigenvalues of (a, b) by the QZ algorithm (dggev). Eigenvalues
/// with |beta| <= tol * |alpha| are counted as infinite.
inline PencilEigen qz_eigen(const DenseMatrix& a, const DenseMatrix& b, double tol = 1e-10) {
  const auto n = static_cast<lapack_int>(a.rows());
  DenseMatrix aa = a, bb = b, vr(n, n);
  std::vector<double> ar(n), ai(n), be(n);
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'V', n, aa.data(), n, bb.data(),
                                        n, ar.data(), ai.data(), be.data(), &dummy, 1,
                                        vr.data(), n);
  PencilEigen out;
  if (info != 0) return out;
  std::vector<std::pair<double, Eigen::Index>> fin;
  for (lapack_int j = 0; j < n; ++j) {
    const double mag = std::hypot(ar[j], ai[j]);
    if (std::abs(be[j]) <= tol * mag) {
      ++out.infinite;
      continue;
    }
    out.max_imag = std::max(out.max_imag, std::abs(ai[j] / be[j]));
    fin.emplace_back(ar[j] / be[j], j);
  }
  std::sort(fin.begin(), fin.end());
  for (const auto& [v, j] : fin) {
    out.values.push_back(v);
    out.vectors.push_back(vr.col(j));
  }
  return out;
}

/// Random symmetric matrix with N(0,1) entries.
inline DenseMatrix random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix a(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) a(i, j) = a(j, i) = g(rng);
  return a;
}

/// G^T G with G of size (n - deficiency) x n: positive semidefinite with a
/// kernel of the requested dimension (generically).
inline DenseMatrix random_psd(Eigen::Index n, Eigen::Index deficiency, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix f(n - deficiency, n);
  for (Eigen::Index j = 0; j < f.cols(); ++j)
    for (Eigen::Index i = 0; i < f.rows(); ++i) f(i, j) = g(rng);
  DenseMatrix c = f.transpose() * f;
  return 0.5 * (c + c.transpose());
}

inline DenseMatrix dense(const hkgeneo::SparseSymMatrix& m) { return DenseMatrix(m); }

/// Explicit dense two-level preconditioner assembled from principal
/// submatrices, inverted with partial-pivoting LU.
inline DenseMatrix dense_preconditioner(const SmallProblem& p, bool with_coarse) {
  const DenseMatrix b = dense(p.forms.helmholtz);
  const Eigen::Index n = b.rows();
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (const auto& row : p.decomp.fine)
    for (const auto& sub : row) {
      const auto s = static_cast<Eigen::Index>(sub.idof.size());
      DenseMatrix local(s, s);
      for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index c = 0; c < s; ++c) local(a, c) = b(sub.idof[a], sub.idof[c]);
      const DenseMatrix inv = local.partialPivLu().inverse();
      for (Eigen::Index a = 0; a < s; ++a)
        for (Eigen::Index c = 0; c < s; ++c) m(sub.idof[a], sub.idof[c]) += inv(a, c);
    }
  if (with_coarse && !p.coarse.empty()) {
    const DenseMatrix z(p.coarse.z);
    const DenseMatrix b0 = z.transpose() * b * z;
    m += z * b0.partialPivLu().solve(z.transpose());
  }
  return m;
}

}  // namespace testing

#endif  // HKGENEO_TESTS_SUPPORT_HPP
