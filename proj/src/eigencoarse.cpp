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

#include "hkgeneo/eigencoarse.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

namespace {

// Schur complement pivots below this (unit Gram diagonal) mark dependent
// coarse candidates.
constexpr double kGramDropTol = 1e-8;

}  // namespace

LocalGevp assemble_local_gevp(int i, const Mesh& mesh, const FeSpace& space,
                              const AssembledForms& forms, const TwoLevelDecomposition& decomp) {
  if (i < 0 || i >= decomp.num_coarse())
    fail(ErrorCode::kConfig, "coarse subdomain index out of range");
  const Subdomain& sub = decomp.coarse[i];
  LocalForms local = assemble_local(mesh, space, forms, sub.elements, sub.ovdof);
  LocalGevp g;
  g.subdomain = i;
  g.dofs = sub.ovdof;
  g.weights = decomp.coarse_pou[i];
  if (g.weights.size() == 0 || g.weights.maxCoeff() <= 0.0)
    fail(ErrorCode::kConfig,
         "coarse subdomain " + std::to_string(i) + " has no interior dofs");
  g.b = std::move(local.helmholtz);
  g.c = g.weights.asDiagonal() * local.dk * g.weights.asDiagonal();
  g.dk = std::move(local.dk);
  return g;
}

LocalGevpResult solve_indefinite_gevp(const DenseMatrix& b, const DenseMatrix& c,
                                      const GevpOptions& options) {
  const Eigen::Index n = b.rows();
  if (b.cols() != n || c.rows() != n || c.cols() != n)
    fail(ErrorCode::kInternal, "gevp: matrix dimensions differ");
  LocalGevpResult out;
  if (n == 0) return out;

  // C = L L^T restricted to range(C).
  const SymmetricEigen ce = symmetric_eigen(c);
  const double cmax = std::max(ce.values.cwiseAbs().maxCoeff(), 0.0);
  std::vector<Eigen::Index> range;
  for (Eigen::Index a = 0; a < n; ++a)
    if (ce.values[a] > options.rank_tol * cmax) range.push_back(a);
  if (range.empty()) {
    out.n_kernel = static_cast<int>(n);
    return out;
  }
  const auto r = static_cast<Eigen::Index>(range.size());
  DenseMatrix l(n, r);
  for (Eigen::Index a = 0; a < r; ++a)
    l.col(a) = ce.vectors.col(range[a]) * std::sqrt(ce.values[range[a]]);

  double gamma = options.initial_shift > 0.0 ? options.initial_shift : 1.0;
  SymmetricIndefiniteFactor shifted;
  bool found = false;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    shifted = SymmetricIndefiniteFactor(b + gamma * c, options.pivot_tol);
    if (!shifted.singular()) {
      found = true;
      break;
    }
    gamma *= 2.0;
  }
  if (!found)
    fail(ErrorCode::kEigensolve, "no invertible shift B + gamma C found");
  out.shift_gamma = gamma;

  const DenseMatrix x = shifted.solve(l);  // (B + gamma C)^{-1} L
  DenseMatrix kmat = l.transpose() * x;
  kmat = 0.5 * (kmat + kmat.transpose()).eval();
  const SymmetricEigen ke = symmetric_eigen(kmat);
  const double mu_max = ke.values.cwiseAbs().maxCoeff();

  std::vector<Eigen::Index> finite;
  for (Eigen::Index a = 0; a < r; ++a)
    if (std::abs(ke.values[a]) > options.rank_tol * mu_max) finite.push_back(a);
  // lambda = 1/mu - gamma decreases in mu on each sign branch, and negative
  // mu give lambda < -gamma: negative mu in descending order first, then
  // positive mu in descending order.
  std::vector<Eigen::Index> order;
  for (auto it = finite.rbegin(); it != finite.rend(); ++it)
    if (ke.values[*it] < 0.0) order.push_back(*it);
  for (auto it = finite.rbegin(); it != finite.rend(); ++it)
    if (ke.values[*it] > 0.0) order.push_back(*it);

  const auto m = static_cast<Eigen::Index>(order.size());
  DenseMatrix y(r, m);
  out.eigenvalues.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double mu = ke.values[order[a]];
    y.col(a) = ke.vectors.col(order[a]) / mu;
    out.eigenvalues[a] = 1.0 / mu - gamma;
    if (out.eigenvalues[a] <= 0.0) ++out.n_nonpositive;
  }
  out.eigenvectors.noalias() = x * y;
  out.n_kernel = static_cast<int>(n - m);

  const double bn = inf_norm(b);
  const double cn = inf_norm(c);
  DenseMatrix res = b * out.eigenvectors;
  res.noalias() -= (c * out.eigenvectors) * out.eigenvalues.asDiagonal();
  for (Eigen::Index a = 0; a < m; ++a) {
    const double lam = out.eigenvalues[a];
    const double scale = (bn + std::abs(lam) * cn) * out.eigenvectors.col(a).norm();
    const double rn = res.col(a).norm();
    out.max_residual = std::max(out.max_residual, scale > 0.0 ? rn / scale : rn);
  }
  if (!(out.max_residual <= options.residual_tol))
    fail(ErrorCode::kEigensolve, "local eigenpair residual too large");
  return out;
}

LocalGevpResult solve_local_gevp(const LocalGevp& gevp, double k, GevpOptions options) {
  if (options.initial_shift <= 0.0) options.initial_shift = 2.0 * k * k;
  try {
    return solve_indefinite_gevp(gevp.b, gevp.c, options);
  } catch (const Error& e) {
    fail(e.code(), std::string(e.what()) + " (coarse subdomain " +
                       std::to_string(gevp.subdomain) + ")");
  }
}

double stacked_min_singular_value(const DenseMatrix& b, const DenseMatrix& c) {
  if (b.rows() == 0) return 0.0;
  const Vector ev = symmetric_eigenvalues(b.transpose() * b + c.transpose() * c);
  return std::sqrt(std::max(0.0, ev[0]));
}

int ModeSelection::total() const { return std::accumulate(counts.begin(), counts.end(), 0); }

ModeSelection select_modes(std::span<const LocalGevpResult> results, double tau_target,
                           std::span<const int> caps) {
  if (!(tau_target > 0.0)) fail(ErrorCode::kConfig, "tau target must be positive");
  if (!caps.empty() && caps.size() != results.size())
    fail(ErrorCode::kInternal, "mode caps do not match the subdomain count");
  ModeSelection sel;
  sel.tau_target = tau_target;
  sel.tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Vector& ev = results[i].eigenvalues;
    int m = 0;
    while (m < ev.size() && ev[m] < tau_target) ++m;
    if (m == ev.size())
      sel.overflow.push_back(static_cast<int>(i));
    else
      sel.tau = std::min(sel.tau, ev[m]);
    if (!caps.empty() && m > caps[i])
      fail(ErrorCode::kConfig, "coarse subdomain " + std::to_string(i) + " needs " +
                                   std::to_string(m) + " modes, above the cap of " +
                                   std::to_string(caps[i]) + " (raise max_modes or lower tau)");
    sel.counts.push_back(m);
  }
  sel.theta = std::isinf(sel.tau) ? 0.0 : 1.0 / sel.tau;
  return sel;
}

CoarseSpace build_coarse_space(std::span<const LocalGevpResult> results,
                               const ModeSelection& selection,
                               const TwoLevelDecomposition& decomp,
                               const AssembledForms& forms) {
  if (results.size() != static_cast<std::size_t>(decomp.num_coarse()) ||
      selection.counts.size() != results.size())
    fail(ErrorCode::kInternal, "coarse space inputs have inconsistent sizes");
  const Eigen::Index n = forms.size();
  CoarseSpace cs;
  cs.selected = selection.counts;
  cs.counts.assign(results.size(), 0);
  cs.tau = selection.tau;
  cs.theta = selection.theta;

  // Candidate columns E_i (W_i p) and their D_k Gram matrix.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> owner, mode;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Subdomain& sub = decomp.coarse[i];
    for (int l = 0; l < selection.counts[i]; ++l) {
      const Vector local = decomp.coarse_pou[i].cwiseProduct(results[i].eigenvectors.col(l));
      const int c = static_cast<int>(owner.size());
      for (Eigen::Index r = 0; r < local.size(); ++r)
        if (local[r] != 0.0) trip.emplace_back(sub.ovdof[r], c, local[r]);
      owner.push_back(static_cast<int>(i));
      mode.push_back(l);
    }
  }
  const auto m_cand = static_cast<Eigen::Index>(owner.size());
  CoarseBasis cand(n, m_cand);
  cand.setFromTriplets(trip.begin(), trip.end());
  const DenseMatrix gram = DenseMatrix(cand.transpose() * CoarseBasis(forms.dk * cand));

  // Pivoted Cholesky of the unit-diagonal Gram matrix keeps a well
  // conditioned subset; the kept columns stay in candidate order.
  std::vector<Eigen::Index> live;
  for (Eigen::Index a = 0; a < m_cand; ++a)
    if (gram(a, a) > 0.0) live.push_back(a);
  const auto nl = static_cast<lapack_int>(live.size());
  DenseMatrix unit(nl, nl);
  for (lapack_int j = 0; j < nl; ++j)
    for (lapack_int i = 0; i < nl; ++i)
      unit(i, j) = gram(live[i], live[j]) /
                   std::sqrt(gram(live[i], live[i]) * gram(live[j], live[j]));
  std::vector<lapack_int> piv(static_cast<std::size_t>(nl));
  lapack_int rank = 0;
  if (nl > 0) {
    const lapack_int info = LAPACKE_dpstrf(LAPACK_COL_MAJOR, 'L', nl, unit.data(), nl,
                                           piv.data(), &rank, kGramDropTol);
    if (info < 0) fail(ErrorCode::kInternal, "dpstrf: illegal argument");
  }
  std::vector<Eigen::Index> kept;
  for (lapack_int j = 0; j < rank; ++j) kept.push_back(live[piv[j] - 1]);
  std::sort(kept.begin(), kept.end());
  cs.dropped = static_cast<int>(m_cand - kept.size());
  for (Eigen::Index a : kept) {
    cs.owner.push_back(owner[a]);
    cs.mode.push_back(mode[a]);
    ++cs.counts[owner[a]];
  }

  // Columns are normalized in the D_k norm so that the pivot test on B0 is
  // scale free.
  const auto m = static_cast<Eigen::Index>(kept.size());
  std::vector<Eigen::Triplet<double>> ztrip;
  for (Eigen::Index c = 0; c < m; ++c) {
    const double scale = 1.0 / std::sqrt(gram(kept[c], kept[c]));
    for (CoarseBasis::InnerIterator it(cand, kept[c]); it; ++it)
      ztrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(c), scale * it.value());
  }
  cs.z.resize(n, m);
  cs.z.setFromTriplets(ztrip.begin(), ztrip.end());
  cs.z.makeCompressed();

  const CoarseBasis bz = CoarseBasis(forms.helmholtz * cs.z);
  cs.b0 = DenseMatrix(cs.z.transpose() * bz);
  cs.b0 = 0.5 * (cs.b0 + cs.b0.transpose()).eval();
  return cs;
}

void write_spectrum_csv(std::ostream& out, std::span<const LocalGevpResult> results,
                        const ModeSelection& selection) {
  out << "subdomain,index,lambda,selected\n";
  char buf[64];
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Vector& ev = results[i].eigenvalues;
    const int m = i < selection.counts.size() ? selection.counts[i] : 0;
    for (Eigen::Index l = 0; l < ev.size(); ++l) {
      std::snprintf(buf, sizeof(buf), "%.17g", ev[l]);
      out << i << ',' << (l + 1) << ',' << buf << ',' << (l < m ? 1 : 0) << '\n';
    }
  }
}

}  // namespace hkgeneo
