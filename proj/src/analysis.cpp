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

#include "hkgeneo/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

namespace {

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Vector draw(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index a = 0; a < n; ++a) v[a] = dist(rng);
  return v;
}

double dk_dot(const AssembledForms& forms, const Vector& u, const Vector& v) {
  return u.dot(forms.dk * v);
}

double dk_norm2(const AssembledForms& forms, const Vector& v) { return dk_dot(forms, v, v); }

}  // namespace

void CheckReport::record(double lhs, double rhs, double norm_scale) {
  const double scale = std::abs(lhs) + std::abs(rhs) + std::abs(norm_scale);
  const double margin = scale > 0.0 ? (rhs - lhs) / scale : 0.0;
  if (trials == 0 || margin < worst_margin) {
    worst_margin = margin;
    witness = trials;
  }
  if (lhs > rhs + slack * scale) ++violations;
  ++trials;
}

Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return draw(rng, n);
}

Vector pencil_eigenvalues(const AssembledForms& forms) {
  return generalized_eigenvalues(DenseMatrix(forms.stiffness), DenseMatrix(forms.mass));
}

double cstab_from_eigenvalues(const Vector& lambda, double k) {
  const double k2 = k * k;
  double best = 0.0;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    const double gap = std::abs(lambda[j] - k2);
    if (gap <= 1e-10 * std::max(lambda[j], k2))
      fail(ErrorCode::kSingular, "k^2 = " + fmt(k2) + " is resonant with the eigenvalue " +
                                     fmt(lambda[j]) + " of the Dirichlet problem");
    best = std::max(best, std::sqrt(lambda[j] + k2) / gap);
  }
  return best;
}

std::pair<double, double> pencil_eigenvalues_around(const AssembledForms& forms) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Eigen::Index n = forms.size();
  const double k2 = forms.k * forms.k;
  if (n == 0) return {nan, nan};
  // Operator K^{-1} S with K = A - k^2 S is self-adjoint in the S product;
  // its eigenvalues are 1 / (lambda - k^2).
  const Eigen::SparseMatrix<double> shifted = forms.helmholtz;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(shifted);
  lu.factorize(shifted);
  if (lu.info() != Eigen::Success)
    fail(ErrorCode::kSingular, "k^2 = " + fmt(k2) + " is resonant with the Dirichlet problem");

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> normal;
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = normal(rng);
  q /= std::sqrt(q.dot(forms.mass * q));

  const Eigen::Index max_steps = n;
  DenseMatrix basis(n, std::min<Eigen::Index>(max_steps, 64));
  DenseMatrix sbasis(n, basis.cols());  // S * basis
  std::vector<double> alpha, beta;
  double lo = nan, hi = nan;  // extreme Ritz values of the shifted operator
  for (Eigen::Index j = 0; j < max_steps; ++j) {
    if (j == basis.cols()) {
      const Eigen::Index grow = std::min<Eigen::Index>(max_steps, 2 * basis.cols());
      basis.conservativeResize(Eigen::NoChange, grow);
      sbasis.conservativeResize(Eigen::NoChange, grow);
    }
    basis.col(j) = q;
    sbasis.col(j) = forms.mass * q;
    Vector w = lu.solve(Vector(sbasis.col(j)));
    alpha.push_back(sbasis.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass)
      w -= basis.leftCols(j + 1) * (sbasis.leftCols(j + 1).transpose() * w);
    const double b = std::sqrt(std::max(0.0, w.dot(forms.mass * w)));

    const auto m = static_cast<Eigen::Index>(alpha.size());
    DenseMatrix t = DenseMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t);
    const Vector& theta = es.eigenvalues();
    const double scale = theta.cwiseAbs().maxCoeff();
    const bool exhausted = b <= 1e-14 * scale || j + 1 == max_steps;
    const double r_lo = std::abs(b * es.eigenvectors()(m - 1, 0));
    const double r_hi = std::abs(b * es.eigenvectors()(m - 1, m - 1));
    lo = theta[0];
    hi = theta[m - 1];
    if (exhausted || (m >= 8 && r_lo <= 1e-11 * scale && r_hi <= 1e-11 * scale)) break;
    beta.push_back(b);
    q = w / b;
  }
  std::pair<double, double> out{nan, nan};
  if (lo < 0.0) out.first = k2 + 1.0 / lo;
  if (hi > 0.0) out.second = k2 + 1.0 / hi;
  return out;
}

double estimate_cstab(const AssembledForms& forms) {
  const auto [below, above] = pencil_eigenvalues_around(forms);
  std::vector<double> lambda;
  if (!std::isnan(below)) lambda.push_back(below);
  if (!std::isnan(above)) lambda.push_back(above);
  return cstab_from_eigenvalues(Eigen::Map<const Vector>(lambda.data(),
                                                         static_cast<Eigen::Index>(lambda.size())),
                                forms.k);
}

Conditions evaluate_conditions(double k, double hf, double tau, int lambda, double cstab) {
  Conditions c;
  c.k = k;
  c.hf = hf;
  c.tau = tau;
  c.lambda = lambda;
  c.cstab = cstab;
  c.theta = std::isinf(tau) ? 0.0 : tau > 0.0 ? 1.0 / tau : std::numeric_limits<double>::infinity();
  const double l = lambda;
  const double l2 = l * l, l3 = l2 * l, l4 = l2 * l2;
  const double a = 2.0 + 3.0 * l4 * c.theta;
  c.s = 2.0 * l2 * a * (2.0 * k * std::sqrt(c.theta) * (1.0 + cstab) + 3.0 * k * hf);
  c.c1 = (1.0 - c.s) / a;
  c.c2 = 18.0 + 8.0 * l3;
  if (!std::isfinite(c.c1)) c.c1 = -std::numeric_limits<double>::infinity();
  c.gamma = c.c1 / c.c2;
  c.hf_k = hf * k;
  c.tau_ratio = (1.0 + cstab) * (1.0 + cstab) * k * k * c.theta;
  const double cc = std::max(c.hf_k, c.tau_ratio);
  c.c_small_lhs = 2.0 * l2 * (2.0 + 3.0 * l4 * cc) * (2.0 * std::sqrt(cc) + 3.0 * cc);
  c.t0_lhs = 2.0 * k * l2 * std::sqrt(c.theta) * (1.0 + cstab);
  return c;
}

Vector apply_local_projector(const LocalGevp& gevp, const LocalGevpResult& result, int m,
                             const Vector& v) {
  if (m < 0 || m > result.n_finite()) fail(ErrorCode::kInternal, "projector: bad mode count");
  if (m == 0) return Vector::Zero(v.size());
  const DenseMatrix& p = result.eigenvectors;
  const Vector alpha = p.leftCols(m).transpose() * (gevp.c * v);
  return p.leftCols(m) * alpha;
}

std::vector<CheckReport> check_projector(const LocalGevp& gevp, const LocalGevpResult& result,
                                         int m, int trials, std::uint64_t seed) {
  CheckReport lower{"projector_b_nonnegative"};
  CheckReport upper{"projector_b_bounded"};
  CheckReport approx{"projector_c_bound"};
  const bool has_next = m < result.n_finite();
  approx.applicable = has_next && result.eigenvalues[m] > 0.0;
  const double lam_next = has_next ? result.eigenvalues[m] : 0.0;

  std::mt19937_64 rng(seed);
  const Eigen::Index n = gevp.b.rows();
  for (int t = 0; t < trials; ++t) {
    Vector v;
    if (t == 0 && has_next)
      v = result.eigenvectors.col(m);
    else if (t == 1 && m > 0)
      v = result.eigenvectors.col(0);
    else
      v = draw(rng, n);
    const Vector w = v - apply_local_projector(gevp, result, m, v);
    const double bww = w.dot(gevp.b * w);
    const double cww = w.dot(gevp.c * w);
    const double vv = v.dot(gevp.dk * v);
    lower.record(0.0, bww, vv);
    upper.record(bww, vv, vv);
    if (approx.applicable) approx.record(cww, bww / lam_next, vv);
  }
  return {lower, upper, approx};
}

DecompositionPieces decompose(const Vector& v, const TwoLevelDecomposition& decomp,
                              std::span<const LocalGevp> gevps,
                              std::span<const LocalGevpResult> results,
                              std::span<const int> counts) {
  const Eigen::Index n = v.size();
  DecompositionPieces out;
  out.z0 = Vector::Zero(n);
  for (int i = 0; i < decomp.num_coarse(); ++i) {
    const Subdomain& c = decomp.coarse[i];
    const Vector pv = apply_local_projector(gevps[i], results[i], counts[i],
                                            restrict_to(v, c, DofSet::kOverlap));
    const Vector g = extend_from(pv, c, DofSet::kOverlap, n);
    for (std::size_t j = 0; j < decomp.fine[i].size(); ++j) {
      const Subdomain& f = decomp.fine[i][j];
      const Vector& w = decomp.fine_pou[i][j];
      const Vector gi = restrict_to(g, f, DofSet::kInterior);
      const Vector vi = restrict_to(v, f, DofSet::kInterior);
      out.z0 += extend_from(w.cwiseProduct(gi), f, DofSet::kInterior, n);
      out.zf.push_back(extend_from(w.cwiseProduct(vi - gi), f, DofSet::kInterior, n));
    }
  }
  return out;
}

std::vector<CheckReport> check_decomposition_bounds(
    const AssembledForms& forms, const TwoLevelDecomposition& decomp,
    std::span<const LocalGevp> gevps, std::span<const LocalGevpResult> results,
    const ModeSelection& selection, const SpdProjections* proj, int trials, std::uint64_t seed) {
  CheckReport sum_zf{"approx_sum_zf"};
  CheckReport v_z0{"approx_v_minus_z0"};
  CheckReport best{"approx_coarse_best"};
  CheckReport stable{"stable_decomposition"};
  best.applicable = proj != nullptr;
  const double l = decomp.lambda;
  const double theta = selection.theta;
  const double l2t = l * l * theta;
  const double l4t = l * l * l * l * theta;

  std::mt19937_64 rng(seed);
  const Eigen::Index n = forms.size();
  for (int t = 0; t < trials; ++t) {
    Vector v;
    if (t == 0 && !selection.counts.empty() && selection.counts[0] > 0) {
      const Vector local = decomp.coarse_pou[0].cwiseProduct(results[0].eigenvectors.col(0));
      v = extend_from(local, decomp.coarse[0], DofSet::kOverlap, n);
    } else {
      v = draw(rng, n);
    }
    const DecompositionPieces d = decompose(v, decomp, gevps, results, selection.counts);
    Vector recon = d.z0;
    for (const Vector& z : d.zf) recon += z;
    if ((recon - v).norm() > 1e-12 * std::max(1.0, v.norm()))
      fail(ErrorCode::kInternal, "decomposition does not reconstruct v");

    const double vv = dk_norm2(forms, v);
    double zf2 = 0.0;
    for (const Vector& z : d.zf) zf2 += dk_norm2(forms, z);
    const double z02 = dk_norm2(forms, d.z0);
    sum_zf.record(zf2, l2t * vv, vv);
    v_z0.record(dk_norm2(forms, Vector(v - d.z0)), l4t * vv, vv);
    if (proj) best.record(dk_norm2(forms, Vector(v - proj->apply_P0(v))), l4t * vv, vv);
    stable.record(z02 + zf2, (2.0 + 3.0 * l4t) * vv, vv);
  }
  return {sum_zf, v_z0, best, stable};
}

CheckReport check_coercivity(const AssembledForms& forms, const SpdProjections& proj, int lambda,
                             double theta, int trials, std::uint64_t seed) {
  CheckReport rep{"p_coercivity"};
  const double l4 = std::pow(static_cast<double>(lambda), 4);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Vector u = draw(rng, forms.size());
    const double uu = dk_norm2(forms, u);
    rep.record(uu, (2.0 + 3.0 * l4 * theta) * dk_dot(forms, proj.apply_P(u), u), uu);
  }
  return rep;
}

double operator_identity_deviation(const Mesh& mesh, const FeSpace& space,
                                   const AssembledForms& forms,
                                   const TwoLevelDecomposition& decomp,
                                   const CoarseSpace* coarse,
                                   const TwoLevelPreconditioner& precond, int trials,
                                   std::uint64_t seed) {
  const Eigen::Index n = forms.size();
  std::vector<const Subdomain*> subs;
  std::vector<Eigen::PartialPivLU<DenseMatrix>> lus;
  for (const auto& fs : decomp.fine) {
    for (const auto& f : fs) {
      subs.push_back(&f);
      lus.emplace_back(assemble_local(mesh, space, forms, f.elements, f.idof).helmholtz);
    }
  }
  Eigen::PartialPivLU<DenseMatrix> b0;
  const bool has_coarse = coarse != nullptr && !coarse->empty();
  if (has_coarse) {
    DenseMatrix z = DenseMatrix(coarse->z);
    b0.compute(z.transpose() * (forms.helmholtz * z));
  }

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector u = draw(rng, n);
    const Vector v = draw(rng, n);
    const Vector bu = forms.helmholtz * u;
    Vector tu = Vector::Zero(n);
    for (std::size_t b = 0; b < subs.size(); ++b)
      tu += extend_from(lus[b].solve(restrict_to(bu, *subs[b], DofSet::kInterior)), *subs[b],
                        DofSet::kInterior, n);
    if (has_coarse) {
      const Vector zbu = coarse->z.transpose() * bu;
      tu += coarse->z * b0.solve(zbu);
    }
    const Vector mbu = precond.apply(bu);
    const double lhs = dk_dot(forms, mbu, v);
    const double rhs = dk_dot(forms, tu, v);
    const double scale = std::sqrt(dk_norm2(forms, tu) * dk_norm2(forms, v));
    if (scale > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

LocalSpdReport check_local_spd(const AssembledForms& forms, const TwoLevelDecomposition& decomp) {
  LocalSpdReport rep;
  rep.positivity.name = "local_spd";
  rep.floor.name = "local_spd_floor";
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  const double k = forms.k;
  for (const auto& fs : decomp.fine) {
    for (const auto& f : fs) {
      ++rep.blocks;
      const DenseMatrix b = principal_submatrix(forms.helmholtz, f.idof);
      const DenseMatrix s = principal_submatrix(forms.mass, f.idof);
      const double h = f.diameter;
      const double pencil_min = generalized_eigenvalues(b, s)[0];
      rep.floor.record((2.0 - h * h * k * k) / (h * h), pencil_min, 0.0);
      if (h * k < std::sqrt(2.0)) {
        ++rep.hypothesis_blocks;
        const double ev = symmetric_eigenvalues(b)[0];
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, ev);
        if (ev > 0.0) ++rep.positive_blocks;
        rep.positivity.record(0.0, ev, 0.0);
      }
    }
  }
  rep.positivity.applicable = rep.hypothesis_blocks > 0;
  return rep;
}

CheckReport check_local_t_stability(const Mesh& mesh, const FeSpace& space,
                                    const AssembledForms& forms,
                                    const TwoLevelDecomposition& decomp,
                                    const TwoLevelPreconditioner& precond, int trials,
                                    std::uint64_t seed) {
  CheckReport rep{"local_t_stability"};
  std::vector<std::size_t> blocks;
  std::vector<DenseMatrix> local_dk;
  std::vector<const Subdomain*> subs;
  std::size_t flat = 0;
  for (const auto& fs : decomp.fine) {
    for (const auto& f : fs) {
      if (f.diameter * forms.k <= std::sqrt(2.0) / 2.0) {
        blocks.push_back(flat);
        subs.push_back(&f);
        local_dk.push_back(assemble_local(mesh, space, forms, f.elements, f.ovdof).dk);
      }
      ++flat;
    }
  }
  rep.applicable = !blocks.empty();
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials && rep.applicable; ++t) {
    const Vector u = draw(rng, forms.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Vector tu = precond.apply_local_T(blocks[b], u);
      const Vector ul = restrict_to(u, *subs[b], DofSet::kOverlap);
      const double lhs = std::sqrt(dk_norm2(forms, tu));
      const double rhs = 2.0 * std::sqrt(std::max(0.0, ul.dot(local_dk[b] * ul)));
      rep.record(lhs, rhs, rhs);
    }
  }
  return rep;
}

CheckReport check_coarse_t_stability(const AssembledForms& forms,
                                     const TwoLevelPreconditioner& precond,
                                     const Conditions& cond, int trials, std::uint64_t seed) {
  CheckReport rep{"coarse_t_stability"};
  rep.applicable = cond.t0_stable() && precond.has_coarse();
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials && rep.applicable; ++t) {
    const Vector u = draw(rng, forms.size());
    const double uu = std::sqrt(dk_norm2(forms, u));
    rep.record(std::sqrt(dk_norm2(forms, Vector(u - precond.apply_T0(u)))), 2.0 * uu, uu);
  }
  return rep;
}

FovBounds fov_bounds_dense(const AssembledForms& forms, const TwoLevelPreconditioner& precond) {
  const Eigen::Index n = forms.size();
  DenseMatrix t(n, n);
  for (Eigen::Index j = 0; j < n; ++j) t.col(j) = precond.apply_T(Vector::Unit(n, j));
  const DenseMatrix d = DenseMatrix(forms.dk);
  const DenseMatrix dt = d * t;
  const DenseMatrix h = 0.5 * (dt + dt.transpose());
  DenseMatrix g = t.transpose() * dt;
  g = 0.5 * (g + g.transpose()).eval();
  FovBounds out;
  out.c1 = generalized_eigenvalues(h, d)[0];
  const Vector ev = generalized_eigenvalues(g, d);
  out.c2 = ev[ev.size() - 1];
  out.dense = true;
  return out;
}

FovBounds fov_bounds_sampled(const AssembledForms& forms, const TwoLevelPreconditioner& precond,
                             int samples, std::uint64_t seed) {
  FovBounds out;
  out.dense = false;
  out.c1 = std::numeric_limits<double>::infinity();
  out.c2 = 0.0;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector u = draw(rng, forms.size());
    const Vector tu = precond.apply_T(u);
    const double uu = dk_norm2(forms, u);
    out.c1 = std::min(out.c1, dk_dot(forms, tu, u) / uu);
    out.c2 = std::max(out.c2, dk_norm2(forms, tu) / uu);
  }
  return out;
}

void write_theory_report(std::ostream& out, const TheoryReport& report) {
  const Conditions& c = report.conditions;
  out << "k=" << fmt(c.k) << '\n';
  out << "hf=" << fmt(c.hf) << '\n';
  out << "tau=" << fmt(c.tau) << '\n';
  out << "theta=" << fmt(c.theta) << '\n';
  out << "lambda_overlap=" << c.lambda << '\n';
  out << "cstab=" << fmt(c.cstab) << '\n';
  out << "s=" << fmt(c.s) << '\n';
  out << "gamma=" << fmt(c.gamma) << '\n';
  out << "c1_theory=" << fmt(c.c1) << '\n';
  out << "c2_theory=" << fmt(c.c2) << '\n';
  out << "hf_k=" << fmt(c.hf_k) << '\n';
  out << "scaling_lhs_hf_k=" << fmt(c.hf_k) << '\n';
  out << "scaling_lhs_tau=" << fmt(c.tau_ratio) << '\n';
  out << "c_small_lhs=" << fmt(c.c_small_lhs) << '\n';
  out << "t0_condition_lhs=" << fmt(c.t0_lhs) << '\n';
  out << "theorem_applicable=" << (c.theorem_applicable() ? 1 : 0) << '\n';
  if (report.have_fov) {
    out << "fov_mode=" << (report.fov.dense ? "dense" : "sampled") << '\n';
    out << "c1_measured=" << fmt(report.fov.c1) << '\n';
    out << "c2_measured=" << fmt(report.fov.c2) << '\n';
  }
  if (report.identity_deviation >= 0.0)
    out << "identity_deviation=" << fmt(report.identity_deviation) << '\n';
  for (const CheckReport& r : report.checks) {
    const std::string p = "check." + r.name + ".";
    out << p << "applicable=" << (r.applicable ? 1 : 0) << '\n';
    out << p << "trials=" << r.trials << '\n';
    out << p << "violations=" << r.violations << '\n';
    out << p << "worst_margin=" << fmt(r.worst_margin) << '\n';
    out << p << "witness=" << r.witness << '\n';
    out << p << "slack=" << fmt(r.slack) << '\n';
    out << p << "passed=" << (r.passed() ? 1 : 0) << '\n';
  }
}

}  // namespace hkgeneo
