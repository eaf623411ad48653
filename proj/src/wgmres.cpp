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

#include "hkgeneo/wgmres.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

GmresResult weighted_gmres(const LinearOperator& op, const Vector& rhs,
                           const SparseSymMatrix& weight, const GmresOptions& options,
                           const Vector* x0) {
  const Eigen::Index n = rhs.size();
  if (weight.rows() != n || weight.cols() != n || (x0 && x0->size() != n))
    fail(ErrorCode::kInternal, "gmres: dimension mismatch");
  if (options.maxit < 0 || !(options.rtol >= 0.0))
    fail(ErrorCode::kConfig, "gmres: maxit and rtol must be nonnegative");

  GmresResult res;
  GmresReport& rep = res.report;
  res.x = x0 ? *x0 : Vector::Zero(n);
  Vector r = rhs;
  if (x0) r -= op(*x0);
  Vector wr = weight * r;
  const double beta = std::sqrt(std::max(0.0, r.dot(wr)));
  rep.residual_history.push_back(beta);

  auto finish = [&] {
    if (options.gamma) {
      rep.gamma_used = options.gamma;
      rep.envelope_clamped = *options.gamma >= 1.0;
      rep.elman_envelope = elman_envelope(*options.gamma, beta, rep.iterations);
    }
  };
  if (beta == 0.0) {
    rep.converged = true;
    finish();
    return res;
  }

  const int maxit = options.maxit;
  std::vector<Vector> v, wv;  // basis and its weight images
  v.push_back(r / beta);
  wv.push_back(wr / beta);
  DenseMatrix h = DenseMatrix::Zero(maxit + 1, std::max(maxit, 1));
  std::vector<double> cs, sn;
  Vector g = Vector::Zero(maxit + 1);
  g[0] = beta;
  const double target = options.rtol * beta;

  int j = 0;
  for (; j < maxit; ++j) {
    Vector w = op(v[j]);
    if (w.size() != n) fail(ErrorCode::kInternal, "gmres: operator changed dimension");
    for (int i = 0; i <= j; ++i) {
      const double hij = w.dot(wv[i]);
      h(i, j) = hij;
      w -= hij * v[i];
    }
    // second classical Gram-Schmidt pass
    for (int i = 0; i <= j; ++i) {
      const double c = w.dot(wv[i]);
      h(i, j) += c;
      w -= c * v[i];
    }
    const Vector ww = weight * w;
    const double hn = std::sqrt(std::max(0.0, w.dot(ww)));
    double loss = 0.0;
    for (int i = 0; i <= j; ++i) loss = std::max(loss, std::abs(ww.dot(v[i])));
    if (hn > 0.0) loss /= hn;
    rep.max_orthogonality_loss = std::max(rep.max_orthogonality_loss, loss);
    h(j + 1, j) = hn;

    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
      h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
      h(i, j) = t;
    }
    const double a = h(j, j), b = h(j + 1, j);
    const double rho = std::hypot(a, b);
    const double c = rho == 0.0 ? 1.0 : a / rho;
    const double s = rho == 0.0 ? 0.0 : b / rho;
    cs.push_back(c);
    sn.push_back(s);
    h(j, j) = rho;
    h(j + 1, j) = 0.0;
    g[j + 1] = -s * g[j];
    g[j] = c * g[j];

    rep.iterations = j + 1;
    rep.residual_history.push_back(std::abs(g[j + 1]));
    const bool happy = hn <= 1e-14 * beta;
    if (happy || std::abs(g[j + 1]) <= target) {
      rep.converged = true;
      rep.breakdown = happy;
      ++j;
      break;
    }
    v.push_back(w / hn);
    wv.push_back(ww / hn);
  }

  const int m = rep.iterations;
  if (m > 0) {
    const Vector y =
        h.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(g.head(m));
    for (int i = 0; i < m; ++i) res.x += y[i] * v[i];
  }
  if (options.keep_basis) res.basis = std::move(v);
  finish();
  return res;
}

double elman_gamma(double c1, double c2, GammaConvention convention) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) fail(ErrorCode::kConfig, "elman constants must be positive");
  return convention == GammaConvention::kLiteral ? c1 / c2 : c1 / std::sqrt(c2);
}

std::vector<double> elman_envelope(double gamma, double r0, int iterations) {
  std::vector<double> env;
  const double factor = gamma >= 1.0 ? 0.0 : std::sqrt(1.0 - gamma * gamma);
  double cur = r0;
  for (int m = 0; m <= iterations; ++m) {
    env.push_back(cur);
    cur *= factor;
  }
  return env;
}

void write_residual_csv(std::ostream& out, const GmresReport& report) {
  out << "iter,resid_dk,envelope\n";
  char buf[64];
  for (std::size_t m = 0; m < report.residual_history.size(); ++m) {
    std::snprintf(buf, sizeof(buf), "%.17g", report.residual_history[m]);
    out << m << ',' << buf << ',';
    if (m < report.elman_envelope.size()) {
      std::snprintf(buf, sizeof(buf), "%.17g", report.elman_envelope[m]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace hkgeneo
