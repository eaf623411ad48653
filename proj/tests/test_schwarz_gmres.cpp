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

#include <doctest.h>

#include <sstream>

#include "hkgeneo/error.hpp"
#include "hkgeneo/wgmres.hpp"
#include "support.hpp"

using namespace hkgeneo;

namespace {

// min ||b - A x||_W over x in span{b, A b, ..., A^{m-1} b}, by dense QR on an
// orthonormalized Krylov basis.
double krylov_min_residual(const DenseMatrix& a, const Vector& b, const DenseMatrix& w, int m) {
  const Eigen::LLT<DenseMatrix> llt(w);
  const DenseMatrix r = llt.matrixU();
  DenseMatrix k(b.size(), m);
  Vector cur = b;
  for (int j = 0; j < m; ++j) {
    k.col(j) = cur;
    cur = a * cur;
  }
  const DenseMatrix q = k.householderQr().householderQ() * DenseMatrix::Identity(b.size(), m);
  const DenseMatrix ls = r * a * q;
  const Vector y = ls.colPivHouseholderQr().solve(r * b);
  return (r * (b - a * q * y)).norm();
}

SparseSymMatrix random_spd_sparse(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + u(rng));
    if (i + 1 < n) {
      const double v = -u(rng);
      t.emplace_back(i, i + 1, v);
      t.emplace_back(i + 1, i, v);
    }
  }
  SparseSymMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

TEST_CASE("preconditioner against an explicit dense oracle") {
  testing::SmallProblem p(16, 9.0, 2, 2);
  p.build_coarse(0.7);
  REQUIRE(!p.coarse.empty());
  for (bool with_coarse : {false, true}) {
    const TwoLevelPreconditioner m =
        TwoLevelPreconditioner::factorize(p.forms, p.decomp, with_coarse ? &p.coarse : nullptr);
    CHECK(m.has_coarse() == with_coarse);
    const DenseMatrix oracle = testing::dense_preconditioner(p, with_coarse);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector r = random_vector(p.forms.size(), 40 + trial);
      const Vector expect = oracle * r;
      CHECK((m.apply(r) - expect).norm() <= 1e-12 * expect.norm());
      const Vector bu = p.forms.helmholtz * r;
      CHECK((m.apply_T(r) - m.apply(bu)).norm() <= 1e-12 * m.apply(bu).norm());
    }
    // T is the sum of its pieces
    const Vector u = random_vector(p.forms.size(), 77);
    Vector sum = m.apply_T0(u);
    for (std::size_t blk = 0; blk < m.local_solvers().size(); ++blk) sum += m.apply_local_T(blk, u);
    CHECK((sum - m.apply_T(u)).norm() <= 1e-12 * sum.norm());
    CHECK((m.apply_one_level(u) + m.apply_coarse(u) - m.apply(u)).norm() <=
          1e-12 * m.apply(u).norm());
  }
}

TEST_CASE("coarse projection is a B-projector onto V0") {
  testing::SmallProblem p(16, 6.0, 2, 2);
  p.build_coarse(0.8);
  const TwoLevelPreconditioner m = TwoLevelPreconditioner::factorize(p.forms, p.decomp, &p.coarse);
  const Vector u = random_vector(p.forms.size(), 5);
  const Vector t0 = m.apply_T0(u);
  CHECK((m.apply_T0(t0) - t0).norm() <= 1e-10 * t0.norm());
  // b(u - T0 u, z) = 0 for every coarse basis vector
  const Vector res = DenseMatrix(p.coarse.z).transpose() * (p.forms.helmholtz * (u - t0));
  CHECK(res.cwiseAbs().maxCoeff() <= 1e-10 * (p.forms.helmholtz * u).norm());
}

TEST_CASE("SPD analogue of T") {
  testing::SmallProblem p(12, 5.0, 2, 2);
  p.build_coarse(0.8);
  const SpdProjections proj(p.forms, p.decomp, &p.coarse);
  CHECK(proj.num_blocks() == 16);
  const Vector u = random_vector(p.forms.size(), 1);
  const Vector v = random_vector(p.forms.size(), 2);
  // P is self-adjoint in D_k and each block is an orthogonal projector
  const double lhs = proj.apply_P(u).dot(p.forms.dk * v);
  const double rhs = u.dot(p.forms.dk * proj.apply_P(v));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  const Vector pu = proj.apply_local(3, u);
  CHECK((proj.apply_local(3, pu) - pu).norm() <= 1e-10 * pu.norm());
  const Vector p0 = proj.apply_P0(u);
  CHECK((proj.apply_P0(p0) - p0).norm() <= 1e-10 * p0.norm());
}

TEST_CASE("weighted GMRES against Krylov least squares") {
  std::mt19937_64 rng(11);
  const int n = 30;
  DenseMatrix a = DenseMatrix::Identity(n, n) * 3.0;
  std::normal_distribution<double> g;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) += 0.3 * g(rng);
  const SparseSymMatrix w = random_spd_sparse(n, rng);
  const Vector b = random_vector(n, 8);
  GmresOptions opt;
  opt.rtol = 1e-12;
  opt.maxit = n;
  opt.keep_basis = true;
  const GmresResult res = weighted_gmres([&](const Vector& x) { return Vector(a * x); }, b, w, opt);
  const DenseMatrix wd(w);
  const double r0 = std::sqrt(b.dot(wd * b));
  CHECK(res.report.residual_history[0] == doctest::Approx(r0).epsilon(1e-13));
  for (int m = 1; m <= std::min(res.report.iterations, 12); ++m) {
    const double oracle = krylov_min_residual(a, b, wd, m);
    CHECK(res.report.residual_history[m] == doctest::Approx(oracle).epsilon(1e-8));
  }
  // residual history is nonincreasing and the final residual is honest
  for (std::size_t m = 1; m < res.report.residual_history.size(); ++m)
    CHECK(res.report.residual_history[m] <= res.report.residual_history[m - 1] * (1 + 1e-12));
  const Vector r = b - a * res.x;
  CHECK(std::sqrt(r.dot(wd * r)) ==
        doctest::Approx(res.report.residual_history.back()).epsilon(1e-6));
  CHECK(res.report.converged);
  // W-orthonormal basis
  const auto k = static_cast<Eigen::Index>(res.basis.size());
  DenseMatrix gram(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) gram(i, j) = res.basis[i].dot(wd * res.basis[j]);
  CHECK((gram - DenseMatrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("GMRES edge cases") {
  std::mt19937_64 rng(3);
  const SparseSymMatrix w = random_spd_sparse(10, rng);
  const Vector b = random_vector(10, 1);
  GmresOptions opt;
  SUBCASE("identity converges in one step with a happy breakdown") {
    const GmresResult r = weighted_gmres([](const Vector& x) { return x; }, b, w, opt);
    CHECK(r.report.iterations == 1);
    CHECK(r.report.converged);
    CHECK(r.report.breakdown);
    CHECK((r.x - b).norm() < 1e-14 * b.norm());
  }
  SUBCASE("zero right-hand side") {
    const GmresResult r =
        weighted_gmres([](const Vector& x) { return x; }, Vector::Zero(10), w, opt);
    CHECK(r.report.iterations == 0);
    CHECK(r.report.converged);
  }
  SUBCASE("iteration limit") {
    opt.maxit = 2;
    opt.rtol = 1e-14;
    DenseMatrix a = DenseMatrix::Identity(10, 10);
    for (int i = 0; i < 10; ++i) a(i, i) = 1.0 + i;
    const GmresResult r =
        weighted_gmres([&](const Vector& x) { return Vector(a * x); }, b, w, opt);
    CHECK(r.report.iterations == 2);
    CHECK_FALSE(r.report.converged);
  }
  SUBCASE("envelope bookkeeping") {
    opt.gamma = 0.5;
    const GmresResult r =
        weighted_gmres([](const Vector& x) { return Vector(2.0 * x); }, b, w, opt);
    REQUIRE(r.report.elman_envelope.size() == r.report.residual_history.size());
    CHECK(r.report.elman_envelope[1] ==
          doctest::Approx(r.report.elman_envelope[0] * std::sqrt(0.75)));
    std::ostringstream out;
    write_residual_csv(out, r.report);
    CHECK(out.str().rfind("iter,resid_dk,envelope\n0,", 0) == 0);
  }
}

TEST_CASE("Elman constants") {
  CHECK(elman_gamma(0.2, 4.0) == doctest::Approx(0.05));
  CHECK(elman_gamma(0.2, 4.0, GammaConvention::kNormSquared) == doctest::Approx(0.1));
  CHECK_THROWS_AS(elman_gamma(0.0, 1.0), Error);
  CHECK_THROWS_AS(elman_gamma(0.1, -1.0), Error);
  const auto env = elman_envelope(0.6, 2.0, 3);
  REQUIRE(env.size() == 4);
  CHECK(env[3] == doctest::Approx(2.0 * std::pow(0.8, 3)));
  const auto flat = elman_envelope(1.5, 1.0, 2);
  CHECK(flat[1] == 0.0);
}
