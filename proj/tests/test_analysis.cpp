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

#include <limits>
#include <sstream>

#include "hkgeneo/error.hpp"
#include "support.hpp"

using namespace hkgeneo;

TEST_CASE("check report bookkeeping") {
  CheckReport r{"demo"};
  r.record(1.0, 2.0, 0.0);
  r.record(2.0, 2.0, 0.0);
  CHECK(r.passed());
  CHECK(r.worst_margin == doctest::Approx(0.0));
  CHECK(r.witness == 1);
  r.record(2.0 + 1e-12, 2.0, 0.0);  // inside the slack
  CHECK(r.passed());
  r.record(3.0, 2.0, 0.0);
  CHECK(r.violations == 1);
  CHECK(r.witness == 3);
  CHECK(r.worst_margin == doctest::Approx(-0.2));
  CHECK(r.trials == 4);
}

TEST_CASE("theory constants by hand") {
  // spreadsheet-style recomputation of every field
  const double k = 25.0, hf = 0.04, cstab = 3.0;
  const int lam = 4;
  const double tau = 2.0 * (1.0 + cstab) * (1.0 + cstab) * k * k;
  const Conditions c = evaluate_conditions(k, hf, tau, lam, cstab);
  const double theta = 1.0 / tau;
  const double a = 2.0 + 3.0 * 256.0 * theta;
  const double s = 2.0 * 16.0 * a * (2.0 * k * std::sqrt(theta) * 4.0 + 3.0 * k * hf);
  CHECK(c.theta == doctest::Approx(theta).epsilon(1e-15));
  CHECK(c.s == doctest::Approx(s).epsilon(1e-14));
  CHECK(c.c1 == doctest::Approx((1.0 - s) / a).epsilon(1e-14));
  CHECK(c.c2 == doctest::Approx(18.0 + 8.0 * 64.0));
  CHECK(c.gamma == doctest::Approx((1.0 - s) / (a * (18.0 + 512.0))).epsilon(1e-14));
  CHECK(c.hf_k == doctest::Approx(1.0));
  CHECK(c.tau_ratio == doctest::Approx(0.5));
  const double cc = 1.0;
  CHECK(c.c_small_lhs == doctest::Approx(2.0 * 16.0 * (2.0 + 768.0 * cc) * (2.0 + 3.0)));
  CHECK(c.t0_lhs == doctest::Approx(2.0 * k * 16.0 * std::sqrt(theta) * 4.0));
  CHECK_FALSE(c.theorem_applicable());

  SUBCASE("closed form with Lambda = 1") {
    // Theta = 0.01, and s = 0.5 reached through the H^f term only
    const double kk = 1.0, cs = 0.0;
    const double t = 100.0;
    const double aa = 2.0 + 3.0 * 0.01;
    const double h = (0.5 / (2.0 * aa) - 2.0 * kk * 0.1) / 3.0;
    const Conditions d = evaluate_conditions(kk, h, t, 1, cs);
    CHECK(d.s == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(d.c1 == doctest::Approx(0.5 / 2.03).epsilon(1e-13));
    CHECK(d.c1 == doctest::Approx(0.24631).epsilon(1e-5));
    CHECK(d.c2 == doctest::Approx(26.0));
    CHECK(d.theorem_applicable());
  }
  SUBCASE("limits") {
    const Conditions inf = evaluate_conditions(1e-9, 1e-9, std::numeric_limits<double>::infinity(),
                                               1, 0.0);
    CHECK(inf.theta == 0.0);
    CHECK(inf.gamma == doctest::Approx(1.0 / 52.0).epsilon(1e-6));
    const Conditions none = evaluate_conditions(10.0, 0.1, 0.0, 2, 1.0);
    CHECK(std::isinf(none.theta));
    CHECK(none.c1 < 0.0);
    CHECK_FALSE(none.theorem_applicable());
  }
  SUBCASE("determinism") {
    const Conditions again = evaluate_conditions(k, hf, tau, lam, cstab);
    CHECK(again.s == c.s);
    CHECK(again.gamma == c.gamma);
  }
}

TEST_CASE("stability constant") {
  const Vector lam = (Vector(3) << 10.0, 50.0, 200.0).finished();
  const double k = 6.0;  // k^2 = 36
  double expect = 0.0;
  for (double l : {10.0, 50.0, 200.0})
    expect = std::max(expect, std::sqrt(l + 36.0) / std::abs(l - 36.0));
  CHECK(cstab_from_eigenvalues(lam, k) == doctest::Approx(expect));
  CHECK_THROWS_AS(cstab_from_eigenvalues(lam, std::sqrt(50.0)), Error);

  for (double kk : {3.0, 7.5, 12.0, 21.0}) {
    testing::SmallProblem p(14, kk, 1, 1);
    const Vector all = pencil_eigenvalues(p.forms);
    const double dense = cstab_from_eigenvalues(all, kk);
    CHECK(estimate_cstab(p.forms) == doctest::Approx(dense).epsilon(1e-9));
    const auto [below, above] = pencil_eigenvalues_around(p.forms);
    if (kk * kk < all[0]) {
      CHECK(std::isnan(below));
    } else {
      CHECK(below <= kk * kk);
    }
    CHECK(above >= kk * kk);
  }
}

TEST_CASE("local projector properties") {
  testing::SmallProblem p(16, 10.0, 2, 2);
  p.build_coarse(0.6);
  for (int i = 0; i < p.decomp.num_coarse(); ++i) {
    const int m = p.selection.counts[i];
    const auto reps = check_projector(p.gevps[i], p.spectra[i], m, 100, 9 + i);
    REQUIRE(reps.size() == 3);
    for (const auto& r : reps) {
      CHECK(r.trials == 100);
      CHECK_MESSAGE(r.passed(), r.name);
    }
    // the projector is C-orthogonal: c(v - Pi v, p_l) = 0 for l <= m
    const Vector v = random_vector(p.gevps[i].b.rows(), 3);
    const Vector w = v - apply_local_projector(p.gevps[i], p.spectra[i], m, v);
    const Vector cw = p.spectra[i].eigenvectors.leftCols(m).transpose() * (p.gevps[i].c * w);
    CHECK(cw.cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + v.norm()));
  }
}

TEST_CASE("stable decomposition pieces") {
  testing::SmallProblem p(16, 8.0, 2, 2);
  p.build_coarse(0.7);
  const SpdProjections proj(p.forms, p.decomp, &p.coarse);
  const Vector v = random_vector(p.forms.size(), 21);
  const DecompositionPieces d =
      decompose(v, p.decomp, p.gevps, p.spectra, p.selection.counts);
  Vector sum = d.z0;
  for (const auto& z : d.zf) sum += z;
  CHECK((sum - v).cwiseAbs().maxCoeff() <= 1e-12 * v.cwiseAbs().maxCoeff());
  // z0 lies in the coarse space (up to roundoff)
  const DenseMatrix z(p.coarse.z);
  const Vector coef = (z.transpose() * z).ldlt().solve(z.transpose() * d.z0);
  CHECK((z * coef - d.z0).norm() <= 1e-8 * d.z0.norm());

  const auto reps = check_decomposition_bounds(p.forms, p.decomp, p.gevps, p.spectra, p.selection,
                                               &proj, 10, 5);
  CHECK(reps.size() == 4);
  for (const auto& r : reps) CHECK(r.trials == 10);
}

TEST_CASE("operator identities and bounds") {
  testing::SmallProblem p(16, 15.0, 2, 2);
  p.build_coarse(0.7);
  const TwoLevelPreconditioner m = TwoLevelPreconditioner::factorize(p.forms, p.decomp, &p.coarse);
  CHECK(operator_identity_deviation(p.mesh, p.space, p.forms, p.decomp, &p.coarse, m, 10, 3) <
        1e-12);

  const SpdProjections proj(p.forms, p.decomp, &p.coarse);
  const CheckReport coer = check_coercivity(p.forms, proj, p.decomp.lambda, p.coarse.theta, 20, 2);
  CHECK(coer.trials == 20);

  const LocalSpdReport spd = check_local_spd(p.forms, p.decomp);
  CHECK(spd.blocks == 16);
  CHECK(spd.floor.passed());

  const FovBounds dense = fov_bounds_dense(p.forms, m);
  const FovBounds sampled = fov_bounds_sampled(p.forms, m, 50, 4);
  CHECK(sampled.c1 >= dense.c1 - 1e-10 * std::abs(dense.c1));
  CHECK(sampled.c2 <= dense.c2 * (1.0 + 1e-10));
  CHECK(dense.c2 > 0.0);
}

TEST_CASE("local SPD floor with small fine subdomains") {
  // n = 32, fine boxes of 2 cells: H^f k < sqrt 2 at k = 5
  testing::SmallProblem p(32, 5.0, 4, 4);
  const LocalSpdReport spd = check_local_spd(p.forms, p.decomp);
  CHECK(spd.hypothesis_blocks == spd.blocks);
  CHECK(spd.positive_blocks == spd.blocks);
  CHECK(spd.min_eigenvalue > 0.0);
  CHECK(spd.positivity.passed());
  CHECK(spd.floor.passed());
}

TEST_CASE("theory report format") {
  TheoryReport rep;
  rep.conditions = evaluate_conditions(10.0, 0.1, 2.0, 2, 1.0);
  CheckReport c{"demo"};
  c.record(1.0, 2.0, 0.0);
  rep.checks.push_back(c);
  std::ostringstream out;
  write_theory_report(out, rep);
  const std::string s = out.str();
  CHECK(s.find("k=10\n") != std::string::npos);
  CHECK(s.find("check.demo.violations=0\n") != std::string::npos);
  CHECK(s.find("check.demo.passed=1\n") != std::string::npos);
}

TEST_CASE("random vectors are reproducible") {
  CHECK(random_vector(5, 1) == random_vector(5, 1));
  CHECK(random_vector(5, 1) != random_vector(5, 2));
}
