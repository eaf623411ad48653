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

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hkgeneo/error.hpp"
#include "support.hpp"

using namespace hkgeneo;

namespace {

// Gradients of the barycentric coordinates from the 3x3 Vandermonde system.
Eigen::Matrix<double, 3, 2> oracle_gradients(const std::array<Point, 3>& p) {
  Eigen::Matrix3d v;
  for (int a = 0; a < 3; ++a) v.row(a) << 1.0, p[a].x, p[a].y;
  const Eigen::Matrix3d coef = v.inverse();  // column a: coefficients of phi_a
  Eigen::Matrix<double, 3, 2> g;
  for (int a = 0; a < 3; ++a) g.row(a) << coef(1, a), coef(2, a);
  return g;
}

double oracle_area(const std::array<Point, 3>& p) {
  return 0.5 * std::abs((p[1].x - p[0].x) * (p[2].y - p[0].y) -
                        (p[2].x - p[0].x) * (p[1].y - p[0].y));
}

std::array<Point, 3> random_triangle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    std::array<Point, 3> p{Point{u(rng), u(rng)}, Point{u(rng), u(rng)}, Point{u(rng), u(rng)}};
    if (oracle_area(p) > 0.05) return p;
  }
}

}  // namespace

TEST_CASE("mesh counts, orientation and areas") {
  const Mesh mesh = build_unit_square_mesh(6);
  CHECK(mesh.num_vertices() == 49);
  CHECK(mesh.num_triangles() == 72);
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    CHECK(mesh.signed_area(t) > 0.0);
    CHECK(mesh.signed_area(t) == doctest::Approx(1.0 / 72.0).epsilon(1e-14));
    total += mesh.signed_area(t);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mesh.h == doctest::Approx(std::sqrt(2.0) / 6.0));
  int boundary = 0;
  for (auto b : mesh.boundary_vertex) boundary += b;
  CHECK(boundary == 24);
  const FeSpace space = build_fe_space(mesh);
  CHECK(space.n_dofs == 25);
  for (int d = 0; d < space.n_dofs; ++d)
    CHECK(space.dof_of_vertex[space.vertex_of_dof[d]] == d);
  // every interior vertex has the 6-triangle patch of this triangulation
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.boundary_vertex[v]) CHECK(mesh.patch(v).size() == 6);
  CHECK_THROWS_AS(build_unit_square_mesh(1), Error);
}

TEST_CASE("element matrices against a Vandermonde and midpoint quadrature oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = random_triangle(rng);
    const double area = oracle_area(p);
    const auto g = oracle_gradients(p);
    const double coeff = 0.5 + trial;
    const Mat3 k = p1_stiffness(p, coeff);
    const Mat3 m = p1_mass(p);
    // edge-midpoint rule is exact for the quadratic products phi_a phi_b
    const double mids[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double ks = coeff * area * g.row(a).dot(g.row(b));
        CHECK(k[a][b] == doctest::Approx(ks).epsilon(1e-12));
        double ms = 0.0;
        for (const auto& w : mids) ms += w[a] * w[b];
        CHECK(m[a][b] == doctest::Approx(area / 3.0 * ms).epsilon(1e-12));
      }
  }
}

TEST_CASE("global matrices: five-point stiffness, symmetry and the Helmholtz combinations") {
  const int n = 8;
  const double k = 3.5;
  testing::SmallProblem p(n, k, 1, 1);
  const DenseMatrix a = testing::dense(p.forms.stiffness);
  const DenseMatrix s = testing::dense(p.forms.mass);
  const DenseMatrix b = testing::dense(p.forms.helmholtz);
  const DenseMatrix d = testing::dense(p.forms.dk);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((b - (a - k * k * s)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((d - (a + k * k * s)).cwiseAbs().maxCoeff() < 1e-12);
  // Right triangles with legs along the axes give the 5-point Laplacian.
  for (int dof = 0; dof < p.space.n_dofs; ++dof) {
    const int v = p.space.vertex_of_dof[dof];
    const int i = v % (n + 1), j = v / (n + 1);
    CHECK(a(dof, dof) == doctest::Approx(4.0));
    for (int e = 0; e < p.space.n_dofs; ++e) {
      if (e == dof) continue;
      const int w = p.space.vertex_of_dof[e];
      const int di = std::abs(w % (n + 1) - i), dj = std::abs(w / (n + 1) - j);
      const double expected = di + dj == 1 ? -1.0 : 0.0;
      CHECK(a(dof, e) == doctest::Approx(expected).epsilon(1e-12));
    }
    // mass row sum of an interior-patch vertex = integral of its hat = h^2
    const double cell = 1.0 / n;
    bool interior_patch = i > 1 && j > 1 && i < n - 1 && j < n - 1;
    if (interior_patch) CHECK(s.row(dof).sum() == doctest::Approx(cell * cell).epsilon(1e-12));
  }
}

TEST_CASE("load vector for f = 1 equals h^2 at interior vertices") {
  const int n = 10;
  const Mesh mesh = build_unit_square_mesh(n);
  const FeSpace space = build_fe_space(mesh);
  const Vector f = assemble_rhs(mesh, space, [](Point) { return 1.0; });
  for (int d = 0; d < space.n_dofs; ++d)
    CHECK(f[d] == doctest::Approx(1.0 / (n * n)).epsilon(1e-12));
  // linear f is integrated exactly: sum_d f_d is the integral of x times the
  // interior hat sum; compare with mass-matrix action on the nodal values
  const AssembledForms forms = assemble_forms(
      mesh, space, make_coefficient(mesh, CoefficientKind::kConstant, 1.0), 1.0);
  Vector nodal(space.n_dofs);
  for (int d = 0; d < space.n_dofs; ++d) nodal[d] = mesh.vertices[space.vertex_of_dof[d]].x;
  const Vector lin = assemble_rhs(mesh, space, [](Point q) { return q.x; });
  // rows away from the boundary see only interior vertices in their patch
  const Vector sm = forms.mass * nodal;
  for (int d = 0; d < space.n_dofs; ++d) {
    const Point q = mesh.vertices[space.vertex_of_dof[d]];
    if (q.x > 0.15 && q.x < 0.85 && q.y > 0.15 && q.y < 0.85)
      CHECK(lin[d] == doctest::Approx(sm[d]).epsilon(1e-10));
  }
}

TEST_CASE("bform, the (1,k) norm and the discrete Friedrichs bound") {
  testing::SmallProblem p(12, 4.0, 1, 1);
  const Vector u = random_vector(p.forms.size(), 3);
  const Vector v = random_vector(p.forms.size(), 4);
  CHECK(bform(p.forms, u, v) == doctest::Approx(u.dot(p.forms.helmholtz * v)).epsilon(1e-13));
  CHECK(bform(p.forms, u, v) == doctest::Approx(bform(p.forms, v, u)).epsilon(1e-13));
  const double n2 = norm_1k(p.forms, u);
  CHECK(n2 * n2 == doctest::Approx(u.dot(p.forms.dk * u)).epsilon(1e-13));
  // conforming P1 eigenvalues lie above the continuous 2 pi^2
  const Vector lam = pencil_eigenvalues(p.forms);
  CHECK(lam[0] >= 2.0 * std::numbers::pi * std::numbers::pi);
  CHECK(lam[0] < 1.05 * 2.0 * std::numbers::pi * std::numbers::pi);
}

TEST_CASE("local assembly on the whole domain reproduces the global matrices") {
  testing::SmallProblem p(6, 2.0, 1, 1);
  std::vector<int> all(p.mesh.num_triangles()), dofs(p.space.n_dofs);
  std::iota(all.begin(), all.end(), 0);
  std::iota(dofs.begin(), dofs.end(), 0);
  const LocalForms lf = assemble_local(p.mesh, p.space, p.forms, all, dofs);
  CHECK((lf.helmholtz - testing::dense(p.forms.helmholtz)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((lf.dk - testing::dense(p.forms.dk)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((lf.mass - testing::dense(p.forms.mass)).cwiseAbs().maxCoeff() < 1e-13);
  const DenseMatrix sub = principal_submatrix(p.forms.helmholtz, std::vector<int>{0, 3, 7});
  CHECK(sub(1, 2) == doctest::Approx(testing::dense(p.forms.helmholtz)(3, 7)));
}

TEST_CASE("coefficient fields") {
  const Mesh mesh = build_unit_square_mesh(8);
  const auto c = make_coefficient(mesh, CoefficientKind::kCheckerboard, 100.0);
  double lo = 1e300, hi = 0.0;
  for (double x : c.per_element_value) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(100.0));
  CHECK(parse_coefficient_kind(to_string(CoefficientKind::kChannels)) ==
        CoefficientKind::kChannels);
  CHECK_THROWS_AS(parse_coefficient_kind("marble"), Error);
}

TEST_CASE("Matrix Market export") {
  testing::SmallProblem p(4, 1.0, 1, 1);
  std::ostringstream out;
  write_matrix_market(out, p.forms.stiffness);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("%%MatrixMarket matrix coordinate real", 0) == 0);
  std::string line;
  while (std::getline(in, line) && line[0] == '%') {
  }
  std::istringstream dims(line);
  int rows = 0, cols = 0, nnz = 0;
  dims >> rows >> cols >> nnz;
  CHECK(rows == 9);
  CHECK(cols == 9);
  CHECK(nnz > 0);
}
