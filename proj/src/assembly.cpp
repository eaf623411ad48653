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

#include "hkgeneo/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

CoefficientField make_coefficient(const Mesh& mesh, CoefficientKind kind, double contrast) {
  if (!(contrast >= 1.0)) fail(ErrorCode::kConfig, "coefficient contrast must be >= 1");
  CoefficientField field;
  field.kind = kind;
  field.contrast = kind == CoefficientKind::kConstant ? 1.0 : contrast;
  field.per_element_value.resize(mesh.num_triangles(), 1.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.centroid(t);
    bool high = false;
    switch (kind) {
      case CoefficientKind::kConstant:
        break;
      case CoefficientKind::kCheckerboard:
        high = (static_cast<int>(4.0 * c.x) + static_cast<int>(4.0 * c.y)) % 2 == 1;
        break;
      case CoefficientKind::kChannels:
        high = static_cast<int>(8.0 * c.y) % 2 == 1;
        break;
    }
    if (high) field.per_element_value[t] = field.contrast;
  }
  return field;
}

CoefficientKind parse_coefficient_kind(const std::string& name) {
  if (name == "constant") return CoefficientKind::kConstant;
  if (name == "checkerboard") return CoefficientKind::kCheckerboard;
  if (name == "channels") return CoefficientKind::kChannels;
  fail(ErrorCode::kConfig, "unknown coefficient kind '" + name + "'");
}

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::kConstant:
      return "constant";
    case CoefficientKind::kCheckerboard:
      return "checkerboard";
    case CoefficientKind::kChannels:
      return "channels";
  }
  return "constant";
}

Mat3 p1_stiffness(const std::array<Point, 3>& p, double a) {
  // grad(lambda_i) = perp(edge opposite i) / (2 area)
  const double area =
      0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
  std::array<double, 3> gx{}, gy{};
  for (int i = 0; i < 3; ++i) {
    const Point& q1 = p[(i + 1) % 3];
    const Point& q2 = p[(i + 2) % 3];
    gx[i] = (q1.y - q2.y) / (2.0 * area);
    gy[i] = (q2.x - q1.x) / (2.0 * area);
  }
  Mat3 k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = a * std::abs(area) * (gx[i] * gx[j] + gy[i] * gy[j]);
  return k;
}

Mat3 p1_mass(const std::array<Point, 3>& p) {
  const double area = std::abs(
      0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y)));
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  return m;
}

AssembledForms assemble_forms(const Mesh& mesh, const FeSpace& space,
                              const CoefficientField& coeff, double k) {
  if (!(k > 0.0)) fail(ErrorCode::kConfig, "wavenumber k must be positive");
  if (static_cast<int>(coeff.per_element_value.size()) != mesh.num_triangles())
    fail(ErrorCode::kConfig, "coefficient field does not match the mesh");

  std::vector<Eigen::Triplet<double>> ta, ts;
  ta.reserve(9 * mesh.num_triangles());
  ts.reserve(9 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto corners = mesh.corners(t);
    const Mat3 ke = p1_stiffness(corners, coeff.per_element_value[t]);
    const Mat3 me = p1_mass(corners);
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      const int r = space.dof_of_vertex[tri[a]];
      if (r == FeSpace::kNoDof) continue;
      for (int b = 0; b < 3; ++b) {
        const int c = space.dof_of_vertex[tri[b]];
        if (c == FeSpace::kNoDof) continue;
        ta.emplace_back(r, c, ke[a][b]);
        ts.emplace_back(r, c, me[a][b]);
      }
    }
  }
  AssembledForms forms;
  forms.k = k;
  forms.element_coeff = coeff.per_element_value;
  const int n = space.n_dofs;
  forms.stiffness.resize(n, n);
  forms.mass.resize(n, n);
  forms.stiffness.setFromTriplets(ta.begin(), ta.end());
  forms.mass.setFromTriplets(ts.begin(), ts.end());
  const double k2 = k * k;
  forms.helmholtz = forms.stiffness - k2 * forms.mass;
  forms.dk = forms.stiffness + k2 * forms.mass;
  forms.stiffness.makeCompressed();
  forms.mass.makeCompressed();
  forms.helmholtz.makeCompressed();
  forms.dk.makeCompressed();
  return forms;
}

Vector assemble_rhs(const Mesh& mesh, const FeSpace& space,
                    const std::function<double(Point)>& f) {
  Vector rhs = Vector::Zero(space.n_dofs);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.corners(t);
    const double w = std::abs(mesh.signed_area(t)) / 3.0;
    // Midpoint m_e of the edge opposite vertex e; phi_a(m_e) = 1/2 for a != e.
    std::array<double, 3> fm{};
    for (int e = 0; e < 3; ++e) {
      const Point& q1 = p[(e + 1) % 3];
      const Point& q2 = p[(e + 2) % 3];
      fm[e] = f({0.5 * (q1.x + q2.x), 0.5 * (q1.y + q2.y)});
    }
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      const int r = space.dof_of_vertex[tri[a]];
      if (r == FeSpace::kNoDof) continue;
      double s = 0.0;
      for (int e = 0; e < 3; ++e)
        if (e != a) s += 0.5 * fm[e];
      rhs[r] += w * s;
    }
  }
  return rhs;
}

double bform(const AssembledForms& forms, const Vector& u, const Vector& v) {
  return u.dot(forms.helmholtz * v);
}

double norm_1k(const AssembledForms& forms, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(forms.dk * v)));
}

LocalForms assemble_local(const Mesh& mesh, const FeSpace& space, const AssembledForms& forms,
                          std::span<const int> elements, std::span<const int> dofs) {
  std::unordered_map<int, int> local;
  local.reserve(dofs.size() * 2);
  for (std::size_t i = 0; i < dofs.size(); ++i) local.emplace(dofs[i], static_cast<int>(i));
  const auto m = static_cast<Eigen::Index>(dofs.size());
  LocalForms out{DenseMatrix::Zero(m, m), DenseMatrix::Zero(m, m), DenseMatrix::Zero(m, m)};
  DenseMatrix stiff = DenseMatrix::Zero(m, m);
  for (int t : elements) {
    const auto corners = mesh.corners(t);
    const Mat3 ke = p1_stiffness(corners, forms.element_coeff[t]);
    const Mat3 me = p1_mass(corners);
    std::array<int, 3> li{};
    for (int a = 0; a < 3; ++a) {
      const int d = space.dof_of_vertex[mesh.triangles[t][a]];
      auto it = d == FeSpace::kNoDof ? local.end() : local.find(d);
      li[a] = it == local.end() ? -1 : it->second;
    }
    for (int a = 0; a < 3; ++a) {
      if (li[a] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        if (li[b] < 0) continue;
        stiff(li[a], li[b]) += ke[a][b];
        out.mass(li[a], li[b]) += me[a][b];
      }
    }
  }
  const double k2 = forms.k * forms.k;
  out.helmholtz = stiff - k2 * out.mass;
  out.dk = stiff + k2 * out.mass;
  return out;
}

DenseMatrix principal_submatrix(const SparseSymMatrix& m, std::span<const int> dofs) {
  std::unordered_map<int, int> local;
  local.reserve(dofs.size() * 2);
  for (std::size_t i = 0; i < dofs.size(); ++i) local.emplace(dofs[i], static_cast<int>(i));
  const auto n = static_cast<Eigen::Index>(dofs.size());
  DenseMatrix out = DenseMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (SparseSymMatrix::InnerIterator it(m, dofs[i]); it; ++it) {
      auto found = local.find(static_cast<int>(it.col()));
      if (found != local.end()) out(i, found->second) = it.value();
    }
  }
  return out;
}

void write_matrix_market(std::ostream& out, const SparseSymMatrix& m) {
  long nnz = 0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseSymMatrix::InnerIterator it(m, r); it; ++it)
      if (it.col() <= r) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseSymMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() > r) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      out << (r + 1) << ' ' << (it.col() + 1) << ' ' << buf << '\n';
    }
  }
}

}  // namespace hkgeneo
