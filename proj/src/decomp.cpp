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

#include "hkgeneo/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

namespace {

std::vector<char> membership(const Mesh& mesh, const std::vector<int>& elements) {
  std::vector<char> in(mesh.num_triangles(), 0);
  for (int t : elements) in[t] = 1;
  return in;
}

std::vector<int> to_sorted(const std::vector<char>& in) {
  std::vector<int> out;
  for (int t = 0; t < static_cast<int>(in.size()); ++t)
    if (in[t]) out.push_back(t);
  return out;
}

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

int TwoLevelDecomposition::num_fine() const {
  int total = 0;
  for (const auto& f : fine) total += static_cast<int>(f.size());
  return total;
}

std::vector<int> extend_by_layers(const Mesh& mesh, std::vector<int> base, int layers) {
  std::vector<char> in = membership(mesh, base);
  std::vector<char> touched(mesh.num_vertices(), 0);
  for (int layer = 0; layer < layers; ++layer) {
    std::fill(touched.begin(), touched.end(), 0);
    for (int t = 0; t < mesh.num_triangles(); ++t)
      if (in[t])
        for (int v : mesh.triangles[t]) touched[v] = 1;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (!touched[v]) continue;
      for (int p = mesh.patch_offsets[v]; p < mesh.patch_offsets[v + 1]; ++p)
        in[mesh.patch_elements[p]] = 1;
    }
  }
  return to_sorted(in);
}

Subdomain make_subdomain(const Mesh& mesh, const FeSpace& space, std::vector<int> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  Subdomain sub;
  const std::vector<char> in = membership(mesh, elements);
  std::vector<char> vert(mesh.num_vertices(), 0);
  for (int t : elements)
    for (int v : mesh.triangles[t]) vert[v] = 1;

  std::vector<int> verts;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!vert[v]) continue;
    verts.push_back(v);
    const int d = space.dof_of_vertex[v];
    if (d == FeSpace::kNoDof) continue;
    sub.ovdof.push_back(d);
    bool inside = true;
    for (int p = mesh.patch_offsets[v]; p < mesh.patch_offsets[v + 1]; ++p)
      inside = inside && in[mesh.patch_elements[p]];
    if (inside) sub.idof.push_back(d);
  }
  // Vertices are visited in index order and dofs are lexicographic, so the
  // dof lists come out sorted.
  double d2 = 0.0;
  for (std::size_t a = 0; a < verts.size(); ++a) {
    const Point& p = mesh.vertices[verts[a]];
    for (std::size_t b = a + 1; b < verts.size(); ++b) {
      const Point& q = mesh.vertices[verts[b]];
      d2 = std::max(d2, (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
    }
  }
  sub.diameter = std::sqrt(d2);
  sub.elements = std::move(elements);
  return sub;
}

TwoLevelDecomposition build_two_level(const Mesh& mesh, const FeSpace& space, int coarse_grid,
                                      int fine_grid, int layers_c, int layers_f) {
  const int n = mesh.n_per_side;
  if (coarse_grid < 1 || fine_grid < 1)
    fail(ErrorCode::kConfig, "coarse and fine grid counts must be >= 1");
  if (n % coarse_grid != 0)
    fail(ErrorCode::kConfig, "coarse grid count " + std::to_string(coarse_grid) +
                                 " does not divide n_per_side " + std::to_string(n));
  const int box = n / coarse_grid;
  if (box % fine_grid != 0)
    fail(ErrorCode::kConfig, "fine grid count " + std::to_string(fine_grid) +
                                 " does not divide n_per_side / M = " + std::to_string(box));
  if (layers_c < 0 || layers_f < 0) fail(ErrorCode::kConfig, "layer counts must be >= 0");
  const int fbox = box / fine_grid;

  TwoLevelDecomposition dd;
  dd.coarse_grid = coarse_grid;
  dd.fine_grid = fine_grid;
  dd.layers_c = layers_c;
  dd.layers_f = layers_f;

  for (int bj = 0; bj < coarse_grid; ++bj) {
    for (int bi = 0; bi < coarse_grid; ++bi) {
      std::vector<int> base;
      for (int cj = bj * box; cj < (bj + 1) * box; ++cj)
        for (int ci = bi * box; ci < (bi + 1) * box; ++ci) {
          base.push_back(2 * (cj * n + ci));
          base.push_back(2 * (cj * n + ci) + 1);
        }
      Subdomain coarse = make_subdomain(mesh, space, extend_by_layers(mesh, base, layers_c));
      const std::vector<char> in_coarse = membership(mesh, coarse.elements);

      std::vector<std::vector<int>> groups(fine_grid * fine_grid);
      for (int t : coarse.elements) {
        const auto [ci, cj] = mesh.cell_of(t);
        const int fx = std::clamp(floor_div(ci - bi * box, fbox), 0, fine_grid - 1);
        const int fy = std::clamp(floor_div(cj - bj * box, fbox), 0, fine_grid - 1);
        groups[fy * fine_grid + fx].push_back(t);
      }
      std::vector<Subdomain> fines;
      for (auto& g : groups) {
        std::vector<int> ext = extend_by_layers(mesh, std::move(g), layers_f);
        std::vector<int> clipped;
        for (int t : ext)
          if (in_coarse[t]) clipped.push_back(t);
        if (clipped.empty()) fail(ErrorCode::kConfig, "empty fine subdomain");
        fines.push_back(make_subdomain(mesh, space, std::move(clipped)));
      }
      dd.coarse.push_back(std::move(coarse));
      dd.fine.push_back(std::move(fines));
    }
  }

  dd.coarse_multiplicity.assign(space.n_dofs, 0);
  dd.fine_multiplicity.assign(space.n_dofs, 0);
  for (const auto& c : dd.coarse)
    for (int d : c.idof) ++dd.coarse_multiplicity[d];
  for (const auto& fs : dd.fine)
    for (const auto& f : fs)
      for (int d : f.idof) ++dd.fine_multiplicity[d];
  for (int d = 0; d < space.n_dofs; ++d) {
    if (dd.coarse_multiplicity[d] < 1 || dd.fine_multiplicity[d] < 1)
      fail(ErrorCode::kConfig, "decomposition leaves dof " + std::to_string(d) +
                                   " uncovered; use at least one overlap layer");
  }

  for (const auto& c : dd.coarse) {
    Vector w = Vector::Zero(static_cast<Eigen::Index>(c.ovdof.size()));
    std::size_t p = 0;
    for (std::size_t a = 0; a < c.ovdof.size(); ++a) {
      if (p < c.idof.size() && c.idof[p] == c.ovdof[a]) {
        w[a] = 1.0 / dd.coarse_multiplicity[c.ovdof[a]];
        ++p;
      }
    }
    dd.coarse_pou.push_back(std::move(w));
    dd.hc = std::max(dd.hc, c.diameter);
  }
  std::vector<int> cover(mesh.num_triangles(), 0);
  for (const auto& fs : dd.fine) {
    std::vector<Vector> ws;
    for (const auto& f : fs) {
      Vector w(static_cast<Eigen::Index>(f.idof.size()));
      for (std::size_t a = 0; a < f.idof.size(); ++a)
        w[a] = 1.0 / dd.fine_multiplicity[f.idof[a]];
      ws.push_back(std::move(w));
      for (int t : f.elements) ++cover[t];
      dd.hf = std::max(dd.hf, f.diameter);
    }
    dd.fine_pou.push_back(std::move(ws));
  }
  dd.lambda = *std::max_element(cover.begin(), cover.end());
  return dd;
}

Vector restrict_to(const Vector& v, const Subdomain& sub, DofSet set) {
  const auto& dofs = set == DofSet::kOverlap ? sub.ovdof : sub.idof;
  if (!dofs.empty() && dofs.back() >= v.size())
    fail(ErrorCode::kInternal, "restrict: global vector has wrong dimension");
  Vector out(static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t a = 0; a < dofs.size(); ++a) out[a] = v[dofs[a]];
  return out;
}

Vector extend_from(const Vector& local, const Subdomain& sub, DofSet set, Eigen::Index n) {
  const auto& dofs = set == DofSet::kOverlap ? sub.ovdof : sub.idof;
  if (local.size() != static_cast<Eigen::Index>(dofs.size()) ||
      (!dofs.empty() && dofs.back() >= n))
    fail(ErrorCode::kInternal, "extend: local vector has wrong dimension");
  Vector out = Vector::Zero(n);
  for (std::size_t a = 0; a < dofs.size(); ++a) out[dofs[a]] = local[a];
  return out;
}

void dump_subdomains(std::ostream& out, const TwoLevelDecomposition& decomp) {
  for (int i = 0; i < decomp.num_coarse(); ++i) {
    out << "c " << i << " :";
    for (int t : decomp.coarse[i].elements) out << ' ' << t;
    out << '\n';
  }
  for (int i = 0; i < decomp.num_coarse(); ++i) {
    for (std::size_t j = 0; j < decomp.fine[i].size(); ++j) {
      out << "f " << i << ' ' << j << " :";
      for (int t : decomp.fine[i][j].elements) out << ' ' << t;
      out << '\n';
    }
  }
}

}  // namespace hkgeneo
