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

#include "hkgeneo/schwarz.hpp"

#include <string>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

TwoLevelPreconditioner TwoLevelPreconditioner::factorize(const AssembledForms& forms,
                                                         const TwoLevelDecomposition& decomp,
                                                         const CoarseSpace* coarse,
                                                         double pivot_tol) {
  TwoLevelPreconditioner m;
  m.forms_ = &forms;
  m.n_ = forms.size();
  for (int i = 0; i < decomp.num_coarse(); ++i) {
    for (std::size_t j = 0; j < decomp.fine[i].size(); ++j) {
      LocalSolver s;
      s.coarse = i;
      s.fine = static_cast<int>(j);
      s.sub = &decomp.fine[i][j];
      s.factor = SymmetricIndefiniteFactor(principal_submatrix(forms.helmholtz, s.sub->idof),
                                           pivot_tol);
      if (s.factor.singular())
        fail(ErrorCode::kSingular, "local block (" + std::to_string(i) + ", " +
                                       std::to_string(j) +
                                       ") is singular: k^2 is close to a local eigenvalue");
      s.spd = s.factor.positive_definite();
      m.locals_.push_back(std::move(s));
    }
  }
  if (coarse != nullptr && !coarse->empty()) {
    if (coarse->z.rows() != m.n_) fail(ErrorCode::kInternal, "coarse basis has wrong row count");
    m.z_ = coarse->z;
    m.b0_ = SymmetricIndefiniteFactor(coarse->b0, pivot_tol);
    if (m.b0_.singular())
      fail(ErrorCode::kSingular,
           "coarse matrix Z^T B Z is singular: tau is too small for this decomposition");
    m.coarse_dim_ = coarse->size();
  }
  return m;
}

Vector TwoLevelPreconditioner::apply_local(std::size_t block, const Vector& r) const {
  const LocalSolver& s = locals_.at(block);
  return extend_from(s.factor.solve(restrict_to(r, *s.sub, DofSet::kInterior)), *s.sub,
                     DofSet::kInterior, n_);
}

Vector TwoLevelPreconditioner::apply_one_level(const Vector& r) const {
  if (r.size() != n_) fail(ErrorCode::kInternal, "preconditioner: vector has wrong dimension");
  Vector out = Vector::Zero(n_);
  for (const LocalSolver& s : locals_) {
    const Vector y = s.factor.solve(restrict_to(r, *s.sub, DofSet::kInterior));
    for (std::size_t a = 0; a < s.sub->idof.size(); ++a) out[s.sub->idof[a]] += y[a];
  }
  return out;
}

Vector TwoLevelPreconditioner::apply_coarse(const Vector& r) const {
  if (coarse_dim_ == 0) return Vector::Zero(n_);
  const Vector zr = z_.transpose() * r;
  return z_ * b0_.solve(zr);
}

Vector TwoLevelPreconditioner::apply(const Vector& r) const {
  Vector out = apply_coarse(r);
  out += apply_one_level(r);
  return out;
}

Vector TwoLevelPreconditioner::apply_T(const Vector& u) const {
  return apply(Vector(forms_->helmholtz * u));
}

Vector TwoLevelPreconditioner::apply_local_T(std::size_t block, const Vector& u) const {
  return apply_local(block, Vector(forms_->helmholtz * u));
}

Vector TwoLevelPreconditioner::apply_T0(const Vector& u) const {
  return apply_coarse(Vector(forms_->helmholtz * u));
}

SpdProjections::SpdProjections(const AssembledForms& forms, const TwoLevelDecomposition& decomp,
                               const CoarseSpace* coarse)
    : forms_(&forms) {
  for (const auto& fs : decomp.fine) {
    for (const auto& f : fs) {
      Block b{&f, Eigen::LLT<DenseMatrix>(principal_submatrix(forms.dk, f.idof))};
      if (b.llt.info() != Eigen::Success)
        fail(ErrorCode::kInternal, "local D_k block is not positive definite");
      blocks_.push_back(std::move(b));
    }
  }
  if (coarse != nullptr && !coarse->empty()) {
    z_ = coarse->z;
    const CoarseBasis dz = CoarseBasis(forms.dk * z_);
    gram_.compute(DenseMatrix(z_.transpose() * dz));
    if (gram_.info() != Eigen::Success)
      fail(ErrorCode::kInternal, "coarse Gram matrix Z^T D_k Z is not positive definite");
  }
}

Vector SpdProjections::apply_P0(const Vector& u) const {
  if (z_.cols() == 0) return Vector::Zero(u.size());
  const Vector rhs = z_.transpose() * (forms_->dk * u);
  return z_ * gram_.solve(rhs);
}

Vector SpdProjections::apply_local(std::size_t block, const Vector& u) const {
  const Block& b = blocks_.at(block);
  const Vector du = forms_->dk * u;
  return extend_from(b.llt.solve(restrict_to(du, *b.sub, DofSet::kInterior)), *b.sub,
                     DofSet::kInterior, u.size());
}

Vector SpdProjections::apply_P(const Vector& u) const {
  Vector out = apply_P0(u);
  const Vector du = forms_->dk * u;
  for (const Block& b : blocks_) {
    const Vector y = b.llt.solve(restrict_to(du, *b.sub, DofSet::kInterior));
    for (std::size_t a = 0; a < b.sub->idof.size(); ++a) out[b.sub->idof[a]] += y[a];
  }
  return out;
}

}  // namespace hkgeneo
