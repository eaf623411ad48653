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

/// \file schwarz.hpp
/// \brief Additive Schwarz preconditioners and the analysis operators T, P.
///
///     M1^{-1} = sum_{i,j} E_ij (B^f_ij)^{-1} R_ij
///     M2^{-1} = Z B0^{-1} Z^T + M1^{-1}
///
/// Local blocks B^f_ij = R_ij B E_ij live on the fine interior dofs, so the
/// local problems carry homogeneous Dirichlet data on the fine boundary.

#ifndef HKGENEO_SCHWARZ_HPP
#define HKGENEO_SCHWARZ_HPP

#include <Eigen/Cholesky>
#include <vector>

#include "hkgeneo/assembly.hpp"
#include "hkgeneo/decomp.hpp"
#include "hkgeneo/eigencoarse.hpp"

namespace hkgeneo {

struct LocalSolver {
  int coarse = 0;  // i
  int fine = 0;    // j
  const Subdomain* sub = nullptr;
  SymmetricIndefiniteFactor factor;
  bool spd = false;
};

class TwoLevelPreconditioner {
 public:
  /// Factorizes every fine block and, when `coarse` is non-null and
  /// non-empty, B0. Throws kSingular naming the offending block.
  /// `forms` and `decomp` must outlive the preconditioner.
  static TwoLevelPreconditioner factorize(const AssembledForms& forms,
                                          const TwoLevelDecomposition& decomp,
                                          const CoarseSpace* coarse,
                                          double pivot_tol = 1e-12);

  Eigen::Index size() const { return n_; }
  bool has_coarse() const { return coarse_dim_ > 0; }
  int coarse_dimension() const { return coarse_dim_; }
  const std::vector<LocalSolver>& local_solvers() const { return locals_; }

  Vector apply(const Vector& r) const;
  Vector apply_one_level(const Vector& r) const;
  Vector apply_coarse(const Vector& r) const;
  /// E_ij (B^f_ij)^{-1} R_ij r for the block with flat index `block`.
  Vector apply_local(std::size_t block, const Vector& r) const;

  /// T u = M2^{-1} B u.
  Vector apply_T(const Vector& u) const;
  /// T^f_ij u = E (B^f)^{-1} R B u.
  Vector apply_local_T(std::size_t block, const Vector& u) const;
  /// T_0 u = Z B0^{-1} Z^T B u (zero without coarse space).
  Vector apply_T0(const Vector& u) const;

 private:
  const AssembledForms* forms_ = nullptr;
  Eigen::Index n_ = 0;
  std::vector<LocalSolver> locals_;
  CoarseBasis z_;
  SymmetricIndefiniteFactor b0_;
  int coarse_dim_ = 0;
};

/// (.,.)_{1,k}-orthogonal projections onto the local and coarse spaces:
///
///     P0 u   = Z (Z^T D_k Z)^{-1} Z^T D_k u
///     P^f u  = E (R D_k E)^{-1} R D_k u
///     P      = P0 + sum P^f
class SpdProjections {
 public:
  SpdProjections(const AssembledForms& forms, const TwoLevelDecomposition& decomp,
                 const CoarseSpace* coarse);

  std::size_t num_blocks() const { return blocks_.size(); }
  Vector apply_P(const Vector& u) const;
  Vector apply_P0(const Vector& u) const;
  Vector apply_local(std::size_t block, const Vector& u) const;

 private:
  struct Block {
    const Subdomain* sub;
    Eigen::LLT<DenseMatrix> llt;
  };
  const AssembledForms* forms_ = nullptr;
  std::vector<Block> blocks_;
  CoarseBasis z_;
  Eigen::LLT<DenseMatrix> gram_;
};

}  // namespace hkgeneo

#endif  // HKGENEO_SCHWARZ_HPP
