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

/// \file eigencoarse.hpp
/// \brief Local indefinite eigenproblems and the spectral coarse space.
///
/// On every coarse subdomain the pencil
///
///     b_i(p, v) = lambda (W p, W v)_{1,k,i}      for all v in the ovdof space
///
/// is solved, where b_i is the Neumann-assembled Helmholtz form and W the
/// coarse partition of unity. The left side is indefinite; the right side is
/// only semidefinite (W vanishes on the subdomain boundary layer). Modes with
/// lambda below a threshold are weighted by W, extended by zero and collected
/// into the coarse basis Z.

#ifndef HKGENEO_EIGENCOARSE_HPP
#define HKGENEO_EIGENCOARSE_HPP

#include <Eigen/SparseCore>
#include <iosfwd>
#include <span>
#include <vector>

#include "hkgeneo/assembly.hpp"
#include "hkgeneo/decomp.hpp"

namespace hkgeneo {

struct LocalGevp {
  int subdomain = 0;
  std::vector<int> dofs;  // ovdof of the coarse subdomain
  Vector weights;         // diagonal of W
  DenseMatrix b;          // local Helmholtz form
  DenseMatrix dk;         // local (.,.)_{1,k} form
  DenseMatrix c;          // W dk W
};

LocalGevp assemble_local_gevp(int i, const Mesh& mesh, const FeSpace& space,
                              const AssembledForms& forms, const TwoLevelDecomposition& decomp);

struct GevpOptions {
  double initial_shift = 0.0;  // gamma of the first attempt
  int max_attempts = 40;
  double pivot_tol = 1e-12;    // relative pivot threshold for B + gamma C
  double rank_tol = 1e-12;     // relative threshold for range(C) and mu != 0
  double residual_tol = 1e-6;  // hard failure bound on relative residuals
};

struct LocalGevpResult {
  Vector eigenvalues;        // finite, ascending
  DenseMatrix eigenvectors;  // columns, p^T C p = 1
  int n_nonpositive = 0;
  int n_kernel = 0;          // algebraic multiplicity of the infinite eigenvalue
  double shift_gamma = 0.0;
  double max_residual = 0.0;  // max relative residual over the finite pairs

  int n_finite() const { return static_cast<int>(eigenvalues.size()); }
};

/// Shift-and-invert construction: find gamma with B + gamma C invertible
/// (doubling from `initial_shift`), then diagonalize the symmetric matrix
/// L^T (B + gamma C)^{-1} L with C = L L^T. Its nonzero eigenvalues mu give
/// lambda = 1/mu - gamma, with eigenvectors p = (B + gamma C)^{-1} L y / mu.
/// Throws kEigensolve if no admissible gamma is found or a residual check
/// fails.
LocalGevpResult solve_indefinite_gevp(const DenseMatrix& b, const DenseMatrix& c,
                                      const GevpOptions& options = {});

/// Same, with the default initial shift 2 k^2.
LocalGevpResult solve_local_gevp(const LocalGevp& gevp, double k, GevpOptions options = {});

/// Smallest singular value of the stacked matrix [B; C]; zero iff
/// ker B and ker C intersect nontrivially.
double stacked_min_singular_value(const DenseMatrix& b, const DenseMatrix& c);

struct ModeSelection {
  std::vector<int> counts;    // m_i
  std::vector<int> overflow;  // subdomains where every finite mode was taken
  double tau_target = 0.0;
  double tau = 0.0;           // min_i lambda^i_{m_i + 1}; +inf if all overflow
  double theta = 0.0;         // 1 / tau

  int total() const;
};

/// m_i = #{lambda < tau_target}. `caps`, when non-empty, bounds m_i per
/// subdomain (kConfig error when exceeded). Throws kConfig for
/// tau_target <= 0.
ModeSelection select_modes(std::span<const LocalGevpResult> results, double tau_target,
                           std::span<const int> caps = {});

using CoarseBasis = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct CoarseSpace {
  CoarseBasis z;                 // n x m
  std::vector<int> selected;     // m_i before filtering
  std::vector<int> counts;       // columns kept per subdomain
  std::vector<int> owner;        // subdomain of each column
  std::vector<int> mode;         // eigenpair index of each column
  int dropped = 0;               // linearly dependent columns removed
  double tau = 0.0;
  double theta = 0.0;
  DenseMatrix b0;                // Z^T B Z

  int size() const { return static_cast<int>(z.cols()); }
  bool empty() const { return z.cols() == 0; }
};

CoarseSpace build_coarse_space(std::span<const LocalGevpResult> results,
                               const ModeSelection& selection,
                               const TwoLevelDecomposition& decomp,
                               const AssembledForms& forms);

/// CSV with header "subdomain,index,lambda,selected"; index is 1-based.
void write_spectrum_csv(std::ostream& out, std::span<const LocalGevpResult> results,
                        const ModeSelection& selection);

}  // namespace hkgeneo

#endif  // HKGENEO_EIGENCOARSE_HPP
