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

/// \file analysis.hpp
/// \brief Numerical checks of the convergence theory.
///
/// Every inequality check evaluates lhs <= rhs on a set of trial vectors and
/// counts a violation when lhs > rhs + 1e-9 * scale, where scale is
/// |lhs| + |rhs| + (squared norm of the trial vector). Margins are reported
/// as (rhs - lhs) / scale so that the worst trial is comparable across
/// checks. Violations never throw; they are returned with a witness index.

#ifndef HKGENEO_ANALYSIS_HPP
#define HKGENEO_ANALYSIS_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hkgeneo/assembly.hpp"
#include "hkgeneo/decomp.hpp"
#include "hkgeneo/eigencoarse.hpp"
#include "hkgeneo/schwarz.hpp"

namespace hkgeneo {

inline constexpr double kCheckSlack = 1e-9;

struct CheckReport {
  std::string name;
  bool applicable = true;  // false when the hypothesis of the estimate fails
  int trials = 0;
  int violations = 0;
  double worst_margin = 0.0;
  int witness = -1;        // trial index of the worst margin
  double slack = kCheckSlack;

  bool passed() const { return violations == 0; }
  /// Records one trial of lhs <= rhs.
  void record(double lhs, double rhs, double norm_scale);
};

// ---------------------------------------------------------------- stability

/// Eigenvalues of the pencil A x = lambda S x (dense; ascending).
Vector pencil_eigenvalues(const AssembledForms& forms);

/// max_j sqrt(lambda_j + k^2) / |lambda_j - k^2|. Throws kSingular when
/// k^2 is within 1e-10 (relative) of some lambda_j.
double cstab_from_eigenvalues(const Vector& lambda, double k);

/// The eigenvalues of A x = lambda S x closest to k^2 from below and above
/// (NaN when absent), by shift-invert Lanczos about k^2.
std::pair<double, double> pencil_eigenvalues_around(const AssembledForms& forms);

/// Same value as cstab_from_eigenvalues on the full spectrum: the ratio is
/// increasing below k^2 and decreasing above it, so only the two eigenvalues
/// bracketing k^2 matter.
double estimate_cstab(const AssembledForms& forms);

// -------------------------------------------------------------- conditions

struct Conditions {
  double k = 0.0;
  double hf = 0.0;
  double tau = 0.0;
  int lambda = 1;
  double cstab = 0.0;

  double theta = 0.0;
  double s = std::numeric_limits<double>::infinity();  // unset: not applicable
  double gamma = 0.0;   // (1 - s) / ((2 + 3 L^4 theta)(18 + 8 L^3)); <= 0 if s >= 1
  double c1 = 0.0;      // (1 - s) / (2 + 3 L^4 theta)
  double c2 = 0.0;      // 18 + 8 L^3
  double hf_k = 0.0;
  double tau_ratio = 0.0;  // (1 + cstab)^2 k^2 / tau
  double c_small_lhs = 0.0;  // 2 L^2 (2 + 3 L^4 C)(2 sqrt(C) + 3 C), C = max(hf_k, tau_ratio)
  double t0_lhs = 0.0;       // 2 k L^2 theta^{1/2} (1 + cstab)

  bool theorem_applicable() const { return s < 1.0; }
  bool c_small_holds() const { return c_small_lhs < 1.0; }
  bool t0_stable() const { return t0_lhs <= 0.5; }
};

/// Pure function of its inputs. tau = +inf gives theta = 0.
Conditions evaluate_conditions(double k, double hf, double tau, int lambda, double cstab);

// ------------------------------------------------------------- local checks

/// Checks of the projector w = v - Pi v on one coarse subdomain, with
/// Pi v = sum_{l <= m} c(v, p_l) p_l (the coefficient -b(v, p_l) on
/// nonpositive modes coincides with c(v, p_l) once those modes are scaled
/// to b(p, p) = -1). Returns three reports: 0 <= b(w,w), b(w,w) <= |v|^2,
/// c(w,w) <= b(w,w) / lambda_{m+1}. Requires m < number of finite modes
/// for the last one (reported as not applicable otherwise).
std::vector<CheckReport> check_projector(const LocalGevp& gevp, const LocalGevpResult& result,
                                         int m, int trials, std::uint64_t seed);

/// Projector image Pi v on the coarse ovdof space.
Vector apply_local_projector(const LocalGevp& gevp, const LocalGevpResult& result, int m,
                             const Vector& v);

struct DecompositionPieces {
  Vector z0;
  std::vector<Vector> zf;  // global extensions E z^f, flat block order
};

/// z0 = sum E Xi^f R^f (Pi v|_i) and z^f = Xi^f R^f (v|_i - Pi v|_i).
DecompositionPieces decompose(const Vector& v, const TwoLevelDecomposition& decomp,
                              std::span<const LocalGevp> gevps,
                              std::span<const LocalGevpResult> results,
                              std::span<const int> counts);

/// Checks sum |z^f|^2 <= L^2 Theta |v|^2, |v - z0|^2 <= L^4 Theta |v|^2,
/// |v - P0 v|^2 <= L^4 Theta |v|^2 (when `proj` is non-null) and the stable
/// decomposition bound (2 + 3 L^4 Theta). A reconstruction mismatch above
/// 1e-12 throws kInternal.
std::vector<CheckReport> check_decomposition_bounds(
    const AssembledForms& forms, const TwoLevelDecomposition& decomp,
    std::span<const LocalGevp> gevps, std::span<const LocalGevpResult> results,
    const ModeSelection& selection, const SpdProjections* proj, int trials, std::uint64_t seed);

/// |u|^2 <= (2 + 3 L^4 Theta) (P u, u)_{1,k}.
CheckReport check_coercivity(const AssembledForms& forms, const SpdProjections& proj, int lambda,
                             double theta, int trials, std::uint64_t seed);

/// <M^{-1} B u, v>_{D_k} against (T u, v)_{1,k} with T = T_0 + sum T^f built
/// from independently assembled local problems. Returns the largest
/// relative deviation over `trials` pairs.
double operator_identity_deviation(const Mesh& mesh, const FeSpace& space,
                                   const AssembledForms& forms,
                                   const TwoLevelDecomposition& decomp,
                                   const CoarseSpace* coarse,
                                   const TwoLevelPreconditioner& precond, int trials,
                                   std::uint64_t seed);

struct LocalSpdReport {
  int blocks = 0;
  int hypothesis_blocks = 0;   // blocks with H_ij k < sqrt(2)
  int positive_blocks = 0;
  double min_eigenvalue = 0.0;  // over hypothesis blocks
  CheckReport positivity;      // min eig > 0 where the hypothesis holds
  CheckReport floor;           // lambda_min(B^f, S^f) >= (2 - H^2 k^2) / H^2, all blocks
};

LocalSpdReport check_local_spd(const AssembledForms& forms, const TwoLevelDecomposition& decomp);

/// |T^f u|_{1,k} <= 2 |u|_{1,k,fine} on blocks with H_ij k <= sqrt(2)/2.
CheckReport check_local_t_stability(const Mesh& mesh, const FeSpace& space,
                                    const AssembledForms& forms,
                                    const TwoLevelDecomposition& decomp,
                                    const TwoLevelPreconditioner& precond, int trials,
                                    std::uint64_t seed);

/// |u - T_0 u|_{1,k} <= 2 |u|_{1,k}; applicable when cond.t0_stable().
CheckReport check_coarse_t_stability(const AssembledForms& forms,
                                     const TwoLevelPreconditioner& precond,
                                     const Conditions& cond, int trials, std::uint64_t seed);

// --------------------------------------------------------- field of values

struct FovBounds {
  double c1 = 0.0;  // min (T u, u)_{1,k} / |u|^2
  double c2 = 0.0;  // max |T u|^2 / |u|^2
  bool dense = true;
};

/// Assembles T column by column and solves the two definite pencils.
FovBounds fov_bounds_dense(const AssembledForms& forms, const TwoLevelPreconditioner& precond);

/// Extremes over random Rayleigh quotients (c1 is an upper estimate of the
/// true minimum, c2 a lower estimate of the true maximum).
FovBounds fov_bounds_sampled(const AssembledForms& forms, const TwoLevelPreconditioner& precond,
                             int samples, std::uint64_t seed);

// ----------------------------------------------------------------- report

struct TheoryReport {
  Conditions conditions;
  bool have_fov = false;
  FovBounds fov;
  std::vector<CheckReport> checks;
  double identity_deviation = -1.0;  // negative when not evaluated
};

/// Flat "key=value" lines.
void write_theory_report(std::ostream& out, const TheoryReport& report);

/// Standard normal vector from a seeded generator.
Vector random_vector(Eigen::Index n, std::uint64_t seed);

}  // namespace hkgeneo

#endif  // HKGENEO_ANALYSIS_HPP
