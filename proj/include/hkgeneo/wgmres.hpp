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

/// \file wgmres.hpp
/// \brief Full GMRES in a weighted inner product (u, v)_W = v^T W u.

#ifndef HKGENEO_WGMRES_HPP
#define HKGENEO_WGMRES_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hkgeneo/assembly.hpp"

namespace hkgeneo {

using LinearOperator = std::function<Vector(const Vector&)>;

struct GmresOptions {
  double rtol = 1e-8;
  int maxit = 500;
  std::optional<double> gamma;  // Elman constant for the decay envelope
  bool keep_basis = false;
};

struct GmresReport {
  int iterations = 0;
  std::vector<double> residual_history;  // W-norm of the residual, entry 0 = initial
  bool converged = false;
  bool breakdown = false;                // happy breakdown (exact solution reached)
  std::vector<double> elman_envelope;    // empty without gamma
  std::optional<double> gamma_used;
  bool envelope_clamped = false;         // gamma >= 1
  double max_orthogonality_loss = 0.0;
};

struct GmresResult {
  Vector x;
  GmresReport report;
  std::vector<Vector> basis;  // W-orthonormal Arnoldi vectors when kept
};

/// Solves op(x) = rhs. Errors: dimension mismatch (kInternal). Running out
/// of iterations is reported through `converged`, not thrown.
GmresResult weighted_gmres(const LinearOperator& op, const Vector& rhs,
                           const SparseSymMatrix& weight, const GmresOptions& options,
                           const Vector* x0 = nullptr);

enum class GammaConvention {
  kLiteral,      // c1 / c2
  kNormSquared,  // c1 / sqrt(c2), c2 bounding the squared norm
};

/// Throws kConfig for nonpositive inputs.
double elman_gamma(double c1, double c2, GammaConvention convention = GammaConvention::kLiteral);

/// (1 - gamma^2)^{m/2} r0 for m = 0..iterations; zero for m >= 1 when
/// gamma >= 1.
std::vector<double> elman_envelope(double gamma, double r0, int iterations);

/// CSV with header "iter,resid_dk,envelope"; envelope is empty without gamma.
void write_residual_csv(std::ostream& out, const GmresReport& report);

}  // namespace hkgeneo

#endif  // HKGENEO_WGMRES_HPP
