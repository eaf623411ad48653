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

/// \file driver.hpp
/// \brief Run configuration, the single-solve pipeline and parameter studies.
///
/// Configuration is a flat list of key=value pairs (file lines or overrides,
/// later entries win). Every "auto" value is resolved to a number before any
/// computation and echoed in the run outputs.

#ifndef HKGENEO_DRIVER_HPP
#define HKGENEO_DRIVER_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hkgeneo/analysis.hpp"
#include "hkgeneo/assembly.hpp"
#include "hkgeneo/decomp.hpp"
#include "hkgeneo/eigencoarse.hpp"
#include "hkgeneo/error.hpp"
#include "hkgeneo/mesh.hpp"
#include "hkgeneo/schwarz.hpp"
#include "hkgeneo/wgmres.hpp"

namespace hkgeneo {

/// Ordered key=value pairs.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Parses "key = value" lines; '#' starts a comment. Throws kConfig on
/// malformed lines.
ConfigEntries parse_config_text(const std::string& text);
ConfigEntries load_config_file(const std::string& path);

struct RunConfig {
  double k = 10.0;
  int n_per_side = 0;  // 0: auto
  int coarse_m = 0;    // 0: auto
  int fine_q = 2;
  int layers_c = 1;
  int layers_f = 1;
  double tau_target = 0.0;  // 0: auto
  double tau_c = 0.0;       // auto rule factor; 0: built-in default
  CoefficientKind coefficient = CoefficientKind::kConstant;
  double contrast = 1.0;
  double rtol = 1e-8;
  int maxit = 500;
  std::uint64_t seed = 1;
  std::vector<std::string> checks{"local_spd"};
  std::string rhs = "gaussian";
  double rhs_x = 0.5;
  double rhs_y = 0.5;
  double rhs_width = 0.0;  // 0: 2h
  int levels = 2;
  int max_modes = 0;       // 0: half the interior dofs, -1: unlimited
  double ppw = 10.0;       // points per wavelength
  double m_divisor = 5.0;  // coarse_M = round(k / m_divisor)
  int check_trials = 20;
  int projector_trials = 200;
  int fov_dense_max = 4000;
  int fov_samples = 500;
  GammaConvention gamma_convention = GammaConvention::kLiteral;

  // Study keys.
  std::string study;  // k_scaling | tau_sweep | one_vs_two_level
  std::vector<double> k_values{10.0, 20.0, 40.0};
  std::vector<double> tau_values;  // explicit targets for tau_sweep
  int parallel = 1;
};

/// Applies entries in order. Unknown keys and bad values throw kConfig.
RunConfig make_run_config(const ConfigEntries& entries);
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

/// Default factor of the auto tau rule.
inline constexpr double kDefaultTauFactor = 1.0;

/// Auto rules for the mesh and the coarse grid. Explicit values are kept;
/// explicit values that violate the nesting lattice throw kConfig.
struct ResolvedGrid {
  int n_per_side;
  int coarse_m;
};
ResolvedGrid resolve_grid(const RunConfig& cfg);

/// Echo of a resolved configuration as key=value lines.
void write_config(std::ostream& out, const RunConfig& cfg);

struct PhaseTimes {
  std::vector<std::pair<std::string, double>> seconds;
  void add(const std::string& phase, double s) { seconds.emplace_back(phase, s); }
};

struct RunOutcome;

/// The assembled pipeline up to the factorized preconditioner. Members are
/// stable in memory (the object is not copyable or movable). `progress`
/// receives the resolved configuration and geometry as they become known,
/// so a failing stage still leaves them behind.
class Problem {
 public:
  explicit Problem(const RunConfig& cfg, PhaseTimes* times = nullptr,
                   RunOutcome* progress = nullptr);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  RunConfig config;  // resolved
  Mesh mesh;
  FeSpace space;
  AssembledForms forms;
  TwoLevelDecomposition decomp;
  double cstab = 0.0;
  std::vector<LocalGevp> gevps;
  std::vector<LocalGevpResult> spectra;
  ModeSelection selection;
  CoarseSpace coarse;
  std::optional<TwoLevelPreconditioner> precond;
  Conditions conditions;

  Vector rhs() const;
};

struct RunOutcome {
  RunConfig config;  // resolved
  int exit_code = 0;
  std::string error;
  // Filled when the pipeline got far enough.
  int n_dofs = 0;
  int num_coarse = 0;
  int num_fine = 0;
  int lambda = 0;
  double hc = 0.0;
  double hf = 0.0;
  double cstab = 0.0;
  double tau = 0.0;
  double theta = 0.0;
  int modes = 0;
  int coarse_dim = 0;
  int dropped = 0;
  int overflow = 0;
  Conditions conditions;
  GmresReport gmres;
  double final_resid = 0.0;  // relative W-norm residual of the preconditioned system
  double true_resid = 0.0;   // |B x - f| / |f|
  TheoryReport theory;
  LocalSpdReport spd;
  bool have_spd = false;
  PhaseTimes times;
};

/// Full pipeline with the configured checks. Never throws for module
/// errors; they become exit codes (2 config, 3 singular, 4 eigensolve,
/// 5 no convergence, 1 internal).
RunOutcome execute_run(const RunConfig& cfg);

/// execute_run plus artifacts in `out_dir` (run.csv, residuals.csv,
/// spectrum.csv, theory_report.txt, timings.txt, config.txt).
RunOutcome run_single(const RunConfig& cfg, const std::string& out_dir);

/// CSV header and row for run.csv and the study aggregate.
std::string run_csv_header();
std::string run_csv_row(const RunOutcome& r);

struct StudyOutcome {
  std::vector<RunOutcome> runs;
  int exit_code = 0;
};

/// Runs the configured study into `out_dir` (study.csv plus runs/<id>/).
/// Fails (kConfig exit) only when every run fails.
StudyOutcome run_study(const RunConfig& base, const std::string& out_dir);

/// Exit code for an error category.
int exit_code_for(ErrorCode code);

}  // namespace hkgeneo

#endif  // HKGENEO_DRIVER_HPP
