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

#include "hkgeneo/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "hkgeneo/error.hpp"

namespace hkgeneo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, "config key '" + key + "': expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, "config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const long l = to_long(key, v);
  if (l < std::numeric_limits<int>::min() || l > std::numeric_limits<int>::max())
    fail(ErrorCode::kConfig, "config key '" + key + "': value out of range");
  return static_cast<int>(l);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string join(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double d : v) s.push_back(fmt(d));
  return join(s);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

bool wants(const RunConfig& cfg, const std::string& name) {
  for (const auto& c : cfg.checks)
    if (c == name || c == "all") return true;
  return false;
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
  return seed * 0x9E3779B97F4A7C15ULL + stream;
}

// Merges per-subdomain reports of the same check into one.
void merge_into(std::vector<CheckReport>& acc, const std::vector<CheckReport>& add) {
  for (const CheckReport& r : add) {
    auto it = std::find_if(acc.begin(), acc.end(),
                           [&](const CheckReport& a) { return a.name == r.name; });
    if (it == acc.end()) {
      acc.push_back(r);
      continue;
    }
    if (r.trials > 0 && (it->trials == 0 || r.worst_margin < it->worst_margin)) {
      it->worst_margin = r.worst_margin;
      it->witness = it->trials + r.witness;
    }
    it->trials += r.trials;
    it->violations += r.violations;
    it->applicable = it->applicable || r.applicable;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      fail(ErrorCode::kConfig, "config line " + std::to_string(lineno) + ": expected key=value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigEntries load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "k") {
    cfg.k = to_double(key, v);
  } else if (key == "n_per_side") {
    cfg.n_per_side = v == "auto" ? 0 : to_int(key, v);
    if (cfg.n_per_side < 0 || cfg.n_per_side == 1)
      fail(ErrorCode::kConfig, "n_per_side must be >= 2 or auto");
  } else if (key == "coarse_M") {
    cfg.coarse_m = v == "auto" ? 0 : to_int(key, v);
    if (cfg.coarse_m < 0) fail(ErrorCode::kConfig, "coarse_M must be >= 1 or auto");
  } else if (key == "fine_q") {
    cfg.fine_q = to_int(key, v);
  } else if (key == "layers_c") {
    cfg.layers_c = to_int(key, v);
  } else if (key == "layers_f") {
    cfg.layers_f = to_int(key, v);
  } else if (key == "tau_target" || key == "tau") {
    cfg.tau_target = v == "auto" ? 0.0 : to_double(key, v);
    if (v != "auto" && !(cfg.tau_target > 0.0))
      fail(ErrorCode::kConfig, "tau_target must be positive or auto");
  } else if (key == "tau_c") {
    cfg.tau_c = to_double(key, v);
    if (!(cfg.tau_c > 0.0)) fail(ErrorCode::kConfig, "tau_c must be positive");
  } else if (key == "coefficient") {
    cfg.coefficient = parse_coefficient_kind(v);
  } else if (key == "contrast") {
    cfg.contrast = to_double(key, v);
  } else if (key == "rtol") {
    cfg.rtol = to_double(key, v);
  } else if (key == "maxit") {
    cfg.maxit = to_int(key, v);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_long(key, v));
  } else if (key == "checks") {
    cfg.checks = split_list(v == "none" ? "" : v);
    static const std::set<std::string> known{"local_spd", "projector", "decomposition",
                                             "coercivity", "local_t",   "coarse_t",
                                             "identity",  "fov"};
    for (const auto& name : cfg.checks)
      if (!known.count(name)) fail(ErrorCode::kConfig, "unknown check '" + name + "'");
  } else if (key == "rhs") {
    if (v != "constant" && v != "gaussian")
      fail(ErrorCode::kConfig, "rhs must be constant or gaussian");
    cfg.rhs = v;
  } else if (key == "rhs_center") {
    const auto parts = split_list(v);
    if (parts.size() != 2) fail(ErrorCode::kConfig, "rhs_center expects x,y");
    cfg.rhs_x = to_double(key, parts[0]);
    cfg.rhs_y = to_double(key, parts[1]);
  } else if (key == "rhs_width") {
    cfg.rhs_width = v == "auto" ? 0.0 : to_double(key, v);
  } else if (key == "levels") {
    cfg.levels = to_int(key, v);
    if (cfg.levels != 1 && cfg.levels != 2) fail(ErrorCode::kConfig, "levels must be 1 or 2");
  } else if (key == "max_modes") {
    cfg.max_modes = v == "auto" ? 0 : v == "none" ? -1 : to_int(key, v);
  } else if (key == "ppw") {
    cfg.ppw = to_double(key, v);
  } else if (key == "m_divisor") {
    cfg.m_divisor = to_double(key, v);
  } else if (key == "check_trials") {
    cfg.check_trials = to_int(key, v);
  } else if (key == "projector_trials") {
    cfg.projector_trials = to_int(key, v);
  } else if (key == "fov_dense_max") {
    cfg.fov_dense_max = to_int(key, v);
  } else if (key == "fov_samples") {
    cfg.fov_samples = to_int(key, v);
  } else if (key == "gamma_convention") {
    if (v == "literal")
      cfg.gamma_convention = GammaConvention::kLiteral;
    else if (v == "norm_squared")
      cfg.gamma_convention = GammaConvention::kNormSquared;
    else
      fail(ErrorCode::kConfig, "gamma_convention must be literal or norm_squared");
  } else if (key == "study") {
    if (v != "k_scaling" && v != "tau_sweep" && v != "one_vs_two_level" && v != "none" &&
        !v.empty())
      fail(ErrorCode::kConfig, "unknown study '" + v + "'");
    cfg.study = v == "none" ? "" : v;
  } else if (key == "k_values") {
    cfg.k_values.clear();
    for (const auto& s : split_list(v)) cfg.k_values.push_back(to_double(key, s));
  } else if (key == "tau_values") {
    cfg.tau_values.clear();
    for (const auto& s : split_list(v)) cfg.tau_values.push_back(to_double(key, s));
  } else if (key == "parallel") {
    cfg.parallel = to_int(key, v);
  } else {
    fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
  }
}

RunConfig make_run_config(const ConfigEntries& entries) {
  RunConfig cfg;
  for (const auto& [k, v] : entries) apply_config_entry(cfg, k, v);
  return cfg;
}

ResolvedGrid resolve_grid(const RunConfig& cfg) {
  if (!(cfg.k > 0.0)) fail(ErrorCode::kConfig, "wavenumber k must be positive");
  if (cfg.fine_q < 1) fail(ErrorCode::kConfig, "fine_q must be >= 1");
  if (!(cfg.ppw > 0.0) || !(cfg.m_divisor > 0.0))
    fail(ErrorCode::kConfig, "ppw and m_divisor must be positive");
  const int q = cfg.fine_q;
  int m = cfg.coarse_m;
  int n = cfg.n_per_side;
  const int m_rule = std::max(1, static_cast<int>(std::lround(cfg.k / cfg.m_divisor)));
  if (n == 0) {
    if (m == 0) m = m_rule;
    const int n0 = static_cast<int>(std::ceil(cfg.ppw * cfg.k / (2.0 * std::numbers::pi)));
    const int lattice = m * q;
    n = std::max(2, (n0 + lattice - 1) / lattice * lattice);
  } else if (m == 0) {
    // Nearest admissible divisor of n to the rule value; ties go down.
    for (int d = 0; d <= n; ++d) {
      for (int cand : {m_rule - d, m_rule + d}) {
        if (cand >= 1 && cand <= n && n % cand == 0 && (n / cand) % q == 0) {
          m = cand;
          break;
        }
      }
      if (m != 0) break;
    }
    if (m == 0)
      fail(ErrorCode::kConfig, "no coarse_M compatible with n_per_side " + std::to_string(n) +
                                   " and fine_q " + std::to_string(q));
  }
  if (n % m != 0 || (n / m) % q != 0)
    fail(ErrorCode::kConfig, "n_per_side " + std::to_string(n) +
                                 " is not divisible by coarse_M * fine_q = " +
                                 std::to_string(m) + " * " + std::to_string(q));
  return {n, m};
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  out << "k=" << fmt(cfg.k) << '\n';
  out << "n_per_side=" << cfg.n_per_side << '\n';
  out << "coarse_M=" << cfg.coarse_m << '\n';
  out << "fine_q=" << cfg.fine_q << '\n';
  out << "layers_c=" << cfg.layers_c << '\n';
  out << "layers_f=" << cfg.layers_f << '\n';
  out << "tau_target=" << fmt(cfg.tau_target) << '\n';
  out << "tau_c=" << fmt(cfg.tau_c) << '\n';
  out << "coefficient=" << to_string(cfg.coefficient) << '\n';
  out << "contrast=" << fmt(cfg.contrast) << '\n';
  out << "rtol=" << fmt(cfg.rtol) << '\n';
  out << "maxit=" << cfg.maxit << '\n';
  out << "seed=" << cfg.seed << '\n';
  out << "checks=" << (cfg.checks.empty() ? "none" : join(cfg.checks)) << '\n';
  out << "rhs=" << cfg.rhs << '\n';
  out << "rhs_center=" << fmt(cfg.rhs_x) << ',' << fmt(cfg.rhs_y) << '\n';
  out << "rhs_width=" << fmt(cfg.rhs_width) << '\n';
  out << "levels=" << cfg.levels << '\n';
  out << "max_modes=" << (cfg.max_modes < 0 ? std::string("none") : std::to_string(cfg.max_modes))
      << '\n';
  out << "ppw=" << fmt(cfg.ppw) << '\n';
  out << "m_divisor=" << fmt(cfg.m_divisor) << '\n';
  out << "check_trials=" << cfg.check_trials << '\n';
  out << "projector_trials=" << cfg.projector_trials << '\n';
  out << "fov_dense_max=" << cfg.fov_dense_max << '\n';
  out << "fov_samples=" << cfg.fov_samples << '\n';
  out << "gamma_convention="
      << (cfg.gamma_convention == GammaConvention::kLiteral ? "literal" : "norm_squared") << '\n';
  if (!cfg.study.empty()) {
    out << "study=" << cfg.study << '\n';
    out << "k_values=" << join(cfg.k_values) << '\n';
    if (!cfg.tau_values.empty()) out << "tau_values=" << join(cfg.tau_values) << '\n';
  }
}

Problem::Problem(const RunConfig& cfg, PhaseTimes* times, RunOutcome* progress) : config(cfg) {
  Stopwatch sw;
  auto lap = [&](const char* phase) {
    const double s = sw.lap();
    if (times) times->add(phase, s);
  };
  const ResolvedGrid grid = resolve_grid(cfg);
  config.n_per_side = grid.n_per_side;
  config.coarse_m = grid.coarse_m;
  if (config.tau_c <= 0.0) config.tau_c = kDefaultTauFactor;

  mesh = build_unit_square_mesh(config.n_per_side);
  space = build_fe_space(mesh);
  lap("mesh");
  forms = assemble_forms(mesh, space,
                         make_coefficient(mesh, config.coefficient, config.contrast), config.k);
  if (config.rhs_width <= 0.0) config.rhs_width = 2.0 * mesh.h;
  lap("assembly");
  decomp = build_two_level(mesh, space, config.coarse_m, config.fine_q, config.layers_c,
                           config.layers_f);
  lap("decomposition");
  if (progress) {
    progress->config = config;
    progress->n_dofs = space.n_dofs;
    progress->num_coarse = decomp.num_coarse();
    progress->num_fine = decomp.num_fine();
    progress->lambda = decomp.lambda;
    progress->hc = decomp.hc;
    progress->hf = decomp.hf;
  }
  cstab = estimate_cstab(forms);
  lap("cstab");
  if (progress) progress->cstab = cstab;

  if (config.levels == 2) {
    if (config.tau_target <= 0.0)
      config.tau_target = config.tau_c * (1.0 + cstab) * (1.0 + cstab) * config.k * config.k;
    if (progress) progress->config.tau_target = config.tau_target;
    for (int i = 0; i < decomp.num_coarse(); ++i) {
      gevps.push_back(assemble_local_gevp(i, mesh, space, forms, decomp));
      spectra.push_back(solve_local_gevp(gevps.back(), config.k));
    }
    lap("eigensolve");
    std::vector<int> caps;
    if (config.max_modes >= 0) {
      for (const auto& c : decomp.coarse)
        caps.push_back(config.max_modes > 0 ? config.max_modes
                                            : static_cast<int>(c.idof.size()) / 2);
    }
    selection = select_modes(spectra, config.tau_target, caps);
    coarse = build_coarse_space(spectra, selection, decomp, forms);
    lap("coarse");
    conditions = evaluate_conditions(config.k, decomp.hf, selection.tau, decomp.lambda, cstab);
  } else {
    conditions = evaluate_conditions(config.k, decomp.hf, 0.0, decomp.lambda, cstab);
  }
  precond.emplace(TwoLevelPreconditioner::factorize(forms, decomp,
                                                    config.levels == 2 ? &coarse : nullptr));
  lap("factorize");
}

Vector Problem::rhs() const {
  if (config.rhs == "constant") return assemble_rhs(mesh, space, [](Point) { return 1.0; });
  const double x0 = config.rhs_x, y0 = config.rhs_y, w = config.rhs_width;
  return assemble_rhs(mesh, space, [=](Point p) {
    const double r2 = (p.x - x0) * (p.x - x0) + (p.y - y0) * (p.y - y0);
    return std::exp(-r2 / (2.0 * w * w));
  });
}

int exit_code_for(ErrorCode code) { return static_cast<int>(code); }

namespace {

RunOutcome execute_impl(const RunConfig& cfg, std::unique_ptr<Problem>& prob) {
  RunOutcome out;
  out.config = cfg;
  try {
    prob = std::make_unique<Problem>(cfg, &out.times, &out);
    const Problem& p = *prob;
    out.config = p.config;
    out.n_dofs = p.space.n_dofs;
    out.num_coarse = p.decomp.num_coarse();
    out.num_fine = p.decomp.num_fine();
    out.lambda = p.decomp.lambda;
    out.hc = p.decomp.hc;
    out.hf = p.decomp.hf;
    out.cstab = p.cstab;
    out.conditions = p.conditions;
    if (cfg.levels == 2) {
      out.tau = p.selection.tau;
      out.theta = p.selection.theta;
      out.modes = p.selection.total();
      out.coarse_dim = p.coarse.size();
      out.dropped = p.coarse.dropped;
      out.overflow = static_cast<int>(p.selection.overflow.size());
    }

    Stopwatch sw;
    const TwoLevelPreconditioner& m = *p.precond;
    const Vector f = p.rhs();
    GmresOptions opts;
    opts.rtol = cfg.rtol;
    opts.maxit = cfg.maxit;
    if (cfg.levels == 2 && p.conditions.theorem_applicable())
      opts.gamma = elman_gamma(p.conditions.c1, p.conditions.c2, cfg.gamma_convention);
    const GmresResult g =
        weighted_gmres([&](const Vector& u) { return m.apply_T(u); }, m.apply(f), p.forms.dk,
                       opts);
    out.gmres = g.report;
    const auto& h = g.report.residual_history;
    out.final_resid = h.front() > 0.0 ? h.back() / h.front() : 0.0;
    const double fn = f.norm();
    out.true_resid = fn > 0.0 ? (p.forms.helmholtz * g.x - f).norm() / fn : 0.0;
    out.times.add("gmres", sw.lap());

    TheoryReport& th = out.theory;
    th.conditions = p.conditions;
    const std::uint64_t seed = p.config.seed;
    if (wants(cfg, "local_spd")) {
      out.spd = check_local_spd(p.forms, p.decomp);
      out.have_spd = true;
      th.checks.push_back(out.spd.positivity);
      th.checks.push_back(out.spd.floor);
    }
    if (cfg.levels == 2 && wants(cfg, "projector")) {
      std::vector<CheckReport> acc;
      for (int i = 0; i < p.decomp.num_coarse(); ++i)
        merge_into(acc, check_projector(p.gevps[i], p.spectra[i], p.selection.counts[i],
                                        cfg.projector_trials, sub_seed(seed, 100 + i)));
      th.checks.insert(th.checks.end(), acc.begin(), acc.end());
    }
    std::optional<SpdProjections> proj;
    if (wants(cfg, "decomposition") || wants(cfg, "coercivity"))
      proj.emplace(p.forms, p.decomp, cfg.levels == 2 ? &p.coarse : nullptr);
    if (cfg.levels == 2 && wants(cfg, "decomposition")) {
      const auto reps = check_decomposition_bounds(p.forms, p.decomp, p.gevps, p.spectra,
                                                   p.selection, &*proj, cfg.check_trials,
                                                   sub_seed(seed, 2));
      th.checks.insert(th.checks.end(), reps.begin(), reps.end());
    }
    if (wants(cfg, "coercivity")) {
      const double theta = cfg.levels == 2 ? p.selection.theta
                                           : std::numeric_limits<double>::infinity();
      CheckReport r = check_coercivity(p.forms, *proj, p.decomp.lambda, theta, cfg.check_trials,
                                       sub_seed(seed, 3));
      r.applicable = cfg.levels == 2;
      th.checks.push_back(r);
    }
    if (wants(cfg, "local_t"))
      th.checks.push_back(check_local_t_stability(p.mesh, p.space, p.forms, p.decomp, m,
                                                  cfg.check_trials, sub_seed(seed, 4)));
    if (wants(cfg, "coarse_t"))
      th.checks.push_back(
          check_coarse_t_stability(p.forms, m, p.conditions, cfg.check_trials, sub_seed(seed, 5)));
    if (wants(cfg, "identity"))
      th.identity_deviation =
          operator_identity_deviation(p.mesh, p.space, p.forms, p.decomp,
                               cfg.levels == 2 ? &p.coarse : nullptr, m, cfg.check_trials,
                               sub_seed(seed, 6));
    if (wants(cfg, "fov")) {
      th.have_fov = true;
      th.fov = p.space.n_dofs <= cfg.fov_dense_max
                   ? fov_bounds_dense(p.forms, m)
                   : fov_bounds_sampled(p.forms, m, cfg.fov_samples, sub_seed(seed, 7));
    }
    out.times.add("checks", sw.lap());
    if (!g.report.converged) {
      out.exit_code = exit_code_for(ErrorCode::kNoConvergence);
      out.error = "GMRES did not converge in " + std::to_string(cfg.maxit) + " iterations";
    }
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e.code());
    out.error = e.what();
  } catch (const std::exception& e) {
    out.exit_code = exit_code_for(ErrorCode::kInternal);
    out.error = e.what();
  }
  return out;
}

}  // namespace

RunOutcome execute_run(const RunConfig& cfg) {
  std::unique_ptr<Problem> prob;
  return execute_impl(cfg, prob);
}

std::string run_csv_header() {
  return "k,n_per_side,n_dofs,levels,coarse_M,fine_q,N,sum_Q,Lambda,Hc,Hf,tau_target,tau,theta,"
         "sum_m,coarse_dim,dropped,overflow,cstab,s,gamma,c1_theory,c2_theory,iters,converged,"
         "final_resid,true_resid,status,error";
}

std::string run_csv_row(const RunOutcome& r) {
  const RunConfig& c = r.config;
  std::ostringstream o;
  o << fmt(c.k) << ',' << c.n_per_side << ',' << r.n_dofs << ',' << c.levels << ','
    << c.coarse_m << ',' << c.fine_q << ',' << r.num_coarse << ',' << r.num_fine << ','
    << r.lambda << ',' << fmt(r.hc) << ',' << fmt(r.hf) << ','
    << (c.levels == 2 ? fmt(c.tau_target) : "") << ',' << (c.levels == 2 ? fmt(r.tau) : "")
    << ',' << (c.levels == 2 ? fmt(r.theta) : "") << ',' << r.modes << ',' << r.coarse_dim << ','
    << r.dropped << ',' << r.overflow << ',' << fmt(r.cstab) << ',' << fmt(r.conditions.s) << ','
    << fmt(r.conditions.gamma) << ',' << fmt(r.conditions.c1) << ',' << fmt(r.conditions.c2)
    << ',' << r.gmres.iterations << ',' << (r.gmres.converged ? 1 : 0) << ','
    << fmt(r.final_resid) << ',' << fmt(r.true_resid) << ',' << r.exit_code << ','
    << csv_field(r.error);
  return o.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kConfig, "cannot write '" + path.string() + "'");
  out << content;
}

void write_run_artifacts(const RunOutcome& r, const std::filesystem::path& dir,
                         const Problem* prob) {
  std::filesystem::create_directories(dir);
  write_file(dir / "run.csv", run_csv_header() + "\n" + run_csv_row(r) + "\n");
  {
    std::ostringstream o;
    write_residual_csv(o, r.gmres);
    write_file(dir / "residuals.csv", o.str());
  }
  {
    std::ostringstream o;
    if (prob)
      write_spectrum_csv(o, prob->spectra, prob->selection);
    else
      o << "subdomain,index,lambda,selected\n";
    write_file(dir / "spectrum.csv", o.str());
  }
  {
    std::ostringstream o;
    write_theory_report(o, r.theory);
    write_file(dir / "theory_report.txt", o.str());
  }
  {
    std::ostringstream o;
    write_config(o, r.config);
    write_file(dir / "config.txt", o.str());
  }
  {
    std::ostringstream o;
    for (const auto& [phase, s] : r.times.seconds) o << phase << '=' << fmt(s) << '\n';
    write_file(dir / "timings.txt", o.str());
  }
}

}  // namespace

RunOutcome run_single(const RunConfig& cfg, const std::string& out_dir) {
  std::unique_ptr<Problem> prob;
  RunOutcome r = execute_impl(cfg, prob);
  write_run_artifacts(r, out_dir, prob.get());
  return r;
}

StudyOutcome run_study(const RunConfig& base, const std::string& out_dir) {
  std::vector<RunConfig> grid;
  std::vector<std::string> labels;
  if (base.study == "k_scaling") {
    if (base.k_values.empty()) fail(ErrorCode::kConfig, "k_scaling needs k_values");
    for (double k : base.k_values) {
      for (int levels : {2, 1}) {
        RunConfig c = base;
        c.k = k;
        c.levels = levels;
        grid.push_back(c);
      }
    }
  } else if (base.study == "tau_sweep") {
    if (base.tau_values.empty()) fail(ErrorCode::kConfig, "tau_sweep needs tau_values");
    for (double t : base.tau_values) {
      RunConfig c = base;
      c.levels = 2;
      c.tau_target = t;
      grid.push_back(c);
    }
  } else if (base.study == "one_vs_two_level") {
    for (int levels : {1, 2}) {
      RunConfig c = base;
      c.levels = levels;
      grid.push_back(c);
    }
  } else {
    fail(ErrorCode::kConfig, "no study selected");
  }

  const std::filesystem::path root(out_dir);
  std::filesystem::create_directories(root / "runs");
  StudyOutcome st;
  st.runs.resize(grid.size());
  auto one = [&](std::size_t i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%03zu", i);
    st.runs[i] = run_single(grid[i], (root / "runs" / id).string());
  };
  if (base.parallel > 1) {
    for (std::size_t start = 0; start < grid.size(); start += base.parallel) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i = start; i < std::min(grid.size(), start + base.parallel); ++i)
        jobs.push_back(std::async(std::launch::async, one, i));
      for (auto& j : jobs) j.get();
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) one(i);
  }

  std::ostringstream csv;
  csv << "row_type,run_id," << run_csv_header()
      << ",median_iters,max_iters,min_iters,max_min_ratio,coarse_fraction\n";
  int failures = 0;
  for (std::size_t i = 0; i < st.runs.size(); ++i) {
    const RunOutcome& r = st.runs[i];
    if (r.exit_code != 0 && r.exit_code != 5) ++failures;
    csv << "run," << i << ',' << run_csv_row(r) << ",,,,,\n";
  }
  const int empty_cols = 30;  // run_id plus the run_csv_header() columns
  for (int levels : {2, 1}) {
    std::vector<int> iters;
    double frac = 0.0;
    for (const RunOutcome& r : st.runs) {
      if (r.config.levels != levels || r.exit_code != 0) continue;
      iters.push_back(r.gmres.iterations);
      if (r.n_dofs > 0)
        frac = std::max(frac, static_cast<double>(r.coarse_dim) / r.n_dofs);
    }
    if (iters.empty()) continue;
    std::vector<int> sorted = iters;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t s = sorted.size();
    const double median =
        s % 2 ? sorted[s / 2] : 0.5 * (sorted[s / 2 - 1] + sorted[s / 2]);
    csv << "summary_level" << levels << ',';
    for (int c = 0; c < empty_cols; ++c) csv << ',';
    csv << fmt(median) << ',' << sorted.back() << ',' << sorted.front() << ','
        << fmt(sorted.front() > 0 ? static_cast<double>(sorted.back()) / sorted.front() : 0.0)
        << ',' << fmt(frac) << '\n';
  }
  write_file(root / "study.csv", csv.str());
  {
    std::ostringstream o;
    write_config(o, base);
    write_file(root / "config.txt", o.str());
  }
  if (!st.runs.empty() && failures == static_cast<int>(st.runs.size()))
    st.exit_code = st.runs.front().exit_code;
  return st;
}

}  // namespace hkgeneo
