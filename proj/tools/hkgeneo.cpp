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

// Experiment CLI. Everything goes through the C API of libhkgeneo.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "hkgeneo.h"

namespace {

struct ConfigHandle {
  hk_config* cfg = nullptr;
  ~ConfigHandle() { hk_config_destroy(cfg); }
};

int report(hk_status st) {
  if (st != HK_OK) std::fprintf(stderr, "hkgeneo: error %d: %s\n", st, hk_last_error());
  return st;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level Schwarz preconditioned GMRES for Helmholtz problems"};
  std::string config_file, study, grid, out_dir = "hkgeneo_out", export_mtx;
  std::vector<std::string> sets;
  double k = 0.0;
  std::string tau;
  int parallel = 0;
  bool dump = false;
  app.add_option("--config", config_file, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--k", k, "wavenumber");
  app.add_option("--tau", tau, "eigenvalue threshold (number or auto)");
  app.add_option("--study", study, "k_scaling, tau_sweep or one_vs_two_level");
  app.add_option("--grid", grid, "comma list for the study axis (k or tau values)");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--set", sets, "override key=value (repeatable)");
  app.add_option("--parallel", parallel, "concurrent study runs");
  app.add_option("--export-mtx", export_mtx,
                 "write stiffness, mass, helmholtz and dk (or one of them) as Matrix Market");
  app.add_flag("--dump-subdomains", dump, "write the subdomain element sets");
  CLI11_PARSE(app, argc, argv);

  ConfigHandle h;
  if (int rc = report(hk_config_create(&h.cfg))) return rc;
  if (!config_file.empty())
    if (int rc = report(hk_config_load_file(h.cfg, config_file.c_str()))) return rc;
  auto set = [&](const std::string& key, const std::string& value) {
    return report(hk_config_set(h.cfg, key.c_str(), value.c_str()));
  };
  if (k > 0.0)
    if (int rc = set("k", fmt(k))) return rc;
  if (!tau.empty())
    if (int rc = set("tau_target", tau)) return rc;
  if (!study.empty())
    if (int rc = set("study", study)) return rc;
  if (parallel > 0)
    if (int rc = set("parallel", std::to_string(parallel))) return rc;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "hkgeneo: --set expects key=value, got '%s'\n", s.c_str());
      return HK_ERR_CONFIG;
    }
    if (int rc = set(s.substr(0, eq), s.substr(eq + 1))) return rc;
  }
  char study_kind[64] = {0};
  hk_config_get(h.cfg, "study", study_kind, sizeof(study_kind));
  if (!grid.empty()) {
    const std::string kind = study_kind;
    if (kind == "tau_sweep") {
      if (int rc = set("tau_values", grid)) return rc;
    } else if (int rc = set("k_values", grid)) {
      return rc;
    }
  }

  std::filesystem::create_directories(out_dir);
  if (!export_mtx.empty() || dump) {
    hk_session* s = nullptr;
    if (int rc = report(hk_session_create(h.cfg, &s))) return rc;
    int rc = 0;
    if (!export_mtx.empty()) {
      std::vector<std::string> which;
      if (export_mtx == "all")
        which = {"stiffness", "mass", "helmholtz", "dk"};
      else
        which = {export_mtx};
      for (const auto& w : which) {
        const std::string path = (std::filesystem::path(out_dir) / (w + ".mtx")).string();
        rc = rc ? rc : report(hk_session_write_matrix_market(s, w.c_str(), path.c_str()));
      }
    }
    if (dump && rc == 0) {
      const std::string path = (std::filesystem::path(out_dir) / "subdomains.txt").string();
      rc = report(hk_session_dump_subdomains(s, path.c_str()));
    }
    hk_session_destroy(s);
    return rc;
  }

  if (study_kind[0] != '\0') {
    const int rc = report(hk_run_study(h.cfg, out_dir.c_str()));
    if (rc == 0) std::printf("study written to %s/study.csv\n", out_dir.c_str());
    return rc;
  }
  hk_run_summary sum{};
  const hk_status st = hk_run_single(h.cfg, out_dir.c_str(), &sum);
  std::printf(
      "k=%g n_per_side=%d n_dofs=%d levels=%d N=%d Lambda=%d Hf=%.4g tau=%.6g coarse_dim=%d "
      "cstab=%.6g s=%.6g iterations=%d converged=%d final_resid=%.3e\n",
      sum.k, sum.n_per_side, sum.n_dofs, sum.levels, sum.num_coarse, sum.lambda_overlap, sum.hf,
      sum.tau, sum.coarse_dim, sum.cstab, sum.s, sum.iterations, sum.converged,
      sum.final_resid);
  return report(st);
}
