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

#include "hkgeneo.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "hkgeneo/driver.hpp"
#include "hkgeneo/error.hpp"

struct hk_config {
  hkgeneo::ConfigEntries entries;
};

struct hk_session {
  std::unique_ptr<hkgeneo::Problem> problem;
};

namespace {

thread_local std::string g_last_error;

hk_status set_error(hk_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class F>
hk_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const hkgeneo::Error& e) {
    return set_error(static_cast<hk_status>(hkgeneo::exit_code_for(e.code())), e.what());
  } catch (const std::exception& e) {
    return set_error(HK_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(HK_ERR_INTERNAL, "unknown error");
  }
}

hkgeneo::RunConfig to_run_config(const hk_config* cfg) {
  return hkgeneo::make_run_config(cfg->entries);
}

void fill_summary(const hkgeneo::RunOutcome& r, hk_run_summary* s) {
  if (!s) return;
  *s = hk_run_summary{};
  s->k = r.config.k;
  s->n_per_side = r.config.n_per_side;
  s->n_dofs = r.n_dofs;
  s->levels = r.config.levels;
  s->coarse_m = r.config.coarse_m;
  s->num_coarse = r.num_coarse;
  s->num_fine = r.num_fine;
  s->lambda_overlap = r.lambda;
  s->hf = r.hf;
  s->tau = r.tau;
  s->theta = r.theta;
  s->coarse_dim = r.coarse_dim;
  s->cstab = r.cstab;
  s->s = r.conditions.s;
  s->gamma = r.conditions.gamma;
  s->iterations = r.gmres.iterations;
  s->converged = r.gmres.converged ? 1 : 0;
  s->final_resid = r.final_resid;
}

}  // namespace

extern "C" {

const char* hk_version(void) { return "0.1.0"; }

const char* hk_last_error(void) { return g_last_error.c_str(); }

hk_status hk_config_create(hk_config** out) {
  if (!out) return set_error(HK_ERR_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = new hk_config();
    return HK_OK;
  });
}

void hk_config_destroy(hk_config* cfg) { delete cfg; }

hk_status hk_config_load_file(hk_config* cfg, const char* path) {
  if (!cfg || !path) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    hkgeneo::ConfigEntries add = hkgeneo::load_config_file(path);
    hkgeneo::RunConfig probe = to_run_config(cfg);
    for (const auto& [k, v] : add) hkgeneo::apply_config_entry(probe, k, v);
    cfg->entries.insert(cfg->entries.end(), add.begin(), add.end());
    return HK_OK;
  });
}

hk_status hk_config_set(hk_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    hkgeneo::RunConfig probe = to_run_config(cfg);
    hkgeneo::apply_config_entry(probe, key, value);
    cfg->entries.emplace_back(key, value);
    return HK_OK;
  });
}

hk_status hk_config_get(const hk_config* cfg, const char* key, char* buf, size_t len) {
  if (!cfg || !key || !buf) return set_error(HK_ERR_ARGUMENT, "null argument");
  std::string value;
  for (const auto& [k, v] : cfg->entries)
    if (k == key) value = v;
  if (value.size() + 1 > len) return set_error(HK_ERR_ARGUMENT, "buffer too small");
  std::memcpy(buf, value.c_str(), value.size() + 1);
  return HK_OK;
}

hk_status hk_run_single(const hk_config* cfg, const char* out_dir, hk_run_summary* summary) {
  if (!cfg) return set_error(HK_ERR_ARGUMENT, "null config");
  return guarded([&] {
    const hkgeneo::RunConfig rc = to_run_config(cfg);
    const hkgeneo::RunOutcome r =
        out_dir ? hkgeneo::run_single(rc, out_dir) : hkgeneo::execute_run(rc);
    fill_summary(r, summary);
    if (r.exit_code != 0) return set_error(static_cast<hk_status>(r.exit_code), r.error);
    return HK_OK;
  });
}

hk_status hk_run_study(const hk_config* cfg, const char* out_dir) {
  if (!cfg || !out_dir) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hkgeneo::StudyOutcome st = hkgeneo::run_study(to_run_config(cfg), out_dir);
    if (st.exit_code != 0)
      return set_error(static_cast<hk_status>(st.exit_code), "every study run failed");
    return HK_OK;
  });
}

hk_status hk_session_create(const hk_config* cfg, hk_session** out) {
  if (!cfg || !out) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto s = std::make_unique<hk_session>();
    s->problem = std::make_unique<hkgeneo::Problem>(to_run_config(cfg));
    *out = s.release();
    return HK_OK;
  });
}

void hk_session_destroy(hk_session* s) { delete s; }

int hk_session_n_dofs(const hk_session* s) { return s ? s->problem->space.n_dofs : 0; }

hk_status hk_session_apply_preconditioner(const hk_session* s, const double* x, double* y) {
  if (!s || !x || !y) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const int n = s->problem->space.n_dofs;
    const hkgeneo::Vector out = s->problem->precond->apply(Eigen::Map<const hkgeneo::Vector>(x, n));
    Eigen::Map<hkgeneo::Vector>(y, n) = out;
    return HK_OK;
  });
}

hk_status hk_session_apply_operator(const hk_session* s, const double* x, double* y) {
  if (!s || !x || !y) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const int n = s->problem->space.n_dofs;
    const hkgeneo::Vector out =
        s->problem->forms.helmholtz * Eigen::Map<const hkgeneo::Vector>(x, n);
    Eigen::Map<hkgeneo::Vector>(y, n) = out;
    return HK_OK;
  });
}

hk_status hk_session_solve(const hk_session* s, const double* rhs, double* x, int* iterations) {
  if (!s || !x) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hkgeneo::Problem& p = *s->problem;
    const int n = p.space.n_dofs;
    const hkgeneo::Vector f =
        rhs ? hkgeneo::Vector(Eigen::Map<const hkgeneo::Vector>(rhs, n)) : p.rhs();
    hkgeneo::GmresOptions opts;
    opts.rtol = p.config.rtol;
    opts.maxit = p.config.maxit;
    const auto& m = *p.precond;
    const hkgeneo::GmresResult g = hkgeneo::weighted_gmres(
        [&](const hkgeneo::Vector& u) { return m.apply_T(u); }, m.apply(f), p.forms.dk, opts);
    Eigen::Map<hkgeneo::Vector>(x, n) = g.x;
    if (iterations) *iterations = g.report.iterations;
    if (!g.report.converged) return set_error(HK_ERR_NO_CONVERGENCE, "GMRES did not converge");
    return HK_OK;
  });
}

hk_status hk_session_write_matrix_market(const hk_session* s, const char* which,
                                         const char* path) {
  if (!s || !which || !path) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hkgeneo::AssembledForms& f = s->problem->forms;
    const std::string w = which;
    const hkgeneo::SparseSymMatrix* m = w == "stiffness"   ? &f.stiffness
                                        : w == "mass"      ? &f.mass
                                        : w == "helmholtz" ? &f.helmholtz
                                        : w == "dk"        ? &f.dk
                                                           : nullptr;
    if (!m) return set_error(HK_ERR_ARGUMENT, "unknown matrix '" + w + "'");
    std::ofstream out(path);
    if (!out) return set_error(HK_ERR_CONFIG, std::string("cannot write '") + path + "'");
    hkgeneo::write_matrix_market(out, *m);
    return HK_OK;
  });
}

hk_status hk_session_dump_subdomains(const hk_session* s, const char* path) {
  if (!s || !path) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) return set_error(HK_ERR_CONFIG, std::string("cannot write '") + path + "'");
    hkgeneo::dump_subdomains(out, s->problem->decomp);
    return HK_OK;
  });
}

hk_status hk_session_write_spectrum(const hk_session* s, const char* path) {
  if (!s || !path) return set_error(HK_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) return set_error(HK_ERR_CONFIG, std::string("cannot write '") + path + "'");
    hkgeneo::write_spectrum_csv(out, s->problem->spectra, s->problem->selection);
    return HK_OK;
  });
}

}  // extern "C"
