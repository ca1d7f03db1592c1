// Copyright 2026 The QPR Authors
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

#include "qpr/config.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qpr {

namespace {

using nlohmann::json;

const json* find(const json& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

double get_number(const json& doc, const char* key, double fallback) {
  const json* v = find(doc, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return v->get<double>();
}

long long get_integer(const json& doc, const char* key, long long fallback) {
  const json* v = find(doc, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(std::string("config key '") + key + "' must be an integer");
  return v->get<long long>();
}

std::vector<double> get_numbers(const json& v, const char* key) {
  if (!v.is_array()) throw ConfigError(std::string("config key '") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(std::string("config key '") + key + "' must contain numbers only");
    out.push_back(x.get<double>());
  }
  return out;
}

Mode get_mode(const json& v, const char* key, int dim) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ConfigError(std::string("forcing '") + key + "' must be an integer array of length " +
                      std::to_string(dim));
  Mode m;
  for (int i = 0; i < dim; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number_integer())
      throw ConfigError(std::string("forcing '") + key + "' entries must be integers");
    m[i] = v[static_cast<std::size_t>(i)].get<int>();
  }
  return m;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"omega", "forcing", "phi0", "xi", "eps", "beta0", "K", "p_max",
                                              "M_max", "N", "grid", "seed", "workers", "ode_T", "tree_cap",
                                              "tolerances", "mode", "output_dir"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown config key '" + it.key() + "'");

  RunConfig cfg;
  cfg.source = doc;
  const json* om = find(doc, "omega");
  if (!om) throw ConfigError("config needs 'omega'");
  cfg.omega = get_numbers(*om, "omega");
  const int d = static_cast<int>(cfg.omega.size());
  if (d < 2 || d > kMaxDim) throw ConfigError("omega must have 2.." + std::to_string(kMaxDim) + " components");

  const json* fo = find(doc, "forcing");
  if (!fo || !fo->is_array() || fo->empty()) throw ConfigError("config needs a non-empty 'forcing' array");
  cfg.r = -1;
  for (const auto& term : *fo) {
    if (!term.is_object() || !term.contains("nu") || !term.contains("mu"))
      throw ConfigError("forcing terms need 'nu' and 'mu'");
    const int r = static_cast<int>(term["mu"].size());
    if (cfg.r < 0) cfg.r = r;
    if (r != cfg.r || r < 1 || r > kMaxDim) throw ConfigError("forcing 'mu' arrays must share one length in 1..4");
    ForcingTerm t;
    t.nu = get_mode(term["nu"], "nu", d);
    t.mu = get_mode(term["mu"], "mu", r);
    t.coeff = Complex{get_number(term, "re", 0.0), get_number(term, "im", 0.0)};
    cfg.forcing.push_back(t);
  }

  cfg.phi0 = get_number(doc, "phi0", 1.0);
  cfg.decay_xi = get_number(doc, "xi", 0.0);
  if (const json* e = find(doc, "eps")) {
    cfg.eps = e->is_array() ? get_numbers(*e, "eps") : std::vector<double>{get_number(doc, "eps", 0.0)};
  }
  if (cfg.eps.empty()) throw ConfigError("'eps' must not be empty");
  if (!std::is_sorted(cfg.eps.begin(), cfg.eps.end())) throw ConfigError("'eps' sweep must be sorted ascending");
  for (double e : cfg.eps)
    if (!std::isfinite(e)) throw ConfigError("'eps' must be finite");
  if (const json* b = find(doc, "beta0")) {
    cfg.beta0 = get_numbers(*b, "beta0");
    if (static_cast<int>(cfg.beta0.size()) != cfg.r) throw ConfigError("'beta0' must have r components");
  } else {
    cfg.beta0.assign(static_cast<std::size_t>(cfg.r), 0.0);
  }

  cfg.K = static_cast<int>(get_integer(doc, "K", cfg.K));
  cfg.p_max = static_cast<int>(get_integer(doc, "p_max", cfg.p_max));
  cfg.M_max = static_cast<int>(get_integer(doc, "M_max", cfg.M_max));
  cfg.N = static_cast<int>(get_integer(doc, "N", cfg.N));
  cfg.grid = static_cast<int>(get_integer(doc, "grid", cfg.grid));
  cfg.seed = static_cast<std::uint64_t>(get_integer(doc, "seed", 0));
  cfg.workers = static_cast<unsigned>(get_integer(doc, "workers", 1));
  cfg.ode_T = get_number(doc, "ode_T", cfg.ode_T);
  cfg.tree_cap = static_cast<std::size_t>(get_integer(doc, "tree_cap", static_cast<long long>(cfg.tree_cap)));
  if (cfg.K < 1 || cfg.M_max < 1 || cfg.N < 1 || cfg.grid < 1 || cfg.workers < 1)
    throw ConfigError("K, M_max, N, grid and workers must be positive");
  if (cfg.p_max < 0) throw ConfigError("p_max must be non-negative");
  if (!(cfg.ode_T > 0.0)) throw ConfigError("ode_T must be positive");

  if (const json* t = find(doc, "tolerances")) {
    if (!t->is_object()) throw ConfigError("'tolerances' must be an object");
    Tolerances& tol = cfg.tol;
    tol.g_tol = get_number(*t, "g_tol", tol.g_tol);
    tol.h_tol = get_number(*t, "h_tol", tol.h_tol);
    tol.newton_tol = get_number(*t, "newton_tol", tol.newton_tol);
    tol.ode_tol = get_number(*t, "ode_tol", tol.ode_tol);
    tol.ode_bound = get_number(*t, "ode_bound", tol.ode_bound);
    tol.phase_lock = get_number(*t, "phase_lock", tol.phase_lock);
    tol.oracle_agreement = get_number(*t, "oracle_agreement", tol.oracle_agreement);
    tol.hessian_step = get_number(*t, "hessian_step", tol.hessian_step);
    tol.jacobian_step = get_number(*t, "jacobian_step", tol.jacobian_step);
  }

  if (const json* m = find(doc, "mode")) {
    if (!m->is_string()) throw ConfigError("'mode' must be a string");
    cfg.mode = m->get<std::string>();
  }
  if (std::find(run_modes().begin(), run_modes().end(), cfg.mode) == run_modes().end())
    throw ConfigError("unknown mode '" + cfg.mode + "'");
  if (const json* o = find(doc, "output_dir")) {
    if (!o->is_string()) throw ConfigError("'output_dir' must be a string");
    cfg.output_dir = o->get<std::string>();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

ForcingModel build_model(const RunConfig& cfg) {
  ForcingModel model(static_cast<int>(cfg.omega.size()), cfg.r, cfg.forcing, cfg.phi0, cfg.decay_xi);
  const ValidationReport rep = validate_model(model);
  if (!rep.ok()) throw ConfigError("forcing model rejected: " + rep.summary());
  return model;
}

nlohmann::json config_echo(const RunConfig& cfg) {
  json j;
  j["omega"] = cfg.omega;
  json terms = json::array();
  for (const ForcingTerm& t : cfg.forcing) {
    json term;
    term["nu"] = std::vector<int>(t.nu.c.begin(), t.nu.c.begin() + static_cast<long>(cfg.omega.size()));
    term["mu"] = std::vector<int>(t.mu.c.begin(), t.mu.c.begin() + cfg.r);
    term["re"] = t.coeff.real();
    term["im"] = t.coeff.imag();
    terms.push_back(term);
  }
  j["forcing"] = terms;
  j["phi0"] = cfg.phi0;
  j["xi"] = cfg.decay_xi;
  j["eps"] = cfg.eps;
  j["beta0"] = cfg.beta0;
  j["K"] = cfg.K;
  j["p_max"] = cfg.p_max;
  j["M_max"] = cfg.M_max;
  j["N"] = cfg.N;
  j["grid"] = cfg.grid;
  j["seed"] = cfg.seed;
  j["ode_T"] = cfg.ode_T;
  j["tree_cap"] = cfg.tree_cap;
  j["tolerances"] = {{"g_tol", cfg.tol.g_tol},
                     {"h_tol", cfg.tol.h_tol},
                     {"newton_tol", cfg.tol.newton_tol},
                     {"ode_tol", cfg.tol.ode_tol},
                     {"ode_bound", cfg.tol.ode_bound},
                     {"phase_lock", cfg.tol.phase_lock},
                     {"oracle_agreement", cfg.tol.oracle_agreement},
                     {"hessian_step", cfg.tol.hessian_step},
                     {"jacobian_step", cfg.tol.jacobian_step}};
  j["mode"] = cfg.mode;
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = config_echo(cfg).dump();
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char c : digest) {
    std::snprintf(buf, sizeof buf, "%02x", c);
    hex += buf;
  }
  return hex;
}

}  // namespace qpr
