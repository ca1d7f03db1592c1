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

#include "qpr/pipeline.hpp"

#include "qpr/forcing.hpp"
#include "qpr/frequency.hpp"
#include "qpr/oracle.hpp"
#include "qpr/renorm.hpp"
#include "qpr/scalefun.hpp"
#include "qpr/trees.hpp"
#include "qpr/variational.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

namespace qpr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Every CSV starts with two comment lines: the config hash and the config
// echo.  The manifest maps each file to the operation that produced it.
class Artifacts {
 public:
  Artifacts(fs::path dir, std::string hash, json echo)
      : dir_(std::move(dir)), hash_(std::move(hash)), echo_(std::move(echo)) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name, const std::string& module, const std::string& operation) {
    std::ofstream os(dir_ / name);
    if (!os) throw ConfigError("cannot write " + (dir_ / name).string());
    os << "# config_sha1=" << hash_ << '\n' << "# config=" << echo_.dump() << '\n';
    manifest_.push_back({{"file", name}, {"module", module}, {"operation", operation}});
    return os;
  }

  const fs::path& dir() const { return dir_; }
  const json& manifest() const { return manifest_; }

 private:
  fs::path dir_;
  std::string hash_;
  json echo_;
  json manifest_ = json::array();
};

struct Context {
  const RunConfig& cfg;
  FrequencyVector omega;
  ForcingModel model;
  AlphaTable table;
  ScaleSequences seq;
  Partition partition;
  std::unique_ptr<TreeCatalog> catalog;
  std::vector<double> beta0;
  VariationalSettings settings;

  explicit Context(const RunConfig& c)
      : cfg(c),
        omega(c.omega),
        model(build_model(c)),
        table((screen_rational_independence(omega), omega), c.M_max),
        seq(scale_sequences(table, c.p_max + 1)),
        partition(seq) {
    beta0 = c.beta0.empty() ? std::vector<double>(static_cast<std::size_t>(c.r), 0.0) : c.beta0;
    settings.grid = c.grid;
    settings.seed = c.seed;
    settings.g_tol = c.tol.g_tol;
    settings.h_tol = c.tol.h_tol;
    settings.hessian_step = c.tol.hessian_step;
    settings.jacobian_step = c.tol.jacobian_step;
    settings.workers = c.workers;
  }

  const TreeCatalog& trees() {
    if (!catalog) catalog = std::make_unique<TreeCatalog>(model, omega, partition, Truncation{cfg.K, cfg.p_max, cfg.tree_cap});
    return *catalog;
  }
};

struct Outcome {
  json results = json::object();
  std::vector<std::string> warnings;
  bool checks_failed = false;
  std::optional<std::string> math_failure;  // property 1 violated at the requested point
};

// Log-spaced divisor grid, both signs, reaching below the smallest
// resolved scale and above the largest.
std::vector<double> divisor_grid(const Partition& part, int points = 200) {
  const double lo = part.rho(part.max_scale()) / 4.0;
  const double hi = 4.0 * part.rho(0);
  std::vector<double> xs;
  for (int i = 0; i < points; ++i) {
    const double x = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    xs.push_back(-x);
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

void write_prefixed(std::ostream& os, const std::string& body, const std::string& prefix, bool& header_done) {
  std::istringstream in(body);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (!header_done) os << "eps," << line << '\n';
      header_done = true;
      continue;
    }
    os << prefix << ',' << line << '\n';
  }
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// ---------------------------------------------------------------------------

void mode_bryuno(Context& ctx, Artifacts& art, Outcome& out) {
  const int n = resolvable_scales(ctx.table);
  const ScaleSequences all = scale_sequences(ctx.table, n);
  {
    auto os = art.open("alpha.csv", "frequency", "alpha_m");
    write_alpha_csv(os, ctx.table);
  }
  {
    auto os = art.open("scales.csv", "frequency", "scale_sequences");
    write_scale_csv(os, all);
  }
  const BryunoSum b = bryuno_sum(ctx.table);
  out.results["bryuno_sum"] = b.value;
  out.results["bryuno_last_term"] = b.last_term;
  out.results["resolvable_scales"] = n;
}

void mode_trees(Context& ctx, Artifacts& art, Outcome& out) {
  const TreeCatalog& cat = ctx.trees();
  const int K = ctx.cfg.K;
  std::vector<long> skeletons(K + 2, 0), zeros(K + 2, 0), clusters(K + 2, 0), se(K + 2, 0), sb(K + 2, 0);

  auto audit = art.open("sb_audit.csv", "trees", "siegel_bryuno_check");
  audit << "kind,id,order,K,max_scale,cluster_scale,ok,violating_scale\n";
  auto record = [&](const char* kind, std::size_t id, const LabelledTree& t, std::optional<int> q) {
    const SiegelBryunoReport rep = siegel_bryuno_check(t, ctx.seq, q);
    int top = -1;
    for (const auto& node : t.nodes)
      if (node.scale != kExternalScale) top = std::max(top, node.scale);
    audit << kind << ',' << id << ',' << t.order() << ',' << rep.K << ',' << top << ','
          << (q ? *q : -1) << ',' << (rep.ok ? 1 : 0) << ',' << rep.violating_scale << '\n';
    if (!rep.ok) ++sb[static_cast<std::size_t>(std::min(t.order(), K + 1))];
  };

  std::ofstream text = art.open("trees.txt", "trees", "write_tree");
  for (std::size_t i = 0; i < cat.subtrees().size(); ++i) {
    const LabelledTree t = cat.flatten(static_cast<int>(i));
    ++skeletons[static_cast<std::size_t>(t.order())];
    if (!find_self_energy_clusters(t).empty()) ++se[static_cast<std::size_t>(t.order())];
    record("subtree", i, t, std::nullopt);
    if (t.order() <= 3) {
      write_tree(text, t, ctx.model.d());
      text << '\n';
    }
  }
  for (std::size_t i = 0; i < cat.zero_roots().size(); ++i) {
    const LabelledTree t = cat.flatten_zero_root(static_cast<int>(i));
    ++zeros[static_cast<std::size_t>(std::min(t.order(), K + 1))];
    if (!find_self_energy_clusters(t).empty()) ++se[static_cast<std::size_t>(std::min(t.order(), K + 1))];
    record("zero_root", i, t, std::nullopt);
  }
  for (int q = 0; q <= ctx.cfg.p_max; ++q) {
    const auto& insts = cat.cluster_instances(q, 0.0);
    for (std::size_t i = 0; i < insts.size(); ++i) {
      const LabelledTree t = cat.flatten_cluster(insts[i]);
      ++clusters[static_cast<std::size_t>(std::min(t.order(), K + 1))];
      record("cluster", i, t, q);
    }
  }

  auto os = art.open("trees_summary.csv", "trees", "catalog");
  os << "k,shapes,skeletons,zero_roots,clusters,se_violations,sb_violations\n";
  long sb_total = 0, se_total = 0;
  for (int k = 1; k <= K + 1; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    os << k << ',' << enumerate_shapes(k).size() << ',' << skeletons[kk] << ',' << zeros[kk] << ','
       << clusters[kk] << ',' << se[kk] << ',' << sb[kk] << '\n';
    sb_total += sb[kk];
    se_total += se[kk];
  }
  out.results["subtrees"] = cat.subtrees().size();
  out.results["zero_roots"] = cat.zero_roots().size();
  out.results["leg_subtrees"] = cat.leg_subtrees().size();
  out.results["self_energy_violations"] = se_total;
  out.results["siegel_bryuno_violations"] = sb_total;
  if (sb_total > 0 || se_total > 0) out.checks_failed = true;
}

void mode_selfenergy(Context& ctx, Artifacts& art, Outcome& out) {
  const TreeCatalog& cat = ctx.trees();
  auto table = art.open("self_energy.csv", "renorm", "self_energy");
  table << "eps,q,x,u,e,value\n";
  auto sym = art.open("symmetry.csv", "renorm", "self_energy");
  sym << "eps,q,x,transpose_gap,derivative_at_zero\n";
  double worst_sym = 0.0, worst_der = 0.0;
  for (double eps : ctx.cfg.eps) {
    Evaluator ev(cat, eps, ctx.beta0);
    for (int q = 0; q <= ctx.cfg.p_max; ++q) {
      const double rho = ctx.partition.rho(q);
      const double h = rho / 100.0;
      const Mat M0 = ev.self_energy(q, 0.0);
      const Mat dM = (ev.self_energy(q, h) - ev.self_energy(q, -h)) / (2.0 * h);
      const double rel = dM.norm() / std::max(M0.norm(), std::numeric_limits<double>::min());
      const double der = M0.norm() == 0.0 && dM.norm() == 0.0 ? 0.0 : rel;
      worst_der = std::max(worst_der, der);
      for (int i = -10; i <= 10; ++i) {
        const double x = 2.0 * rho * i / 10.0;
        const Mat M = ev.self_energy(q, x);
        const double gap = (M - ev.self_energy(q, -x).transpose()).norm();
        worst_sym = std::max(worst_sym, gap);
        sym << num(eps) << ',' << q << ',' << num(x) << ',' << num(gap) << ',' << num(der) << '\n';
        for (Eigen::Index u = 0; u < M.rows(); ++u)
          for (Eigen::Index e = 0; e < M.cols(); ++e)
            table << num(eps) << ',' << q << ',' << num(x) << ',' << u + 1 << ',' << e + 1 << ','
                  << num(M(u, e)) << '\n';
      }
    }
  }
  out.results["max_transpose_gap"] = worst_sym;
  out.results["max_relative_derivative"] = worst_der;
}

void mode_expand(Context& ctx, Artifacts& art, Outcome& out) {
  const TreeCatalog& cat = ctx.trees();
  const int radius = composition_radius(cat, ctx.settings);
  auto coeffs = art.open("coefficients.csv", "renorm", "resummed_solution");
  auto resid = art.open("residual.csv", "variational", "range_residual");
  resid << "eps,p,residual,tail\n";
  auto prop = art.open("property1.csv", "renorm", "property1_check");
  prop << "eps,n,margin,ok\n";
  const std::vector<double> grid = divisor_grid(ctx.partition);
  bool header = false;
  json per_eps = json::array();
  for (double eps : ctx.cfg.eps) {
    Evaluator ev(cat, eps, ctx.beta0);
    const Property1Report p1 = ev.property1_check(ctx.cfg.p_max, grid);
    for (const auto& [n, m] : p1.margin)
      prop << num(eps) << ',' << n << ',' << num(m) << ',' << (m >= 1.0 ? 1 : 0) << '\n';
    if (!p1.ok) {
      const auto& f = p1.failures.front();
      out.math_failure = "property 1 fails on scale " + std::to_string(f.n) + " at x = " + num(f.x) +
                         " for eps = " + num(eps);
      return;
    }
    const ResummedSolution sol = ev.solution(ctx.cfg.p_max);
    std::ostringstream body;
    write_coefficients_csv(body, sol);
    write_prefixed(coeffs, body.str(), num(eps), header);
    json row{{"eps", eps}};
    for (int p = 0; p <= ctx.cfg.p_max; ++p) {
      double tail = 0.0;
      const double res = range_residual(ctx.model, ctx.omega, ev.solution(p).coeffs, eps, ctx.beta0, radius, &tail);
      resid << num(eps) << ',' << p << ',' << num(res) << ',' << num(tail) << '\n';
      row["residual"].push_back(res);
    }
    row["G_trees"] = vec_json(sol.G_trees);
    per_eps.push_back(row);
  }
  out.results["expand"] = per_eps;
}

void write_locked(std::ostream& os, double eps, const LockedPoint& lp) {
  auto put = [&](const char* q, std::size_t i, double v) { os << num(eps) << ',' << q << ',' << i << ',' << num(v) << '\n'; };
  for (std::size_t i = 0; i < lp.beta0_star.size(); ++i) put("beta0_star", i + 1, lp.beta0_star[i]);
  for (std::size_t i = 0; i < lp.grid_argmax.size(); ++i) put("grid_argmax", i + 1, lp.grid_argmax[i]);
  for (Eigen::Index i = 0; i < lp.lambda.size(); ++i) put("lambda", static_cast<std::size_t>(i) + 1, lp.lambda(i));
  put("L", 0, lp.L_value);
  put("G_norm", 0, lp.G_norm);
  put("newton_iterations", 0, lp.newton_iterations);
  put("degenerate", 0, lp.degenerate ? 1 : 0);
  put("converged", 0, lp.converged ? 1 : 0);
}

void write_grid(std::ostream& os, double eps, const LockedPoint& lp, int r, int N) {
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t idx = 0; idx < lp.grid_values.size(); ++idx) {
    os << num(eps);
    std::size_t rest = idx;
    std::vector<double> b(static_cast<std::size_t>(r));
    for (int i = r - 1; i >= 0; --i) {
      b[static_cast<std::size_t>(i)] = lp.grid_offset[static_cast<std::size_t>(i)] +
                                       two_pi * static_cast<double>(rest % static_cast<std::size_t>(N)) / N;
      rest /= static_cast<std::size_t>(N);
    }
    for (double v : b) os << ',' << num(v);
    if (r == 1) os << ",0";
    os << ',' << num(lp.grid_values[idx]) << '\n';
  }
}

json locked_json(double eps, const LockedPoint& lp) {
  return {{"eps", eps},
          {"beta0_star", lp.beta0_star},
          {"grid_argmax", lp.grid_argmax},
          {"L", lp.L_value},
          {"G_norm", lp.G_norm},
          {"lambda", vec_json(lp.lambda)},
          {"newton_iterations", lp.newton_iterations},
          {"degenerate", lp.degenerate},
          {"converged", lp.converged}};
}

void mode_solve(Context& ctx, Artifacts& art, Outcome& out) {
  const TreeCatalog& cat = ctx.trees();
  const int r = ctx.model.r();
  auto locked = art.open("locked.csv", "variational", "solve_bifurcation");
  locked << "eps,quantity,index,value\n";
  std::optional<std::ofstream> grid;
  if (r <= 2) {
    grid.emplace(art.open("L_grid.csv", "variational", "averaged_lagrangian"));
    *grid << "eps,beta1,beta2,L\n";
  }
  auto sol_os = art.open("solution.csv", "renorm", "resummed_solution");
  bool header = false;
  json per_eps = json::array();
  for (double eps : ctx.cfg.eps) {
    BifurcationProblem prob(cat, eps, ctx.cfg.p_max, ctx.settings);
    const LockedPoint lp = solve_bifurcation(prob);
    write_locked(locked, eps, lp);
    if (grid) write_grid(*grid, eps, lp, r, std::max(1, ctx.settings.grid));
    std::ostringstream body;
    write_coefficients_csv(body, prob.solution(lp.beta0_star));
    write_prefixed(sol_os, body.str(), num(eps), header);
    per_eps.push_back(locked_json(eps, lp));
    if (lp.degenerate) out.warnings.push_back("L is flat on the grid at eps = " + num(eps));
    if (!lp.converged) out.warnings.push_back("Newton did not reach a nondegenerate maximum at eps = " + num(eps));
  }
  out.results["solve"] = per_eps;
}

void mode_verify(Context& ctx, Artifacts& art, Outcome& out) {
  const TreeCatalog& cat = ctx.trees();
  const RunConfig& cfg = ctx.cfg;
  const Tolerances& tol = cfg.tol;
  auto os = art.open("verify.csv", "oracle", "verify");
  os << "eps,check,value,tolerance,pass\n";
  auto locked = art.open("locked.csv", "variational", "solve_bifurcation");
  locked << "eps,quantity,index,value\n";
  json per_eps = json::array();
  const std::vector<double> grid = divisor_grid(ctx.partition);
  const double id_tol = std::max(1e-8, 10.0 * tol.hessian_step * tol.hessian_step);

  for (double eps : cfg.eps) {
    json rows = json::array();
    auto check = [&](const std::string& name, double value, double bound, bool pass) {
      os << num(eps) << ',' << name << ',' << num(value) << ',' << num(bound) << ',' << (pass ? 1 : 0) << '\n';
      rows.push_back({{"check", name}, {"value", value}, {"tolerance", bound}, {"pass", pass}});
      if (!pass) out.checks_failed = true;
    };
    auto below = [&](const std::string& name, double value, double bound) {
      check(name, value, bound, value <= bound);
    };

    BifurcationProblem prob(cat, eps, cfg.p_max, ctx.settings);
    const LockedPoint lp = solve_bifurcation(prob);
    write_locked(locked, eps, lp);
    const std::vector<double>& beta = lp.beta0_star;
    const double gtol = g_tolerance(ctx.settings, eps);
    below("G_norm", lp.G_norm, gtol);
    below("hessian_max_eigenvalue", lp.lambda.size() ? lp.lambda.maxCoeff() : 0.0, tol.h_tol);

    Evaluator ev(cat, eps, beta);
    const Property1Report p1 = ev.property1_check(cfg.p_max, grid);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& [n, m] : p1.margin) margin = std::min(margin, m);
    check("property1_margin", margin, 1.0, p1.ok);

    const ResummedSolution sol = ev.solution(cfg.p_max);
    below("range_residual",
          range_residual(ctx.model, ctx.omega, sol.coeffs, eps, beta, composition_radius(cat, ctx.settings)),
          tol.oracle_agreement);

    for (int n = 0; n <= cfg.p_max; ++n) {
      const IdentityGaps g = identity_checks(cat, eps, beta, n, ctx.settings);
      below("identity_chain_dG_n" + std::to_string(n), g.chain_vs_dG, id_tol);
      below("identity_G_dL_n" + std::to_string(n), g.G_vs_dL, id_tol);
    }

    const PhaseLockReport pl = phase_lock_verify(prob, ctx.seq, tol.phase_lock);
    check("phase_lock_xi_min", pl.xi_neighbourhood_min, 1.0, pl.xi_ok);
    below("phase_lock_M_gap", pl.max_M_gap, tol.phase_lock);
    below("phase_lock_b_gap", pl.b_gap, tol.phase_lock);
    double bar_dist = 0.0;
    for (std::size_t i = 0; i < beta.size() && i < pl.beta0_bar.size(); ++i)
      bar_dist = std::max(bar_dist, std::fabs(wrap_angle(beta[i] - pl.beta0_bar[i])));
    below("phase_lock_beta0_distance", bar_dist, tol.phase_lock);
    if (!pl.failure.empty()) out.warnings.push_back("phase lock at eps = " + num(eps) + ": " + pl.failure);

    GalerkinProblem gp;
    gp.N = cfg.N;
    gp.eps = eps;
    gp.beta0 = beta;
    gp.newton_tol = tol.newton_tol;
    const GalerkinResult gr = galerkin_newton(gp, ctx.model, ctx.omega);
    below("galerkin_vs_trees", sup_difference(sol.coeffs, gr.b), tol.oracle_agreement);
    below("galerkin_residual", gr.residual, tol.oracle_agreement);

    const LindstedtSeries ls = lindstedt_expand(cfg.K, beta, ctx.model, ctx.omega, cfg.N);
    below("lindstedt_vs_trees", sup_difference(sol.coeffs, ls.sum(eps)), tol.oracle_agreement);

    OdeSettings ode;
    ode.T = cfg.ode_T;
    ode.tol = tol.ode_tol;
    const OdeResult orr = ode_residual(beta, to_complex(sol.coeffs), eps, ctx.omega, ctx.model, ode);
    below("ode_residual", orr.max_distance, tol.ode_bound);

    json e = locked_json(eps, lp);
    e["checks"] = rows;
    e["beta0_bar"] = pl.beta0_bar;
    per_eps.push_back(e);
  }
  out.results["verify"] = per_eps;
}

json error_record(const std::exception& ex, int code) {
  json rec{{"error", true}, {"exit_code", code}, {"message", ex.what()}};
  if (const auto* e = dynamic_cast<const Error*>(&ex)) rec["kind"] = e->kind();
  if (const auto* e = dynamic_cast<const NearSingularPropagator*>(&ex)) {
    rec["scale"] = e->scale();
    rec["x"] = e->x();
  }
  return rec;
}

int exit_code_for(const std::exception& ex) {
  if (dynamic_cast<const BudgetExceeded*>(&ex)) return kExitBudget;
  if (dynamic_cast<const ConfigError*>(&ex) || dynamic_cast<const ValidationError*>(&ex)) return kExitConfig;
  if (dynamic_cast<const NearSingularPropagator*>(&ex) || dynamic_cast<const ResonanceError*>(&ex) ||
      dynamic_cast<const ConvergenceError*>(&ex))
    return kExitMathRegion;
  return kExitCheckFailed;
}

void write_error(const fs::path& dir, const json& rec, std::ostream& err) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream os(dir / "error.json");
  if (os) os << rec.dump(2) << '\n';
  err << rec.dump() << '\n';
}

}  // namespace

void apply_options(RunConfig& cfg, const RunOptions& opt) {
  if (opt.mode) {
    const auto& modes = run_modes();
    if (std::find(modes.begin(), modes.end(), *opt.mode) == modes.end())
      throw ConfigError("unknown mode '" + *opt.mode + "'");
    cfg.mode = *opt.mode;
  }
  if (opt.out) cfg.output_dir = *opt.out;
  if (opt.workers) {
    if (*opt.workers == 0) throw ConfigError("workers must be positive");
    cfg.workers = *opt.workers;
  }
  if (opt.seed) cfg.seed = *opt.seed;
}

int run(const RunConfig& cfg, bool strict, std::ostream& log, std::ostream& err) {
  const fs::path dir = cfg.output_dir;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string hash = config_hash(cfg);
    const json echo = config_echo(cfg);
    Context ctx(cfg);
    Artifacts art(dir, hash, echo);
    Outcome out;
    if (cfg.mode == "bryuno") mode_bryuno(ctx, art, out);
    else if (cfg.mode == "trees") mode_trees(ctx, art, out);
    else if (cfg.mode == "selfenergy") mode_selfenergy(ctx, art, out);
    else if (cfg.mode == "expand") mode_expand(ctx, art, out);
    else if (cfg.mode == "solve") mode_solve(ctx, art, out);
    else if (cfg.mode == "verify") mode_verify(ctx, art, out);
    else throw ConfigError("unknown mode '" + cfg.mode + "'");

    int code = kExitOk;
    std::string status = "ok";
    if (out.math_failure) {
      code = kExitMathRegion;
      status = "property1_failure";
    } else if (out.checks_failed) {
      code = kExitCheckFailed;
      status = "checks_failed";
    } else if (strict && !out.warnings.empty()) {
      code = kExitCheckFailed;
      status = "warnings_as_errors";
    }
    json report{{"config", echo},     {"config_sha1", hash}, {"mode", cfg.mode},
                {"status", status},   {"exit_code", code},   {"results", out.results},
                {"warnings", out.warnings}, {"artifacts", art.manifest()}};
    {
      std::ofstream os(dir / "report.json");
      os << report.dump(2) << '\n';
    }
    if (out.math_failure) {
      json rec{{"error", true}, {"exit_code", code}, {"kind", "property1"}, {"message", *out.math_failure}};
      write_error(dir, rec, err);
    }
    for (const auto& w : out.warnings) log << "warning: " << w << '\n';
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << cfg.mode << ": " << status << " (" << art.manifest().size() << " artifacts in " << dir.string() << ", "
        << secs << " s)\n";
    return code;
  } catch (const std::exception& ex) {
    const int code = exit_code_for(ex);
    write_error(dir, error_record(ex, code), err);
    return code;
  }
}

int run_file(const std::string& path, const RunOptions& opt, std::ostream& log, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(path);
    apply_options(cfg, opt);
  } catch (const std::exception& ex) {
    const int code = exit_code_for(ex);
    write_error(opt.out.value_or("out"), error_record(ex, code), err);
    return code;
  }
  return run(cfg, opt.strict, log, err);
}

}  // namespace qpr
