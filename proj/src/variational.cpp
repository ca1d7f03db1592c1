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

#include "qpr/variational.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace qpr {

namespace {

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

Vec sym_eigenvalues(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvalues();
}

std::vector<double> shifted(std::span<const double> b0, int i, double t) {
  std::vector<double> b(b0.begin(), b0.end());
  b[static_cast<std::size_t>(i)] += t;
  return b;
}

// Fourth-order centered derivative of a vector-valued function along axis i.
template <class F>
Vec centered_derivative(F&& f, std::span<const double> b0, int i, double h) {
  return (-f(shifted(b0, i, 2 * h)) + 8.0 * f(shifted(b0, i, h)) - 8.0 * f(shifted(b0, i, -h)) +
          f(shifted(b0, i, -2 * h))) /
         (12.0 * h);
}

template <class F>
Mat hessian_of(F&& L, std::span<const double> b0, double h) {
  const int r = static_cast<int>(b0.size());
  Mat H(r, r);
  const double L0 = L(std::vector<double>(b0.begin(), b0.end()));
  for (int i = 0; i < r; ++i) {
    H(i, i) = (-L(shifted(b0, i, 2 * h)) + 16 * L(shifted(b0, i, h)) - 30 * L0 + 16 * L(shifted(b0, i, -h)) -
               L(shifted(b0, i, -2 * h))) /
              (12 * h * h);
    for (int j = 0; j < i; ++j) {
      auto both = [&](double si, double sj) {
        auto b = shifted(b0, i, si);
        b[static_cast<std::size_t>(j)] += sj;
        return L(b);
      };
      H(i, j) = H(j, i) = (both(h, h) - both(h, -h) - both(-h, h) + both(-h, -h)) / (4 * h * h);
    }
  }
  return H;
}

}  // namespace

int composition_radius(const TreeCatalog& catalog, const VariationalSettings& s) {
  if (s.composition_radius > 0) return s.composition_radius;
  return (catalog.truncation().K + 2) * std::max(1, catalog.model().max_mode_l1());
}

double g_tolerance(const VariationalSettings& s, double eps) {
  return s.g_tol >= 0.0 ? s.g_tol : 1e-9 * std::max(std::fabs(eps), 1e-12);
}

AveragedValues averaged_values(const ForcingModel& model, const FrequencyVector& omega,
                               const CoefficientMap& b, double eps, std::span<const double> beta0,
                               int radius) {
  AveragedValues out;
  const int r = model.r();
  out.G = Vec::Zero(r);
  double kinetic = 0.0;
  for (const auto& [nu, v] : b) {
    const double x = omega.dot(nu);
    kinetic += x * x * v.squaredNorm();
  }
  out.L = -0.5 * kinetic;
  if (eps == 0.0) return out;
  const Composed c = compose_forcing(model, beta0, to_series(b, model.d(), r, radius), radius, 1);
  out.L += eps * c.f.get(Mode{}).real();
  for (int j = 0; j < r; ++j) out.G(j) = eps * c.grad[static_cast<std::size_t>(j)].get(Mode{}).real();
  out.tail = c.truncation;
  return out;
}

double range_residual(const ForcingModel& model, const FrequencyVector& omega, const CoefficientMap& b,
                      double eps, std::span<const double> beta0, int radius, double* tail) {
  const int r = model.r();
  // Modes reached one order beyond the support of b.
  int rb = 0;
  for (const auto& [nu, v] : b) rb = std::max(rb, nu.l1());
  rb += std::max(1, model.max_mode_l1());
  if (rb >= radius) throw ValidationError("range residual: composition radius must exceed the support of b");
  const Composed c = compose_forcing(model, beta0, to_series(b, model.d(), r, radius), radius, 1);
  if (tail) *tail = c.truncation;
  double worst = 0.0;
  for (const Mode& nu : nonzero_modes(model.d(), rb)) {
    const double x = omega.dot(nu);
    auto it = b.find(nu);
    for (int j = 0; j < r; ++j) {
      const double bj = it == b.end() ? 0.0 : it->second(j);
      const Complex res = x * x * bj - eps * c.grad[static_cast<std::size_t>(j)].get(nu);
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

BifurcationProblem::BifurcationProblem(const TreeCatalog& catalog, double eps, int p, VariationalSettings settings)
    : catalog_(&catalog), eps_(eps), p_(p), settings_(settings), radius_(composition_radius(catalog, settings)) {
  if (p < 0 || p > catalog.truncation().p_max) throw ConfigError("scale p outside [0, p_max]");
}

ResummedSolution BifurcationProblem::solution(std::span<const double> beta0) const {
  Evaluator ev(*catalog_, eps_, std::vector<double>(beta0.begin(), beta0.end()));
  return ev.solution(p_);
}

AveragedValues BifurcationProblem::values(std::span<const double> beta0) const {
  const ResummedSolution sol = solution(beta0);
  return averaged_values(catalog_->model(), catalog_->omega(), sol.coeffs, eps_, beta0, radius_);
}

Mat BifurcationProblem::jacobian_G(std::span<const double> beta0) const {
  const int r = catalog_->model().r();
  Mat J(r, r);
  auto g = [&](const std::vector<double>& b) { return G(b); };
  for (int i = 0; i < r; ++i) J.col(i) = centered_derivative(g, beta0, i, settings_.jacobian_step);
  return J;
}

Mat BifurcationProblem::hessian_L(std::span<const double> beta0) const {
  return hessian_of([&](const std::vector<double>& b) { return L(b); }, beta0, settings_.hessian_step);
}

VariationalReport BifurcationProblem::report(std::span<const double> beta0) const {
  VariationalReport rep;
  const ResummedSolution sol = solution(beta0);
  const AveragedValues v = averaged_values(catalog_->model(), catalog_->omega(), sol.coeffs, eps_, beta0, radius_);
  rep.G = v.G;
  rep.L = v.L;
  rep.tail = v.tail;
  rep.hessL = hessian_L(beta0);
  rep.hessL = 0.5 * (rep.hessL + rep.hessL.transpose()).eval();
  rep.lambda = sym_eigenvalues(rep.hessL);
  rep.residual_norm = range_residual(catalog_->model(), catalog_->omega(), sol.coeffs, eps_, beta0, radius_);
  return rep;
}

// ---------------------------------------------------------------------------

LockedPoint solve_bifurcation(const BifurcationProblem& problem, const ScaleSequences* aux_seq) {
  const TreeCatalog& cat = problem.catalog();
  const VariationalSettings& s = problem.settings();
  const int r = cat.model().r();
  const int N = std::max(1, s.grid);
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<double> offset(static_cast<std::size_t>(r), 0.0);
  if (s.seed != 0) {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(0.0, two_pi / N);
    for (auto& o : offset) o = u(rng);
  }
  std::size_t total = 1;
  for (int i = 0; i < r; ++i) total *= static_cast<std::size_t>(N);
  auto point = [&](std::size_t idx) {
    std::vector<double> b(static_cast<std::size_t>(r));
    for (int i = r - 1; i >= 0; --i) {
      b[static_cast<std::size_t>(i)] = offset[static_cast<std::size_t>(i)] + two_pi * static_cast<double>(idx % N) / N;
      idx /= static_cast<std::size_t>(N);
    }
    return b;
  };

  std::vector<double> values(total, -std::numeric_limits<double>::infinity());
  const unsigned workers = std::max(1u, s.workers);
  auto work = [&](unsigned w) {
    std::unique_ptr<AuxiliaryChain> aux;
    if (aux_seq)
      aux = std::make_unique<AuxiliaryChain>(cat, *aux_seq, problem.eps(),
                                             AuxSettings{problem.radius(), s.hessian_step});
    for (std::size_t i = w; i < total; i += workers) {
      const auto b = point(i);
      try {
        values[i] = aux ? aux->lagrangian(problem.p(), b) : problem.L(b);
      } catch (const NearSingularPropagator&) {
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  std::size_t best = 0;
  double vmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < total; ++i) {
    if (values[i] > values[best]) best = i;
    if (std::isfinite(values[i])) vmin = std::min(vmin, values[i]);
  }
  if (!std::isfinite(values[best])) throw ConvergenceError("no grid point admits the resummed expansion");

  LockedPoint lp;
  lp.eps = problem.eps();
  lp.grid_argmax = point(best);
  lp.grid_offset = offset;
  lp.grid_values = values;
  const double vmax = values[best];
  lp.degenerate = vmax - vmin <= 1e-13 * std::max(std::fabs(vmax), 1e-300) || vmax == vmin;

  std::vector<double> beta = lp.grid_argmax;
  const double gtol = g_tolerance(s, problem.eps());
  Vec g = problem.G(beta);
  if (!lp.degenerate) {
    for (int it = 0; it < s.newton_max_iter && g.norm() > gtol; ++it) {
      const Mat J = problem.jacobian_G(beta);
      const Vec step = -J.fullPivLu().solve(g);
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        std::vector<double> trial = beta;
        for (int i = 0; i < r; ++i) trial[static_cast<std::size_t>(i)] += t * step(i);
        try {
          const Vec gt = problem.G(trial);
          if (gt.norm() < g.norm()) {
            beta = trial;
            g = gt;
            moved = true;
            break;
          }
        } catch (const NearSingularPropagator&) {
        }
      }
      lp.newton_iterations = it + 1;
      if (!moved) break;
    }
  }
  for (auto& b : beta) b = wrap_angle(b);
  lp.beta0_star = beta;
  g = problem.G(beta);
  lp.G_norm = g.norm();
  lp.L_value = problem.L(beta);
  lp.lambda = sym_eigenvalues(problem.jacobian_G(beta));
  lp.converged = lp.G_norm <= gtol && (lp.lambda.size() == 0 || lp.lambda.maxCoeff() <= s.h_tol);
  return lp;
}

// ---------------------------------------------------------------------------

IdentityGaps identity_checks(const TreeCatalog& catalog, double eps, std::span<const double> beta0, int n,
                             const VariationalSettings& settings) {
  BifurcationProblem prob(catalog, eps, n, settings);
  Evaluator ev(catalog, eps, std::vector<double>(beta0.begin(), beta0.end()));
  const Mat chain0 = ev.chain(n, 0.0);
  const Mat dG = prob.jacobian_G(beta0);
  const int r = catalog.model().r();
  Vec dL(r);
  auto L = [&](const std::vector<double>& b) {
    Vec v(1);
    v(0) = prob.L(b);
    return v;
  };
  for (int i = 0; i < r; ++i) dL(i) = centered_derivative(L, beta0, i, settings.jacobian_step)(0);
  IdentityGaps gaps;
  gaps.chain_vs_dG = spectral_norm(chain0 - dG);
  gaps.G_vs_dL = (prob.G(beta0) - dL).norm();
  gaps.scale_M = spectral_norm(chain0);
  return gaps;
}

PhaseLockReport phase_lock_verify(const BifurcationProblem& problem, const ScaleSequences& seq, double tol,
                                  int x_samples) {
  const TreeCatalog& cat = problem.catalog();
  const int p = problem.p();
  const int r = cat.model().r();
  PhaseLockReport rep;
  const LockedPoint lp = solve_bifurcation(problem, &seq);
  rep.beta0_bar = lp.beta0_star;
  rep.G_norm = lp.G_norm;
  AuxiliaryChain aux(cat, seq, problem.eps(), AuxSettings{problem.radius(), problem.settings().hessian_step});

  rep.xi_ok = true;
  for (int n = 0; n <= p; ++n) {
    const double x = aux.xi(n, rep.beta0_bar);
    rep.xi.push_back(x);
    if (x != 1.0 && rep.xi_ok) {
      rep.xi_ok = false;
      rep.failure = "xi_" + std::to_string(n) + " = " + std::to_string(x) + " at the locked point";
    }
    const double a = seq.alpha_at_scale(n + 1);
    for (int i = 0; i < r; ++i)
      for (double sgn : {-1.0, 1.0}) {
        const double v = aux.xi(n, shifted(rep.beta0_bar, i, sgn * a * a));
        rep.xi_neighbourhood_min = std::min(rep.xi_neighbourhood_min, v);
      }
    if (rep.xi_neighbourhood_min != 1.0 && rep.xi_ok) {
      rep.xi_ok = false;
      rep.failure = "xi_" + std::to_string(n) + " < 1 near the locked point";
    }
  }

  Evaluator ev(cat, problem.eps(), rep.beta0_bar);
  std::vector<double> xs;
  const auto divisors = cat.line_divisors();
  if (!divisors.empty()) {
    const int m = std::min<int>(x_samples, static_cast<int>(divisors.size()));
    for (int i = 0; i < m; ++i)
      xs.push_back(divisors[static_cast<std::size_t>(i) * (divisors.size() - 1) / std::max(1, m - 1)]);
  }
  rep.M_ok = true;
  for (int n = 0; n <= p; ++n) {
    for (double x : xs) {
      const AuxSelfEnergy S = aux.self_energy(n, x, rep.beta0_bar);
      double gap = std::numeric_limits<double>::infinity();
      if (S.remainder_active) {
        try {
          gap = spectral_norm(S.M - ev.chain(n, x));
        } catch (const NearSingularPropagator&) {
        }
      }
      rep.max_M_gap = std::max(rep.max_M_gap, gap);
      if (!(gap <= tol) && rep.M_ok) {
        rep.M_ok = false;
        if (rep.failure.empty()) rep.failure = "Mbar differs from M on scale " + std::to_string(n);
      }
    }
  }

  const CoefficientMap bbar = aux.b(p, rep.beta0_bar);
  const CoefficientMap b = ev.solution(p).coeffs;
  for (const auto& [nu, v] : b) {
    auto it = bbar.find(nu);
    const Vec other = it == bbar.end() ? Vec::Zero(r) : it->second;
    rep.b_gap = std::max(rep.b_gap, (v - other).cwiseAbs().maxCoeff());
  }
  for (const auto& [nu, v] : bbar)
    if (!b.count(nu)) rep.b_gap = std::max(rep.b_gap, v.cwiseAbs().maxCoeff());
  rep.b_ok = rep.b_gap <= tol;
  if (!rep.b_ok && rep.failure.empty()) rep.failure = "bbar differs from b on scale " + std::to_string(p);
  return rep;
}

}  // namespace qpr
