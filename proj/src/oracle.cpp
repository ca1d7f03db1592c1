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

#include "qpr/oracle.hpp"

#include "qpr/trig_series.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <algorithm>
#include <set>

namespace qpr {

namespace {

std::vector<TrigSeries> series_of(const ComplexCoefficients& b, int d, int r, int radius) {
  std::vector<TrigSeries> out(static_cast<std::size_t>(r), TrigSeries(d, radius));
  for (const auto& [nu, v] : b)
    for (int j = 0; j < r; ++j) out[static_cast<std::size_t>(j)].add(nu, v(j));
  return out;
}

void check_divisors(const std::vector<Mode>& modes, const FrequencyVector& omega, int d) {
  for (const Mode& nu : modes)
    if (std::fabs(omega.dot(nu)) < 1e-13)
      throw ResonanceError("near-resonant divisor at nu=" + to_string(nu, d));
}

}  // namespace

ComplexCoefficients to_complex(const CoefficientMap& b) {
  ComplexCoefficients out;
  for (const auto& [nu, v] : b) out.emplace(nu, v.cast<Complex>());
  return out;
}

double sup_difference(const CoefficientMap& a, const ComplexCoefficients& b) {
  double worst = 0.0;
  for (const auto& [nu, v] : a) {
    auto it = b.find(nu);
    if (it == b.end()) continue;
    worst = std::max(worst, (v.cast<Complex>() - it->second).cwiseAbs().maxCoeff());
  }
  return worst;
}

GalerkinResult galerkin_newton(const GalerkinProblem& problem, const ForcingModel& model,
                               const FrequencyVector& omega) {
  const int d = model.d();
  const int r = model.r();
  if (static_cast<int>(problem.beta0.size()) != r) throw ConfigError("galerkin: beta0 must have r components");
  if (problem.N < 1) throw ConfigError("galerkin: mode radius must be positive");
  const std::vector<Mode> modes = nonzero_modes(d, problem.N);
  check_divisors(modes, omega, d);
  const int n = static_cast<int>(modes.size()) * r;
  const int radius = 2 * problem.N + std::max(1, model.max_mode_l1());

  GalerkinResult res;
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  if (problem.warm_start) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      auto it = problem.warm_start->find(modes[i]);
      if (it != problem.warm_start->end()) u.segment(static_cast<Eigen::Index>(i) * r, r) = it->second;
    }
  }
  auto unpack = [&](const Eigen::VectorXcd& v) {
    ComplexCoefficients b;
    for (std::size_t i = 0; i < modes.size(); ++i)
      b.emplace(modes[i], v.segment(static_cast<Eigen::Index>(i) * r, r));
    return b;
  };

  auto residual = [&](const Composed& c, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd F(n);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const double x = omega.dot(modes[i]);
      for (int j = 0; j < r; ++j) {
        const auto k = static_cast<Eigen::Index>(i) * r + j;
        F(k) = x * x * v(k) - problem.eps * c.grad[static_cast<std::size_t>(j)].get(modes[i]);
      }
    }
    return F;
  };

  for (int it = 0;; ++it) {
    const Composed c =
        compose_forcing(model, problem.beta0, series_of(unpack(u), d, r, radius), radius, 2);
    const Eigen::VectorXcd F = residual(c, u);
    res.residual = F.cwiseAbs().maxCoeff();
    res.iterations = it;
    if (res.residual <= problem.newton_tol) break;
    if (it >= problem.max_iter)
      throw ConvergenceError("galerkin-newton did not converge in " + std::to_string(problem.max_iter) +
                             " iterations (residual " + std::to_string(res.residual) + ")");
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const double x = omega.dot(modes[i]);
      for (std::size_t k = 0; k < modes.size(); ++k) {
        const Mode diff = modes[i] - modes[k];
        for (int j = 0; j < r; ++j)
          for (int e = 0; e < r; ++e) {
            const auto row = static_cast<Eigen::Index>(i) * r + j;
            const auto col = static_cast<Eigen::Index>(k) * r + e;
            J(row, col) = -problem.eps * c.hess[static_cast<std::size_t>(j * r + e)].get(diff);
            if (i == k && j == e) J(row, col) += x * x;
          }
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
    res.rcond = lu.rcond();
    const Eigen::VectorXcd step = lu.solve(F);
    u -= step;
    if (step.cwiseAbs().maxCoeff() == 0.0) {
      res.iterations = it + 1;
      break;
    }
  }
  res.b = unpack(u);
  return res;
}

// ---------------------------------------------------------------------------

ComplexCoefficients LindstedtSeries::sum(double eps) const {
  ComplexCoefficients out;
  double pw = 1.0;
  for (std::size_t k = 1; k < orders.size(); ++k) {
    pw *= eps;
    for (const auto& [nu, v] : orders[k]) {
      auto it = out.find(nu);
      if (it == out.end()) out.emplace(nu, pw * v);
      else it->second += pw * v;
    }
  }
  return out;
}

LindstedtSeries lindstedt_expand(int K, std::span<const double> beta0, const ForcingModel& model,
                                 const FrequencyVector& omega, int N) {
  const int d = model.d();
  const int r = model.r();
  if (K < 1) throw ConfigError("lindstedt: order must be >= 1");
  const std::vector<Mode> modes = nonzero_modes(d, N);
  check_divisors(modes, omega, d);
  const int radius = N + std::max(1, model.max_mode_l1());

  std::set<Mode> mu_set;
  for (const ForcingTerm& t : model.terms()) mu_set.insert(t.mu);
  const std::vector<Mode> mus(mu_set.begin(), mu_set.end());

  // E[m][k]: coefficient of eps^k in exp(i mu_m . b).  k E_k = sum_j j Z_j E_{k-j}.
  std::vector<std::vector<TrigSeries>> E(mus.size());
  std::vector<std::vector<TrigSeries>> Z(mus.size());
  for (std::size_t m = 0; m < mus.size(); ++m) {
    TrigSeries one(d, radius);
    one.set(Mode{}, Complex{1.0, 0.0});
    E[m].push_back(one);
    Z[m].push_back(TrigSeries(d, radius));
  }

  LindstedtSeries out;
  out.orders.resize(static_cast<std::size_t>(K) + 1);
  for (int k = 1; k <= K; ++k) {
    // order k-1 of d_beta f(alpha, beta0 + b)
    std::vector<TrigSeries> grad(static_cast<std::size_t>(r), TrigSeries(d, radius));
    for (const ForcingTerm& t : model.terms()) {
      const std::size_t m = static_cast<std::size_t>(std::find(mus.begin(), mus.end(), t.mu) - mus.begin());
      double phase = 0.0;
      for (int j = 0; j < r; ++j) phase += t.mu[j] * beta0[static_cast<std::size_t>(j)];
      const Complex w = t.coeff * std::polar(1.0, phase);
      for (int j = 0; j < r; ++j) {
        if (t.mu[j] == 0) continue;
        grad[static_cast<std::size_t>(j)].add_shifted(E[m][static_cast<std::size_t>(k - 1)], t.nu,
                                                      w * Complex{0.0, static_cast<double>(t.mu[j])});
      }
    }
    ComplexCoefficients bk;
    for (const Mode& nu : modes) {
      const double x = omega.dot(nu);
      Eigen::VectorXcd v(r);
      bool nonzero = false;
      for (int j = 0; j < r; ++j) {
        v(j) = grad[static_cast<std::size_t>(j)].get(nu) / (x * x);
        if (v(j) != Complex{}) nonzero = true;
      }
      if (nonzero) bk.emplace(nu, v);
    }
    out.orders[static_cast<std::size_t>(k)] = bk;
    if (k == K) break;
    // extend the exponential series to order k
    for (std::size_t m = 0; m < mus.size(); ++m) {
      TrigSeries z(d, radius);
      for (const auto& [nu, v] : bk) {
        Complex s{};
        for (int j = 0; j < r; ++j) s += Complex{0.0, static_cast<double>(mus[m][j])} * v(j);
        z.add(nu, s);
      }
      Z[m].push_back(z);
      TrigSeries ek(d, radius);
      for (int j = 1; j <= k; ++j) {
        TrigSeries prod = Z[m][static_cast<std::size_t>(j)] * E[m][static_cast<std::size_t>(k - j)];
        ek.add_shifted(prod, Mode{}, Complex{static_cast<double>(j) / k, 0.0});
      }
      E[m].push_back(ek);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

OdeResult ode_residual(std::span<const double> beta0, const ComplexCoefficients& b, double eps,
                       const FrequencyVector& omega, const ForcingModel& model, const OdeSettings& settings) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const int r = model.r();
  const int d = model.d();

  auto curve = [&](double t, State& pos, State& vel) {
    pos.assign(beta0.begin(), beta0.end());
    vel.assign(static_cast<std::size_t>(r), 0.0);
    for (const auto& [nu, v] : b) {
      const double x = omega.dot(nu);
      const Complex e = std::polar(1.0, x * t);
      for (int j = 0; j < r; ++j) {
        pos[static_cast<std::size_t>(j)] += (v(j) * e).real();
        vel[static_cast<std::size_t>(j)] += (Complex{0.0, x} * v(j) * e).real();
      }
    }
  };

  auto rhs = [&](const State& s, State& ds, double t) {
    for (int j = 0; j < r; ++j) {
      ds[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(r + j)];
      ds[static_cast<std::size_t>(r + j)] = 0.0;
    }
    for (const ForcingTerm& term : model.terms()) {
      double phase = 0.0;
      for (int i = 0; i < d; ++i) phase += term.nu[i] * omega[i] * t;
      for (int j = 0; j < r; ++j) phase += term.mu[j] * s[static_cast<std::size_t>(j)];
      const Complex w = term.coeff * std::polar(1.0, phase);
      for (int j = 0; j < r; ++j)
        if (term.mu[j] != 0)
          ds[static_cast<std::size_t>(r + j)] -= eps * (Complex{0.0, static_cast<double>(term.mu[j])} * w).real();
    }
  };

  State pos, vel;
  curve(0.0, pos, vel);
  State s(static_cast<std::size_t>(2 * r));
  for (int j = 0; j < r; ++j) {
    s[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j)];
    s[static_cast<std::size_t>(r + j)] = vel[static_cast<std::size_t>(j)];
  }

  std::vector<double> times;
  for (double t = 0.0; t < settings.T; t += settings.sample_dt) times.push_back(t);
  times.push_back(settings.T);

  OdeResult res;
  auto stepper = odeint::make_controlled(settings.tol, settings.tol, odeint::runge_kutta_fehlberg78<State>());
  auto observer = [&](const State& x, double t) {
    State p, v;
    curve(t, p, v);
    double dist = 0.0;
    for (int j = 0; j < r; ++j)
      dist = std::max(dist, std::fabs(wrap_angle(x[static_cast<std::size_t>(j)] - p[static_cast<std::size_t>(j)])));
    if (dist > res.max_distance) {
      res.max_distance = dist;
      res.worst_time = t;
    }
    ++res.samples;
  };
  odeint::integrate_times(stepper, rhs, s, times.begin(), times.end(), settings.sample_dt / 4, observer);
  return res;
}

}  // namespace qpr
