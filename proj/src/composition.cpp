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

#include "qpr/composition.hpp"

#include <set>

namespace qpr {

std::vector<TrigSeries> to_series(const CoefficientMap& b, int d, int r, int radius) {
  std::vector<TrigSeries> out(static_cast<std::size_t>(r), TrigSeries(d, radius));
  for (const auto& [nu, v] : b) {
    if (nu.l1() > radius) continue;
    for (int j = 0; j < r; ++j) out[static_cast<std::size_t>(j)].add(nu, Complex{v(j), 0.0});
  }
  return out;
}

Composed compose_forcing(const ForcingModel& model, std::span<const double> beta0,
                         const std::vector<TrigSeries>& b, int radius, int derivs) {
  const int d = model.d();
  const int r = model.r();
  if (static_cast<int>(b.size()) != r) throw ValidationError("compose: b has wrong number of components");
  Composed out;
  out.f = TrigSeries(d, radius);
  if (derivs >= 1) out.grad.assign(static_cast<std::size_t>(r), TrigSeries(d, radius));
  if (derivs >= 2) out.hess.assign(static_cast<std::size_t>(r * r), TrigSeries(d, radius));

  std::set<Mode> mus;
  for (const ForcingTerm& t : model.terms()) mus.insert(t.mu);
  std::map<Mode, TrigSeries> expo;
  for (const Mode& mu : mus) {
    TrigSeries z(d, radius);
    for (int j = 0; j < r; ++j) {
      if (mu[j] == 0) continue;
      TrigSeries part(d, radius);
      part.add_shifted(b[static_cast<std::size_t>(j)], Mode{}, Complex{0.0, static_cast<double>(mu[j])});
      z += part;
    }
    expo.emplace(mu, TrigSeries::exp(z));
  }

  for (const ForcingTerm& t : model.terms()) {
    double phase = 0.0;
    for (int j = 0; j < r; ++j) phase += t.mu[j] * beta0[static_cast<std::size_t>(j)];
    const Complex w = t.coeff * std::polar(1.0, phase);
    const TrigSeries& E = expo.at(t.mu);
    out.f.add_shifted(E, t.nu, w);
    if (derivs >= 1) {
      for (int j = 0; j < r; ++j) {
        if (t.mu[j] == 0) continue;
        out.grad[static_cast<std::size_t>(j)].add_shifted(E, t.nu, w * Complex{0.0, static_cast<double>(t.mu[j])});
      }
    }
    if (derivs >= 2) {
      for (int j = 0; j < r; ++j)
        for (int e = 0; e < r; ++e) {
          const double m = static_cast<double>(t.mu[j] * t.mu[e]);
          if (m == 0.0) continue;
          out.hess[static_cast<std::size_t>(j * r + e)].add_shifted(E, t.nu, -m * w);
        }
    }
  }
  out.truncation = out.f.truncation_mass();
  for (const auto& g : out.grad) out.truncation = std::max(out.truncation, g.truncation_mass());
  return out;
}

double averaged_lagrangian(const ForcingModel& model, const FrequencyVector& omega,
                           const CoefficientMap& b, double eps, std::span<const double> beta0,
                           int radius) {
  double kinetic = 0.0;
  for (const auto& [nu, v] : b) {
    const double x = omega.dot(nu);
    kinetic += x * x * v.squaredNorm();
  }
  if (eps == 0.0) return -0.5 * kinetic;
  const Composed c = compose_forcing(model, beta0, to_series(b, model.d(), model.r(), radius), radius, 0);
  return eps * c.f.get(Mode{}).real() - 0.5 * kinetic;
}

}  // namespace qpr
