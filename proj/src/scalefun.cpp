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

#include "qpr/scalefun.hpp"

#include <cmath>

namespace qpr {

namespace {
double g(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = g(t);
  const double b = g(1.0 - t);
  return a / (a + b);
}

double mollifier_chi(double x) {
  const double ax = std::fabs(x);
  if (ax <= 0.5) return 1.0;
  if (ax >= 1.0) return 0.0;
  return smooth_step(2.0 * (1.0 - ax));
}

Partition::Partition(std::vector<double> rho) : rho_(std::move(rho)) {
  if (rho_.empty()) throw ValidationError("partition needs at least rho_0");
  for (std::size_t n = 0; n < rho_.size(); ++n) {
    if (!(rho_[n] > 0.0)) throw ValidationError("rho_n must be positive");
    if (n > 0 && rho_[n] > rho_[n - 1] / 2.0)
      throw ValidationError("partition requires rho_{n+1} <= rho_n / 2 (violated at n=" +
                            std::to_string(n - 1) + ")");
  }
}

double Partition::rho(int n) const {
  if (n < 0 || n > max_scale())
    throw BudgetExceeded("scale " + std::to_string(n) + " beyond resolved scales (max " +
                         std::to_string(max_scale()) + ")");
  return rho_[static_cast<std::size_t>(n)];
}

double Partition::chi(int n, double x) const {
  if (n < 0) return 1.0;
  return mollifier_chi(x / rho(n));
}

double Partition::psi(int n, double x) const {
  if (n < -1) throw ValidationError("Psi_n needs n >= -1");
  if (n == -1) return 0.0;  // zero-momentum root line: Kronecker delta, not a Psi weight
  return chi(n - 1, x) - chi(n, x);
}

std::vector<int> Partition::scales_of(double x, int n_cap) const {
  if (x == 0.0) throw ValidationError("scales_of: zero divisor has no scale");
  std::vector<int> out;
  const int cap = std::min(n_cap, max_scale());
  for (int n = 0; n <= cap; ++n) {
    if (psi(n, x) > 0.0) out.push_back(n);
  }
  return out;
}

CutoffThresholds CutoffThresholds::for_scale(const ScaleSequences& seq, int n) {
  if (n < 0 || n + 1 > seq.n_max())
    throw BudgetExceeded("cutoff thresholds need m_{n+1} for n=" + std::to_string(n));
  const double a = seq.alpha_at_scale(n + 1);
  CutoffThresholds t;
  t.hi = a * a / 2048.0;
  t.lo = a * a / 4096.0;
  return t;
}

double cutoff_xi(std::span<const double> lambda, const CutoffThresholds* thresholds) {
  if (thresholds == nullptr) return 1.0;
  const double width = thresholds->hi - thresholds->lo;
  double out = 1.0;
  for (double l : lambda) {
    if (l >= thresholds->hi) return 0.0;
    if (l <= thresholds->lo) continue;
    out *= smooth_step((thresholds->hi - l) / width);
  }
  return out;
}

}  // namespace qpr
