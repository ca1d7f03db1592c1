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

// Smooth partition of unity on divisor magnitudes and eigenvalue cutoffs.
//
//   chi(x)   = 1 for |x| <= 1/2, 0 for |x| >= 1, h(2(1-|x|)) in between,
//   h(t)     = g(t) / (g(t) + g(1-t)),  g(t) = exp(-1/t) for t > 0, else 0,
//   chi_n(x) = chi(x / rho_n) for n >= 0,  chi_{-1} = 1,
//   Psi_n    = chi_{n-1} - chi_n.

#pragma once

#include "qpr/common.hpp"
#include "qpr/frequency.hpp"

#include <span>
#include <vector>

namespace qpr {

// C^infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

double mollifier_chi(double x);

class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<double> rho);
  explicit Partition(const ScaleSequences& seq) : Partition(seq.rho) {}

  // Highest n for which chi_n (hence Psi_n) is defined.
  int max_scale() const { return static_cast<int>(rho_.size()) - 1; }
  double rho(int n) const;
  const std::vector<double>& rhos() const { return rho_; }

  double chi(int n, double x) const;
  double psi(int n, double x) const;

  // { n in [0, n_cap] : Psi_n(x) > 0 }.  At most two consecutive scales.
  // Throws ValidationError for x == 0.
  std::vector<int> scales_of(double x, int n_cap) const;
  std::vector<int> scales_of(double x) const { return scales_of(x, max_scale()); }

 private:
  std::vector<double> rho_;
};

struct CutoffThresholds {
  double hi = 0.0;  // alpha_{m_{n+1}}^2 / 2^11
  double lo = 0.0;  // alpha_{m_{n+1}}^2 / 2^12

  static CutoffThresholds for_scale(const ScaleSequences& seq, int n);
};

// xi_n(lambda): 0 if some lambda_i >= hi, 1 if all lambda_i <= lo, product of
// smooth steps in between.  Pass nullptr thresholds for xi_{-1} == 1.
double cutoff_xi(std::span<const double> lambda, const CutoffThresholds* thresholds);

}  // namespace qpr
