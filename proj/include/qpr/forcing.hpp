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

// Quasi-periodic forcing f(alpha, beta) on T^{d+r} stored as a finite Fourier
// sum  f = sum c_{nu,mu} exp(i nu.alpha + i mu.beta), together with the node
// factors built from its beta-derivatives.

#pragma once

#include "qpr/common.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace qpr {

struct ForcingTerm {
  Mode nu;  // alpha-mode, d components
  Mode mu;  // beta-mode, r components
  Complex coeff;
};

struct BetaTerm {
  Mode mu;
  Complex coeff;
};

class ForcingModel {
 public:
  ForcingModel(int d, int r, std::vector<ForcingTerm> terms, double phi0 = 1.0,
               double decay_xi = 0.0);

  int d() const { return d_; }
  int r() const { return r_; }
  double phi0() const { return phi0_; }
  double decay_xi() const { return decay_xi_; }
  const std::vector<ForcingTerm>& terms() const { return terms_; }

  // beta-Fourier data of f_nu; empty span if nu is not in the support.
  std::span<const BetaTerm> beta_terms(const Mode& nu) const;

  // alpha-modes whose f_nu depends on beta.  Only these can label a node:
  // every node factor carries at least one beta-derivative.
  const std::vector<Mode>& active_modes() const { return active_modes_; }
  const std::map<Mode, std::vector<BetaTerm>>& by_mode() const { return by_mode_; }

  int max_mode_l1() const { return max_mode_l1_; }

 private:
  int d_;
  int r_;
  double phi0_;
  double decay_xi_;
  std::vector<ForcingTerm> terms_;
  std::map<Mode, std::vector<BetaTerm>> by_mode_;
  std::vector<Mode> active_modes_;
  int max_mode_l1_ = 0;
};

struct ValidationReport {
  std::vector<std::string> parity_violations;
  std::vector<std::string> reality_violations;
  std::vector<std::string> decay_warnings;

  bool ok() const { return parity_violations.empty() && reality_violations.empty(); }
  std::string summary() const;
};

// Checks reality (conjugate partner), parity in alpha and the declared decay
// |c| <= phi0 exp(-xi(|nu| + |mu|)).  Decay problems are warnings only.
ValidationReport validate_model(const ForcingModel& model, double tol = 1e-14);

// Throws ValidationError with the report summary if validation fails.
void require_valid(const ForcingModel& model);

// d^{derivs} f_nu / d beta at beta; derivs lists component indices (0-based),
// repetitions allowed.  Missing nu returns 0.
Complex f_nu_deriv(const ForcingModel& model, const Mode& nu, std::span<const int> derivs,
                   std::span<const double> beta);

struct NodeLabels {
  Mode nu;
  int u = 0;               // component of the exiting line's lower index
  std::vector<int> e_list;  // component of each entering line
};

// (1/s!) d_{beta_u} prod_w d_{beta_{e_w}} f_nu(beta0); real for parity-valid models.
double node_factor(const ForcingModel& model, const NodeLabels& labels,
                   std::span<const double> beta0);

// Node kernels at fixed beta0: the weights c_mu exp(i mu.beta0) of every f_nu.
// contract() returns the r-vector
//   V[u] = Re sum_mu w_mu (i mu_u) prod_k (i mu . B_k)
// i.e. the symmetric derivative tensor of f_nu contracted with the vectors B_k.
class NodeKernels {
 public:
  NodeKernels(const ForcingModel& model, std::span<const double> beta0);

  int r() const { return r_; }
  Vec contract(const Mode& nu, std::span<const Vec* const> inputs) const;
  // Same with one extra entering line given column by column: out(u, e) uses
  // path.col(e) as that line's vector.
  Mat contract_path(const Mode& nu, std::span<const Vec* const> inputs, const Mat& path) const;

 private:
  struct Entry {
    std::vector<double> mu;  // r components as doubles
    Complex weight;
  };
  int r_;
  std::map<Mode, std::vector<Entry>> kernels_;
};

}  // namespace qpr
