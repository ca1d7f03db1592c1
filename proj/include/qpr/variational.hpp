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

// Averaged vector field and Lagrangian, range residual, bifurcation solve,
// variational identities and the phase-locking check.

#pragma once

#include "qpr/common.hpp"
#include "qpr/composition.hpp"
#include "qpr/renorm.hpp"
#include "qpr/trees.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qpr {

struct VariationalSettings {
  int composition_radius = 0;  // 0: (K + 2) * max |nu_v|
  int grid = 64;               // points per torus direction
  std::uint64_t seed = 0;      // nonzero: random offset of the grid
  double g_tol = -1.0;         // < 0: 1e-9 * max(eps, 1e-12)
  double h_tol = 1e-9;
  double hessian_step = 2e-3;  // h_beta for Hessians of L
  double jacobian_step = 1e-3;
  int newton_max_iter = 40;
  unsigned workers = 1;
};

int composition_radius(const TreeCatalog& catalog, const VariationalSettings& s);
double g_tolerance(const VariationalSettings& s, double eps);

struct AveragedValues {
  Vec G;               // [eps d_beta f(alpha, beta0 + b)]_0
  double L = 0.0;      // [-1/2 (w . d b)^2 + eps f]_0
  double tail = 0.0;   // composition truncation mass
};

AveragedValues averaged_values(const ForcingModel& model, const FrequencyVector& omega,
                               const CoefficientMap& b, double eps, std::span<const double> beta0,
                               int radius);

// sup over 0 < |nu| <= (support of b) + max |nu_v| of
// |(w.nu)^2 b_nu - eps [d_beta f(., beta0 + b)]_nu|.
double range_residual(const ForcingModel& model, const FrequencyVector& omega, const CoefficientMap& b,
                      double eps, std::span<const double> beta0, int radius, double* tail = nullptr);

struct VariationalReport {
  Vec G;
  double L = 0.0;
  Mat hessL;
  Vec lambda;
  double residual_norm = 0.0;
  double tail = 0.0;
};

// Truncated problem at fixed (eps, p): b = b^{<=p}(beta0) from the trees.
class BifurcationProblem {
 public:
  BifurcationProblem(const TreeCatalog& catalog, double eps, int p, VariationalSettings settings = {});

  const TreeCatalog& catalog() const { return *catalog_; }
  double eps() const { return eps_; }
  int p() const { return p_; }
  const VariationalSettings& settings() const { return settings_; }
  int radius() const { return radius_; }

  ResummedSolution solution(std::span<const double> beta0) const;
  AveragedValues values(std::span<const double> beta0) const;
  double L(std::span<const double> beta0) const { return values(beta0).L; }
  Vec G(std::span<const double> beta0) const { return values(beta0).G; }
  // d_beta0 G by fourth-order centered differences.
  Mat jacobian_G(std::span<const double> beta0) const;
  // d^2_beta0 L by centered differences with step h_beta (symmetrised).
  Mat hessian_L(std::span<const double> beta0) const;
  VariationalReport report(std::span<const double> beta0) const;

 private:
  const TreeCatalog* catalog_;
  double eps_;
  int p_;
  VariationalSettings settings_;
  int radius_;
};

struct LockedPoint {
  std::vector<double> beta0_star;
  std::vector<double> grid_argmax;
  std::vector<double> grid_offset;
  std::vector<double> grid_values;  // lexicographic, -inf where the expansion failed
  double eps = 0.0;
  double L_value = 0.0;
  Vec lambda;
  double G_norm = 0.0;
  int newton_iterations = 0;
  bool degenerate = false;
  bool converged = false;
};

// Grid search for the maximum of L (or of Lbar^[p] when aux is given),
// then Newton on G = 0 from the grid maximiser.
LockedPoint solve_bifurcation(const BifurcationProblem& problem, const ScaleSequences* aux_seq = nullptr);

struct IdentityGaps {
  double chain_vs_dG = 0.0;  // || chain^[n](0) - d G^{<=n} ||
  double G_vs_dL = 0.0;      // || G^{<=n} - d L^{<=n} ||
  double scale_M = 0.0;      // || chain^[n](0) ||
};

IdentityGaps identity_checks(const TreeCatalog& catalog, double eps, std::span<const double> beta0, int n,
                             const VariationalSettings& settings = {});

struct PhaseLockReport {
  std::vector<double> beta0_bar;
  std::vector<double> xi;          // xi_n at beta0_bar, n = 0..p
  double xi_neighbourhood_min = 1.0;  // min xi_n over sampled nearby beta0
  double max_M_gap = 0.0;          // max_n,x || Mbar^[n](x) - chain^[n](x) ||
  double b_gap = 0.0;              // sup || bbar - b ||
  double G_norm = 0.0;
  bool xi_ok = false;
  bool M_ok = false;
  bool b_ok = false;
  std::string failure;             // which check failed and at which scale
  bool ok() const { return xi_ok && M_ok && b_ok; }
};

PhaseLockReport phase_lock_verify(const BifurcationProblem& problem, const ScaleSequences& seq, double tol = 1e-8,
                                  int x_samples = 20);

}  // namespace qpr
