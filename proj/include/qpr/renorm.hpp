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

// Self-energies, resummed propagators, tree values and the truncated
// solution b^{<=p}; plus the auxiliary (cutoff) chain built from the
// averaged Lagrangian.

#pragma once

#include "qpr/common.hpp"
#include "qpr/composition.hpp"
#include "qpr/forcing.hpp"
#include "qpr/frequency.hpp"
#include "qpr/scalefun.hpp"
#include "qpr/trees.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace qpr {

using PropagatorFn = std::function<Mat(int n, double x)>;

// Smallest singular value of an r x r matrix.
double smallest_singular_value(const Mat& a);

// Sums over the tree catalog for a given family of line propagators.  Line
// vectors carry their eps^k factor and the propagator of their exiting line.
class TreeSums {
 public:
  TreeSums(const TreeCatalog& catalog, double eps, std::span<const double> beta0, PropagatorFn prop);

  const TreeCatalog& catalog() const { return *catalog_; }
  const NodeKernels& kernels() const { return kernels_; }
  double eps() const { return eps_; }

  const Vec& line_vector(int id);
  // Node vector (before the exiting propagator) of subtree id.
  Vec node_vector(int id);

  CoefficientMap b(int p);
  // [k] = eps^k b^[k] restricted to scales <= p; index 0 unused.
  std::vector<CoefficientMap> b_by_order(int p);
  // Averaged vector field from zero-momentum trees of order <= K+1.
  Vec G(int p);
  // [k] = eps^{k+1} G^[k], k = 0..K.
  std::vector<Vec> G_by_order(int p);

 private:
  Vec zero_root_vector(int index);

  const TreeCatalog* catalog_;
  double eps_;
  NodeKernels kernels_;
  PropagatorFn prop_;
  std::vector<std::optional<Vec>> memo_;
};

struct ResummedSolution {
  int d = 0;
  int r = 0;
  int K = 0;
  int p = 0;
  double eps = 0.0;
  std::vector<double> beta0;
  CoefficientMap coeffs;                   // b^{<=p}_nu, nu != 0
  std::vector<CoefficientMap> order_terms;  // [k] = eps^k b^[k]
  Vec G_trees;                             // sum_k eps^{k+1} G^[k]
  std::vector<Vec> G_order_terms;          // [k] = eps^{k+1} G^[k]
};

struct Property1Failure {
  int n = 0;
  double x = 0.0;
  double sigma_min = 0.0;
  double bound = 0.0;  // x^2 / 2
};

struct Property1Report {
  bool ok = true;
  std::vector<Property1Failure> failures;
  std::map<int, double> margin;  // per n: min over grid of sigma_min / (x^2/2)
};

// Resummed expansion at fixed (eps, beta0).  Not thread-safe; use one
// evaluator per (eps, beta0).
class Evaluator {
 public:
  Evaluator(const TreeCatalog& catalog, double eps, std::vector<double> beta0);

  const TreeCatalog& catalog() const { return *catalog_; }
  double eps() const { return eps_; }
  const std::vector<double>& beta0() const { return beta0_; }

  // M^[q](x): q = -1 is eps d^2 f_0(beta0); q >= 0 sums renormalised clusters.
  Mat self_energy(int q, double x);
  // M-chain^[n](x) = sum_{q=-1}^{n} chi_q(x) M^[q](x).
  Mat chain(int n, double x);
  // Psi_n(x) (x^2 1 - chain^[n-1](x))^{-1}; throws NearSingularPropagator when
  // the smallest singular value of x^2 1 - chain drops below x^2/2.
  Mat propagator(int n, double x);

  TreeSums& sums() { return *sums_; }
  ResummedSolution solution(int p);

  // Val(theta) without the eps^k prefactor, from explicit component labels.
  double tree_value(const LabelledTree& tree);

  Property1Report property1_check(int p, std::span<const double> x_grid);

 private:
  const TreeCatalog* catalog_;
  double eps_;
  std::vector<double> beta0_;
  NodeKernels kernels_;
  std::unique_ptr<TreeSums> sums_;
  std::map<std::pair<int, double>, Mat> se_memo_;
  std::map<std::pair<int, double>, Mat> prop_memo_;
};

// Self-energy of one cluster instance at leg divisor x.
Mat cluster_value(const TreeCatalog& catalog, const ClusterInstance& inst, double x, TreeSums& sums,
                  const PropagatorFn& prop);

struct AuxSettings {
  int composition_radius = 12;
  double hessian_step = 2e-3;
};

struct AuxSelfEnergy {
  Mat M;        // Mbar^[n](x)
  Mat hessian;  // d^2 Lbar^[n] (symmetrised)
  Vec lambda;   // eigenvalues of the Hessian, ascending
  double xi = 1.0;
  bool remainder_active = false;  // Rbar^[n] = chain(x) - chain(0) was used
};

// Auxiliary chain: cbar_n = 0, Rbar^[n](x) = chain^[n](x) - chain^[n](0) when
// the plain chain is computable at (eps, beta0), else 0.
class AuxiliaryChain {
 public:
  AuxiliaryChain(const TreeCatalog& catalog, const ScaleSequences& seq, double eps, AuxSettings settings = {});

  double eps() const { return eps_; }

  AuxSelfEnergy self_energy(int n, double x, std::span<const double> beta0);
  Mat propagator(int n, double x, std::span<const double> beta0);
  CoefficientMap b(int n, std::span<const double> beta0);
  double lagrangian(int n, std::span<const double> beta0);
  // Symmetrised Hessian of Lbar^[n] by centered differences.
  Mat hessian(int n, std::span<const double> beta0);
  double xi(int n, std::span<const double> beta0);

 private:
  Evaluator& plain(std::span<const double> beta0);

  const TreeCatalog* catalog_;
  const ScaleSequences* seq_;
  double eps_;
  AuxSettings settings_;
  std::map<std::vector<double>, std::unique_ptr<Evaluator>> plain_;
  std::map<std::pair<int, std::vector<double>>, double> lagr_memo_;
  std::map<std::pair<int, std::vector<double>>, Mat> hess_memo_;
};

void write_coefficients_csv(std::ostream& os, const ResummedSolution& sol);

struct SelfEnergyRow {
  int q = 0;
  double x = 0.0;
  Mat M;
};
void write_self_energy_csv(std::ostream& os, const std::vector<SelfEnergyRow>& rows);

}  // namespace qpr
