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

#include "qpr/renorm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace qpr {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string mode_columns(const Mode& m, int d) {
  std::string s;
  for (int i = 0; i < d; ++i) {
    if (i) s += ',';
    s += std::to_string(m[i]);
  }
  return s;
}

std::vector<const Vec*> child_vectors(const std::vector<int>& children, TreeSums& sums) {
  std::vector<const Vec*> in;
  in.reserve(children.size());
  for (int c : children) in.push_back(&sums.line_vector(c));
  return in;
}

}  // namespace

double smallest_singular_value(const Mat& a) {
  if (a.rows() == 1) return std::fabs(a(0, 0));
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues().minCoeff();
}

// ---------------------------------------------------------------------------

TreeSums::TreeSums(const TreeCatalog& catalog, double eps, std::span<const double> beta0, PropagatorFn prop)
    : catalog_(&catalog),
      eps_(eps),
      kernels_(catalog.model(), beta0),
      prop_(std::move(prop)),
      memo_(catalog.subtrees().size()) {}

Vec TreeSums::node_vector(int id) {
  const Subtree& s = catalog_->subtrees()[static_cast<std::size_t>(id)];
  const auto in = child_vectors(s.children, *this);
  return eps_ * s.weight * kernels_.contract(s.mode, in);
}

const Vec& TreeSums::line_vector(int id) {
  auto& slot = memo_[static_cast<std::size_t>(id)];
  if (!slot) {
    const Subtree& s = catalog_->subtrees()[static_cast<std::size_t>(id)];
    Vec v = node_vector(id);
    slot = prop_(s.scale, s.divisor) * v;
  }
  return *slot;
}

Vec TreeSums::zero_root_vector(int index) {
  const ZeroRoot& z = catalog_->zero_roots()[static_cast<std::size_t>(index)];
  const auto in = child_vectors(z.children, *this);
  return eps_ * z.weight * kernels_.contract(z.mode, in);
}

CoefficientMap TreeSums::b(int p) {
  CoefficientMap out;
  const auto& subs = catalog_->subtrees();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i].max_scale > p) continue;
    const Vec& v = line_vector(static_cast<int>(i));
    auto it = out.find(subs[i].momentum);
    if (it == out.end()) out.emplace(subs[i].momentum, v);
    else it->second += v;
  }
  return out;
}

std::vector<CoefficientMap> TreeSums::b_by_order(int p) {
  std::vector<CoefficientMap> out(static_cast<std::size_t>(catalog_->truncation().K) + 1);
  const auto& subs = catalog_->subtrees();
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i].max_scale > p) continue;
    const Vec& v = line_vector(static_cast<int>(i));
    auto& m = out[static_cast<std::size_t>(subs[i].order)];
    auto it = m.find(subs[i].momentum);
    if (it == m.end()) m.emplace(subs[i].momentum, v);
    else it->second += v;
  }
  return out;
}

Vec TreeSums::G(int p) {
  Vec g = Vec::Zero(catalog_->model().r());
  const auto& roots = catalog_->zero_roots();
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (roots[i].max_scale <= p) g += zero_root_vector(static_cast<int>(i));
  return g;
}

std::vector<Vec> TreeSums::G_by_order(int p) {
  const int K = catalog_->truncation().K;
  std::vector<Vec> out(static_cast<std::size_t>(K) + 1, Vec::Zero(catalog_->model().r()));
  const auto& roots = catalog_->zero_roots();
  for (std::size_t i = 0; i < roots.size(); ++i)
    if (roots[i].max_scale <= p)
      out[static_cast<std::size_t>(roots[i].order - 1)] += zero_root_vector(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------------------

Mat cluster_value(const TreeCatalog& catalog, const ClusterInstance& inst, double x, TreeSums& sums,
                  const PropagatorFn& prop) {
  const int r = catalog.model().r();
  const auto path = catalog.leg_path(inst.root);
  Mat P = Mat::Identity(r, r);
  for (std::size_t i = path.size(); i-- > 0;) {
    const LegSubtree& L = catalog.leg_subtrees()[static_cast<std::size_t>(path[i])];
    const auto in = child_vectors(L.children, sums);
    Mat V = sums.eps() * L.weight * sums.kernels().contract_path(L.mode, in, P);
    if (i == 0) return V;
    P = prop(inst.path_scales[i - 1], L.divisor0 + x) * V;
  }
  return Mat::Zero(r, r);
}

Evaluator::Evaluator(const TreeCatalog& catalog, double eps, std::vector<double> beta0)
    : catalog_(&catalog), eps_(eps), beta0_(std::move(beta0)), kernels_(catalog.model(), beta0_) {
  if (static_cast<int>(beta0_.size()) != catalog.model().r())
    throw ConfigError("beta0 must have r components");
  sums_ = std::make_unique<TreeSums>(catalog, eps_, beta0_,
                                     [this](int n, double x) { return propagator(n, x); });
}

Mat Evaluator::self_energy(int q, double x) {
  const int r = catalog_->model().r();
  if (q < -1) throw ValidationError("self-energy scale below -1");
  const auto key = std::make_pair(q, q == -1 ? 0.0 : x);
  auto it = se_memo_.find(key);
  if (it != se_memo_.end()) return it->second;
  Mat M = Mat::Zero(r, r);
  if (q == -1) {
    M = eps_ * kernels_.contract_path(Mode{}, {}, Mat::Identity(r, r));
  } else {
    const PropagatorFn prop = [this](int n, double y) { return propagator(n, y); };
    for (const ClusterInstance& inst : catalog_->cluster_instances(q, x))
      M += cluster_value(*catalog_, inst, x, *sums_, prop);
  }
  se_memo_.emplace(key, M);
  return M;
}

Mat Evaluator::chain(int n, double x) {
  Mat M = self_energy(-1, x);
  const Partition& part = catalog_->partition();
  for (int q = 0; q <= n; ++q) {
    const double c = part.chi(q, x);
    if (c > 0.0) M += c * self_energy(q, x);
  }
  return M;
}

Mat Evaluator::propagator(int n, double x) {
  const int r = catalog_->model().r();
  const auto key = std::make_pair(n, x);
  auto it = prop_memo_.find(key);
  if (it != prop_memo_.end()) return it->second;
  const double psi = catalog_->partition().psi(n, x);
  Mat G = Mat::Zero(r, r);
  if (psi > 0.0) {
    const Mat A = x * x * Mat::Identity(r, r) - chain(n - 1, x);
    const double s = smallest_singular_value(A);
    if (!(s >= 0.5 * x * x))
      throw NearSingularPropagator("propagator on scale " + std::to_string(n) + " at x=" + fmt(x) +
                                       ": smallest singular value " + fmt(s) + " < x^2/2",
                                   n, x);
    G = psi * A.partialPivLu().inverse();
  }
  prop_memo_.emplace(key, G);
  return G;
}

ResummedSolution Evaluator::solution(int p) {
  const auto& trunc = catalog_->truncation();
  if (p < 0 || p > trunc.p_max) throw ConfigError("solution scale outside [0, p_max]");
  ResummedSolution sol;
  sol.d = catalog_->model().d();
  sol.r = catalog_->model().r();
  sol.K = trunc.K;
  sol.p = p;
  sol.eps = eps_;
  sol.beta0 = beta0_;
  sol.coeffs = sums_->b(p);
  sol.order_terms = sums_->b_by_order(p);
  sol.G_order_terms = sums_->G_by_order(p);
  sol.G_trees = Vec::Zero(sol.r);
  for (const Vec& g : sol.G_order_terms) sol.G_trees += g;
  return sol;
}

double Evaluator::tree_value(const LabelledTree& tree) {
  const auto ch = tree.children();
  double val = 1.0;
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    const TreeNode& nd = tree.nodes[v];
    NodeLabels labels;
    labels.nu = nd.mode;
    labels.u = nd.u;
    for (int c : ch[v]) labels.e_list.push_back(tree.nodes[static_cast<std::size_t>(c)].e);
    val *= node_factor(catalog_->model(), labels, beta0_);
    if (val == 0.0) return 0.0;
    if (nd.scale < 0) {
      if (nd.e != nd.u) return 0.0;
    } else {
      val *= propagator(nd.scale, catalog_->omega().dot(nd.momentum))(nd.e, nd.u);
    }
  }
  return val;
}

Property1Report Evaluator::property1_check(int p, std::span<const double> x_grid) {
  Property1Report rep;
  const int r = catalog_->model().r();
  const Partition& part = catalog_->partition();
  for (int n = -1; n < p && n + 1 <= part.max_scale(); ++n) {
    double margin = std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
      if (x == 0.0 || part.psi(n + 1, x) <= 0.0) continue;
      const double bound = 0.5 * x * x;
      double s = 0.0;
      try {
        s = smallest_singular_value(x * x * Mat::Identity(r, r) - chain(n, x));
      } catch (const NearSingularPropagator&) {
        s = 0.0;
      }
      margin = std::min(margin, s / bound);
      if (!(s >= bound)) {
        rep.ok = false;
        rep.failures.push_back({n, x, s, bound});
      }
    }
    rep.margin[n] = margin;
  }
  return rep;
}

// ---------------------------------------------------------------------------

AuxiliaryChain::AuxiliaryChain(const TreeCatalog& catalog, const ScaleSequences& seq, double eps,
                               AuxSettings settings)
    : catalog_(&catalog), seq_(&seq), eps_(eps), settings_(settings) {}

Evaluator& AuxiliaryChain::plain(std::span<const double> beta0) {
  std::vector<double> key(beta0.begin(), beta0.end());
  auto it = plain_.find(key);
  if (it == plain_.end())
    it = plain_.emplace(key, std::make_unique<Evaluator>(*catalog_, eps_, key)).first;
  return *it->second;
}

Mat AuxiliaryChain::hessian(int n, std::span<const double> beta0) {
  std::vector<double> b0(beta0.begin(), beta0.end());
  const auto key = std::make_pair(n, b0);
  auto it = hess_memo_.find(key);
  if (it != hess_memo_.end()) return it->second;
  const int r = catalog_->model().r();
  const double h = settings_.hessian_step;
  auto L = [&](std::vector<double> b) { return lagrangian(n, b); };
  Mat H(r, r);
  const double L0 = L(b0);
  for (int i = 0; i < r; ++i) {
    auto shifted = [&](double t) {
      auto b = b0;
      b[static_cast<std::size_t>(i)] += t;
      return L(b);
    };
    H(i, i) = (-shifted(2 * h) + 16 * shifted(h) - 30 * L0 + 16 * shifted(-h) - shifted(-2 * h)) / (12 * h * h);
    for (int j = 0; j < i; ++j) {
      auto both = [&](double si, double sj) {
        auto b = b0;
        b[static_cast<std::size_t>(i)] += si;
        b[static_cast<std::size_t>(j)] += sj;
        return L(b);
      };
      const double v = (both(h, h) - both(h, -h) - both(-h, h) + both(-h, -h)) / (4 * h * h);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  hess_memo_.emplace(key, H);
  return H;
}

double AuxiliaryChain::xi(int n, std::span<const double> beta0) {
  if (n < 0) return 1.0;
  const Mat H = hessian(n, beta0);
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Vec lam = es.eigenvalues();
  const CutoffThresholds th = CutoffThresholds::for_scale(*seq_, n);
  return cutoff_xi(std::span<const double>(lam.data(), static_cast<std::size_t>(lam.size())), &th);
}

AuxSelfEnergy AuxiliaryChain::self_energy(int n, double x, std::span<const double> beta0) {
  AuxSelfEnergy out;
  Evaluator& ev = plain(beta0);
  if (n < 0) {
    out.M = ev.self_energy(-1, 0.0);
    out.hessian = out.M;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (out.M + out.M.transpose()));
    out.lambda = es.eigenvalues();
    out.xi = 1.0;
    return out;
  }
  out.hessian = hessian(n, beta0);
  Eigen::SelfAdjointEigenSolver<Mat> es(out.hessian);
  out.lambda = es.eigenvalues();
  const CutoffThresholds th = CutoffThresholds::for_scale(*seq_, n);
  out.xi = cutoff_xi(std::span<const double>(out.lambda.data(), static_cast<std::size_t>(out.lambda.size())), &th);
  out.M = out.hessian;
  try {
    const Mat R = ev.chain(n, x) - ev.chain(n, 0.0);
    out.M += R;
    out.remainder_active = true;
  } catch (const NearSingularPropagator&) {
    out.remainder_active = false;
  }
  return out;
}

Mat AuxiliaryChain::propagator(int n, double x, std::span<const double> beta0) {
  const int r = catalog_->model().r();
  const double psi = catalog_->partition().psi(n, x);
  if (psi <= 0.0) return Mat::Zero(r, r);
  const AuxSelfEnergy prev = self_energy(n - 1, x, beta0);
  const Mat A = x * x * Mat::Identity(r, r) - prev.xi * prev.M;
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible())
    throw NearSingularPropagator("auxiliary propagator is singular at x=" + fmt(x), n, x);
  return psi * lu.inverse();
}

CoefficientMap AuxiliaryChain::b(int n, std::span<const double> beta0) {
  std::vector<double> b0(beta0.begin(), beta0.end());
  std::map<std::pair<int, double>, Mat> memo;
  TreeSums sums(*catalog_, eps_, b0, [&](int m, double x) {
    const auto key = std::make_pair(m, x);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Mat G = propagator(m, x, b0);
    memo.emplace(key, G);
    return G;
  });
  return sums.b(n);
}

double AuxiliaryChain::lagrangian(int n, std::span<const double> beta0) {
  std::vector<double> b0(beta0.begin(), beta0.end());
  const auto key = std::make_pair(n, b0);
  auto it = lagr_memo_.find(key);
  if (it != lagr_memo_.end()) return it->second;
  double L = 0.0;
  if (n < 0) {
    // Lbar^[-1] = eps f_0(beta0)
    L = eps_ * f_nu_deriv(catalog_->model(), Mode{}, {}, b0).real();
  } else {
    L = averaged_lagrangian(catalog_->model(), catalog_->omega(), b(n, b0), eps_, b0,
                            settings_.composition_radius);
  }
  lagr_memo_.emplace(key, L);
  return L;
}

// ---------------------------------------------------------------------------

void write_coefficients_csv(std::ostream& os, const ResummedSolution& sol) {
  os << "k";
  for (int i = 1; i <= sol.d; ++i) os << ",nu" << i;
  os << ",j,value\n";
  auto rows = [&](int k, const CoefficientMap& m) {
    for (const auto& [nu, v] : m)
      for (int j = 0; j < sol.r; ++j)
        os << k << ',' << mode_columns(nu, sol.d) << ',' << j + 1 << ',' << fmt(v(j)) << '\n';
  };
  rows(0, sol.coeffs);
  for (std::size_t k = 1; k < sol.order_terms.size(); ++k) rows(static_cast<int>(k), sol.order_terms[k]);
}

void write_self_energy_csv(std::ostream& os, const std::vector<SelfEnergyRow>& rows) {
  os << "q,x,u,e,value\n";
  for (const auto& row : rows)
    for (Eigen::Index u = 0; u < row.M.rows(); ++u)
      for (Eigen::Index e = 0; e < row.M.cols(); ++e)
        os << row.q << ',' << fmt(row.x) << ',' << u + 1 << ',' << e + 1 << ',' << fmt(row.M(u, e)) << '\n';
}

}  // namespace qpr
