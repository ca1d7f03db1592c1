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

#include "qpr/forcing.hpp"

#include <cmath>
#include <sstream>

namespace qpr {

namespace {

Complex lookup(const std::map<Mode, std::vector<BetaTerm>>& by_mode, const Mode& nu,
               const Mode& mu, bool* found) {
  *found = false;
  auto it = by_mode.find(nu);
  if (it == by_mode.end()) return {};
  for (const BetaTerm& t : it->second) {
    if (t.mu == mu) {
      *found = true;
      return t.coeff;
    }
  }
  return {};
}

bool close(Complex a, Complex b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace

ForcingModel::ForcingModel(int d, int r, std::vector<ForcingTerm> terms, double phi0,
                           double decay_xi)
    : d_(d), r_(r), phi0_(phi0), decay_xi_(decay_xi) {
  if (d < 1 || d > kMaxDim) throw ValidationError("forcing: d out of range");
  if (r < 1 || r > kMaxDim) throw ValidationError("forcing: r out of range");
  for (const ForcingTerm& t : terms) {
    for (int i = d; i < kMaxDim; ++i)
      if (t.nu[i] != 0) throw ValidationError("forcing: nu has components beyond d");
    for (int i = r; i < kMaxDim; ++i)
      if (t.mu[i] != 0) throw ValidationError("forcing: mu has components beyond r");
    if (t.coeff == Complex{}) continue;
    auto& bucket = by_mode_[t.nu];
    bool merged = false;
    for (BetaTerm& bt : bucket) {
      if (bt.mu == t.mu) {
        bt.coeff += t.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) bucket.push_back({t.mu, t.coeff});
  }
  for (auto& [nu, bucket] : by_mode_) {
    bool depends_on_beta = false;
    for (const BetaTerm& bt : bucket) {
      terms_.push_back({nu, bt.mu, bt.coeff});
      if (!bt.mu.is_zero() && bt.coeff != Complex{}) depends_on_beta = true;
    }
    if (depends_on_beta) {
      active_modes_.push_back(nu);
      max_mode_l1_ = std::max(max_mode_l1_, nu.l1());
    }
  }
}

std::span<const BetaTerm> ForcingModel::beta_terms(const Mode& nu) const {
  auto it = by_mode_.find(nu);
  if (it == by_mode_.end()) return {};
  return it->second;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (ok() ? "valid" : "invalid");
  for (const auto& s : parity_violations) os << "; parity-violation " << s;
  for (const auto& s : reality_violations) os << "; reality-violation " << s;
  for (const auto& s : decay_warnings) os << "; decay-warning " << s;
  return os.str();
}

ValidationReport validate_model(const ForcingModel& model, double tol) {
  ValidationReport rep;
  const auto& by_mode = model.by_mode();
  for (const ForcingTerm& t : model.terms()) {
    bool found = false;
    const Complex conj_partner = lookup(by_mode, -t.nu, -t.mu, &found);
    if (!found || !close(conj_partner, std::conj(t.coeff), tol))
      rep.reality_violations.push_back("nu=" + to_string(t.nu, model.d()) +
                                       " mu=" + to_string(t.mu, model.r()));
    const Complex parity_partner = lookup(by_mode, -t.nu, t.mu, &found);
    if (!found || !close(parity_partner, t.coeff, tol))
      rep.parity_violations.push_back("nu=" + to_string(t.nu, model.d()) +
                                      " mu=" + to_string(t.mu, model.r()));
    if (model.decay_xi() > 0.0) {
      const double bound =
          model.phi0() * std::exp(-model.decay_xi() * (t.nu.l1() + t.mu.l1()));
      if (std::abs(t.coeff) > bound * (1.0 + 1e-12))
        rep.decay_warnings.push_back("nu=" + to_string(t.nu, model.d()) +
                                     " mu=" + to_string(t.mu, model.r()));
    }
  }
  return rep;
}

void require_valid(const ForcingModel& model) {
  const ValidationReport rep = validate_model(model);
  if (!rep.ok()) throw ValidationError("forcing model rejected: " + rep.summary());
}

Complex f_nu_deriv(const ForcingModel& model, const Mode& nu, std::span<const int> derivs,
                   std::span<const double> beta) {
  Complex sum{};
  for (const BetaTerm& t : model.beta_terms(nu)) {
    Complex factor{1.0, 0.0};
    for (int c : derivs) factor *= Complex{0.0, static_cast<double>(t.mu[c])};
    double phase = 0.0;
    for (int i = 0; i < model.r(); ++i) phase += t.mu[i] * beta[static_cast<std::size_t>(i)];
    sum += t.coeff * factor * std::polar(1.0, phase);
  }
  return sum;
}

double node_factor(const ForcingModel& model, const NodeLabels& labels,
                   std::span<const double> beta0) {
  std::vector<int> derivs;
  derivs.reserve(labels.e_list.size() + 1);
  derivs.push_back(labels.u);
  derivs.insert(derivs.end(), labels.e_list.begin(), labels.e_list.end());
  const Complex v = f_nu_deriv(model, labels.nu, derivs, beta0);
  double fact = 1.0;
  for (std::size_t s = 2; s <= labels.e_list.size(); ++s) fact *= static_cast<double>(s);
  if (std::fabs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v)))
    throw ValidationError("node factor has an imaginary part; model is not parity/reality valid");
  return v.real() / fact;
}

NodeKernels::NodeKernels(const ForcingModel& model, std::span<const double> beta0)
    : r_(model.r()) {
  for (const Mode& nu : model.active_modes()) {
    auto& entries = kernels_[nu];
    for (const BetaTerm& t : model.beta_terms(nu)) {
      if (t.mu.is_zero()) continue;
      Entry e;
      e.mu.resize(static_cast<std::size_t>(r_));
      double phase = 0.0;
      for (int i = 0; i < r_; ++i) {
        e.mu[static_cast<std::size_t>(i)] = t.mu[i];
        phase += t.mu[i] * beta0[static_cast<std::size_t>(i)];
      }
      e.weight = t.coeff * std::polar(1.0, phase);
      entries.push_back(std::move(e));
    }
  }
}

Vec NodeKernels::contract(const Mode& nu, std::span<const Vec* const> inputs) const {
  Vec out = Vec::Zero(r_);
  auto it = kernels_.find(nu);
  if (it == kernels_.end()) return out;
  for (const Entry& e : it->second) {
    Complex w = e.weight;
    for (const Vec* b : inputs) {
      double dot = 0.0;
      for (int i = 0; i < r_; ++i) dot += e.mu[static_cast<std::size_t>(i)] * (*b)(i);
      w *= Complex{0.0, dot};
    }
    // (i mu_u) w, real part
    for (int u = 0; u < r_; ++u) out(u) += (Complex{0.0, e.mu[static_cast<std::size_t>(u)]} * w).real();
  }
  return out;
}

Mat NodeKernels::contract_path(const Mode& nu, std::span<const Vec* const> inputs,
                              const Mat& path) const {
  Mat out = Mat::Zero(r_, path.cols());
  auto it = kernels_.find(nu);
  if (it == kernels_.end()) return out;
  for (const Entry& e : it->second) {
    Complex w = e.weight;
    for (const Vec* b : inputs) {
      double dot = 0.0;
      for (int i = 0; i < r_; ++i) dot += e.mu[static_cast<std::size_t>(i)] * (*b)(i);
      w *= Complex{0.0, dot};
    }
    for (Eigen::Index c = 0; c < path.cols(); ++c) {
      double dot = 0.0;
      for (int i = 0; i < r_; ++i) dot += e.mu[static_cast<std::size_t>(i)] * path(i, c);
      const Complex wc = w * Complex{0.0, dot};
      for (int u = 0; u < r_; ++u)
        out(u, c) += (Complex{0.0, e.mu[static_cast<std::size_t>(u)]} * wc).real();
    }
  }
  return out;
}

}  // namespace qpr
