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

#include "qpr/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace qpr {

std::string to_string(const Mode& m, int d) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) {
    if (i) os << ' ';
    os << m[i];
  }
  os << ')';
  return os.str();
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double r = std::fmod(a, kTwoPi);
  if (r <= -kTwoPi / 2) r += kTwoPi;
  if (r > kTwoPi / 2) r -= kTwoPi;
  return r;
}

FrequencyVector::FrequencyVector(std::vector<double> components) : w_(std::move(components)) {
  if (w_.size() < 2)
    throw ValidationError("frequency vector needs d >= 2 components");
  if (w_.size() > static_cast<std::size_t>(kMaxDim))
    throw ValidationError("frequency vector dimension exceeds " + std::to_string(kMaxDim));
  for (double v : w_) {
    if (!std::isfinite(v) || v == 0.0)
      throw ValidationError("frequency components must be finite and nonzero");
  }
}

namespace {

// Depth-first search over the l1 ball.  Vectors are canonicalised so that the
// first nonzero component is positive; nu and -nu give the same |w.nu|.
class LatticeSearch {
 public:
  LatticeSearch(const FrequencyVector& omega, std::int64_t radius, const LatticeBudget& budget)
      : d_(omega.dim()), radius_(radius), budget_(budget) {
    w_.resize(static_cast<std::size_t>(d_));
    for (int i = 0; i < d_; ++i) w_[static_cast<std::size_t>(i)] = omega[i];
    // tail_max_[i] = max_{j >= i} |w_j|
    tail_max_.assign(static_cast<std::size_t>(d_) + 1, 0.0L);
    for (int i = d_ - 1; i >= 0; --i)
      tail_max_[static_cast<std::size_t>(i)] =
          std::max(tail_max_[static_cast<std::size_t>(i) + 1], std::fabs(w_[static_cast<std::size_t>(i)]));
  }

  LatticeMinimum run() {
    recurse(0, 0.0L, radius_, true);
    LatticeMinimum out;
    out.value = static_cast<double>(best_);
    out.argmin = best_nu_;
    out.nodes_visited = nodes_;
    return out;
  }

 private:
  void visit() {
    if (++nodes_ > budget_.node_limit)
      throw BudgetExceeded("lattice enumeration exceeded node limit at radius " +
                           std::to_string(radius_));
  }

  void consider(long double value) {
    if (value < best_) {
      best_ = value;
      best_nu_ = cur_;
    }
  }

  void recurse(int i, long double partial, std::int64_t budget, bool prefix_zero) {
    visit();
    if (std::fabs(partial) - static_cast<long double>(budget) * tail_max_[static_cast<std::size_t>(i)] >= best_)
      return;
    const long double wi = w_[static_cast<std::size_t>(i)];
    if (i == d_ - 1) {
      // Convex in k: the minimum over [lo, hi] sits at the clamped real root.
      std::int64_t lo = prefix_zero ? 1 : -budget;
      std::int64_t hi = budget;
      if (lo > hi) return;
      const long double t = -partial / wi;
      const std::int64_t cands[2] = {static_cast<std::int64_t>(std::floor(t)),
                                     static_cast<std::int64_t>(std::ceil(t))};
      for (std::int64_t k : cands) {
        k = std::clamp(k, lo, hi);
        cur_[i] = static_cast<int>(k);
        consider(std::fabs(partial + wi * static_cast<long double>(k)));
      }
      cur_[i] = 0;
      return;
    }
    const std::int64_t lo = prefix_zero ? 0 : -budget;
    for (std::int64_t k = lo; k <= budget; ++k) {
      cur_[i] = static_cast<int>(k);
      recurse(i + 1, partial + wi * static_cast<long double>(k), budget - (k < 0 ? -k : k),
              prefix_zero && k == 0);
    }
    cur_[i] = 0;
  }

  int d_;
  std::int64_t radius_;
  LatticeBudget budget_;
  std::vector<long double> w_;
  std::vector<long double> tail_max_;
  long double best_ = std::numeric_limits<long double>::infinity();
  Mode cur_{};
  Mode best_nu_{};
  std::uint64_t nodes_ = 0;
};

}  // namespace

LatticeMinimum lattice_minimum(const FrequencyVector& omega, std::int64_t radius,
                               const LatticeBudget& budget) {
  if (radius < 1) throw ValidationError("lattice radius must be >= 1");
  if (radius > std::numeric_limits<int>::max() / 2)
    throw BudgetExceeded("lattice radius overflows the integer mode type");
  return LatticeSearch(omega, radius, budget).run();
}

double alpha_m(const FrequencyVector& omega, int m, const LatticeBudget& budget) {
  if (m < 0) throw ValidationError("alpha_m needs m >= 0");
  if (m > 30) throw BudgetExceeded("alpha_m: m too large for lattice enumeration");
  return lattice_minimum(omega, std::int64_t{1} << m, budget).value;
}

AlphaTable::AlphaTable(const FrequencyVector& omega, int m_max, const LatticeBudget& budget) {
  if (m_max < 0) throw ValidationError("M_max must be >= 0");
  for (int m = 0; m <= m_max; ++m) {
    if (m > 30) throw BudgetExceeded("alpha table: m too large for lattice enumeration");
    LatticeMinimum lm = lattice_minimum(omega, std::int64_t{1} << m, budget);
    if (!(lm.value > 0.0))
      throw ResonanceError("alpha_" + std::to_string(m) + " vanishes: resonant frequency vector");
    alpha_.push_back(lm.value);
    argmin_.push_back(lm.argmin);
  }
}

double AlphaTable::operator[](int m) const {
  if (m < 0 || m > m_max())
    throw BudgetExceeded("alpha_" + std::to_string(m) + " beyond computed M_max=" +
                         std::to_string(m_max()));
  return alpha_[static_cast<std::size_t>(m)];
}

BryunoSum bryuno_sum(const AlphaTable& table) {
  BryunoSum out;
  for (int m = 0; m <= table.m_max(); ++m) {
    const double term = std::ldexp(std::log(1.0 / table[m]), -m);
    out.value += term;
    out.last_term = std::fabs(term);
  }
  return out;
}

BryunoSum bryuno_sum(const FrequencyVector& omega, int m_max, const LatticeBudget& budget) {
  return bryuno_sum(AlphaTable(omega, m_max, budget));
}

namespace {

// Returns p_n for the given m_n, or -1 when the table cannot certify it.
int scan_p(const AlphaTable& table, int m_n) {
  const double base = table[m_n];
  int q = 0;
  while (true) {
    const int next = m_n + q + 1;
    if (next > table.m_max()) return -1;
    if (!(base < 2.0 * table[next])) return q;
    ++q;
  }
}

}  // namespace

int resolvable_scales(const AlphaTable& table) {
  int m = 0;
  int n = 0;
  while (true) {
    const int p = scan_p(table, m);
    if (p < 0) return n;
    m += p + 1;
    ++n;
  }
}

ScaleSequences scale_sequences(const AlphaTable& table, int n_max) {
  if (n_max < 0) throw ValidationError("n_max must be >= 0");
  ScaleSequences seq;
  seq.alpha = table.values();
  seq.m.push_back(0);
  seq.rho.push_back(table[0] / 8.0);
  for (int n = 0; n < n_max; ++n) {
    const int p = scan_p(table, seq.m.back());
    if (p < 0) {
      throw BudgetExceeded("scale sequences: p_" + std::to_string(n) + " needs alpha_m beyond M_max=" +
                           std::to_string(table.m_max()) + "; largest fully resolved n = " +
                           std::to_string(n));
    }
    seq.p.push_back(p);
    seq.m.push_back(seq.m.back() + p + 1);
    seq.rho.push_back(table[seq.m.back()] / 8.0);
  }
  return seq;
}

void screen_rational_independence(const FrequencyVector& omega, std::int64_t radius,
                                  double threshold) {
  const LatticeMinimum lm = lattice_minimum(omega, radius);
  if (lm.value < threshold) {
    throw ResonanceError("frequency vector fails the rational-independence screen: |w.nu| = " +
                         std::to_string(lm.value) + " at nu = " + to_string(lm.argmin, omega.dim()));
  }
}

void write_alpha_csv(std::ostream& os, const AlphaTable& table) {
  os << "m,alpha_m\n" << std::setprecision(17);
  for (int m = 0; m <= table.m_max(); ++m) os << m << ',' << table[m] << '\n';
}

void write_scale_csv(std::ostream& os, const ScaleSequences& seq) {
  os << "n,m_n,p_n,rho_n\n" << std::setprecision(17);
  for (int n = 0; n <= seq.n_max(); ++n) {
    os << n << ',' << seq.m[static_cast<std::size_t>(n)] << ',';
    if (n < static_cast<int>(seq.p.size())) os << seq.p[static_cast<std::size_t>(n)];
    os << ',' << seq.rho[static_cast<std::size_t>(n)] << '\n';
  }
}

}  // namespace qpr
