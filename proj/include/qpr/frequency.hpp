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

// Small-divisor data of a frequency vector: the sequence
//   alpha_m(w) = min { |w.nu| : 0 < |nu|_1 <= 2^m },
// its truncated Bryuno sum, and the scale sequences m_n, p_n, rho_n that
// drive the multiscale decomposition.

#pragma once

#include "qpr/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace qpr {

class FrequencyVector {
 public:
  // Throws ValidationError if d < 2, d > kMaxDim, a component is zero or not
  // finite.  The rational-independence screen is a separate call because it
  // is comparatively expensive.
  explicit FrequencyVector(std::vector<double> components);

  int dim() const { return static_cast<int>(w_.size()); }
  const std::vector<double>& components() const { return w_; }
  double operator[](int i) const { return w_[static_cast<std::size_t>(i)]; }

  double dot(const Mode& nu) const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += w_[static_cast<std::size_t>(i)] * nu[i];
    return s;
  }

 private:
  std::vector<double> w_;
};

struct LatticeBudget {
  // Maximum number of branch nodes visited by one lattice search.
  std::uint64_t node_limit = 400'000'000ULL;
};

struct LatticeMinimum {
  double value = 0.0;  // min |w.nu|
  Mode argmin;         // one minimiser, first nonzero component positive
  std::uint64_t nodes_visited = 0;
};

// Exact minimum of |w.nu| over nonzero integer nu with |nu|_1 <= radius.
// Exhaustive enumeration with branch-and-bound pruning; throws BudgetExceeded.
LatticeMinimum lattice_minimum(const FrequencyVector& omega, std::int64_t radius,
                               const LatticeBudget& budget = {});

// alpha_m(w) for a single m.
double alpha_m(const FrequencyVector& omega, int m, const LatticeBudget& budget = {});

// Immutable table alpha_0 .. alpha_{M_max}.
class AlphaTable {
 public:
  AlphaTable(const FrequencyVector& omega, int m_max, const LatticeBudget& budget = {});

  int m_max() const { return static_cast<int>(alpha_.size()) - 1; }
  double operator[](int m) const;
  const std::vector<double>& values() const { return alpha_; }
  const std::vector<Mode>& minimisers() const { return argmin_; }

 private:
  std::vector<double> alpha_;
  std::vector<Mode> argmin_;
};

struct BryunoSum {
  double value = 0.0;      // sum_{m<=M_max} 2^-m log(1/alpha_m)
  double last_term = 0.0;  // |2^-M_max log(1/alpha_M_max)|, truncation indicator
};

BryunoSum bryuno_sum(const AlphaTable& table);
BryunoSum bryuno_sum(const FrequencyVector& omega, int m_max,
                     const LatticeBudget& budget = {});

struct ScaleSequences {
  std::vector<double> alpha;  // alpha_0 .. alpha_{M_max}
  std::vector<int> m;         // m_0 .. m_{n_max}
  std::vector<int> p;         // p_0 .. p_{n_max-1}
  std::vector<double> rho;    // rho_n = alpha_{m_n} / 8

  int n_max() const { return static_cast<int>(m.size()) - 1; }
  double alpha_at_scale(int n) const { return alpha[static_cast<std::size_t>(m[static_cast<std::size_t>(n)])]; }
};

// Scans p_n = max{ q >= 0 : alpha_{m_n} < 2 alpha_{m_n + q} } and
// m_{n+1} = m_n + p_n + 1.  Throws BudgetExceeded (naming the largest fully
// resolved n) if the alpha table is too short to certify n_max.
ScaleSequences scale_sequences(const AlphaTable& table, int n_max);

// Largest n for which m_0..m_n are certified by the table (never throws).
int resolvable_scales(const AlphaTable& table);

// Rejects w when some nonzero nu with |nu|_1 <= radius has |w.nu| < threshold.
void screen_rational_independence(const FrequencyVector& omega, std::int64_t radius = 1000,
                                  double threshold = 1e-13);

void write_alpha_csv(std::ostream& os, const AlphaTable& table);
void write_scale_csv(std::ostream& os, const ScaleSequences& seq);

}  // namespace qpr
