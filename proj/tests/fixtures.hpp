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

// Models shared by the tests.
#pragma once

#include "qpr/forcing.hpp"
#include "qpr/frequency.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace qpr::testing {

inline Mode mode(std::initializer_list<int> c) {
  Mode m;
  int i = 0;
  for (int v : c) m[i++] = v;
  return m;
}

inline FrequencyVector golden() { return FrequencyVector({1.0, (std::sqrt(5.0) - 1.0) / 2.0}); }

// f = cos a1 cos b1 + cos a2 cos(b1 + b2); locked point (pi/2, 0).
inline ForcingModel benchmark() {
  std::vector<ForcingTerm> t;
  for (int s1 : {-1, 1})
    for (int s2 : {-1, 1}) {
      t.push_back({mode({s1, 0}), mode({s2, 0}), 0.25});
      t.push_back({mode({0, s1}), mode({s2, s2}), 0.25});
    }
  return ForcingModel(2, 2, t);
}

inline std::vector<double> benchmark_lock() { return {std::numbers::pi / 2.0, 0.0}; }

// f = cos b1, no forcing-angle dependence.
inline ForcingModel cos_beta(int d = 2) {
  return ForcingModel(d, 1, {{Mode{}, mode({1}), 0.5}, {Mode{}, mode({-1}), 0.5}});
}

// f = cos(a1) cos(b1) + 0.3 cos(b1): one rotator with a nonzero average.
inline ForcingModel pendulum_forced() {
  return ForcingModel(2, 1,
                      {{mode({1, 0}), mode({1}), 0.25},
                       {mode({1, 0}), mode({-1}), 0.25},
                       {mode({-1, 0}), mode({1}), 0.25},
                       {mode({-1, 0}), mode({-1}), 0.25},
                       {Mode{}, mode({1}), 0.15},
                       {Mode{}, mode({-1}), 0.15}});
}

// f = (cos a.(1,0) + cos a.(3,-5) + cos a.(5,-8)) cos b1 / 3.  Sums of the
// Fibonacci modes put lines on scales 1 and 2 for the golden mean.
inline ForcingModel fibonacci_forced() {
  std::vector<ForcingTerm> t;
  for (const Mode& nu : {mode({1, 0}), mode({3, -5}), mode({5, -8})})
    for (int s : {-1, 1})
      for (int m : {-1, 1}) t.push_back({s > 0 ? nu : -nu, mode({m}), 1.0 / 12.0});
  return ForcingModel(2, 1, t);
}

}  // namespace qpr::testing

#include "qpr/scalefun.hpp"
#include "qpr/trees.hpp"

#include <memory>

namespace qpr::testing {

// Owns everything a catalog points to.
struct Setup {
  ForcingModel model;
  FrequencyVector omega;
  ScaleSequences seq;
  Partition partition;
  std::unique_ptr<TreeCatalog> catalog;

  Setup(ForcingModel m, int K, int p_max, std::size_t cap = 2'000'000, FrequencyVector w = golden(), int n_max = 3)
      : model(std::move(m)), omega(std::move(w)), seq(scale_sequences(AlphaTable(omega, 8), n_max)),
        partition(seq) {
    catalog = std::make_unique<TreeCatalog>(model, omega, partition, Truncation{K, p_max, cap});
  }
  const TreeCatalog& cat() const { return *catalog; }
};

}  // namespace qpr::testing
