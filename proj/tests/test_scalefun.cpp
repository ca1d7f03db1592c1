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

#include "fixtures.hpp"
#include "qpr/scalefun.hpp"

#include <doctest.h>

#include <random>

using namespace qpr;

TEST_CASE("smooth step profile") {
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double t = i / 100.0;
    CHECK(smooth_step(t) >= prev);
    CHECK(smooth_step(t) + smooth_step(1.0 - t) == doctest::Approx(1.0).epsilon(1e-15));
    prev = smooth_step(t);
  }
  // flat at the ends
  CHECK(smooth_step(1e-3) < 1e-100);
}

TEST_CASE("mollifier support") {
  CHECK(mollifier_chi(0.0) == 1.0);
  CHECK(mollifier_chi(0.5) == 1.0);
  CHECK(mollifier_chi(-0.5) == 1.0);
  CHECK(mollifier_chi(1.0) == 0.0);
  CHECK(mollifier_chi(0.75) == doctest::Approx(0.5));
  CHECK(mollifier_chi(0.8) == mollifier_chi(-0.8));
}

TEST_CASE("partition of unity telescopes") {
  const AlphaTable t(testing::golden(), 8);
  const Partition part(scale_sequences(t, resolvable_scales(t)));
  const int N = part.max_scale();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logx(std::log(part.rho(N) / 10.0), std::log(10.0));
  std::bernoulli_distribution sign(0.5);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = (sign(rng) ? -1.0 : 1.0) * std::exp(logx(rng));
    double sum = 0.0;
    for (int n = 0; n <= N; ++n) {
      CHECK(part.psi(n, x) >= 0.0);
      sum += part.psi(n, x);
    }
    worst = std::max(worst, std::fabs(sum - (1.0 - part.chi(N, x))));
  }
  CHECK(worst < 1e-14);
  for (int n = 0; n < N; ++n) CHECK(part.rho(n + 1) <= part.rho(n) / 2.0);
}

TEST_CASE("scales of a divisor") {
  const Partition part(std::vector<double>{0.1, 0.04, 0.01});
  CHECK(part.scales_of(1.0) == std::vector<int>{0});
  CHECK(part.scales_of(0.045) == std::vector<int>{1});
  CHECK(part.scales_of(0.03) == std::vector<int>{1, 2});
  CHECK(part.scales_of(0.07) == std::vector<int>{0, 1});
  CHECK(part.scales_of(-0.07) == std::vector<int>{0, 1});
  CHECK(part.scales_of(0.07, 0) == std::vector<int>{0});
  CHECK(part.scales_of(1e-4).empty());
  CHECK_THROWS(part.scales_of(0.0));
  CHECK_THROWS_AS(Partition(std::vector<double>{0.1, 0.06}), ValidationError);
  CHECK(part.psi(-1, 0.3) == 0.0);
}

TEST_CASE("cutoff xi") {
  const CutoffThresholds th{2.0, 1.0};
  const std::vector<double> low{-5.0, 0.5};
  const std::vector<double> high{-5.0, 2.5};
  const std::vector<double> mid{1.5};
  CHECK(cutoff_xi(low, &th) == 1.0);
  CHECK(cutoff_xi(high, &th) == 0.0);
  CHECK(cutoff_xi(mid, &th) == doctest::Approx(0.5));
  CHECK(cutoff_xi(high, nullptr) == 1.0);

  const AlphaTable t(testing::golden(), 8);
  const ScaleSequences s = scale_sequences(t, 3);
  const CutoffThresholds c = CutoffThresholds::for_scale(s, 0);
  const double a = s.alpha_at_scale(1);
  CHECK(c.hi == doctest::Approx(a * a / 2048.0));
  CHECK(c.lo == doctest::Approx(a * a / 4096.0));
  CHECK_THROWS_AS(CutoffThresholds::for_scale(s, 3), BudgetExceeded);
}
