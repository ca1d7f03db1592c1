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
#include "qpr/composition.hpp"
#include "qpr/trig_series.hpp"

#include <doctest.h>

#include <random>

using namespace qpr;
using qpr::testing::mode;

namespace {

Complex eval(const TrigSeries& s, const std::vector<double>& a) {
  Complex v{};
  s.for_each_nonzero([&](const Mode& nu, Complex c) {
    double ph = 0.0;
    for (int i = 0; i < s.dim(); ++i) ph += nu[i] * a[static_cast<std::size_t>(i)];
    v += c * std::polar(1.0, ph);
  });
  return v;
}

Vec eval(const CoefficientMap& b, int r, const std::vector<double>& a) {
  Vec v = Vec::Zero(r);
  for (const auto& [nu, c] : b) {
    double ph = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ph += nu[static_cast<int>(i)] * a[i];
    v += c * std::cos(ph);  // parity: b_nu = b_{-nu} real
  }
  return v;
}

// Real even displacement with a few modes.
CoefficientMap sample_b() {
  CoefficientMap b;
  Vec v(2);
  v << 0.03, -0.02;
  b[mode({1, 0})] = v;
  b[mode({-1, 0})] = v;
  v << 0.01, 0.015;
  b[mode({1, -1})] = v;
  b[mode({-1, 1})] = v;
  v << -0.004, 0.0;
  b[mode({0, 2})] = v;
  b[mode({0, -2})] = v;
  return b;
}

double f_benchmark(const std::vector<double>& a, const Vec& beta) {
  return std::cos(a[0]) * std::cos(beta(0)) + std::cos(a[1]) * std::cos(beta(0) + beta(1));
}

}  // namespace

TEST_CASE("products are convolutions") {
  TrigSeries a(2, 4), b(2, 4);
  a.set(mode({1, 0}), {0.5, 0.1});
  a.set(mode({0, -1}), 2.0);
  b.set(mode({1, 1}), {0.0, 1.0});
  b.set(Mode{}, 3.0);
  const TrigSeries c = a * b;
  const std::vector<double> pt{0.37, -1.4};
  CHECK(std::abs(eval(c, pt) - eval(a, pt) * eval(b, pt)) < 1e-14);
  CHECK(c.truncation_mass() == 0.0);
  CHECK(c.get(mode({9, 0})) == Complex{});
  TrigSeries small(1, 1);
  small.set(mode({1}), 1.0);
  const TrigSeries sq = small * small;
  CHECK(sq.truncation_mass() == doctest::Approx(1.0));
}

TEST_CASE("series exponential matches pointwise exponential") {
  TrigSeries z(2, 12);
  z.set(mode({1, 0}), {0.0, 0.2});
  z.set(mode({-1, 0}), {0.0, 0.2});
  z.set(mode({0, 1}), {0.0, -0.1});
  z.set(mode({0, -1}), {0.0, -0.1});
  const TrigSeries e = TrigSeries::exp(z);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 6.3);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> a{u(rng), u(rng)};
    CHECK(std::abs(eval(e, a) - std::exp(eval(z, a))) < 1e-13);
  }
}

TEST_CASE("composed forcing agrees with pointwise evaluation") {
  const ForcingModel m = testing::benchmark();
  const CoefficientMap b = sample_b();
  const std::vector<double> beta0{0.9, -0.3};
  const int radius = 20;
  const Composed c = compose_forcing(m, beta0, to_series(b, 2, 2, radius), radius, 2);
  REQUIRE(c.grad.size() == 2);
  REQUIRE(c.hess.size() == 4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 6.3);
  const double h = 1e-4;
  for (int i = 0; i < 8; ++i) {
    const std::vector<double> a{u(rng), u(rng)};
    Vec beta = eval(b, 2, a);
    beta(0) += beta0[0];
    beta(1) += beta0[1];
    CHECK(std::abs(eval(c.f, a) - f_benchmark(a, beta)) < 1e-13);
    for (int j = 0; j < 2; ++j) {
      Vec p = beta, q = beta;
      p(j) += h;
      q(j) -= h;
      const double ref = (f_benchmark(a, p) - f_benchmark(a, q)) / (2 * h);
      CHECK(eval(c.grad[static_cast<std::size_t>(j)], a).real() == doctest::Approx(ref).epsilon(1e-7));
    }
    // d_b1 d_b2 f = -cos(a2) cos(b1 + b2)
    CHECK(eval(c.hess[1], a).real() == doctest::Approx(-std::cos(a[1]) * std::cos(beta(0) + beta(1))));
  }
}

TEST_CASE("averaged Lagrangian equals a torus quadrature") {
  const ForcingModel m = testing::benchmark();
  const FrequencyVector w = testing::golden();
  const CoefficientMap b = sample_b();
  const std::vector<double> beta0{0.9, -0.3};
  const double eps = 0.05;
  const int n = 64;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::vector<double> a{2 * std::numbers::pi * i / n, 2 * std::numbers::pi * j / n};
      Vec beta = eval(b, 2, a);
      // w . d_alpha b
      Vec db = Vec::Zero(2);
      for (const auto& [nu, c] : b) {
        const double ph = nu[0] * a[0] + nu[1] * a[1];
        db -= c * std::sin(ph) * w.dot(nu);
      }
      beta(0) += beta0[0];
      beta(1) += beta0[1];
      acc += -0.5 * db.squaredNorm() + eps * f_benchmark(a, beta);
    }
  const double L = averaged_lagrangian(m, w, b, eps, beta0, 12);
  CHECK(L == doctest::Approx(acc / (n * n)).epsilon(1e-12));
}

TEST_CASE("nonzero mode listing") {
  const auto modes = nonzero_modes(2, 2);
  CHECK(modes.size() == 12);
  CHECK(std::is_sorted(modes.begin(), modes.end()));
  for (const Mode& nu : modes) CHECK((nu.l1() > 0 && nu.l1() <= 2));
}
