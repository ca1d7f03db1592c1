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
#include "qpr/oracle.hpp"
#include "qpr/renorm.hpp"

#include <doctest.h>

using namespace qpr;
using qpr::testing::mode;
using qpr::testing::Setup;

namespace {

double sup_complex(const ComplexCoefficients& a, const ComplexCoefficients& b) {
  double w = 0.0;
  for (const auto& [nu, v] : a) {
    auto it = b.find(nu);
    w = std::max(w, it == b.end() ? v.cwiseAbs().maxCoeff() : (v - it->second).cwiseAbs().maxCoeff());
  }
  return w;
}

}  // namespace

TEST_CASE("coefficient conversions") {
  CoefficientMap a;
  Vec v(2);
  v << 1.0, -2.0;
  a[mode({1, 0})] = v;
  const ComplexCoefficients c = to_complex(a);
  CHECK(c.at(mode({1, 0}))(1) == Complex{-2.0, 0.0});
  ComplexCoefficients d = c;
  d[mode({1, 0})](0) += Complex{0.0, 1e-3};
  d[mode({5, 5})] = Eigen::VectorXcd::Ones(2);  // not shared, ignored
  CHECK(sup_difference(a, d) == doctest::Approx(1e-3));
}

TEST_CASE("first Lindstedt order in closed form") {
  const ForcingModel m = testing::benchmark();
  const FrequencyVector w = testing::golden();
  const std::vector<double> b0{0.4, 1.3};
  const LindstedtSeries ls = lindstedt_expand(3, b0, m, w, 8);
  REQUIRE(ls.orders.size() == 4);
  const auto& o1 = ls.orders[1];
  CHECK(o1.size() == 4);
  const double th = w[1];
  CHECK(o1.at(mode({-1, 0}))(0).real() == doctest::Approx(-0.5 * std::sin(0.4)));
  CHECK(std::abs(o1.at(mode({-1, 0}))(1)) < 1e-16);
  CHECK(o1.at(mode({0, 1}))(1).real() == doctest::Approx(-0.5 * std::sin(1.7) / (th * th)));
  for (const auto& [nu, v] : o1) CHECK(v.imag().norm() < 1e-16);
}

TEST_CASE("Galerkin-Newton, Lindstedt and the trees agree at the locked point") {
  Setup s(testing::benchmark(), 5, 0);
  const double eps = 1e-3;
  const auto b0 = testing::benchmark_lock();
  Evaluator ev(s.cat(), eps, b0);
  const CoefficientMap trees = ev.solution(0).coeffs;

  GalerkinProblem gp;
  gp.N = 8;
  gp.eps = eps;
  gp.beta0 = b0;
  const GalerkinResult cold = galerkin_newton(gp, s.model, s.omega);
  CHECK(cold.residual < 1e-14);
  CHECK(cold.rcond > 1e-6);
  CHECK(sup_difference(trees, cold.b) < 1e-8);

  gp.warm_start = to_complex(trees);
  const GalerkinResult warm = galerkin_newton(gp, s.model, s.omega);
  CHECK(warm.iterations <= cold.iterations);
  CHECK(sup_complex(warm.b, cold.b) < 1e-14);

  const ComplexCoefficients lind = lindstedt_expand(5, b0, s.model, s.omega, 8).sum(eps);
  CHECK(sup_complex(lind, cold.b) < 1e-13);
  CHECK(sup_difference(trees, lind) < 1e-15);
}

TEST_CASE("Galerkin on an alpha-independent model returns zero") {
  GalerkinProblem gp;
  gp.N = 4;
  gp.eps = 1e-2;
  gp.beta0 = {0.0};
  const GalerkinResult g = galerkin_newton(gp, testing::cos_beta(), testing::golden());
  CHECK(g.residual == doctest::Approx(0.0));
  for (const auto& [nu, v] : g.b) CHECK(v.norm() == 0.0);
}

TEST_CASE("integrated flow follows the response solution") {
  Setup s(testing::benchmark(), 5, 0);
  const double eps = 1e-3;
  const auto b0 = testing::benchmark_lock();
  Evaluator ev(s.cat(), eps, b0);
  const ComplexCoefficients b = to_complex(ev.solution(0).coeffs);
  OdeSettings os;
  os.T = 200.0;
  const OdeResult good = ode_residual(b0, b, eps, s.omega, s.model, os);
  CHECK(good.max_distance < 1e-9);
  CHECK(good.samples >= 400);
  // dropping the displacement is visible
  const OdeResult bad = ode_residual(b0, ComplexCoefficients{}, eps, s.omega, s.model, os);
  CHECK(bad.max_distance > 1e-4);
}
