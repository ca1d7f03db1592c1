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
#include "qpr/renorm.hpp"

#include <doctest.h>

#include <sstream>

using namespace qpr;
using qpr::testing::mode;
using qpr::testing::Setup;

TEST_CASE("smallest singular value") {
  Mat a(2, 2);
  a << 3.0, 0.0, 0.0, -0.5;
  CHECK(smallest_singular_value(a) == doctest::Approx(0.5));
  a << 1.0, 1.0, 1.0, 1.0;
  CHECK(smallest_singular_value(a) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("propagator of cos(beta) at the stable point is Psi/(x^2 + eps)") {
  Setup s(testing::cos_beta(), 3, 1);
  const double eps = 0.01;
  Evaluator ev(s.cat(), eps, {0.0});
  CHECK(s.cat().subtrees().empty());
  for (double x : {-1.3, -0.2, 0.05, 0.07, 0.3, 0.9}) {
    CAPTURE(x);
    CHECK(ev.chain(1, x)(0, 0) == doctest::Approx(-eps));
    CHECK(ev.self_energy(0, x)(0, 0) == 0.0);
    for (int n = 0; n <= 1; ++n)
      CHECK(ev.propagator(n, x)(0, 0) == doctest::Approx(s.partition.psi(n, x) / (x * x + eps)).epsilon(1e-14));
  }
  const ResummedSolution sol = ev.solution(1);
  CHECK(sol.coeffs.empty());
  CHECK(sol.G_trees(0) == doctest::Approx(0.0));
  Evaluator off(s.cat(), eps, {0.5});
  CHECK(off.solution(0).G_trees(0) == doctest::Approx(-eps * std::sin(0.5)).epsilon(1e-14));
}

TEST_CASE("property 1 fails exactly on the band 2 eps / 3 < x^2 < 2 eps at the unstable point") {
  Setup s(testing::cos_beta(), 2, 0);
  const double eps = 0.01;
  Evaluator ev(s.cat(), eps, {std::numbers::pi});
  std::vector<double> grid;
  for (int i = -300; i <= 300; ++i) grid.push_back(i * 1e-3);
  const Property1Report rep = ev.property1_check(0, grid);
  CHECK_FALSE(rep.ok);
  int expected = 0;
  for (double x : grid)
    if (s.partition.psi(0, x) > 0.0 && 3.0 * x * x > 2.0 * eps && x * x < 2.0 * eps) ++expected;
  CHECK(rep.failures.size() == static_cast<std::size_t>(expected));
  for (const auto& f : rep.failures) {
    CHECK(f.x * f.x < 2.0 * eps);
    CHECK(3.0 * f.x * f.x > 2.0 * eps);
    CHECK(f.sigma_min == doctest::Approx(std::fabs(f.x * f.x - eps)));
  }
  CHECK_THROWS_AS(ev.propagator(0, 0.1), NearSingularPropagator);
  CHECK(ev.propagator(0, 0.2)(0, 0) == doctest::Approx(1.0 / (0.04 - eps)));
  Evaluator stable(s.cat(), eps, {0.0});
  CHECK(stable.property1_check(0, grid).ok);
}

TEST_CASE("self-energy symmetry under x -> -x") {
  for (auto& [model, beta0] : std::vector<std::pair<ForcingModel, std::vector<double>>>{
           {testing::benchmark(), testing::benchmark_lock()}, {testing::pendulum_forced(), {0.3}}}) {
    Setup s(model, 4, 2);
    Evaluator ev(s.cat(), 0.01, beta0);
    double scale = 0.0;
    for (int q = -1; q <= 2; ++q) {
      for (int i = 1; i <= 12; ++i) {
        const double x = s.partition.rho(std::max(q, 0)) * i / 6.0;
        const Mat a = ev.self_energy(q, x), b = ev.self_energy(q, -x);
        scale = std::max(scale, a.norm());
        CHECK((a - b.transpose()).norm() < 1e-15);
      }
    }
    CHECK(scale > 0.0);
  }
}

TEST_CASE("resummed sums grow with the scale cap") {
  Setup s(testing::pendulum_forced(), 4, 2);
  Evaluator ev(s.cat(), 0.01, {0.3});
  const auto b0 = ev.sums().b(0);
  const auto b2 = ev.sums().b(2);
  CHECK(b2.size() >= b0.size());
  const ResummedSolution sol = ev.solution(2);
  CHECK(sol.order_terms.size() == 5);
  Vec total = Vec::Zero(1);
  for (std::size_t k = 1; k < sol.order_terms.size(); ++k)
    if (sol.order_terms[k].count(mode({1, 0}))) total += sol.order_terms[k].at(mode({1, 0}));
  CHECK(total(0) == doctest::Approx(sol.coeffs.at(mode({1, 0}))(0)).epsilon(1e-14));
}

TEST_CASE("auxiliary chain reproduces the plain chain where the cutoff is inactive") {
  Setup s(testing::benchmark(), 3, 1);
  const double eps = 1e-3;
  const auto beta0 = testing::benchmark_lock();
  AuxiliaryChain aux(s.cat(), s.seq, eps);
  Evaluator ev(s.cat(), eps, beta0);
  CHECK(aux.lagrangian(-1, beta0) == doctest::Approx(0.0));
  for (int n = 0; n <= 1; ++n) {
    CHECK(aux.xi(n, beta0) == 1.0);
    for (double x : {0.3, 0.618, 1.0, 1.618}) {
      const AuxSelfEnergy S = aux.self_energy(n, x, beta0);
      CHECK(S.remainder_active);
      CHECK((S.M - ev.chain(n, x)).norm() < 1e-8);
    }
  }
  const auto bb = aux.b(1, beta0);
  const auto b = ev.solution(1).coeffs;
  REQUIRE(bb.size() == b.size());
  for (const auto& [nu, v] : b) CHECK((bb.at(nu) - v).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("csv exports") {
  Setup s(testing::benchmark(), 2, 0);
  Evaluator ev(s.cat(), 1e-3, testing::benchmark_lock());
  std::ostringstream c, m;
  write_coefficients_csv(c, ev.solution(0));
  write_self_energy_csv(m, {{0, 0.5, ev.self_energy(0, 0.5)}});
  CHECK(c.str().rfind("k,nu1,nu2,j,value\n", 0) == 0);
  CHECK(m.str().rfind("q,x,u,e,value\n", 0) == 0);
  const std::string body = m.str();
  CHECK(std::count(body.begin(), body.end(), '\n') == 5);
}
