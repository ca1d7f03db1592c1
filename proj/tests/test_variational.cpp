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
#include "qpr/variational.hpp"

#include <doctest.h>

#include <random>

using namespace qpr;
using qpr::testing::mode;
using qpr::testing::Setup;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("cos(beta) closed form") {
  Setup s(testing::cos_beta(), 3, 0);
  for (double eps : {1e-3, 1e-2}) {
    VariationalSettings vs;
    vs.grid = 32;
    BifurcationProblem prob(s.cat(), eps, 0, vs);
    for (double b : {-2.0, 0.0, 0.4, 3.0}) {
      const std::vector<double> b0{b};
      CHECK(prob.L(b0) == doctest::Approx(eps * std::cos(b)).epsilon(1e-14));
      CHECK(prob.G(b0)(0) == doctest::Approx(-eps * std::sin(b)).epsilon(1e-14).scale(1e-30));
    }
    const LockedPoint lp = solve_bifurcation(prob);
    REQUIRE(lp.converged);
    CHECK_FALSE(lp.degenerate);
    CHECK(std::fabs(lp.beta0_star[0]) < 1e-12);
    CHECK(std::fabs(lp.L_value - eps) < 1e-12);
    CHECK(std::fabs(lp.lambda(0) + eps) < 1e-12);
    CHECK(prob.hessian_L(lp.beta0_star)(0, 0) == doctest::Approx(-eps).epsilon(1e-5));
    CHECK(prob.solution(lp.beta0_star).coeffs.empty());
  }
}

TEST_CASE("benchmark locks at (pi/2, 0)") {
  Setup s(testing::benchmark(), 3, 0);
  VariationalSettings vs;
  vs.grid = 16;
  BifurcationProblem prob(s.cat(), 1e-3, 0, vs);
  const LockedPoint lp = solve_bifurcation(prob);
  CHECK(lp.converged);
  CHECK(std::fabs(wrap_angle(lp.beta0_star[0] - std::numbers::pi / 2)) < 1e-9);
  CHECK(std::fabs(lp.beta0_star[1]) < 1e-9);
  CHECK(lp.lambda.maxCoeff() < 0.0);
  CHECK(lp.grid_values.size() == 256);
}

TEST_CASE("grid search is deterministic across worker counts and seeds") {
  Setup s(testing::benchmark(), 2, 0);
  VariationalSettings a;
  a.grid = 12;
  a.seed = 42;
  VariationalSettings b = a;
  b.workers = 3;
  const LockedPoint la = solve_bifurcation(BifurcationProblem(s.cat(), 2e-3, 0, a));
  const LockedPoint lb = solve_bifurcation(BifurcationProblem(s.cat(), 2e-3, 0, b));
  CHECK(la.grid_values == lb.grid_values);
  CHECK(la.beta0_star == lb.beta0_star);
  CHECK(la.grid_offset[0] > 0.0);
  VariationalSettings c = a;
  c.seed = 0;
  const LockedPoint lc = solve_bifurcation(BifurcationProblem(s.cat(), 2e-3, 0, c));
  CHECK(lc.grid_offset[0] == 0.0);
  CHECK(std::fabs(wrap_angle(lc.beta0_star[0] - la.beta0_star[0])) < 1e-9);
}

TEST_CASE("variational identities") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  {
    Setup s(testing::benchmark(), 4, 2);
    for (int i = 0; i < 3; ++i) {
      const std::vector<double> b0{u(rng), u(rng)};
      for (int n = 0; n <= 2; ++n) {
        const IdentityGaps g = identity_checks(s.cat(), 2e-3, b0, n);
        CHECK(g.chain_vs_dG < 1e-8);
        CHECK(g.G_vs_dL < 1e-8);
      }
    }
  }
  {
    Setup s(testing::pendulum_forced(), 4, 1);
    const IdentityGaps g = identity_checks(s.cat(), 2e-3, std::vector<double>{0.2}, 1);
    CHECK(g.scale_M > 0.0);
    CHECK(g.chain_vs_dG < 1e-8);
    CHECK(g.G_vs_dL < 1e-8);
  }
}

TEST_CASE("tree average agrees with the composed average to order K+2") {
  for (int K : {2, 4}) {
    Setup s(testing::benchmark(), K, 0);
    const std::vector<double> b0{0.7, -0.4};
    std::vector<double> es, ds;
    for (double eps : {1e-3, 2e-3, 4e-3}) {
      BifurcationProblem prob(s.cat(), eps, 0);
      es.push_back(eps);
      ds.push_back((prob.solution(b0).G_trees - prob.G(b0)).norm());
    }
    CAPTURE(K);
    CHECK(slope(es, ds) == doctest::Approx(K + 2).epsilon(0.1 / (K + 2)));
  }
}

// At the symmetric locked point the leading residual coefficient cancels for
// odd K, so the fit is taken at a generic point.
TEST_CASE("range residual scales as eps^(K+1)") {
  const std::vector<double> b0{0.7, -0.4};
  for (int K = 1; K <= 4; ++K) {
    Setup s(testing::benchmark(), K, 0);
    std::vector<double> es, rs;
    for (double eps = 2e-4; eps <= 2.1e-3; eps *= 1.5) {
      BifurcationProblem prob(s.cat(), eps, 0);
      es.push_back(eps);
      rs.push_back(range_residual(s.model, s.omega, prob.solution(b0).coeffs, eps, b0, prob.radius()));
    }
    CAPTURE(K);
    CHECK(slope(es, rs) == doctest::Approx(K + 1).epsilon(0.2 / (K + 1)));
  }
}

TEST_CASE("phase locking on the benchmark") {
  Setup s(testing::benchmark(), 3, 1);
  VariationalSettings vs;
  vs.grid = 12;
  BifurcationProblem prob(s.cat(), 1e-3, 1, vs);
  const PhaseLockReport rep = phase_lock_verify(prob, s.seq);
  CHECK(rep.ok());
  CHECK(rep.failure.empty());
  CHECK(rep.xi.size() == 2);
  CHECK(std::fabs(wrap_angle(rep.beta0_bar[0] - std::numbers::pi / 2)) < 1e-9);
}

TEST_CASE("tolerance and radius defaults") {
  Setup s(testing::benchmark(), 3, 0);
  VariationalSettings vs;
  CHECK(composition_radius(s.cat(), vs) == 5);
  vs.composition_radius = 9;
  CHECK(composition_radius(s.cat(), vs) == 9);
  CHECK(g_tolerance(vs, 1e-3) == doctest::Approx(1e-12));
  vs.g_tol = 1e-5;
  CHECK(g_tolerance(vs, 1e-3) == 1e-5);
}
