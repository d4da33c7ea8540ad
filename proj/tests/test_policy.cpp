//------------------------------------------------------------------------------
//
//   Copyright 2026 the fdpo authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cmath>
#include <vector>

#include <doctest.h>

#include "fdpo/error.hpp"
#include "fdpo/policy.hpp"
#include "fdpo/rng.hpp"
#include "oracles.hpp"

using namespace fdpo;
using fdpo::testing::alignmentObjective;
using fdpo::testing::simplexGridSearchOracle;

namespace {

std::vector<Divergence> allKinds()
{
  return {Divergence::reverseKl(), Divergence::forwardKl(), Divergence::alpha(0.3),
          Divergence::alpha(0.6), Divergence::jensenShannon()};
}

FiniteDistribution randomReference(std::size_t n, Rng &rng)
{
  std::vector<double> p(n);
  double sum = 0.0;
  for (double &v : p) {
    v = 0.05 + rng.uniform();
    sum += v;
  }
  for (double &v : p) {
    v /= sum;
  }
  return FiniteDistribution(p);
}

}  // namespace

TEST_CASE("constant action values return the reference policy")
{
  Rng rng(11);
  for (auto const &d : allKinds()) {
    FiniteDistribution const ref = randomReference(5, rng);
    DiscreteAlignmentProblem const problem{{0.7, 0.7, 0.7, 0.7, 0.7}, ref, 2.0, d};
    OptimalPolicySolution const sol = solveOptimalPolicy(problem);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(sol.policy[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    }
    CHECK(sol.lambda == doctest::Approx(0.7 - 2.0 * d.fPrime(1.0)).epsilon(1e-9));
    CHECK(sol.residual <= 1e-10);
  }
}

TEST_CASE("reverse KL solves to the exponential tilt")
{
  DiscreteAlignmentProblem const problem{
      {1.0, 0.0}, FiniteDistribution({0.5, 0.5}), 1.0, Divergence::reverseKl()};
  OptimalPolicySolution const sol = solveOptimalPolicy(problem);
  double const e = std::exp(1.0);
  CHECK(sol.policy[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-10));
  CHECK(sol.policy[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-10));

  // Independent analytic route: pi_ref * exp(q/beta) normalized.
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t const n = 2 + rng.below(6);
    FiniteDistribution const ref = randomReference(n, rng);
    std::vector<double> q(n);
    for (double &v : q) {
      v = -3.0 + 6.0 * rng.uniform();
    }
    double const beta = trial % 2 == 0 ? 1.0 : 7.5;
    OptimalPolicySolution const sol2 =
        solveOptimalPolicy({q, ref, beta, Divergence::reverseKl()});
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z += ref[i] * std::exp(q[i] / beta);
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(sol2.policy[i] - ref[i] * std::exp(q[i] / beta) / z) < 1e-10);
    }
  }
}

TEST_CASE("JS solution matches the dense simplex search oracle")
{
  DiscreteAlignmentProblem const problem{
      {1.0, 0.0}, FiniteDistribution({0.5, 0.5}), 1.0, Divergence::jensenShannon()};
  OptimalPolicySolution const sol = solveOptimalPolicy(problem);
  auto const oracle = simplexGridSearchOracle(problem, 1e-5);
  CHECK(std::abs(sol.policy[0] - oracle.policy[0]) < 1e-4);
  CHECK(std::abs(alignmentObjective(problem, sol.policy.probabilities()) - oracle.objective) <
        1e-8);
}

TEST_CASE("solver attains the oracle objective on small problems")
{
  Rng rng(2024);
  for (auto const &d : allKinds()) {
    CAPTURE(d.name());
    for (int trial = 0; trial < 10; ++trial) {
      std::size_t const n = 2 + rng.below(2);
      FiniteDistribution const ref = randomReference(n, rng);
      std::vector<double> q(n);
      for (double &v : q) {
        v = -2.0 + 4.0 * rng.uniform();
      }
      double const beta = trial % 3 == 0 ? 0.8 : 3.0;
      DiscreteAlignmentProblem const problem{q, ref, beta, d};
      OptimalPolicySolution const sol = solveOptimalPolicy(problem);
      auto const oracle = simplexGridSearchOracle(problem, 1e-3);
      double const got = alignmentObjective(problem, sol.policy.probabilities());
      CHECK(got >= oracle.objective - 1e-6);
      CHECK(std::abs(got - oracle.objective) < 1e-6);
    }
  }
}

TEST_CASE("normalization mass is strictly decreasing along the bracket")
{
  Rng rng(5);
  for (auto const &d : allKinds()) {
    FiniteDistribution const ref = randomReference(4, rng);
    std::vector<double> const q = {1.0, -0.5, 0.25, 2.0};
    double const beta = 2.0;
    double const sup = d.fPrimeSup();
    double const lambda_hi = 2.0 - beta * d.fPrime(1.0);
    double lambda_lo = -0.5 - beta * d.fPrime(1.0);
    if (std::isfinite(sup)) {
      lambda_lo = std::max(lambda_lo, 2.0 - beta * sup + 1e-6);
    }
    double previous = 1e300;
    for (int i = 0; i <= 50; ++i) {
      double const lambda = lambda_lo + (lambda_hi - lambda_lo) * i / 50.0;
      double mass = 0.0;
      for (std::size_t a = 0; a < q.size(); ++a) {
        mass += ref[a] * d.fPrimeInverse((q[a] - lambda) / beta);
      }
      CHECK(mass < previous);
      previous = mass;
    }
  }
}

TEST_CASE("solve/recover round trip reproduces the action values")
{
  Rng rng(314);
  auto const kinds = allKinds();
  std::vector<double> const betas = {0.5, 1.0, 10.0};
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t const n = 2 + rng.below(15);
    FiniteDistribution const ref = randomReference(n, rng);
    std::vector<double> q(n);
    for (double &v : q) {
      v = -3.0 + 6.0 * rng.uniform();
    }
    Divergence const &d = kinds[trial % kinds.size()];
    double const beta = betas[trial % betas.size()];
    OptimalPolicySolution const sol = solveOptimalPolicy({q, ref, beta, d});
    CHECK(sol.residual <= 1e-10);
    std::vector<double> const q_rec =
        recoverQFromPolicy(sol.policy, ref, beta, d, sol.lambda);
    // Up to a uniform additive constant.
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      shift += (q_rec[i] - q[i]) / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(q_rec[i] - q[i] - shift) < 1e-7);
    }
  }
}

TEST_CASE("recover anchor cases")
{
  // Identity policy with lambda 0 under JS: f'(1) = 0, so all-zero values.
  FiniteDistribution const ref({0.5, 0.5});
  auto q = recoverQFromPolicy(ref, ref, 1.0, Divergence::jensenShannon(), 0.0);
  CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-14));

  DiscreteAlignmentProblem const problem{
      {1.0, 0.0}, ref, 1.0, Divergence::reverseKl()};
  OptimalPolicySolution const sol = solveOptimalPolicy(problem);
  q = recoverQFromPolicy(sol.policy, ref, 1.0, Divergence::reverseKl(), sol.lambda);
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("reward reparameterization")
{
  CHECK(rewardReparameterize({Divergence::reverseKl(), 10.0}, 0.3, 0.3) ==
        doctest::Approx(10.0));
  CHECK(rewardReparameterize({Divergence::jensenShannon(), 10.0}, 0.3, 0.3) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rewardReparameterize({Divergence::reverseKl(), 1.0}, std::exp(1.0), 1.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rewardReparameterize({Divergence::forwardKl(), 4.0}, 0.5, 0.25) ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS_AS(rewardReparameterize({Divergence::reverseKl(), 1.0}, 0.0, 0.5), Error);
}

TEST_CASE("degenerate single-action problem")
{
  for (auto const &d : allKinds()) {
    OptimalPolicySolution const sol =
        solveOptimalPolicy({{2.5}, FiniteDistribution({1.0}), 3.0, d});
    CHECK(sol.policy[0] == doctest::Approx(1.0));
    CHECK(sol.lambda == doctest::Approx(2.5 - 3.0 * d.fPrime(1.0)).epsilon(1e-12));
    CHECK(sol.residual == 0.0);
  }
}

TEST_CASE("problem validation errors")
{
  FiniteDistribution const ref({0.5, 0.5});
  CHECK_THROWS_AS(solveOptimalPolicy({{1.0}, ref, 1.0, Divergence::reverseKl()}), Error);
  CHECK_THROWS_AS(
      solveOptimalPolicy({{1.0, 0.0}, FiniteDistribution({1.0, 0.0}), 1.0,
                          Divergence::reverseKl()}),
      Error);
  CHECK_THROWS_AS(solveOptimalPolicy({{1.0, 0.0}, ref, 0.0, Divergence::reverseKl()}), Error);
  CHECK_THROWS_AS(recoverQFromPolicy(FiniteDistribution({0.2, 0.8}), FiniteDistribution({1.0}),
                                     1.0, Divergence::reverseKl(), 0.0),
                  Error);
}
