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
#include "fdpo/loss.hpp"
#include "fdpo/rng.hpp"
#include "oracles.hpp"

using namespace fdpo;
using fdpo::testing::centralDifference;
using fdpo::testing::relDev;

namespace {

std::vector<Divergence> allKinds()
{
  return {Divergence::reverseKl(), Divergence::forwardKl(), Divergence::alpha(0.3),
          Divergence::alpha(0.6), Divergence::jensenShannon()};
}

std::vector<double> logGrid(double lo, double hi, int n)
{
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) {
    double const t = static_cast<double>(i) / (n - 1);
    grid.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
  }
  return grid;
}

}  // namespace

TEST_CASE("loss anchor values")
{
  for (auto const &d : allKinds()) {
    LossConfig const cfg{d, 10.0};
    CHECK(generalizedLoss(cfg, {1.0, 1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  CHECK(generalizedLoss({Divergence::reverseKl(), 1.0}, {std::exp(1.0), 1.0}) ==
        doctest::Approx(0.31326168751822286).epsilon(1e-12));
  // beta f'(2) - beta f'(0.5) for JS with beta=10 equals 10 ln 2.
  CHECK(generalizedLoss({Divergence::jensenShannon(), 10.0}, {2.0, 0.5}) ==
        doctest::Approx(0.0009760859730554589).epsilon(1e-10));
}

TEST_CASE("loss is positive and stable at extreme arguments")
{
  for (auto const &d : allKinds()) {
    LossConfig const cfg{d, 10.0};
    for (double x1 : {1e-8, 0.05, 1.0, 20.0, 1e6}) {
      for (double x2 : {1e-8, 0.05, 1.0, 20.0, 1e6}) {
        double const loss = generalizedLoss(cfg, {x1, x2});
        CHECK(loss >= 0.0);
        CHECK(std::isfinite(loss));
      }
    }
  }
  // Forward KL drives the logit to +/- 1e4 and beyond without overflow.
  double const l = generalizedLoss({Divergence::forwardKl(), 100.0}, {1.0, 1e-4});
  CHECK(l >= 0.0);
  CHECK(std::isfinite(l));
}

TEST_CASE("gradient anchor values")
{
  GradientPair g = lossGradients({Divergence::reverseKl(), 1.0}, {1.0, 1.0});
  CHECK(g.d_x1 == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g.d_x2 == doctest::Approx(0.5).epsilon(1e-12));

  g = lossGradients({Divergence::jensenShannon(), 1.0}, {1.0, 1.0});
  CHECK(g.d_x1 == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(g.d_x2 == doctest::Approx(0.25).epsilon(1e-12));

  g = lossGradients({Divergence::forwardKl(), 2.0}, {1.0, 1.0});
  CHECK(g.d_x1 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(g.d_x2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences over the working grid")
{
  auto const grid = logGrid(0.05, 20.0, 20);
  for (auto const &d : allKinds()) {
    CAPTURE(d.name());
    for (double beta : {0.1, 1.0, 10.0}) {
      LossConfig const cfg{d, beta};
      for (double x1 : grid) {
        for (double x2 : grid) {
          GradientPair const g = lossGradients(cfg, {x1, x2});
          CHECK(g.d_x1 <= 0.0);
          CHECK(g.d_x2 >= 0.0);
          double const h1 = 1e-6 * x1;
          double const fd1 = centralDifference(
              [&](double v) { return generalizedLoss(cfg, {v, x2}); }, x1, h1);
          double const h2 = 1e-6 * x2;
          double const fd2 = centralDifference(
              [&](double v) { return generalizedLoss(cfg, {x1, v}); }, x2, h2);
          CHECK(relDev(fd1, g.d_x1, 1e-30) < 1e-5);
          CHECK(relDev(fd2, g.d_x2, 1e-30) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("closed forms reproduce the analytic gradients")
{
  auto const grid = logGrid(0.05, 20.0, 20);
  for (auto const &d : allKinds()) {
    CAPTURE(d.name());
    for (double beta : {0.1, 1.0, 10.0}) {
      LossConfig const cfg{d, beta};
      for (double x1 : grid) {
        for (double x2 : grid) {
          GradientPair const g = lossGradients(cfg, {x1, x2});
          GradientPair const c = closedFormGradients(cfg, {x1, x2});
          CHECK(relDev(c.d_x1, g.d_x1, 1e-300) < 1e-9);
          CHECK(relDev(c.d_x2, g.d_x2, 1e-300) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("closed-form anchor values")
{
  GradientPair g = closedFormGradients({Divergence::reverseKl(), 1.0}, {1.0, 1.0});
  CHECK(g.d_x1 == doctest::Approx(-0.5).epsilon(1e-12));
  g = closedFormGradients({Divergence::jensenShannon(), 1.0}, {1.0, 1.0});
  CHECK(g.d_x1 == doctest::Approx(-0.25).epsilon(1e-12));
  g = closedFormGradients({Divergence::forwardKl(), 1.0}, {1.0, 1.0});
  CHECK(g.d_x2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gradient ratio identities")
{
  CHECK(gradientRatio({Divergence::reverseKl(), 1.0}, {2.0, 0.5}) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(gradientRatio({Divergence::forwardKl(), 1.0}, {2.0, 0.5}) ==
        doctest::Approx(0.0625).epsilon(1e-12));
  for (auto const &d : allKinds()) {
    CHECK(gradientRatio({d, 1.0}, {3.7, 3.7}) == doctest::Approx(1.0).epsilon(1e-12));
  }

  Rng rng(4242);
  for (int trial = 0; trial < 300; ++trial) {
    double const x1 = 0.05 + 20.0 * rng.uniform();
    double const x2 = 0.05 + 20.0 * rng.uniform();
    for (auto const &d : allKinds()) {
      // |d1/d2| equals f''(x1)/f''(x2) and is independent of beta.
      double const r1 = gradientRatio({d, 0.1}, {x1, x2});
      double const r10 = gradientRatio({d, 10.0}, {x1, x2});
      CHECK(r1 == r10);
      GradientPair const g = lossGradients({d, 1.0}, {x1, x2});
      CHECK(relDev(std::abs(g.d_x1 / g.d_x2), r1) < 1e-9);
      CHECK(relDev(r1, d.fDoublePrime(x1) / d.fDoublePrime(x2)) < 1e-9);
    }
  }
}

TEST_CASE("ratio ordering chain on random regime pairs")
{
  Rng rng(777);
  for (int trial = 0; trial < 1000; ++trial) {
    double const x1 = 0.01 + 49.99 * rng.uniform();
    double const x2 = rng.uniform() * x1;
    if (x2 <= 0.0 || x2 >= x1) {
      continue;
    }
    auto const ordering = verifyRatioOrdering(x1, x2);  // throws on violation
    CHECK(ordering.size() == 7);
    CHECK(ordering.front().second > 0.0);
    CHECK(ordering.back().second < 1.0);
    for (std::size_t i = 1; i < ordering.size(); ++i) {
      CHECK(ordering[i - 1].second <= ordering[i].second);
    }
  }
}

TEST_CASE("ratio ordering anchor values")
{
  auto ordering = verifyRatioOrdering(2.0, 1.0);
  CHECK(ordering.front().first == "forward-kl");
  CHECK(ordering.front().second == doctest::Approx(0.25));
  CHECK(ordering.back().first == "reverse-kl");
  CHECK(ordering.back().second == doctest::Approx(0.5));
  for (auto const &[label, value] : ordering) {
    if (label == "js") {
      CHECK(value == doctest::Approx(1.0 / 3.0));
    }
  }

  ordering = verifyRatioOrdering(4.0, 2.0);
  for (auto const &[label, value] : ordering) {
    if (label == "js") {
      CHECK(value == doctest::Approx(0.3));
    }
  }

  // Near-degenerate pair keeps strictness.
  CHECK_NOTHROW(verifyRatioOrdering(1.0001, 1.0));
  CHECK_THROWS_AS(verifyRatioOrdering(1.0, 1.0), Error);
  CHECK_THROWS_AS(verifyRatioOrdering(1.0, 2.0), Error);
}

TEST_CASE("unlearning asymptotics as the loss ratio collapses")
{
  // Reverse KL with beta < 1: the win-side gradient dies while the loss-side
  // gradient blows up; with beta > 1 both vanish. The other kernels keep both
  // gradients vanishing regardless of beta.
  std::vector<double> const x2s = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};

  LossConfig const rkl_small{Divergence::reverseKl(), 0.5};
  LossConfig const rkl_large{Divergence::reverseKl(), 10.0};
  double prev_d1 = 1e300;
  double prev_d2 = 0.0;
  for (double x2 : x2s) {
    GradientPair const g = lossGradients(rkl_small, {1.0, x2});
    CHECK(std::abs(g.d_x1) < prev_d1);
    CHECK(g.d_x2 > prev_d2);
    prev_d1 = std::abs(g.d_x1);
    prev_d2 = g.d_x2;
  }
  CHECK(prev_d1 < 1e-3);

  prev_d2 = 1e300;
  for (double x2 : x2s) {
    GradientPair const g = lossGradients(rkl_large, {1.0, x2});
    CHECK(g.d_x2 < prev_d2);
    prev_d2 = g.d_x2;
  }
  CHECK(prev_d2 < 1e-3);

  // JS with beta > 1: both sides vanish; with beta < 1 the loss side blows up.
  prev_d1 = 1e300;
  prev_d2 = 1e300;
  for (double x2 : x2s) {
    GradientPair const g = lossGradients({Divergence::jensenShannon(), 10.0}, {1.0, x2});
    CHECK(std::abs(g.d_x1) <= prev_d1);
    CHECK(g.d_x2 <= prev_d2);
    prev_d1 = std::abs(g.d_x1);
    prev_d2 = g.d_x2;
  }
  CHECK(prev_d2 < 1e-3);
  prev_d2 = 0.0;
  for (double x2 : x2s) {
    GradientPair const g = lossGradients({Divergence::jensenShannon(), 0.5}, {1.0, x2});
    CHECK(g.d_x2 >= prev_d2);
    prev_d2 = g.d_x2;
  }

  // Alpha and forward KL: both gradients vanish for any beta.
  for (double beta : {0.5, 10.0}) {
    for (auto const &d : {Divergence::alpha(0.5), Divergence::forwardKl()}) {
      GradientPair const g = lossGradients({d, beta}, {1.0, 1e-8});
      CHECK(std::abs(g.d_x1) < 1e-6);
      CHECK(g.d_x2 < 1e-6);
    }
  }
}

TEST_CASE("Bradley-Terry preference probability")
{
  CHECK(sigmaBtPreference(3.0, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmaBtPreference(1.0, 0.0) == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(sigmaBtPreference(-3.0, 3.0) == doctest::Approx(0.0024726231566347743).epsilon(1e-12));
  // Strictly inside (0,1) wherever doubles can represent it; saturated
  // arguments round to the nearest representable endpoint.
  CHECK(sigmaBtPreference(36.0, 0.0) < 1.0);
  CHECK(sigmaBtPreference(-36.0, 0.0) > 0.0);
  CHECK(sigmaBtPreference(100.0, -100.0) <= 1.0);
  CHECK(sigmaBtPreference(-100.0, 100.0) >= 0.0);
  CHECK_THROWS_AS(sigmaBtPreference(std::nan(""), 0.0), Error);
}

TEST_CASE("invalid loss inputs are rejected")
{
  LossConfig const cfg{Divergence::reverseKl(), 1.0};
  CHECK_THROWS_AS(generalizedLoss(cfg, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(generalizedLoss(cfg, {1.0, -2.0}), Error);
  CHECK_THROWS_AS(generalizedLoss({Divergence::reverseKl(), 0.0}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(generalizedLoss({Divergence::reverseKl(), -1.0}, {1.0, 1.0}), Error);
}
