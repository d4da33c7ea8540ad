#pragma once
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

// Test-only independent oracles. Everything here recomputes expected values
// through a different route than the library (finite differences, naive
// histogram counts, dense simplex search) and must stay decoupled from the
// implementation paths it checks.

#include <functional>
#include <vector>

#include "fdpo/metrics.hpp"
#include "fdpo/policy.hpp"

namespace fdpo::testing {

/// (f(x+h) - f(x-h)) / 2h.
double centralDifference(std::function<double(double)> const &f, double x, double h);

/// Relative deviation |a-b| / max(|a|,|b|); zero when both are below floor.
double relDev(double a, double b, double floor = 1e-12);

double naiveEntropy1d(GrayImage const &img);
double naiveEntropy2d(GrayImage const &img, int neighborhood);
double naiveRmse(GrayImage const &a, GrayImage const &b);

/// E_pi[q] - beta * sum_i pi_ref_i f(pi_i / pi_ref_i), straight off the
/// definition.
double alignmentObjective(DiscreteAlignmentProblem const &problem,
                          std::vector<double> const &policy);

struct SimplexSearchResult {
  std::vector<double> policy;
  double objective;
};

/// Dense grid search over the (n<=3)-simplex at the given step, refined by a
/// shrinking pattern search down to 1e-9 steps.
SimplexSearchResult simplexGridSearchOracle(DiscreteAlignmentProblem const &problem,
                                            double grid_step);

/// Deterministic pseudo-random test image.
GrayImage randomImage(int width, int height, std::uint64_t seed);

// Fixture images shared with tests/tools/metric_reference.py (integer-exact).
GrayImage ssimFixtureA();
GrayImage ssimFixtureB();
GrayImage fsimFixtureA();
GrayImage fsimFixtureB();

}  // namespace fdpo::testing
