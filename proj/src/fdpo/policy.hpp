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

#include <vector>

#include "fdpo/distribution.hpp"
#include "fdpo/divergence.hpp"
#include "fdpo/loss.hpp"

namespace fdpo {

/// Maximize E_pi[Q] - beta * D_f(pi || pi_ref) over the probability simplex.
struct DiscreteAlignmentProblem {
  std::vector<double> q_values;
  FiniteDistribution pi_ref;  // must be strictly positive
  double beta;
  Divergence divergence;
};

struct OptimalPolicySolution {
  FiniteDistribution policy;
  double lambda;    // normalization multiplier
  double residual;  // |sum(policy) - 1| at convergence, <= 1e-10
};

/// KKT solution pi(a) = pi_ref(a) * (f')^{-1}((Q(a) - lambda)/beta), with
/// lambda found by bisection on the normalization mass. The mass is strictly
/// decreasing in lambda (f'' > 0), so the bracket derived from the range of
/// f' is unconditionally safe where Newton steps could leave the domain.
OptimalPolicySolution solveOptimalPolicy(DiscreteAlignmentProblem const &problem);

/// beta * f'(p_theta / p_ref); the implicit per-sample reward up to an
/// additive constant that cancels in pairwise comparisons (pinned to 0 here).
double rewardReparameterize(LossConfig const &cfg, double p_theta, double p_ref);

/// Q(a) = beta * f'(pi(a)/pi_ref(a)) + lambda; inverse of solveOptimalPolicy.
std::vector<double> recoverQFromPolicy(FiniteDistribution const &policy,
                                       FiniteDistribution const &pi_ref, double beta,
                                       Divergence const &divergence, double lambda);

}  // namespace fdpo
