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

#include "fdpo/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"

namespace fdpo {

namespace {

constexpr int kMaxBisectionIterations = 200;
constexpr double kResidualTarget = 1e-10;
const double kInf = std::numeric_limits<double>::infinity();

void validateProblem(DiscreteAlignmentProblem const &problem)
{
  if (problem.q_values.size() != problem.pi_ref.size()) {
    throw Error(ErrorCode::Shape, "q_values and pi_ref differ in length");
  }
  if (!problem.pi_ref.strictlyPositive()) {
    throw Error(ErrorCode::Domain, "reference policy must be strictly positive on every action");
  }
  if (!(problem.beta > 0.0) || !std::isfinite(problem.beta)) {
    throw Error(ErrorCode::InvalidArgument, "beta must be positive and finite");
  }
  for (double q : problem.q_values) {
    if (!std::isfinite(q)) {
      throw Error(ErrorCode::Domain, "action values must be finite");
    }
  }
}

/// Normalization mass at a multiplier value; +inf when the multiplier sits at
/// or below the domain boundary of (f')^{-1} (mass blows up there anyway, so
/// the bisection treats it as "too small").
double normalizationMass(DiscreteAlignmentProblem const &problem, double lambda,
                         double f_prime_sup)
{
  double mass = 0.0;
  for (std::size_t i = 0; i < problem.q_values.size(); ++i) {
    double y = (problem.q_values[i] - lambda) / problem.beta;
    if (!(y < f_prime_sup)) {
      return kInf;
    }
    mass += problem.pi_ref[i] * problem.divergence.fPrimeInverse(y);
    if (std::isinf(mass)) {
      return kInf;
    }
  }
  return mass;
}

}  // namespace

OptimalPolicySolution solveOptimalPolicy(DiscreteAlignmentProblem const &problem)
{
  validateProblem(problem);
  std::size_t const n = problem.q_values.size();
  double const f_prime_at_one = problem.divergence.fPrime(1.0);
  double const sup = problem.divergence.fPrimeSup();

  if (n == 1) {
    double lambda = problem.q_values[0] - problem.beta * f_prime_at_one;
    return {FiniteDistribution({1.0}), lambda, 0.0};
  }

  double const q_max = *std::max_element(problem.q_values.begin(), problem.q_values.end());
  double const q_min = *std::min_element(problem.q_values.begin(), problem.q_values.end());

  // mass(q_max - beta f'(1)) <= 1 <= mass(q_min - beta f'(1)); the lower end
  // additionally has to stay above the domain boundary lambda_min, toward
  // which the mass diverges.
  double hi = q_max - problem.beta * f_prime_at_one;
  double lo = q_min - problem.beta * f_prime_at_one;
  if (std::isfinite(sup)) {
    double lambda_min = q_max - problem.beta * sup;
    if (!(lo > lambda_min)) {
      double gap = hi - lambda_min;
      lo = hi;
      bool bracketed = false;
      for (int j = 0; j < 1100; ++j) {
        gap *= 0.5;
        lo = lambda_min + gap;
        if (!(lo < hi)) {
          break;
        }
        if (normalizationMass(problem, lo, sup) >= 1.0) {
          bracketed = true;
          break;
        }
      }
      if (!bracketed) {
        throw Error(ErrorCode::Infeasible,
                    "could not bracket the normalization multiplier: mass stays below 1 "
                    "down to the domain boundary (q spread " +
                        formatDouble(q_max - q_min) + ", beta " + formatDouble(problem.beta) +
                        ", divergence " + problem.divergence.name() + ")");
      }
    }
  }

  double best_lambda = hi;
  double best_gap = std::abs(normalizationMass(problem, hi, sup) - 1.0);
  {
    double lo_gap = std::abs(normalizationMass(problem, lo, sup) - 1.0);
    if (lo_gap < best_gap) {
      best_gap = lo_gap;
      best_lambda = lo;
    }
  }

  for (int iter = 0; iter < kMaxBisectionIterations && best_gap > 1e-14; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;  // bracket exhausted at double precision
    }
    double mass = normalizationMass(problem, mid, sup);
    double gap = std::abs(mass - 1.0);
    if (gap < best_gap) {
      best_gap = gap;
      best_lambda = mid;
    }
    if (mass > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  std::vector<double> policy(n);
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double y = (problem.q_values[i] - best_lambda) / problem.beta;
    policy[i] = problem.pi_ref[i] * problem.divergence.fPrimeInverse(y);
    mass += policy[i];
  }
  double residual = std::abs(mass - 1.0);
  if (!(residual <= kResidualTarget)) {
    throw Error(ErrorCode::NoConvergence,
                "normalization residual " + formatDouble(residual) + " exceeds 1e-10 after " +
                    std::to_string(kMaxBisectionIterations) + " bisection iterations");
  }
  return {FiniteDistribution(std::move(policy)), best_lambda, residual};
}

double rewardReparameterize(LossConfig const &cfg, double p_theta, double p_ref)
{
  detail::validate(cfg);
  if (!(p_theta > 0.0) || !(p_ref > 0.0)) {
    throw Error(ErrorCode::Domain, "probabilities must be positive (p_theta=" +
                                       formatDouble(p_theta) + ", p_ref=" +
                                       formatDouble(p_ref) + ")");
  }
  return cfg.beta * cfg.divergence.fPrime(p_theta / p_ref);
}

std::vector<double> recoverQFromPolicy(FiniteDistribution const &policy,
                                       FiniteDistribution const &pi_ref, double beta,
                                       Divergence const &divergence, double lambda)
{
  if (policy.size() != pi_ref.size()) {
    throw Error(ErrorCode::Shape, "policy and pi_ref differ in length");
  }
  if (!policy.strictlyPositive() || !pi_ref.strictlyPositive()) {
    throw Error(ErrorCode::Domain, "policy and pi_ref must be strictly positive");
  }
  std::vector<double> q(policy.size());
  for (std::size_t i = 0; i < policy.size(); ++i) {
    q[i] = beta * divergence.fPrime(policy[i] / pi_ref[i]) + lambda;
  }
  return q;
}

}  // namespace fdpo
