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

#include <string>
#include <string_view>

namespace fdpo {

enum class DivergenceKind {
  ReverseKl,
  ForwardKl,
  Alpha,
  JensenShannon,
};

/**
 * One member of the f-divergence family, with evaluable generator f, its
 * first and second derivatives, and the inverse of f'.
 *
 * Generators (natural log throughout):
 *   reverse KL    f(x) = x ln x
 *   forward KL    f(x) = -ln x
 *   alpha         f(x) = (x^{1-a} - (1-a) x - a) / (a (a-1)),  a in (0,1)
 *   JS            f(x) = x ln(2x/(x+1)) + ln(2/(x+1))
 *
 * All evaluations require x > 0. Inputs below 1e-300 are folded to the
 * analytic x->0+ limit of f (forward KL has no finite limit and reports
 * overflow); this keeps landscape sweeps near the axes finite.
 */
class Divergence {
 public:
  static Divergence reverseKl();
  static Divergence forwardKl();
  static Divergence alpha(double a);
  static Divergence jensenShannon();

  /// Accepts the config-file spellings: "reverse-kl", "forward-kl",
  /// "alpha:<value>", "js". Anything else is a config error.
  static Divergence parse(std::string_view name);

  DivergenceKind kind() const noexcept { return kind_; }
  double alphaValue() const noexcept { return alpha_; }
  std::string name() const;

  double f(double x) const;
  double fPrime(double x) const;
  double fDoublePrime(double x) const;

  /// Inverse of f'. The admissible y range depends on the kind; out-of-range
  /// arguments raise a range error naming the interval.
  double fPrimeInverse(double y) const;

  /// f' evaluated from the log of its argument; exact for the log-domain
  /// training paths where probability ratios underflow as plain doubles.
  double fPrimeFromLog(double log_x) const;

  /// ln f''(e^{log_x}); closed form per kind, never overflows.
  double logFDoublePrimeFromLog(double log_x) const;

  /// Supremum of range(f'): +inf (reverse KL), 0 (forward KL), 1/alpha, ln 2.
  double fPrimeSup() const;

  /// lim_{x->0+} f(x); +inf for forward KL.
  double fZeroLimit() const;

 private:
  Divergence(DivergenceKind kind, double a) : kind_(kind), alpha_(a) {}

  DivergenceKind kind_;
  double alpha_;
};

}  // namespace fdpo
