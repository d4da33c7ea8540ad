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

#include "fdpo/distribution.hpp"

#include <cmath>
#include <string>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"

namespace fdpo {

FiniteDistribution::FiniteDistribution(std::vector<double> probabilities)
    : p_(std::move(probabilities))
{
  if (p_.empty()) {
    throw Error(ErrorCode::Shape, "distribution must have at least one entry");
  }
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::Domain,
                  "distribution entries must be finite and non-negative, got " +
                      formatDouble(v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::Domain,
                "distribution entries must sum to 1 within 1e-9, got " + formatDouble(sum));
  }
}

bool FiniteDistribution::strictlyPositive() const noexcept
{
  for (double v : p_) {
    if (!(v > 0.0)) {
      return false;
    }
  }
  return true;
}

double divergenceValue(Divergence const &divergence, FiniteDistribution const &p1,
                       FiniteDistribution const &p2)
{
  if (p1.size() != p2.size()) {
    throw Error(ErrorCode::Shape, "distributions differ in length: " +
                                      std::to_string(p1.size()) + " vs " +
                                      std::to_string(p2.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (p2[i] == 0.0) {
      if (p1[i] != 0.0) {
        throw Error(ErrorCode::Support,
                    "support of p1 is not dominated by p2 (index " + std::to_string(i) +
                        " has p2=0, p1=" + formatDouble(p1[i]) + ")");
      }
      continue;
    }
    double ratio = p1[i] / p2[i];
    double term;
    if (ratio < 1e-300) {
      term = divergence.fZeroLimit();
      if (std::isinf(term)) {
        throw Error(ErrorCode::Overflow,
                    "forward KL divergence is infinite: p1 vanishes on the support of p2 "
                    "(index " + std::to_string(i) + ")");
      }
    } else {
      term = divergence.f(ratio);
    }
    sum += p2[i] * term;
  }
  // Rounding can leave a tiny negative residue for near-identical inputs.
  return sum < 0.0 && sum > -1e-12 ? 0.0 : sum;
}

}  // namespace fdpo
