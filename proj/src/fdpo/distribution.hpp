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

#include <cstddef>
#include <vector>

#include "fdpo/divergence.hpp"

namespace fdpo {

/// Probability vector over a discrete set. Entries must be non-negative and
/// sum to 1 within 1e-9; validated once at construction.
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<double> probabilities);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  std::vector<double> const &probabilities() const noexcept { return p_; }

  bool strictlyPositive() const noexcept;

 private:
  std::vector<double> p_;
};

/// D_f(p1 || p2) = sum_i p2_i f(p1_i / p2_i).
///
/// The support of p1 must be dominated by the support of p2 (p2_i = 0 forces
/// p1_i = 0); zero ratios are folded to the analytic f(0+) limit, which for
/// forward KL diverges and reports overflow.
double divergenceValue(Divergence const &divergence, FiniteDistribution const &p1,
                       FiniteDistribution const &p2);

}  // namespace fdpo
