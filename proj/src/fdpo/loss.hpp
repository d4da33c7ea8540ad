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
#include <utility>
#include <vector>

#include "fdpo/divergence.hpp"

namespace fdpo {

/// Win/loss probability ratios: x1 = p_theta(winner)/p_ref(winner),
/// x2 = p_theta(loser)/p_ref(loser). Both must be positive.
struct RatioPair {
  double x1;
  double x2;
};

/// Same pair carried as natural logs; the training paths stay in log space so
/// tiny step probabilities never underflow.
struct LogRatioPair {
  double log_x1;
  double log_x2;
};

struct LossConfig {
  Divergence divergence;
  double beta;  // penalty coefficient, > 0
};

/// Partial derivatives of the pairwise loss. d_x1 <= 0 and d_x2 >= 0 always:
/// the loss pushes the win ratio up and the loss ratio down.
struct GradientPair {
  double d_x1;
  double d_x2;
};

/// L(x1,x2) = -ln sigma(beta f'(x1) - beta f'(x2)), evaluated through a
/// stable log-sigmoid (no overflow for |argument| up to 1e4 and beyond).
double generalizedLoss(LossConfig const &cfg, RatioPair pair);
double generalizedLossFromLog(LossConfig const &cfg, LogRatioPair pair);

/// Analytic gradients:
///   dL/dx1 = -beta (1 - sigma(z)) f''(x1),  dL/dx2 = +beta (1 - sigma(z)) f''(x2)
/// with z = beta f'(x1) - beta f'(x2). Computed in log space so saturated
/// sigmoids never produce 0*inf.
GradientPair lossGradients(LossConfig const &cfg, RatioPair pair);
GradientPair lossGradientsFromLog(LossConfig const &cfg, LogRatioPair pair);

/// Gradients with respect to the log ratios: dL/dlog x_i = dL/dx_i * x_i.
GradientPair lossGradientsWrtLog(LossConfig const &cfg, LogRatioPair pair);

/// |dL/dx1 / dL/dx2| = f''(x1)/f''(x2); independent of beta.
double gradientRatio(LossConfig const &cfg, RatioPair pair);

/// Per-kind simplified gradient expressions (power/exponential forms),
/// evaluated through log-sum-exp. Two published typos are corrected here:
/// the forward-KL denominator uses e^{beta/x2} (not a double exponential),
/// and the JS dL/dx2 carries the positive sign the general form dictates.
/// Agrees with lossGradients wherever both are finite.
GradientPair closedFormGradients(LossConfig const &cfg, RatioPair pair);

/// Bradley-Terry preference probability sigma(r_w - r_l).
double sigmaBtPreference(double r_w, double r_l);

/// Gradient ratios of the whole kernel family at (x1,x2), sorted ascending.
/// Requires 0 < x2 < x1; checks the strict chains
///   fkl < js < rkl < 1   and   fkl < a=0.8 < a=0.6 < a=0.4 < a=0.2 < rkl < 1
/// and throws if either fails.
std::vector<std::pair<std::string, double>> verifyRatioOrdering(double x1, double x2);

namespace detail {
/// -ln sigma(z) = softplus(-z), stable for any finite z.
double softplus(double z);
void validate(LossConfig const &cfg);
}  // namespace detail

}  // namespace fdpo
