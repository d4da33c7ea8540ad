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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fdpo/diffusion.hpp"
#include "fdpo/loss.hpp"
#include "fdpo/rng.hpp"

namespace fdpo {

/// Softmax policy over a finite outcome set, one logit row per condition.
struct CategoricalPolicy {
  int n_conditions = 0;
  int n_outcomes = 0;
  std::vector<double> logits;  // row-major [condition][outcome]

  static CategoricalPolicy uniform(int n_conditions, int n_outcomes);

  std::vector<double> probs(int condition) const;
  std::vector<double> logProbs(int condition) const;
  int sample(int condition, Rng &rng) const;
};

/// Pairwise preference over finite outcomes.
struct PreferenceRecord {
  Condition condition;
  int winner = 0;
  int loser = 0;
};

/// Pairwise preference between two candidate denoising steps that share the
/// parent state x_t at timestep t.
struct StepPreferenceRecord {
  Condition condition;
  Sample2D winner;
  Sample2D loser;
  int timestep = 0;
  Sample2D x_t;
};

/// Deterministic stand-in for a learned preference model: each condition
/// designates a preferred subset of mixture modes, and score(s, c) is the
/// log-density of s under that sub-mixture. Higher is better.
class PreferenceOracle {
 public:
  PreferenceOracle(std::vector<Sample2D> centers,
                   std::vector<std::vector<int>> preferred_by_condition,
                   double component_sigma);

  double score(Sample2D s, Condition c) const;
  int nConditions() const noexcept { return static_cast<int>(preferred_.size()); }
  std::vector<Sample2D> const &centers() const noexcept { return centers_; }
  std::vector<int> const &preferredModes(int condition) const;

 private:
  std::vector<Sample2D> centers_;
  std::vector<std::vector<int>> preferred_;
  double sigma_;
};

/// The desk-scale data geometry shared by both trainers: an 8-mode Gaussian
/// ring (radius 2, component sigma 0.1) whose modes double as the categorical
/// outcome embedding, plus the oracle designating two preferred modes per
/// condition.
struct RingTask {
  std::vector<Sample2D> centers;
  double component_sigma;
  PreferenceOracle oracle;

  static RingTask standard(int n_conditions = 2);

  Sample2D drawDataPoint(Rng &rng) const;  // full mixture, all modes
};

/// Per-epoch training evidence. Rows are logged at epoch start (before that
/// epoch's updates), so with theta initialized at the reference the first row
/// shows the exact ln 2 tie loss.
struct TrainTrace {
  std::vector<double> mean_loss;
  std::vector<double> mean_x1;
  std::vector<double> mean_x2;
  std::vector<double> mean_gradient_ratio;
  std::vector<double> mean_pref_score;
  std::vector<int> mode_coverage;
  std::vector<double> mean_pairwise_distance;

  std::size_t epochs() const noexcept { return mean_loss.size(); }
  std::string toCsv() const;
};

struct CategoricalSetup {
  CategoricalPolicy reference;
  std::vector<PreferenceRecord> records;
};

/// Reference logits are a small seeded perturbation of uniform; records pair
/// reference-sampled outcomes labelled by the oracle scores of their centers.
CategoricalSetup makeDefaultCategoricalSetup(RingTask const &task, int records_per_condition,
                                             std::uint64_t seed);

struct CategoricalTrainResult {
  CategoricalPolicy policy;
  TrainTrace trace;
};

/// Full-batch gradient descent on the mean pairwise loss with
/// x1 = p_theta(w|c)/p_ref(w|c), x2 = p_theta(l|c)/p_ref(l|c); gradients flow
/// analytically through the softmax (dlogp/dlogit = 1{o=k} - softmax_k).
CategoricalTrainResult trainCategorical(CategoricalPolicy policy, CategoricalPolicy const &ref,
                                        std::vector<PreferenceRecord> const &data,
                                        LossConfig const &cfg, int epochs, double lr,
                                        RingTask const &task, std::uint64_t seed);

/// Mean win/loss ratios of a categorical policy against its reference over a
/// record set (the quantities the trace tracks, computable at any point).
std::pair<double, double> categoricalMeanRatios(CategoricalPolicy const &policy,
                                                CategoricalPolicy const &ref,
                                                std::vector<PreferenceRecord> const &data);

/// Walk one reverse trajectory; at each step draw k candidates from the
/// current policy, score their one-step posterior-mean projections to
/// x0-space with the oracle, emit (argmax, argmin) as the preference pair,
/// and continue the trajectory from the winner. Ties resolve to the lowest
/// candidate index. Deterministic given the seed.
std::vector<StepPreferenceRecord> buildStepPairs(GaussianStepPolicy const &policy,
                                                 NoiseSchedule const &schedule,
                                                 PreferenceOracle const &oracle, Condition c,
                                                 int k, std::uint64_t seed);

enum class StepLossForm {
  Generalized,    // -ln sigma(beta f'(x1) - beta f'(x2)) on per-step ratios
  SpoDirect,      // -ln sigma(beta log x1 - beta log x2); the reverse-KL special case
  TimestepBound,  // beta scaled by T: the per-timestep convexity bound
};

struct StepwiseTrainResult {
  GaussianStepPolicy policy;
  TrainTrace trace;
};

/// Stochastic minibatch descent, one update per trajectory; per-step ratios
/// come from the shared-sigma Gaussian closed form and stay in log space.
/// With self_check enabled the analytic parameter gradients are validated
/// against central finite differences on one batch before training starts.
StepwiseTrainResult trainStepwise(GaussianStepPolicy policy, GaussianStepPolicy const &ref,
                                  PreferenceOracle const &oracle, NoiseSchedule const &schedule,
                                  LossConfig const &cfg, int epochs, double lr, int k,
                                  int pairs_per_epoch, std::uint64_t seed,
                                  StepLossForm form = StepLossForm::Generalized,
                                  bool self_check = true);

/// Max relative deviation between analytic and central finite-difference
/// parameter gradients of the step-wise loss on the given records.
double stepwiseGradCheck(GaussianStepPolicy &policy, GaussianStepPolicy const &ref,
                         std::vector<StepPreferenceRecord> const &records,
                         LossConfig const &cfg, StepLossForm form);

/// Supervised pre-training of the mean predictor: regression of
/// mu(x_t, t, c) onto the exact posterior mean of the noising chain given
/// (x0, x_t). Plain minibatch SGD with seeded shuffling.
GaussianStepPolicy pretrainReference(NoiseSchedule const &schedule,
                                     std::vector<std::pair<Sample2D, Condition>> const &dataset,
                                     int epochs, double lr, int n_conditions, int hidden,
                                     int batch_size, std::uint64_t seed);

/// Ring-mixture dataset with conditions cycling through the vocabulary; the
/// data distribution itself is condition-independent, alignment is what later
/// concentrates each condition on its preferred modes.
std::vector<std::pair<Sample2D, Condition>> makeRingDataset(RingTask const &task, int n,
                                                            int n_conditions,
                                                            std::uint64_t seed);

/// Per-timestep bound loss: the pairwise loss with the penalty scaled by the
/// number of steps, -ln sigma(beta T f'(x1) - beta T f'(x2)). At T=1 it is
/// the plain loss.
double perTimestepBoundLoss(LossConfig const &cfg, double winner_step_ratio,
                            double loser_step_ratio, int t_max);

}  // namespace fdpo
