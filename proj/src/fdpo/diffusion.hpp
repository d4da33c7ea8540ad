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
#include <span>
#include <string>
#include <vector>

namespace fdpo {

struct Sample2D {
  double x = 0.0;
  double y = 0.0;
};

/// Categorical conditioning signal; selects which mixture modes count as
/// preferred downstream.
struct Condition {
  int id = 0;
};

/// Variance coefficients beta_1..beta_T of the noising chain together with
/// alpha_t = 1 - beta_t and the cumulative products alpha_bar_t.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas);

  static NoiseSchedule linear(double beta_min, double beta_max, int t_max);

  /// Project default: T=50 with beta rising linearly from 1e-4 to 0.2, which
  /// drives alpha_bar_T below 0.01 so x_T is indistinguishable from N(0,I).
  static NoiseSchedule standard() { return linear(1e-4, 0.2, 50); }

  int tMax() const noexcept { return static_cast<int>(betas_.size()); }
  double beta(int t) const;       // t in 1..T
  double alphaBar(int t) const;   // alphaBar(0) == 1

  /// Posterior variance of the noising chain,
  /// (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t for t >= 2.
  /// At t=1 that expression is exactly 0 (alpha_bar_0 = 1), which would make
  /// the final denoising step degenerate; beta_1 is used there instead.
  double posteriorVariance(int t) const;

  /// Coefficients of the posterior mean given (x_0, x_t).
  void posteriorMeanCoeffs(int t, double &coeff_x0, double &coeff_xt) const;

 private:
  void checkT(int t) const;

  std::vector<double> betas_;
  std::vector<double> alpha_bars_;
};

/// Closed-form marginal of the noising chain:
/// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) * noise.
Sample2D forwardSample(NoiseSchedule const &schedule, Sample2D x0, int t, Sample2D noise);

/// Small fully-connected map (x_t, t, condition) -> 2D, two tanh layers with
/// explicitly stored weights so analytic parameter gradients stay short.
/// Timestep enters as t/T plus a 4-dimensional sinusoidal embedding, the
/// condition as a one-hot block. The policy turns the raw output into the
/// step mean as mu = x_t + sigma_t * out, which keeps regression targets at
/// unit scale across all steps.
class MeanNet {
 public:
  MeanNet(int n_conditions, int t_max, int hidden, std::uint64_t seed);

  struct Cache {
    std::vector<double> input;
    std::vector<double> hidden1;
    std::vector<double> hidden2;
  };

  Sample2D forward(Sample2D x_t, int t, int condition) const;
  Sample2D forward(Sample2D x_t, int t, int condition, Cache &cache) const;

  /// Accumulate dL/dparams given dL/dmu at the cached activation point.
  void backward(Cache const &cache, double dmu_x, double dmu_y,
                std::span<double> grad) const;

  std::size_t paramCount() const noexcept { return params_.size(); }
  std::vector<double> &params() noexcept { return params_; }
  std::vector<double> const &params() const noexcept { return params_; }

  int nConditions() const noexcept { return n_conditions_; }
  int tMax() const noexcept { return t_max_; }
  int hiddenSize() const noexcept { return hidden_; }
  int inputSize() const noexcept { return 19 + n_conditions_; }

 private:
  void buildInput(Sample2D x_t, int t, int condition, std::vector<double> &in) const;

  int n_conditions_;
  int t_max_;
  int hidden_;
  std::vector<double> params_;  // [W1 | b1 | W2 | b2 | W3 | b3]
};

/// Gaussian per-step policy p(x_{t-1} | x_t, t, c) = N(mu(x_t,t,c), sigma_t^2 I)
/// with the step deviations fixed from the schedule's posterior variance and
/// mu(x_t,t,c) = x_t + sigma_t * net(x_t,t,c).
class GaussianStepPolicy {
 public:
  GaussianStepPolicy(NoiseSchedule const &schedule, int n_conditions, int hidden,
                     std::uint64_t seed);

  Sample2D meanAt(Sample2D x_t, int t, Condition c) const;
  Sample2D meanAt(Sample2D x_t, int t, Condition c, MeanNet::Cache &cache) const;

  /// Accumulate dL/dparams of the step mean: chains dL/dmu through the
  /// sigma_t-scaled residual head into the net.
  void backwardMean(MeanNet::Cache const &cache, int t, double dmu_x, double dmu_y,
                    std::span<double> grad) const;

  double sigma(int t) const;

  MeanNet &net() noexcept { return net_; }
  MeanNet const &net() const noexcept { return net_; }
  int tMax() const noexcept { return net_.tMax(); }
  int nConditions() const noexcept { return net_.nConditions(); }

  std::string toJson() const;
  static GaussianStepPolicy fromJson(std::string const &text);

  /// Test hook: override the per-step deviations (all must stay positive).
  void setSigmas(std::vector<double> sigmas);

 private:
  GaussianStepPolicy(MeanNet net, std::vector<double> sigmas);

  MeanNet net_;
  std::vector<double> sigmas_;  // sigmas_[t-1]
};

double stepLogProb(GaussianStepPolicy const &policy, Sample2D x_prev, Sample2D x_t, int t,
                   Condition c);

/// ln of the ratio p_theta(x_prev|x_t,t,c) / p_ref(x_prev|x_t,t,c); requires
/// both policies to share sigma_t, in which case the normalizers cancel and
/// the ratio reduces to a quadratic form in the two means.
double stepLogRatio(GaussianStepPolicy const &policy_theta,
                    GaussianStepPolicy const &policy_ref, Sample2D x_prev, Sample2D x_t,
                    int t, Condition c);

double stepRatio(GaussianStepPolicy const &policy_theta, GaussianStepPolicy const &policy_ref,
                 Sample2D x_prev, Sample2D x_t, int t, Condition c);

/// Reverse-chain rollout x_T ~ N(0,I), x_{t-1} ~ N(mu(x_t,t,c), sigma_t^2 I).
/// Returns the full trajectory [x_T, ..., x_0]; deterministic given the seed.
std::vector<Sample2D> ancestralSample(GaussianStepPolicy const &policy,
                                      NoiseSchedule const &schedule, Condition c,
                                      std::uint64_t seed);

}  // namespace fdpo
