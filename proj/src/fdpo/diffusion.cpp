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

#include "fdpo/diffusion.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"
#include "fdpo/rng.hpp"

namespace fdpo {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr int kPolicyJsonVersion = 1;

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas))
{
  if (betas_.empty()) {
    throw Error(ErrorCode::Config, "noise schedule needs at least one timestep");
  }
  alpha_bars_.reserve(betas_.size());
  double prod = 1.0;
  for (double b : betas_) {
    if (!(b > 0.0) || !(b < 1.0)) {
      throw Error(ErrorCode::Config,
                  "schedule variances must lie in (0,1), got " + formatDouble(b));
    }
    prod *= 1.0 - b;
    alpha_bars_.push_back(prod);
  }
}

NoiseSchedule NoiseSchedule::linear(double beta_min, double beta_max, int t_max)
{
  if (t_max < 1) {
    throw Error(ErrorCode::Config, "schedule length must be >= 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(t_max));
  for (int t = 0; t < t_max; ++t) {
    double frac = t_max == 1 ? 0.0 : static_cast<double>(t) / (t_max - 1);
    betas[static_cast<std::size_t>(t)] = beta_min + frac * (beta_max - beta_min);
  }
  return NoiseSchedule(std::move(betas));
}

void NoiseSchedule::checkT(int t) const
{
  if (t < 1 || t > tMax()) {
    throw Error(ErrorCode::Range, "timestep " + std::to_string(t) + " outside 1.." +
                                      std::to_string(tMax()));
  }
}

double NoiseSchedule::beta(int t) const
{
  checkT(t);
  return betas_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alphaBar(int t) const
{
  if (t == 0) {
    return 1.0;
  }
  checkT(t);
  return alpha_bars_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::posteriorVariance(int t) const
{
  checkT(t);
  if (t == 1) {
    return beta(1);
  }
  return (1.0 - alphaBar(t - 1)) / (1.0 - alphaBar(t)) * beta(t);
}

void NoiseSchedule::posteriorMeanCoeffs(int t, double &coeff_x0, double &coeff_xt) const
{
  checkT(t);
  double const ab_t = alphaBar(t);
  double const ab_prev = alphaBar(t - 1);
  double const alpha_t = 1.0 - beta(t);
  coeff_x0 = std::sqrt(ab_prev) * beta(t) / (1.0 - ab_t);
  coeff_xt = std::sqrt(alpha_t) * (1.0 - ab_prev) / (1.0 - ab_t);
}

Sample2D forwardSample(NoiseSchedule const &schedule, Sample2D x0, int t, Sample2D noise)
{
  if (t < 1 || t > schedule.tMax()) {
    throw Error(ErrorCode::Range, "timestep " + std::to_string(t) + " outside 1.." +
                                      std::to_string(schedule.tMax()));
  }
  double const ab = schedule.alphaBar(t);
  double const signal = std::sqrt(ab);
  double const spread = std::sqrt(1.0 - ab);
  return {signal * x0.x + spread * noise.x, signal * x0.y + spread * noise.y};
}

MeanNet::MeanNet(int n_conditions, int t_max, int hidden, std::uint64_t seed)
    : n_conditions_(n_conditions), t_max_(t_max), hidden_(hidden)
{
  if (n_conditions < 1 || t_max < 1 || hidden < 1) {
    throw Error(ErrorCode::Config, "mean net dimensions must be positive");
  }
  int const d = inputSize();
  int const h = hidden_;
  params_.resize(static_cast<std::size_t>(h * d + h + h * h + h + 2 * h + 2));
  Rng rng(seed);
  double const s1 = 1.0 / std::sqrt(static_cast<double>(d));
  double const s2 = 1.0 / std::sqrt(static_cast<double>(h));
  double *p = params_.data();
  for (int i = 0; i < h * d; ++i) {
    p[i] = s1 * (2.0 * rng.uniform() - 1.0);
  }
  p += h * d + h;  // b1 stays zero
  for (int i = 0; i < h * h; ++i) {
    p[i] = s2 * (2.0 * rng.uniform() - 1.0);
  }
  p += h * h + h;  // b2 stays zero
  for (int i = 0; i < 2 * h; ++i) {
    p[i] = s2 * (2.0 * rng.uniform() - 1.0);
  }
  // b3 stays zero
}

void MeanNet::buildInput(Sample2D x_t, int t, int condition, std::vector<double> &in) const
{
  if (condition < 0 || condition >= n_conditions_) {
    throw Error(ErrorCode::Range, "condition id " + std::to_string(condition) +
                                      " outside vocabulary of size " +
                                      std::to_string(n_conditions_));
  }
  in.assign(static_cast<std::size_t>(inputSize()), 0.0);
  double const tau = static_cast<double>(t) / t_max_;
  in[0] = x_t.x;
  in[1] = x_t.y;
  // Fixed sinusoidal spatial features sharpen the mode boundaries the raw
  // coordinates alone make hard for a small tanh stack.
  in[2] = std::sin(x_t.x);
  in[3] = std::cos(x_t.x);
  in[4] = std::sin(x_t.y);
  in[5] = std::cos(x_t.y);
  in[6] = std::sin(2.0 * x_t.x);
  in[7] = std::cos(2.0 * x_t.x);
  in[8] = std::sin(2.0 * x_t.y);
  in[9] = std::cos(2.0 * x_t.y);
  in[10] = std::sin(4.0 * x_t.x);
  in[11] = std::cos(4.0 * x_t.x);
  in[12] = std::sin(4.0 * x_t.y);
  in[13] = std::cos(4.0 * x_t.y);
  in[14] = tau;
  in[15] = std::sin(kPi * tau);
  in[16] = std::cos(kPi * tau);
  in[17] = std::sin(4.0 * kPi * tau);
  in[18] = std::cos(4.0 * kPi * tau);
  in[static_cast<std::size_t>(19 + condition)] = 1.0;
}

Sample2D MeanNet::forward(Sample2D x_t, int t, int condition, Cache &cache) const
{
  buildInput(x_t, t, condition, cache.input);
  int const d = inputSize();
  int const h = hidden_;
  double const *w1 = params_.data();
  double const *b1 = w1 + h * d;
  double const *w2 = b1 + h;
  double const *b2 = w2 + h * h;
  double const *w3 = b2 + h;
  double const *b3 = w3 + 2 * h;

  cache.hidden1.assign(static_cast<std::size_t>(h), 0.0);
  for (int k = 0; k < h; ++k) {
    double acc = b1[k];
    double const *row = w1 + k * d;
    for (int j = 0; j < d; ++j) {
      acc += row[j] * cache.input[static_cast<std::size_t>(j)];
    }
    cache.hidden1[static_cast<std::size_t>(k)] = std::tanh(acc);
  }
  cache.hidden2.assign(static_cast<std::size_t>(h), 0.0);
  for (int k = 0; k < h; ++k) {
    double acc = b2[k];
    double const *row = w2 + k * h;
    for (int j = 0; j < h; ++j) {
      acc += row[j] * cache.hidden1[static_cast<std::size_t>(j)];
    }
    cache.hidden2[static_cast<std::size_t>(k)] = std::tanh(acc);
  }
  double out_x = b3[0];
  double out_y = b3[1];
  for (int k = 0; k < h; ++k) {
    out_x += w3[k] * cache.hidden2[static_cast<std::size_t>(k)];
    out_y += w3[h + k] * cache.hidden2[static_cast<std::size_t>(k)];
  }
  return {out_x, out_y};
}

Sample2D MeanNet::forward(Sample2D x_t, int t, int condition) const
{
  Cache cache;
  return forward(x_t, t, condition, cache);
}

void MeanNet::backward(Cache const &cache, double dmu_x, double dmu_y,
                       std::span<double> grad) const
{
  if (grad.size() != params_.size()) {
    throw Error(ErrorCode::Shape, "gradient buffer size mismatch");
  }
  int const d = inputSize();
  int const h = hidden_;
  double const *w2 = params_.data() + h * d + h;
  double const *w3 = w2 + h * h + h;
  double *g_w1 = grad.data();
  double *g_b1 = g_w1 + h * d;
  double *g_w2 = g_b1 + h;
  double *g_b2 = g_w2 + h * h;
  double *g_w3 = g_b2 + h;
  double *g_b3 = g_w3 + 2 * h;

  g_b3[0] += dmu_x;
  g_b3[1] += dmu_y;
  std::vector<double> dpre2(static_cast<std::size_t>(h));
  for (int k = 0; k < h; ++k) {
    double const h2 = cache.hidden2[static_cast<std::size_t>(k)];
    g_w3[k] += dmu_x * h2;
    g_w3[h + k] += dmu_y * h2;
    double const dh2 = dmu_x * w3[k] + dmu_y * w3[h + k];
    dpre2[static_cast<std::size_t>(k)] = dh2 * (1.0 - h2 * h2);
  }
  for (int k = 0; k < h; ++k) {
    double const dp2 = dpre2[static_cast<std::size_t>(k)];
    g_b2[k] += dp2;
    double *row = g_w2 + k * h;
    for (int j = 0; j < h; ++j) {
      row[j] += dp2 * cache.hidden1[static_cast<std::size_t>(j)];
    }
  }
  for (int j = 0; j < h; ++j) {
    double dh1 = 0.0;
    for (int k = 0; k < h; ++k) {
      dh1 += dpre2[static_cast<std::size_t>(k)] * w2[k * h + j];
    }
    double const h1 = cache.hidden1[static_cast<std::size_t>(j)];
    double const dp1 = dh1 * (1.0 - h1 * h1);
    g_b1[j] += dp1;
    double *row = g_w1 + j * d;
    for (int i = 0; i < d; ++i) {
      row[i] += dp1 * cache.input[static_cast<std::size_t>(i)];
    }
  }
}

GaussianStepPolicy::GaussianStepPolicy(NoiseSchedule const &schedule, int n_conditions,
                                       int hidden, std::uint64_t seed)
    : net_(n_conditions, schedule.tMax(), hidden, seed)
{
  sigmas_.reserve(static_cast<std::size_t>(schedule.tMax()));
  for (int t = 1; t <= schedule.tMax(); ++t) {
    sigmas_.push_back(std::sqrt(schedule.posteriorVariance(t)));
  }
}

GaussianStepPolicy::GaussianStepPolicy(MeanNet net, std::vector<double> sigmas)
    : net_(std::move(net)), sigmas_(std::move(sigmas))
{}

Sample2D GaussianStepPolicy::meanAt(Sample2D x_t, int t, Condition c) const
{
  MeanNet::Cache cache;
  return meanAt(x_t, t, c, cache);
}

Sample2D GaussianStepPolicy::meanAt(Sample2D x_t, int t, Condition c,
                                    MeanNet::Cache &cache) const
{
  double const s = sigma(t);  // validates t
  Sample2D const out = net_.forward(x_t, t, c.id, cache);
  return {x_t.x + s * out.x, x_t.y + s * out.y};
}

void GaussianStepPolicy::backwardMean(MeanNet::Cache const &cache, int t, double dmu_x,
                                      double dmu_y, std::span<double> grad) const
{
  double const s = sigma(t);
  net_.backward(cache, s * dmu_x, s * dmu_y, grad);
}

double GaussianStepPolicy::sigma(int t) const
{
  if (t < 1 || t > tMax()) {
    throw Error(ErrorCode::Range, "timestep " + std::to_string(t) + " outside 1.." +
                                      std::to_string(tMax()));
  }
  return sigmas_[static_cast<std::size_t>(t - 1)];
}

void GaussianStepPolicy::setSigmas(std::vector<double> sigmas)
{
  if (sigmas.size() != sigmas_.size()) {
    throw Error(ErrorCode::Shape, "sigma vector length mismatch");
  }
  for (double s : sigmas) {
    if (!(s > 0.0)) {
      throw Error(ErrorCode::Domain, "step deviations must be positive");
    }
  }
  sigmas_ = std::move(sigmas);
}

std::string GaussianStepPolicy::toJson() const
{
  nlohmann::json j;
  j["version"] = kPolicyJsonVersion;
  j["t_max"] = net_.tMax();
  j["n_conditions"] = net_.nConditions();
  j["hidden"] = net_.hiddenSize();
  j["sigmas"] = sigmas_;
  j["params"] = net_.params();
  return j.dump(2);
}

GaussianStepPolicy GaussianStepPolicy::fromJson(std::string const &text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (nlohmann::json::exception const &e) {
    throw Error(ErrorCode::Config, std::string("policy JSON parse failure: ") + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kPolicyJsonVersion) {
    throw Error(ErrorCode::Config, "unsupported policy file version");
  }
  int const t_max = j.at("t_max").get<int>();
  int const n_conditions = j.at("n_conditions").get<int>();
  int const hidden = j.at("hidden").get<int>();
  auto sigmas = j.at("sigmas").get<std::vector<double>>();
  auto params = j.at("params").get<std::vector<double>>();

  MeanNet net(n_conditions, t_max, hidden, 0);
  if (params.size() != net.paramCount() || sigmas.size() != static_cast<std::size_t>(t_max)) {
    throw Error(ErrorCode::Config, "policy file dimensions are inconsistent");
  }
  net.params() = std::move(params);
  return GaussianStepPolicy(std::move(net), std::move(sigmas));
}

double stepLogProb(GaussianStepPolicy const &policy, Sample2D x_prev, Sample2D x_t, int t,
                   Condition c)
{
  Sample2D const mu = policy.meanAt(x_t, t, c);
  double const s = policy.sigma(t);
  double const dx = x_prev.x - mu.x;
  double const dy = x_prev.y - mu.y;
  return -(dx * dx + dy * dy) / (2.0 * s * s) - 2.0 * std::log(s * std::sqrt(2.0 * kPi));
}

double stepLogRatio(GaussianStepPolicy const &policy_theta,
                    GaussianStepPolicy const &policy_ref, Sample2D x_prev, Sample2D x_t,
                    int t, Condition c)
{
  double const s_theta = policy_theta.sigma(t);
  double const s_ref = policy_ref.sigma(t);
  if (s_theta != s_ref) {
    throw Error(ErrorCode::Config,
                "step ratio requires shared per-step deviations (got " +
                    formatDouble(s_theta) + " vs " + formatDouble(s_ref) + " at t=" +
                    std::to_string(t) + ")");
  }
  Sample2D const mu_theta = policy_theta.meanAt(x_t, t, c);
  Sample2D const mu_ref = policy_ref.meanAt(x_t, t, c);
  double const dtx = x_prev.x - mu_theta.x;
  double const dty = x_prev.y - mu_theta.y;
  double const drx = x_prev.x - mu_ref.x;
  double const dry = x_prev.y - mu_ref.y;
  return ((drx * drx + dry * dry) - (dtx * dtx + dty * dty)) / (2.0 * s_theta * s_theta);
}

double stepRatio(GaussianStepPolicy const &policy_theta, GaussianStepPolicy const &policy_ref,
                 Sample2D x_prev, Sample2D x_t, int t, Condition c)
{
  return std::exp(stepLogRatio(policy_theta, policy_ref, x_prev, x_t, t, c));
}

std::vector<Sample2D> ancestralSample(GaussianStepPolicy const &policy,
                                      NoiseSchedule const &schedule, Condition c,
                                      std::uint64_t seed)
{
  if (schedule.tMax() != policy.tMax()) {
    throw Error(ErrorCode::Config, "schedule and policy disagree on the number of steps");
  }
  Rng rng(seed);
  std::vector<Sample2D> trajectory;
  trajectory.reserve(static_cast<std::size_t>(schedule.tMax()) + 1);
  Sample2D x{rng.normal(), rng.normal()};
  trajectory.push_back(x);
  for (int t = schedule.tMax(); t >= 1; --t) {
    Sample2D const mu = policy.meanAt(x, t, c);
    double const s = policy.sigma(t);
    x = {mu.x + s * rng.normal(), mu.y + s * rng.normal()};
    trajectory.push_back(x);
  }
  return trajectory;
}

}  // namespace fdpo
