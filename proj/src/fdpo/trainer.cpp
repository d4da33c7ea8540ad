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

#include "fdpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"
#include "fdpo/metrics.hpp"

namespace fdpo {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kCoverageRadius = 0.3;
constexpr int kFreshSamplesPerEpoch = 128;

double logSumExpVec(std::vector<double> const &v)
{
  double hi = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) {
    acc += std::exp(x - hi);
  }
  return hi + std::log(acc);
}

struct EpochStats {
  double loss = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double ratio = 0.0;
  std::size_t count = 0;

  void add(double l, double log_x1, double log_x2, Divergence const &d)
  {
    loss += l;
    x1 += std::exp(log_x1);
    x2 += std::exp(log_x2);
    ratio += std::exp(d.logFDoublePrimeFromLog(log_x1) - d.logFDoublePrimeFromLog(log_x2));
    ++count;
  }
};

void pushTraceRow(TrainTrace &trace, EpochStats const &stats,
                  std::vector<Sample2D> const &fresh, PreferenceOracle const &oracle,
                  std::vector<Condition> const &fresh_conditions,
                  std::span<Sample2D const> centers)
{
  double const n = static_cast<double>(stats.count);
  trace.mean_loss.push_back(stats.loss / n);
  trace.mean_x1.push_back(stats.x1 / n);
  trace.mean_x2.push_back(stats.x2 / n);
  trace.mean_gradient_ratio.push_back(stats.ratio / n);

  double score = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    score += oracle.score(fresh[i], fresh_conditions[i]);
  }
  trace.mean_pref_score.push_back(score / static_cast<double>(fresh.size()));

  DiversitySummary diversity = sampleDiversity(fresh, centers, kCoverageRadius);
  trace.mode_coverage.push_back(diversity.mode_coverage);
  trace.mean_pairwise_distance.push_back(diversity.mean_pairwise_distance);
}

}  // namespace

CategoricalPolicy CategoricalPolicy::uniform(int n_conditions, int n_outcomes)
{
  CategoricalPolicy p;
  p.n_conditions = n_conditions;
  p.n_outcomes = n_outcomes;
  p.logits.assign(static_cast<std::size_t>(n_conditions) * n_outcomes, 0.0);
  return p;
}

std::vector<double> CategoricalPolicy::logProbs(int condition) const
{
  if (condition < 0 || condition >= n_conditions) {
    throw Error(ErrorCode::Range, "condition out of range");
  }
  std::vector<double> row(logits.begin() + static_cast<std::ptrdiff_t>(condition) * n_outcomes,
                          logits.begin() +
                              static_cast<std::ptrdiff_t>(condition + 1) * n_outcomes);
  double lse = logSumExpVec(row);
  for (double &v : row) {
    v -= lse;
  }
  return row;
}

std::vector<double> CategoricalPolicy::probs(int condition) const
{
  std::vector<double> row = logProbs(condition);
  for (double &v : row) {
    v = std::exp(v);
  }
  return row;
}

int CategoricalPolicy::sample(int condition, Rng &rng) const
{
  std::vector<double> p = probs(condition);
  double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < n_outcomes; ++k) {
    acc += p[static_cast<std::size_t>(k)];
    if (u < acc) {
      return k;
    }
  }
  return n_outcomes - 1;
}

PreferenceOracle::PreferenceOracle(std::vector<Sample2D> centers,
                                   std::vector<std::vector<int>> preferred_by_condition,
                                   double component_sigma)
    : centers_(std::move(centers)), preferred_(std::move(preferred_by_condition)),
      sigma_(component_sigma)
{
  if (centers_.empty() || preferred_.empty() || !(sigma_ > 0.0)) {
    throw Error(ErrorCode::Config, "oracle needs centers, condition sets and sigma > 0");
  }
  for (auto const &modes : preferred_) {
    if (modes.empty()) {
      throw Error(ErrorCode::Config, "every condition must prefer at least one mode");
    }
    for (int m : modes) {
      if (m < 0 || m >= static_cast<int>(centers_.size())) {
        throw Error(ErrorCode::Config, "preferred mode index out of range");
      }
    }
  }
}

std::vector<int> const &PreferenceOracle::preferredModes(int condition) const
{
  if (condition < 0 || condition >= nConditions()) {
    throw Error(ErrorCode::Range, "condition out of range");
  }
  return preferred_[static_cast<std::size_t>(condition)];
}

double PreferenceOracle::score(Sample2D s, Condition c) const
{
  auto const &modes = preferredModes(c.id);
  double const log_norm = -std::log(2.0 * kPi * sigma_ * sigma_) -
                          std::log(static_cast<double>(modes.size()));
  std::vector<double> terms;
  terms.reserve(modes.size());
  for (int m : modes) {
    double dx = s.x - centers_[static_cast<std::size_t>(m)].x;
    double dy = s.y - centers_[static_cast<std::size_t>(m)].y;
    terms.push_back(-(dx * dx + dy * dy) / (2.0 * sigma_ * sigma_));
  }
  return log_norm + logSumExpVec(terms);
}

RingTask RingTask::standard(int n_conditions)
{
  if (n_conditions < 1 || n_conditions > 4) {
    throw Error(ErrorCode::Config, "ring task supports 1..4 conditions");
  }
  std::vector<Sample2D> centers;
  centers.reserve(8);
  for (int k = 0; k < 8; ++k) {
    double angle = 2.0 * kPi * k / 8.0;
    centers.push_back({2.0 * std::cos(angle), 2.0 * std::sin(angle)});
  }
  std::vector<std::vector<int>> preferred;
  for (int c = 0; c < n_conditions; ++c) {
    preferred.push_back({(2 * c) % 8, (2 * c + 1) % 8});
  }
  double const sigma = 0.1;
  PreferenceOracle oracle(centers, std::move(preferred), sigma);
  return RingTask{std::move(centers), sigma, std::move(oracle)};
}

Sample2D RingTask::drawDataPoint(Rng &rng) const
{
  std::uint32_t const mode = rng.below(static_cast<std::uint32_t>(centers.size()));
  Sample2D const &c = centers[mode];
  return {c.x + component_sigma * rng.normal(), c.y + component_sigma * rng.normal()};
}

std::string TrainTrace::toCsv() const
{
  std::string out =
      "epoch,mean_loss,mean_x1,mean_x2,mean_gradient_ratio,mean_pref_score,"
      "mode_coverage,mean_pairwise_distance\n";
  for (std::size_t e = 0; e < epochs(); ++e) {
    appendInt(out, static_cast<std::int64_t>(e));
    out.push_back(',');
    appendDouble(out, mean_loss[e]);
    out.push_back(',');
    appendDouble(out, mean_x1[e]);
    out.push_back(',');
    appendDouble(out, mean_x2[e]);
    out.push_back(',');
    appendDouble(out, mean_gradient_ratio[e]);
    out.push_back(',');
    appendDouble(out, mean_pref_score[e]);
    out.push_back(',');
    appendInt(out, mode_coverage[e]);
    out.push_back(',');
    appendDouble(out, mean_pairwise_distance[e]);
    out.push_back('\n');
  }
  return out;
}

CategoricalSetup makeDefaultCategoricalSetup(RingTask const &task, int records_per_condition,
                                             std::uint64_t seed)
{
  int const n_conditions = task.oracle.nConditions();
  int const n_outcomes = static_cast<int>(task.centers.size());
  CategoricalPolicy ref = CategoricalPolicy::uniform(n_conditions, n_outcomes);
  Rng rng(seed);
  for (double &logit : ref.logits) {
    logit = 0.3 * (2.0 * rng.uniform() - 1.0);
  }

  std::vector<PreferenceRecord> records;
  records.reserve(static_cast<std::size_t>(n_conditions) * records_per_condition);
  for (int c = 0; c < n_conditions; ++c) {
    for (int r = 0; r < records_per_condition; ++r) {
      int a = ref.sample(c, rng);
      int b = ref.sample(c, rng);
      while (b == a) {
        b = ref.sample(c, rng);
      }
      double const sa = task.oracle.score(task.centers[static_cast<std::size_t>(a)], {c});
      double const sb = task.oracle.score(task.centers[static_cast<std::size_t>(b)], {c});
      bool const a_wins = sa > sb || (sa == sb && a < b);
      records.push_back({Condition{c}, a_wins ? a : b, a_wins ? b : a});
    }
  }
  return {std::move(ref), std::move(records)};
}

std::pair<double, double> categoricalMeanRatios(CategoricalPolicy const &policy,
                                                CategoricalPolicy const &ref,
                                                std::vector<PreferenceRecord> const &data)
{
  double x1 = 0.0;
  double x2 = 0.0;
  std::vector<std::vector<double>> lp_theta;
  std::vector<std::vector<double>> lp_ref;
  for (int c = 0; c < policy.n_conditions; ++c) {
    lp_theta.push_back(policy.logProbs(c));
    lp_ref.push_back(ref.logProbs(c));
  }
  for (auto const &rec : data) {
    auto const &lt = lp_theta[static_cast<std::size_t>(rec.condition.id)];
    auto const &lr = lp_ref[static_cast<std::size_t>(rec.condition.id)];
    x1 += std::exp(lt[static_cast<std::size_t>(rec.winner)] -
                   lr[static_cast<std::size_t>(rec.winner)]);
    x2 += std::exp(lt[static_cast<std::size_t>(rec.loser)] -
                   lr[static_cast<std::size_t>(rec.loser)]);
  }
  double const n = static_cast<double>(data.size());
  return {x1 / n, x2 / n};
}

CategoricalTrainResult trainCategorical(CategoricalPolicy policy, CategoricalPolicy const &ref,
                                        std::vector<PreferenceRecord> const &data,
                                        LossConfig const &cfg, int epochs, double lr,
                                        RingTask const &task, std::uint64_t seed)
{
  detail::validate(cfg);
  if (data.empty()) {
    throw Error(ErrorCode::Config, "preference data must be non-empty");
  }
  if (policy.n_conditions != ref.n_conditions || policy.n_outcomes != ref.n_outcomes) {
    throw Error(ErrorCode::Shape, "policy and reference shapes differ");
  }
  for (auto const &rec : data) {
    if (rec.winner == rec.loser) {
      throw Error(ErrorCode::InvalidArgument, "preference record has winner == loser");
    }
    if (rec.winner < 0 || rec.winner >= policy.n_outcomes || rec.loser < 0 ||
        rec.loser >= policy.n_outcomes || rec.condition.id < 0 ||
        rec.condition.id >= policy.n_conditions) {
      throw Error(ErrorCode::Range, "preference record indexes out of range");
    }
  }

  std::vector<std::vector<double>> lp_ref;
  for (int c = 0; c < ref.n_conditions; ++c) {
    lp_ref.push_back(ref.logProbs(c));
  }

  TrainTrace trace;
  std::vector<double> grad(policy.logits.size());
  double const inv_n = 1.0 / static_cast<double>(data.size());

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<std::vector<double>> lp;
    std::vector<std::vector<double>> p;
    for (int c = 0; c < policy.n_conditions; ++c) {
      lp.push_back(policy.logProbs(c));
      p.push_back(policy.probs(c));
    }

    EpochStats stats;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (auto const &rec : data) {
      auto const c = static_cast<std::size_t>(rec.condition.id);
      auto const w = static_cast<std::size_t>(rec.winner);
      auto const l = static_cast<std::size_t>(rec.loser);
      double const log_x1 = lp[c][w] - lp_ref[c][w];
      double const log_x2 = lp[c][l] - lp_ref[c][l];
      double const loss = generalizedLossFromLog(cfg, {log_x1, log_x2});
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::Divergent,
                    "non-finite loss at record (condition=" + std::to_string(rec.condition.id) +
                        ", winner=" + std::to_string(rec.winner) +
                        ", loser=" + std::to_string(rec.loser) + ")");
      }
      stats.add(loss, log_x1, log_x2, cfg.divergence);

      GradientPair const g = lossGradientsWrtLog(cfg, {log_x1, log_x2});
      double *row = grad.data() + c * static_cast<std::size_t>(policy.n_outcomes);
      for (int k = 0; k < policy.n_outcomes; ++k) {
        double const pk = p[c][static_cast<std::size_t>(k)];
        row[k] += inv_n * (g.d_x1 * ((k == rec.winner ? 1.0 : 0.0) - pk) +
                           g.d_x2 * ((k == rec.loser ? 1.0 : 0.0) - pk));
      }
    }

    // Fresh outcome samples for the preference/diversity series.
    Rng fresh_rng(Rng::deriveSeed(seed, 0x10000u + static_cast<std::uint64_t>(epoch)));
    std::vector<Sample2D> fresh;
    std::vector<Condition> fresh_conditions;
    for (int i = 0; i < kFreshSamplesPerEpoch; ++i) {
      int const c = i % policy.n_conditions;
      int const outcome = policy.sample(c, fresh_rng);
      fresh.push_back(task.centers[static_cast<std::size_t>(outcome)]);
      fresh_conditions.push_back({c});
    }
    pushTraceRow(trace, stats, fresh, task.oracle, fresh_conditions, task.centers);

    for (std::size_t i = 0; i < policy.logits.size(); ++i) {
      policy.logits[i] -= lr * grad[i];
    }
  }
  return {std::move(policy), std::move(trace)};
}

std::vector<StepPreferenceRecord> buildStepPairs(GaussianStepPolicy const &policy,
                                                 NoiseSchedule const &schedule,
                                                 PreferenceOracle const &oracle, Condition c,
                                                 int k, std::uint64_t seed)
{
  if (k < 2) {
    throw Error(ErrorCode::Config, "candidate count k must be at least 2");
  }
  Rng rng(seed);
  std::vector<StepPreferenceRecord> records;
  records.reserve(static_cast<std::size_t>(schedule.tMax()));
  Sample2D x{rng.normal(), rng.normal()};
  std::vector<Sample2D> candidates(static_cast<std::size_t>(k));
  std::vector<double> scores(static_cast<std::size_t>(k));
  for (int t = schedule.tMax(); t >= 1; --t) {
    Sample2D const mu = policy.meanAt(x, t, c);
    double const s = policy.sigma(t);
    double const proj = 1.0 / std::sqrt(schedule.alphaBar(t - 1));
    for (int i = 0; i < k; ++i) {
      candidates[static_cast<std::size_t>(i)] = {mu.x + s * rng.normal(),
                                                 mu.y + s * rng.normal()};
      Sample2D const x0_hat = {candidates[static_cast<std::size_t>(i)].x * proj,
                               candidates[static_cast<std::size_t>(i)].y * proj};
      scores[static_cast<std::size_t>(i)] = oracle.score(x0_hat, c);
    }
    int winner = 0;
    for (int i = 1; i < k; ++i) {
      if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(winner)]) {
        winner = i;
      }
    }
    int loser = winner == 0 ? 1 : 0;
    for (int i = 0; i < k; ++i) {
      if (i != winner &&
          scores[static_cast<std::size_t>(i)] < scores[static_cast<std::size_t>(loser)]) {
        loser = i;
      }
    }
    records.push_back({c, candidates[static_cast<std::size_t>(winner)],
                       candidates[static_cast<std::size_t>(loser)], t, x});
    x = candidates[static_cast<std::size_t>(winner)];
  }
  return records;
}

namespace {

struct StepGradVisitor {
  LossConfig const &cfg;
  LossConfig bound_cfg;  // beta scaled by T for the bound form
  StepLossForm form;

  StepGradVisitor(LossConfig const &c, StepLossForm f, int t_max)
      : cfg(c), bound_cfg{c.divergence, c.beta * t_max}, form(f)
  {}

  // Returns the record loss; fills dL/dlog(x1), dL/dlog(x2).
  double eval(double log_x1, double log_x2, double &d_log1, double &d_log2) const
  {
    switch (form) {
    case StepLossForm::Generalized: {
      GradientPair g = lossGradientsWrtLog(cfg, {log_x1, log_x2});
      d_log1 = g.d_x1;
      d_log2 = g.d_x2;
      return generalizedLossFromLog(cfg, {log_x1, log_x2});
    }
    case StepLossForm::SpoDirect: {
      double z = cfg.beta * log_x1 - cfg.beta * log_x2;
      double scale = std::exp(std::log(cfg.beta) - detail::softplus(z));
      d_log1 = -scale;
      d_log2 = scale;
      return detail::softplus(-z);
    }
    case StepLossForm::TimestepBound: {
      GradientPair g = lossGradientsWrtLog(bound_cfg, {log_x1, log_x2});
      d_log1 = g.d_x1;
      d_log2 = g.d_x2;
      return generalizedLossFromLog(bound_cfg, {log_x1, log_x2});
    }
    }
    throw Error(ErrorCode::Internal, "unreachable loss form");
  }
};

double squaredDistance(Sample2D a, Sample2D b)
{
  double const dx = a.x - b.x;
  double const dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Loss of one step record plus dL/dparams accumulation (skipped when grad is
/// empty). Stats callbacks receive the log ratios.
double stepRecordLoss(GaussianStepPolicy &policy, GaussianStepPolicy const &ref,
                      StepPreferenceRecord const &rec, StepGradVisitor const &visitor,
                      std::span<double> grad, MeanNet::Cache &cache, double *log_x1_out,
                      double *log_x2_out)
{
  int const t = rec.timestep;
  double const s = policy.sigma(t);
  double const s_ref = ref.sigma(t);
  if (s != s_ref) {
    throw Error(ErrorCode::Config, "trainee and reference must share step deviations");
  }
  Sample2D const mu = policy.meanAt(rec.x_t, t, rec.condition, cache);
  Sample2D const mu_ref = ref.meanAt(rec.x_t, t, rec.condition);
  double const inv_two_s2 = 1.0 / (2.0 * s * s);
  double const log_x1 =
      (squaredDistance(rec.winner, mu_ref) - squaredDistance(rec.winner, mu)) * inv_two_s2;
  double const log_x2 =
      (squaredDistance(rec.loser, mu_ref) - squaredDistance(rec.loser, mu)) * inv_two_s2;

  double d_log1 = 0.0;
  double d_log2 = 0.0;
  double const loss = visitor.eval(log_x1, log_x2, d_log1, d_log2);
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::Divergent,
                "non-finite step loss at t=" + std::to_string(t) +
                    " (condition=" + std::to_string(rec.condition.id) + ")");
  }
  if (!grad.empty()) {
    // dlog_x/dmu = (x_prev - mu)/s^2 for each record side.
    double const inv_s2 = 2.0 * inv_two_s2;
    double const dmu_x = d_log1 * (rec.winner.x - mu.x) * inv_s2 +
                         d_log2 * (rec.loser.x - mu.x) * inv_s2;
    double const dmu_y = d_log1 * (rec.winner.y - mu.y) * inv_s2 +
                         d_log2 * (rec.loser.y - mu.y) * inv_s2;
    policy.backwardMean(cache, t, dmu_x, dmu_y, grad);
  }
  if (log_x1_out != nullptr) {
    *log_x1_out = log_x1;
  }
  if (log_x2_out != nullptr) {
    *log_x2_out = log_x2;
  }
  return loss;
}

}  // namespace

double stepwiseGradCheck(GaussianStepPolicy &policy, GaussianStepPolicy const &ref,
                         std::vector<StepPreferenceRecord> const &records,
                         LossConfig const &cfg, StepLossForm form)
{
  StepGradVisitor visitor(cfg, form, policy.tMax());
  MeanNet::Cache cache;
  std::vector<double> analytic(policy.net().paramCount(), 0.0);
  for (auto const &rec : records) {
    stepRecordLoss(policy, ref, rec, visitor, analytic, cache, nullptr, nullptr);
  }

  auto batch_loss = [&]() {
    double acc = 0.0;
    for (auto const &rec : records) {
      acc += stepRecordLoss(policy, ref, rec, visitor, {}, cache, nullptr, nullptr);
    }
    return acc;
  };

  double worst = 0.0;
  std::vector<double> &params = policy.net().params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    double const saved = params[i];
    double const h = 1e-6 * std::max(1.0, std::abs(saved));
    params[i] = saved + h;
    double const up = batch_loss();
    params[i] = saved - h;
    double const down = batch_loss();
    params[i] = saved;
    double const fd = (up - down) / (2.0 * h);
    double const scale = std::max(std::abs(fd), std::abs(analytic[i]));
    if (scale > 1e-7) {
      worst = std::max(worst, std::abs(fd - analytic[i]) / scale);
    }
  }
  return worst;
}

StepwiseTrainResult trainStepwise(GaussianStepPolicy policy, GaussianStepPolicy const &ref,
                                  PreferenceOracle const &oracle, NoiseSchedule const &schedule,
                                  LossConfig const &cfg, int epochs, double lr, int k,
                                  int pairs_per_epoch, std::uint64_t seed, StepLossForm form,
                                  bool self_check)
{
  detail::validate(cfg);
  if (pairs_per_epoch < 1) {
    throw Error(ErrorCode::Config, "pairs_per_epoch must be positive");
  }
  if (k < 2) {
    throw Error(ErrorCode::Config, "candidate count k must be at least 2");
  }
  int const n_conditions = policy.nConditions();
  StepGradVisitor visitor(cfg, form, policy.tMax());

  if (self_check) {
    auto records = buildStepPairs(policy, schedule, oracle, Condition{0}, k,
                                  Rng::deriveSeed(seed, 0xdead));
    double const dev = stepwiseGradCheck(policy, ref, records, cfg, form);
    if (dev > 1e-4) {
      throw Error(ErrorCode::Internal,
                  "gradient self-check failed: max relative deviation " + formatDouble(dev));
    }
  }

  TrainTrace trace;
  MeanNet::Cache cache;
  std::vector<double> grad(policy.net().paramCount());

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Evidence rows reflect the policy at epoch start: a fixed eval batch of
    // step pairs plus fresh full trajectories.
    {
      EpochStats stats;
      for (int pair_idx = 0; pair_idx < pairs_per_epoch; ++pair_idx) {
        Condition const c{pair_idx % n_conditions};
        auto records = buildStepPairs(
            policy, schedule, oracle, c, k,
            Rng::deriveSeed(seed, 0x20000u + static_cast<std::uint64_t>(epoch) * 1024u +
                                      static_cast<std::uint64_t>(pair_idx)));
        for (auto const &rec : records) {
          double lx1 = 0.0;
          double lx2 = 0.0;
          double const loss = stepRecordLoss(policy, ref, rec, visitor, {}, cache, &lx1, &lx2);
          stats.add(loss, lx1, lx2, cfg.divergence);
        }
      }

      std::vector<Sample2D> fresh;
      std::vector<Condition> fresh_conditions;
      for (int i = 0; i < kFreshSamplesPerEpoch; ++i) {
        Condition const c{i % n_conditions};
        auto trajectory = ancestralSample(
            policy, schedule, c,
            Rng::deriveSeed(seed, 0x30000u + static_cast<std::uint64_t>(epoch) * 1024u +
                                      static_cast<std::uint64_t>(i)));
        fresh.push_back(trajectory.back());
        fresh_conditions.push_back(c);
      }
      pushTraceRow(trace, stats, fresh, oracle, fresh_conditions, oracle.centers());
    }

    for (int pair_idx = 0; pair_idx < pairs_per_epoch; ++pair_idx) {
      Condition const c{pair_idx % n_conditions};
      auto records = buildStepPairs(
          policy, schedule, oracle, c, k,
          Rng::deriveSeed(seed, 0x40000u + static_cast<std::uint64_t>(epoch) * 1024u +
                                    static_cast<std::uint64_t>(pair_idx)));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (auto const &rec : records) {
        stepRecordLoss(policy, ref, rec, visitor, grad, cache, nullptr, nullptr);
      }
      double const scale = lr / static_cast<double>(records.size());
      std::vector<double> &params = policy.net().params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= scale * grad[i];
      }
    }
  }
  return {std::move(policy), std::move(trace)};
}

GaussianStepPolicy pretrainReference(NoiseSchedule const &schedule,
                                     std::vector<std::pair<Sample2D, Condition>> const &dataset,
                                     int epochs, double lr, int n_conditions, int hidden,
                                     int batch_size, std::uint64_t seed)
{
  if (dataset.empty()) {
    throw Error(ErrorCode::Config, "pre-training dataset must be non-empty");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n_conditions), false);
  for (auto const &[point, cond] : dataset) {
    if (cond.id < 0 || cond.id >= n_conditions) {
      throw Error(ErrorCode::Range, "dataset condition out of range");
    }
    seen[static_cast<std::size_t>(cond.id)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::Config, "dataset must cover every condition");
  }

  GaussianStepPolicy policy(schedule, n_conditions, hidden, Rng::deriveSeed(seed, 0));
  Rng rng(Rng::deriveSeed(seed, 1));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  MeanNet::Cache cache;
  std::vector<double> grad(policy.net().paramCount());
  std::vector<double> velocity(policy.net().paramCount(), 0.0);
  constexpr double kMomentum = 0.9;
  int const t_max = schedule.tMax();

  int step_counter = 0;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Decaying the rate steadies the momentum updates and anneals the SGD
    // noise floor away; quadratic decay with a 1% floor.
    double const frac = 1.0 - static_cast<double>(epoch) / epochs;
    double const lr_epoch = lr * std::max(frac * frac, 0.01);
    // Fisher-Yates with the run RNG keeps the whole pass deterministic.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = rng.below(static_cast<std::uint32_t>(i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(batch_size)) {
      std::size_t const end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      double const inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t idx = start; idx < end; ++idx) {
        auto const &[x0, cond] = dataset[order[idx]];
        // Stratified timesteps: walking the range instead of sampling it
        // halves the gradient noise from uneven t coverage.
        int const t = 1 + static_cast<int>((idx - start + static_cast<std::size_t>(step_counter)) %
                                           static_cast<std::size_t>(t_max));
        // A quarter of the draws widen the noise so the regression also sees
        // the low-density valleys reverse trajectories must cross; without
        // this the net is untrained exactly where basin assignment happens.
        double const widen = rng.uniform() < 0.25 ? 1.5 : 1.0;
        Sample2D const noise{widen * rng.normal(), widen * rng.normal()};
        Sample2D const x_t = forwardSample(schedule, x0, t, noise);
        double c0 = 0.0;
        double ct = 0.0;
        schedule.posteriorMeanCoeffs(t, c0, ct);
        // Regress the sigma-scaled residual (mu - x_t)/sigma_t so every step
        // carries unit-scale targets; unweighted mu-space regression starves
        // the small-sigma final steps that decide sample concentration.
        double const s = policy.sigma(t);
        Sample2D const target{(c0 * x0.x + ct * x_t.x - x_t.x) / s,
                              (c0 * x0.y + ct * x_t.y - x_t.y) / s};
        Sample2D const out = policy.net().forward(x_t, t, cond.id, cache);
        policy.net().backward(cache, 2.0 * inv * (out.x - target.x),
                              2.0 * inv * (out.y - target.y), grad);
      }
      // Heavy-ball step; classical momentum, no per-parameter adaptivity.
      std::vector<double> &params = policy.net().params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = kMomentum * velocity[i] - lr_epoch * grad[i];
        params[i] += velocity[i];
      }
      ++step_counter;
    }
  }
  return policy;
}

std::vector<std::pair<Sample2D, Condition>> makeRingDataset(RingTask const &task, int n,
                                                            int n_conditions,
                                                            std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<std::pair<Sample2D, Condition>> dataset;
  dataset.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    dataset.emplace_back(task.drawDataPoint(rng), Condition{i % n_conditions});
  }
  return dataset;
}

double perTimestepBoundLoss(LossConfig const &cfg, double winner_step_ratio,
                            double loser_step_ratio, int t_max)
{
  if (t_max < 1) {
    throw Error(ErrorCode::Config, "t_max must be >= 1");
  }
  LossConfig scaled{cfg.divergence, cfg.beta * static_cast<double>(t_max)};
  return generalizedLoss(scaled, {winner_step_ratio, loser_step_ratio});
}

}  // namespace fdpo
