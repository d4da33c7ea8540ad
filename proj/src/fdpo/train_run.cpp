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

#include "fdpo/train_run.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "fdpo/csvfmt.hpp"
#include "fdpo/error.hpp"
#include "fdpo/metrics.hpp"
#include "fdpo/trainer.hpp"

namespace fdpo {

namespace {

using nlohmann::json;

json resolveConfig(std::string const &config_json)
{
  json cfg;
  try {
    cfg = json::parse(config_json);
  } catch (json::exception const &e) {
    throw Error(ErrorCode::Config, std::string("train config parse failure: ") + e.what());
  }
  if (!cfg.is_object()) {
    throw Error(ErrorCode::Config, "train config must be a JSON object");
  }
  if (!cfg.contains("mode") || !cfg["mode"].is_string()) {
    throw Error(ErrorCode::Config, "train config needs a string 'mode'");
  }
  if (!cfg.contains("divergence") || !cfg["divergence"].is_string()) {
    throw Error(ErrorCode::Config, "train config needs a string 'divergence'");
  }
  std::string const mode = cfg["mode"].get<std::string>();
  if (mode != "categorical" && mode != "stepwise" && mode != "stepwise-bound") {
    throw Error(ErrorCode::Config, "mode must be categorical, stepwise or stepwise-bound");
  }

  json defaults = {
      {"beta", 10.0},
      {"epochs", mode == "categorical" ? 200 : 30},
      {"lr", mode == "categorical" ? 0.05 : 0.01},
      {"k", 4},
      {"seed", 0},
      {"pairs_per_epoch", 8},
      {"pretrain_epochs", 800},
      {"pretrain_lr", 0.015},
      {"hidden", 64},
      {"conditions", 2},
      {"records_per_condition", 16},
      {"dataset_size", 16384},
      {"batch_size", 256},
      {"eval_samples", 500},
      {"self_check", true},
  };
  static std::set<std::string> const known = {
      "mode",           "divergence",     "beta",
      "epochs",         "lr",             "k",
      "seed",           "pairs_per_epoch", "pretrain_epochs",
      "pretrain_lr",    "hidden",         "conditions",
      "records_per_condition", "dataset_size", "batch_size",
      "eval_samples",   "self_check",
  };
  for (auto const &[key, value] : cfg.items()) {
    if (known.find(key) == known.end()) {
      throw Error(ErrorCode::Config, "unknown train config key '" + key + "'");
    }
  }
  for (auto const &[key, value] : defaults.items()) {
    if (!cfg.contains(key)) {
      cfg[key] = value;
    }
  }
  return cfg;
}

void appendSampleRow(std::string &out, std::uint64_t seed, int t, Sample2D s, int condition)
{
  appendInt(out, static_cast<std::int64_t>(seed));
  out.push_back(',');
  appendInt(out, t);
  out.push_back(',');
  appendDouble(out, s.x);
  out.push_back(',');
  appendDouble(out, s.y);
  out.push_back(',');
  appendInt(out, condition);
  out.push_back('\n');
}

}  // namespace

TrainRunOutput runTrainFromJson(std::string const &config_json)
{
  json cfg = resolveConfig(config_json);
  std::string const mode = cfg["mode"].get<std::string>();
  Divergence const divergence = Divergence::parse(cfg["divergence"].get<std::string>());
  LossConfig const loss_cfg{divergence, cfg["beta"].get<double>()};
  int const epochs = cfg["epochs"].get<int>();
  double const lr = cfg["lr"].get<double>();
  auto const seed = cfg["seed"].get<std::uint64_t>();
  int const n_conditions = cfg["conditions"].get<int>();
  int const eval_samples = cfg["eval_samples"].get<int>();

  RingTask const task = RingTask::standard(n_conditions);

  TrainRunOutput out;
  out.effective_config_json = cfg.dump(2);

  std::string samples_csv = "seed,t,x,y,condition\n";
  std::vector<Sample2D> fresh;
  std::vector<Condition> fresh_conditions;
  double ref_score = 0.0;
  double final_x1 = 0.0;
  double final_x2 = 0.0;

  if (mode == "categorical") {
    CategoricalSetup setup = makeDefaultCategoricalSetup(
        task, cfg["records_per_condition"].get<int>(), Rng::deriveSeed(seed, 1));
    CategoricalTrainResult result =
        trainCategorical(setup.reference, setup.reference, setup.records, loss_cfg, epochs, lr,
                         task, seed);
    out.trace_csv = result.trace.toCsv();

    std::tie(final_x1, final_x2) =
        categoricalMeanRatios(result.policy, setup.reference, setup.records);

    Rng eval_rng(Rng::deriveSeed(seed, 2));
    double score_ref_acc = 0.0;
    for (int i = 0; i < eval_samples; ++i) {
      int const c = i % n_conditions;
      int const outcome = result.policy.sample(c, eval_rng);
      Sample2D const s = task.centers[static_cast<std::size_t>(outcome)];
      fresh.push_back(s);
      fresh_conditions.push_back({c});
      appendSampleRow(samples_csv, static_cast<std::uint64_t>(i), 0, s, c);
    }
    Rng ref_rng(Rng::deriveSeed(seed, 2));
    for (int i = 0; i < eval_samples; ++i) {
      int const c = i % n_conditions;
      int const outcome = setup.reference.sample(c, ref_rng);
      score_ref_acc +=
          task.oracle.score(task.centers[static_cast<std::size_t>(outcome)], {c});
    }
    ref_score = score_ref_acc / eval_samples;

    json policy_json = {{"version", 1},
                        {"kind", "categorical"},
                        {"n_conditions", result.policy.n_conditions},
                        {"n_outcomes", result.policy.n_outcomes},
                        {"logits", result.policy.logits}};
    out.policy_json = policy_json.dump(2);
  } else {
    NoiseSchedule const schedule = NoiseSchedule::standard();
    auto dataset = makeRingDataset(task, cfg["dataset_size"].get<int>(), n_conditions,
                                   Rng::deriveSeed(seed, 3));
    GaussianStepPolicy const ref = pretrainReference(
        schedule, dataset, cfg["pretrain_epochs"].get<int>(), cfg["pretrain_lr"].get<double>(),
        n_conditions, cfg["hidden"].get<int>(), cfg["batch_size"].get<int>(),
        Rng::deriveSeed(seed, 4));

    StepLossForm const form =
        mode == "stepwise" ? StepLossForm::Generalized : StepLossForm::TimestepBound;
    StepwiseTrainResult result = trainStepwise(
        ref, ref, task.oracle, schedule, loss_cfg, epochs, lr, cfg["k"].get<int>(),
        cfg["pairs_per_epoch"].get<int>(), seed, form, cfg["self_check"].get<bool>());
    out.trace_csv = result.trace.toCsv();
    out.policy_json = result.policy.toJson();

    // Post-training win/loss ratios on a fresh evaluation batch.
    {
      auto records = buildStepPairs(result.policy, schedule, task.oracle, Condition{0},
                                    cfg["k"].get<int>(), Rng::deriveSeed(seed, 5));
      double x1 = 0.0;
      double x2 = 0.0;
      for (auto const &rec : records) {
        x1 += stepRatio(result.policy, ref, rec.winner, rec.x_t, rec.timestep, rec.condition);
        x2 += stepRatio(result.policy, ref, rec.loser, rec.x_t, rec.timestep, rec.condition);
      }
      final_x1 = x1 / static_cast<double>(records.size());
      final_x2 = x2 / static_cast<double>(records.size());
    }

    double score_ref_acc = 0.0;
    for (int i = 0; i < eval_samples; ++i) {
      Condition const c{i % n_conditions};
      std::uint64_t const sample_seed =
          Rng::deriveSeed(seed, 0x50000u + static_cast<std::uint64_t>(i));
      Sample2D const s = ancestralSample(result.policy, schedule, c, sample_seed).back();
      fresh.push_back(s);
      fresh_conditions.push_back(c);
      appendSampleRow(samples_csv, sample_seed, 0, s, c.id);
      score_ref_acc +=
          task.oracle.score(ancestralSample(ref, schedule, c, sample_seed).back(), c);
    }
    ref_score = score_ref_acc / eval_samples;
  }

  out.samples_csv = std::move(samples_csv);

  double final_score = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    final_score += task.oracle.score(fresh[i], fresh_conditions[i]);
  }
  final_score /= static_cast<double>(fresh.size());

  DiversitySummary const diversity = sampleDiversity(fresh, task.centers, 0.3);
  GrayImage const raster = rasterize(fresh, 64, 3.0);

  json summary = {
      {"mode", mode},
      {"divergence", divergence.name()},
      {"beta", loss_cfg.beta},
      {"epochs", epochs},
      {"seed", seed},
      {"final_mean_x1", final_x1},
      {"final_mean_x2", final_x2},
      {"oracle_score_final", final_score},
      {"oracle_score_reference", ref_score},
      {"mode_coverage", diversity.mode_coverage},
      {"mean_pairwise_distance", diversity.mean_pairwise_distance},
      {"entropy_1d", entropy1d(raster)},
      {"entropy_2d", entropy2d(raster)},
  };
  out.summary_json = summary.dump(2);
  return out;
}

}  // namespace fdpo
