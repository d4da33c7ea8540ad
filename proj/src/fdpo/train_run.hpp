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

namespace fdpo {

/// Documents produced by one training run; the caller owns persistence.
struct TrainRunOutput {
  std::string effective_config_json;  // defaults resolved
  std::string trace_csv;
  std::string policy_json;
  std::string samples_csv;   // columns seed,t,x,y,condition (final samples, t=0)
  std::string summary_json;  // final scores, diversity and entropy panel
};

/// Run one desk-scale preference-alignment training from a JSON config:
///   {"mode": "categorical"|"stepwise"|"stepwise-bound", "divergence": "...",
///    "beta", "epochs", "lr", "k", "seed", "pairs_per_epoch",
///    "pretrain_epochs", "pretrain_lr", "hidden", "conditions",
///    "records_per_condition", "dataset_size", "batch_size", "eval_samples",
///    "self_check"}
/// Unknown keys are rejected. Fully deterministic given the config.
TrainRunOutput runTrainFromJson(std::string const &config_json);

}  // namespace fdpo
