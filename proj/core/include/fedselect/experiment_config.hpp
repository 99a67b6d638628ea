/*
 * Copyright 2026 The fedselect Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>

#include "fedselect/datagen.hpp"
#include "fedselect/delivery.hpp"
#include "fedselect/optimizer.hpp"

namespace fedselect {

enum class TaskKind { kSyntheticTag, kSyntheticDense, kShards };
enum class ModelKind { kSparseLogReg, kMlp };
enum class PlanKind { kFullModel, kRowSelect, kNeuronSelect, kMixedRows };
enum class StrategyKind {
  kNone,  // plain broadcast training, no select path
  kTopM,
  kRandomFromLocal,
  kRandomTop,
  kUniformRandom,
  kMixed,
};

struct TaskConfig {
  TaskKind kind = TaskKind::kSyntheticTag;
  SyntheticTagConfig tag;    // kSyntheticTag
  DenseTaskConfig dense;     // kSyntheticDense
  std::string shard_path;    // kShards
};

struct ModelConfig {
  ModelKind kind = ModelKind::kSparseLogReg;
  std::size_t hidden = 32;  // mlp hidden units
};

struct SelectionConfig {
  PlanKind plan = PlanKind::kFullModel;
  StrategyKind strategy = StrategyKind::kNone;
  std::size_t m = 0;        // keys per client (strategies with a fixed m)
  double alpha = 1.0;       // mixed scaling
  bool shared_per_round = false;
};

struct TrainingConfig {
  std::size_t rounds = 100;       // T
  std::size_t cohort_size = 50;
  double client_lr = 0.1;         // gamma (tuning-grid midpoint default)
  ServerOptimizerConfig optimizer;
  int epochs = 1;
  std::size_t batch_size = 20;
  std::size_t eval_every = 10;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t recall_k = 5;
  bool per_key_normalization = false;
  bool weight_by_examples = false;
};

struct ExperimentConfig {
  TaskConfig task;
  ModelConfig model;
  SelectionConfig selection;
  TrainingConfig training;
  DeliveryMode delivery;
  std::string output_dir = "out";
};

/// Parses a JSON config document, fills defaults, and cross-validates.
/// Unknown keys raise UnknownKey with the offending path; invalid
/// combinations raise ConfigConflict.
ExperimentConfig parse_config(const std::string& json_text);

/// Fully resolved configuration (every field explicit) as deterministic
/// pretty-printed JSON; parse_config on the result reproduces the same
/// configuration.
std::string resolved_config_json(const ExperimentConfig& config);

/// Cross-field validation shared by parse_config and run_cli overrides.
void validate_config(const ExperimentConfig& config);

std::string to_string(TaskKind kind);
std::string to_string(ModelKind kind);
std::string to_string(PlanKind kind);
std::string to_string(StrategyKind kind);

}  // namespace fedselect
