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

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedselect/delivery.hpp"
#include "fedselect/experiment_config.hpp"
#include "fedselect/metrics.hpp"
#include "fedselect/models.hpp"
#include "fedselect/optimizer.hpp"
#include "fedselect/select_plan.hpp"

namespace fedselect {

/// Per-round record: loss, any metrics computed this round, and the
/// exact communication/compute counters.
struct RoundStats {
  std::size_t round = 0;
  double train_loss = 0.0;
  std::map<std::string, double> metrics;
  RoundAccounting accounting;
};

/// Uniform sample of cohort_size distinct pool positions, deterministic
/// in the seed. Replaying a seed replays the client sequence.
Cohort sample_cohort(std::size_t pool_size, std::size_t cohort_size,
                     std::uint64_t seed);

struct SelectClientResult {
  std::vector<std::vector<Slice>> update_slices;  // per channel, key order
  double mean_loss = 0.0;
  std::uint64_t local_params = 0;
};

/// Binds one model family to a task: parameter layout, initialization,
/// select-plan channels, per-round key choice, client-side training for
/// the broadcast and select paths, and full-model evaluation. Instances
/// are immutable; rounds may train clients concurrently against one.
class TaskModel {
 public:
  virtual ~TaskModel() = default;

  virtual const std::shared_ptr<const ParamLayout>& layout() const = 0;
  std::size_t model_dim() const { return layout()->size(); }

  virtual std::vector<double> init_params(Rng& rng) const = 0;

  /// Select-plan channels for the configured plan kind. Most plans are a
  /// single channel; mixed selection pairs a structured channel with a
  /// random one (their keyspaces differ, so the two selects run
  /// side-by-side rather than through one merged keyspace).
  virtual std::vector<PlanPtr> make_channels(const SelectionConfig& sel) const = 0;

  /// One KeySeq per channel for this client and round.
  virtual std::vector<KeySeq> choose_keys(const SelectionConfig& sel,
                                          const ClientDataset& data, Rng& rng,
                                          std::uint64_t round_seed) const = 0;

  virtual ClientUpdateResult client_update_full(std::span<const double> model,
                                                const ClientDataset& data,
                                                const ClientUpdateConfig& cfg,
                                                Rng& rng) const = 0;

  virtual SelectClientResult client_update_select(
      const SelectionConfig& sel, const std::vector<KeySeq>& keys,
      const std::vector<std::vector<Slice>>& slices, const ClientDataset& data,
      const ClientUpdateConfig& cfg, Rng& rng) const = 0;

  virtual double evaluate(std::span<const double> model,
                          const FederatedDataset& eval) const = 0;
  virtual std::string metric_name() const = 0;
};

std::unique_ptr<TaskModel> make_task_model(const ExperimentConfig& cfg,
                                           const FederatedDataset& train_data);

/// One round of plain federated training: broadcast the full model, run
/// the model-delta client update on every cohort member, aggregate the
/// mean update, and apply the server optimizer in place.
RoundStats run_round_baseline(std::vector<double>& model, ServerOptimizer& opt,
                              const TaskModel& task,
                              const FederatedDataset& train, const Cohort& cohort,
                              const TrainingConfig& training,
                              std::uint64_t round_seed);

/// One round of federated training with select: per-client key choice,
/// slice delivery under the configured mode, local training on the
/// sub-models, deselect aggregation, server update.
RoundStats run_round_select(std::vector<double>& model, ServerOptimizer& opt,
                            const TaskModel& task,
                            const std::vector<PlanPtr>& channels,
                            const SelectionConfig& selection,
                            const DeliveryMode& delivery,
                            const FederatedDataset& train, const Cohort& cohort,
                            const TrainingConfig& training,
                            std::uint64_t round_seed);

/// Materializes the configured task's train/valid/test federations.
FederatedSplits build_task_data(const TaskConfig& task);

/// Runs every trial and round of the configured experiment and returns
/// the metric rows (one train row per round, eval rows on the evaluation
/// cadence, a test row after the final round when a test split exists).
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg);

}  // namespace fedselect
