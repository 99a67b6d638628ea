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

#include <benchmark/benchmark.h>

#include "fedselect/training.hpp"

namespace {

using namespace fedselect;

ExperimentConfig round_config(std::size_t m) {
  ExperimentConfig cfg;
  cfg.task.kind = TaskKind::kSyntheticTag;
  cfg.task.tag.clients = 100;
  cfg.task.tag.vocab = 2000;
  cfg.task.tag.tags = 10;
  cfg.task.tag.min_examples = 20;
  cfg.task.tag.max_examples = 40;
  cfg.task.tag.seed = 1;
  cfg.model.kind = ModelKind::kSparseLogReg;
  cfg.selection.plan = PlanKind::kRowSelect;
  cfg.selection.strategy = StrategyKind::kTopM;
  cfg.selection.m = m;
  cfg.training.cohort_size = 50;
  cfg.training.optimizer.kind = OptimizerKind::kAdagrad;
  return cfg;
}

void BM_SelectRound(benchmark::State& state) {
  const auto cfg = round_config(state.range(0));
  const auto splits = build_task_data(cfg.task);
  const auto task = make_task_model(cfg, splits.train);
  const auto channels = task->make_channels(cfg.selection);
  Rng init(3);
  std::vector<double> model = task->init_params(init);
  ServerOptimizer opt(cfg.training.optimizer, model.size());
  std::uint64_t round = 0;
  for (auto _ : state) {
    ++round;
    const Cohort cohort = sample_cohort(splits.train.clients.size(),
                                        cfg.training.cohort_size,
                                        derive_seed(17, round));
    auto stats = run_round_select(model, opt, *task, channels, cfg.selection,
                                  cfg.delivery, splits.train, cohort,
                                  cfg.training, round);
    benchmark::DoNotOptimize(stats.train_loss);
  }
}
BENCHMARK(BM_SelectRound)->Arg(50)->Arg(200)->Arg(2000);

void BM_BaselineRound(benchmark::State& state) {
  const auto cfg = round_config(50);
  const auto splits = build_task_data(cfg.task);
  const auto task = make_task_model(cfg, splits.train);
  Rng init(3);
  std::vector<double> model = task->init_params(init);
  ServerOptimizer opt(cfg.training.optimizer, model.size());
  std::uint64_t round = 0;
  for (auto _ : state) {
    ++round;
    const Cohort cohort = sample_cohort(splits.train.clients.size(),
                                        cfg.training.cohort_size,
                                        derive_seed(17, round));
    auto stats = run_round_baseline(model, opt, *task, splits.train, cohort,
                                    cfg.training, round);
    benchmark::DoNotOptimize(stats.train_loss);
  }
}
BENCHMARK(BM_BaselineRound);

}  // namespace
