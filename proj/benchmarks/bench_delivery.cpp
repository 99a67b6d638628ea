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

#include "fedselect/delivery.hpp"
#include "fedselect/plans.hpp"
#include "fedselect/rng.hpp"

namespace {

using namespace fedselect;

struct DeliveryFixture {
  std::shared_ptr<const ParamLayout> layout;
  PlanPtr plan;
  std::vector<double> model;
  ClientsValue<KeySeq> keys;

  DeliveryFixture(std::size_t rows, std::size_t width, std::size_t clients,
                  std::size_t keys_per_client) {
    layout = std::make_shared<ParamLayout>(
        std::vector<BlockSpec>{{"rows", {rows, width}, true}});
    plan = make_row_select_plan(layout, "rows");
    Rng rng(7);
    model.resize(layout->size());
    for (double& v : model) v = rng.normal();
    Cohort cohort;
    std::vector<KeySeq> per_client(clients);
    for (std::size_t n = 0; n < clients; ++n) {
      cohort.push_back(static_cast<ClientId>(n));
      per_client[n] = rng.sample_without_replacement(rows, keys_per_client);
    }
    keys = ClientsValue<KeySeq>(cohort, std::move(per_client));
  }
};

void BM_DeliverOnDemand(benchmark::State& state) {
  DeliveryFixture fx(1024, 16, state.range(0), 64);
  const DeliveryMode mode{DeliveryKind::kOnDemand, CacheScope::kNone};
  for (auto _ : state) {
    auto result = deliver(mode, at_server(fx.model), fx.keys, *fx.plan);
    benchmark::DoNotOptimize(result.stats.psi_evals);
  }
}
BENCHMARK(BM_DeliverOnDemand)->Arg(8)->Arg(32)->Arg(128);

void BM_DeliverCached(benchmark::State& state) {
  DeliveryFixture fx(1024, 16, state.range(0), 64);
  const DeliveryMode mode{DeliveryKind::kOnDemand, CacheScope::kPerRound};
  for (auto _ : state) {
    auto result = deliver(mode, at_server(fx.model), fx.keys, *fx.plan);
    benchmark::DoNotOptimize(result.stats.cache_hits);
  }
}
BENCHMARK(BM_DeliverCached)->Arg(8)->Arg(32)->Arg(128);

void BM_DeliverPregenerated(benchmark::State& state) {
  DeliveryFixture fx(1024, 16, state.range(0), 64);
  const DeliveryMode mode{DeliveryKind::kPregenerated, CacheScope::kNone};
  for (auto _ : state) {
    auto result = deliver(mode, at_server(fx.model), fx.keys, *fx.plan);
    benchmark::DoNotOptimize(result.stats.wasted_slices);
  }
}
BENCHMARK(BM_DeliverPregenerated)->Arg(8)->Arg(32)->Arg(128);

void BM_AggregateMeanDeselect(benchmark::State& state) {
  const std::size_t clients = state.range(0);
  DeliveryFixture fx(1024, 16, clients, 64);
  const DeliveryMode mode{DeliveryKind::kOnDemand, CacheScope::kNone};
  auto delivered = deliver(mode, at_server(fx.model), fx.keys, *fx.plan);
  for (auto _ : state) {
    auto update = aggregate_mean_deselect(delivered.slices, fx.keys, *fx.plan);
    benchmark::DoNotOptimize(update.value.data());
  }
}
BENCHMARK(BM_AggregateMeanDeselect)->Arg(8)->Arg(32)->Arg(128);

}  // namespace
