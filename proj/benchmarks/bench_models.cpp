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

#include <numeric>

#include "fedselect/models.hpp"
#include "fedselect/rng.hpp"

namespace {

using namespace fedselect;

std::vector<SparseExample> sparse_batch(std::size_t vocab, std::size_t tags,
                                        std::size_t count, std::size_t words,
                                        Rng& rng) {
  std::vector<SparseExample> out(count);
  for (auto& e : out) {
    auto picks = rng.sample_without_replacement(vocab, words);
    std::sort(picks.begin(), picks.end());
    for (auto w : picks) {
      e.indices.push_back(static_cast<std::uint32_t>(w));
      e.values.push_back(1.0);
    }
    e.labels.push_back(static_cast<std::uint32_t>(rng.below(tags)));
  }
  return out;
}

void BM_LogRegLossGrad(benchmark::State& state) {
  const std::size_t vocab = state.range(0);
  const std::size_t tags = 10;
  Rng rng(3);
  LogRegProblem problem(vocab, tags, true,
                        localize_sparse_full(sparse_batch(vocab, tags, 32, 20, rng)));
  std::vector<double> params(problem.dim());
  for (double& p : params) p = 0.1 * rng.normal();
  std::vector<std::uint32_t> batch(32);
  std::iota(batch.begin(), batch.end(), 0u);
  SparseGrad grad;
  for (auto _ : state) {
    grad.reset(params.size());
    benchmark::DoNotOptimize(problem.loss_and_grad(params, batch, &grad));
  }
}
BENCHMARK(BM_LogRegLossGrad)->Arg(500)->Arg(5000)->Arg(50000);

void BM_MlpLossGrad(benchmark::State& state) {
  const std::size_t hidden = state.range(0);
  Rng rng(5);
  std::vector<DenseExample> data(32);
  for (auto& e : data) {
    e.features.resize(16);
    for (double& v : e.features) v = rng.normal();
    e.label = static_cast<std::uint32_t>(rng.below(8));
  }
  auto problem = MlpDenseProblem::full(16, hidden, 8, std::move(data));
  std::vector<double> params(problem.dim());
  for (double& p : params) p = 0.1 * rng.normal();
  std::vector<std::uint32_t> batch(32);
  std::iota(batch.begin(), batch.end(), 0u);
  SparseGrad grad;
  for (auto _ : state) {
    grad.reset(params.size());
    benchmark::DoNotOptimize(problem.loss_and_grad(params, batch, &grad));
  }
}
BENCHMARK(BM_MlpLossGrad)->Arg(32)->Arg(128)->Arg(512);

void BM_ClientUpdate(benchmark::State& state) {
  Rng rng(9);
  const std::size_t vocab = 2000;
  LogRegProblem problem(vocab, 10, true,
                        localize_sparse_full(sparse_batch(vocab, 10, 40, 25, rng)));
  std::vector<double> y0(problem.dim());
  for (double& p : y0) p = 0.1 * rng.normal();
  ClientUpdateConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 20;
  cfg.lr = 0.1;
  for (auto _ : state) {
    Rng sgd(42);
    auto result = client_update_model_delta(problem, y0, cfg, sgd);
    benchmark::DoNotOptimize(result.delta.data());
  }
}
BENCHMARK(BM_ClientUpdate);

}  // namespace
