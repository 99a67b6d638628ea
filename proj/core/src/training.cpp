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

#include "fedselect/training.hpp"

#include <algorithm>
#include <filesystem>
#include <utility>

#include "fedselect/datagen.hpp"
#include "fedselect/keys.hpp"
#include "fedselect/plans.hpp"

namespace fedselect {

namespace {

// Salt words for the per-purpose random streams.
constexpr std::uint64_t kInitStream = 0x696e6974;    // "init"
constexpr std::uint64_t kCohortStream = 0x636f686f;  // "coho"
constexpr std::uint64_t kKeysStream = 0x6b657973;    // "keys"
constexpr std::uint64_t kSgdStream = 0x00736764;     // "sgd"

ClientUpdateConfig client_config(const TrainingConfig& tr) {
  ClientUpdateConfig cfg;
  cfg.epochs = tr.epochs;
  cfg.batch_size = tr.batch_size;
  cfg.lr = tr.client_lr;
  return cfg;
}

std::vector<double> weighted_mean(const ClientsValue<std::vector<double>>& values,
                                  const std::vector<double>& weights) {
  const std::size_t dim = values.at(0).size();
  std::vector<double> sum(dim, 0.0);
  double total = 0.0;
  for (std::size_t pos : values.order_by_client()) {
    const double w = weights[pos];
    total += w;
    const auto& u = values.at(pos);
    for (std::size_t i = 0; i < dim; ++i) sum[i] += w * u[i];
  }
  if (total > 0.0) {
    for (double& v : sum) v /= total;
  }
  return sum;
}

double ordered_mean(const Cohort& cohort, const std::vector<double>& values) {
  return aggregate_mean(ClientsValue<double>(cohort, values)).value;
}

// ---------------------------------------------------------------------------
// Task bindings

class LogRegTask final : public TaskModel {
 public:
  LogRegTask(std::size_t vocab, std::size_t tags, std::size_t recall_k)
      : vocab_(vocab),
        tags_(tags),
        recall_k_(recall_k),
        layout_(sparse_logreg_layout(vocab, tags)) {}

  const std::shared_ptr<const ParamLayout>& layout() const override {
    return layout_;
  }

  std::vector<double> init_params(Rng& rng) const override {
    return init_logreg_params(*layout_, rng);
  }

  std::vector<PlanPtr> make_channels(const SelectionConfig& sel) const override {
    if (sel.plan == PlanKind::kFullModel) {
      return {make_full_model_plan(layout_)};
    }
    if (sel.plan == PlanKind::kRowSelect) {
      return {fuse_broadcast_into_select(make_row_select_plan(layout_, "weights"),
                                         "bias")};
    }
    throw ConfigConflict("unsupported plan for the sparse_logreg model");
  }

  std::vector<KeySeq> choose_keys(const SelectionConfig& sel,
                                  const ClientDataset& data, Rng& rng,
                                  std::uint64_t round_seed) const override {
    if (sel.plan == PlanKind::kFullModel) return {KeySeq{0}};
    const std::vector<std::uint64_t> counts = feature_counts(data.sparse, vocab_);
    switch (sel.strategy) {
      case StrategyKind::kTopM:
        return {keys_top_m(counts, sel.m)};
      case StrategyKind::kRandomFromLocal:
        return {keys_random_from_local(counts, sel.m, rng)};
      case StrategyKind::kRandomTop:
        return {keys_random_top(counts, sel.m, rng)};
      case StrategyKind::kUniformRandom:
        return {keys_uniform_random(vocab_, sel.m, rng, sel.shared_per_round,
                                    round_seed)};
      default:
        throw ConfigConflict("unsupported strategy for the sparse_logreg model");
    }
  }

  ClientUpdateResult client_update_full(std::span<const double> model,
                                        const ClientDataset& data,
                                        const ClientUpdateConfig& cfg,
                                        Rng& rng) const override {
    LogRegProblem problem(vocab_, tags_, true, localize_sparse_full(data.sparse));
    return client_update_model_delta(problem, model, cfg, rng);
  }

  SelectClientResult client_update_select(const SelectionConfig& sel,
                                          const std::vector<KeySeq>& keys,
                                          const std::vector<std::vector<Slice>>& slices,
                                          const ClientDataset& data,
                                          const ClientUpdateConfig& cfg,
                                          Rng& rng) const override {
    if (sel.plan == PlanKind::kFullModel) {
      LogRegProblem problem(vocab_, tags_, true, localize_sparse_full(data.sparse));
      auto res = client_update_model_delta(problem, slices.at(0).at(0), cfg, rng);
      SelectClientResult out;
      out.update_slices = {{std::move(res.delta)}};
      out.mean_loss = res.mean_loss;
      out.local_params = model_dim();
      return out;
    }

    const KeySeq& feature_keys = keys.at(0);
    const std::size_t m = feature_keys.size();
    SelectClientResult out;
    out.update_slices.resize(1);
    if (m == 0) return out;

    // Local sub-model [w (m x tags) | bias]; the fused bias rides along
    // with every slice and is taken once.
    std::vector<double> y0(m * tags_ + tags_);
    const auto& delivered = slices.at(0);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(delivered[i].begin(), tags_, y0.begin() + i * tags_);
    }
    std::copy_n(delivered[0].begin() + tags_, tags_, y0.begin() + m * tags_);

    LogRegProblem problem(m, tags_, true,
                          localize_sparse(data.sparse, feature_keys, true));
    auto res = client_update_model_delta(problem, y0, cfg, rng);

    out.update_slices[0].reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Slice u(2 * tags_);
      std::copy_n(res.delta.begin() + i * tags_, tags_, u.begin());
      std::copy_n(res.delta.begin() + m * tags_, tags_, u.begin() + tags_);
      out.update_slices[0].push_back(std::move(u));
    }
    out.mean_loss = res.mean_loss;
    out.local_params = y0.size();
    return out;
  }

  double evaluate(std::span<const double> model,
                  const FederatedDataset& eval) const override {
    return evaluate_logreg_recall(model, vocab_, tags_, eval, recall_k_);
  }

  std::string metric_name() const override {
    return "recall_at_" + std::to_string(recall_k_);
  }

 private:
  std::size_t vocab_;
  std::size_t tags_;
  std::size_t recall_k_;
  std::shared_ptr<const ParamLayout> layout_;
};

class DenseMlpTask final : public TaskModel {
 public:
  DenseMlpTask(std::size_t in_dim, std::size_t hidden, std::size_t classes)
      : in_dim_(in_dim),
        hidden_(hidden),
        classes_(classes),
        layout_(mlp_layout(in_dim, hidden, classes)) {}

  const std::shared_ptr<const ParamLayout>& layout() const override {
    return layout_;
  }

  std::vector<double> init_params(Rng& rng) const override {
    return init_mlp_params(*layout_, in_dim_, hidden_, rng);
  }

  std::vector<PlanPtr> make_channels(const SelectionConfig& sel) const override {
    if (sel.plan == PlanKind::kFullModel) {
      return {make_full_model_plan(layout_)};
    }
    if (sel.plan == PlanKind::kNeuronSelect) {
      return {fuse_broadcast_into_select(
          make_neuron_select_plan(layout_, "w1", "b1", "w2"), "b2")};
    }
    throw ConfigConflict("unsupported plan for the mlp model on a dense task");
  }

  std::vector<KeySeq> choose_keys(const SelectionConfig& sel,
                                  const ClientDataset&, Rng& rng,
                                  std::uint64_t round_seed) const override {
    if (sel.plan == PlanKind::kFullModel) return {KeySeq{0}};
    if (sel.strategy != StrategyKind::kUniformRandom) {
      throw ConfigConflict("neuron selection uses the uniform_random strategy");
    }
    return {keys_uniform_random(hidden_, sel.m, rng, sel.shared_per_round,
                                round_seed)};
  }

  ClientUpdateResult client_update_full(std::span<const double> model,
                                        const ClientDataset& data,
                                        const ClientUpdateConfig& cfg,
                                        Rng& rng) const override {
    auto problem = MlpDenseProblem::full(in_dim_, hidden_, classes_, data.dense);
    return client_update_model_delta(problem, model, cfg, rng);
  }

  SelectClientResult client_update_select(const SelectionConfig& sel,
                                          const std::vector<KeySeq>& keys,
                                          const std::vector<std::vector<Slice>>& slices,
                                          const ClientDataset& data,
                                          const ClientUpdateConfig& cfg,
                                          Rng& rng) const override {
    if (sel.plan == PlanKind::kFullModel) {
      auto problem = MlpDenseProblem::full(in_dim_, hidden_, classes_, data.dense);
      auto res = client_update_model_delta(problem, slices.at(0).at(0), cfg, rng);
      SelectClientResult out;
      out.update_slices = {{std::move(res.delta)}};
      out.mean_loss = res.mean_loss;
      out.local_params = model_dim();
      return out;
    }

    const KeySeq& unit_keys = keys.at(0);
    const std::size_t m = unit_keys.size();
    SelectClientResult out;
    out.update_slices.resize(1);
    if (m == 0) return out;

    const std::size_t unit_len = in_dim_ + 1 + classes_;
    std::vector<double> y0(m * unit_len + classes_);
    const auto& delivered = slices.at(0);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(delivered[i].begin(), unit_len, y0.begin() + i * unit_len);
    }
    std::copy_n(delivered[0].begin() + unit_len, classes_,
                y0.begin() + m * unit_len);

    auto problem = MlpDenseProblem::sliced(in_dim_, m, classes_, data.dense);
    auto res = client_update_model_delta(problem, y0, cfg, rng);

    out.update_slices[0].reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Slice u(unit_len + classes_);
      std::copy_n(res.delta.begin() + i * unit_len, unit_len, u.begin());
      std::copy_n(res.delta.begin() + m * unit_len, classes_, u.begin() + unit_len);
      out.update_slices[0].push_back(std::move(u));
    }
    out.mean_loss = res.mean_loss;
    out.local_params = y0.size();
    return out;
  }

  double evaluate(std::span<const double> model,
                  const FederatedDataset& eval) const override {
    return evaluate_mlp_accuracy(model, in_dim_, hidden_, classes_, eval);
  }

  std::string metric_name() const override { return "accuracy"; }

 private:
  std::size_t in_dim_;
  std::size_t hidden_;
  std::size_t classes_;
  std::shared_ptr<const ParamLayout> layout_;
};

class SparseMlpTask final : public TaskModel {
 public:
  SparseMlpTask(std::size_t vocab, std::size_t hidden, std::size_t classes)
      : vocab_(vocab),
        hidden_(hidden),
        classes_(classes),
        layout_(sparse_mlp_layout(vocab, hidden, classes)) {}

  const std::shared_ptr<const ParamLayout>& layout() const override {
    return layout_;
  }

  std::vector<double> init_params(Rng& rng) const override {
    return init_mlp_params(*layout_, vocab_, hidden_, rng);
  }

  std::vector<PlanPtr> make_channels(const SelectionConfig& sel) const override {
    if (sel.plan == PlanKind::kFullModel) {
      return {make_full_model_plan(layout_)};
    }
    if (sel.plan == PlanKind::kMixedRows) {
      // Structured channel: feature rows of w1 with both biases fused in.
      // Random channel: per-unit rows of w2. The two select calls are
      // value-equivalent to one merged select over the product keyspace.
      PlanPtr structured = fuse_broadcast_into_select(
          fuse_broadcast_into_select(make_row_select_plan(layout_, "w1"), "b1"),
          "b2");
      PlanPtr random = make_row_select_plan(layout_, "w2");
      return {std::move(structured), std::move(random)};
    }
    throw ConfigConflict("unsupported plan for the mlp model on a sparse task");
  }

  std::vector<KeySeq> choose_keys(const SelectionConfig& sel,
                                  const ClientDataset& data, Rng& rng,
                                  std::uint64_t) const override {
    if (sel.plan == PlanKind::kFullModel) return {KeySeq{0}};
    const std::vector<std::uint64_t> counts = feature_counts(data.sparse, vocab_);
    MixedKeys mixed = keys_mixed_alpha(sel.alpha, counts, hidden_, rng);
    return {std::move(mixed.structured), std::move(mixed.random)};
  }

  ClientUpdateResult client_update_full(std::span<const double> model,
                                        const ClientDataset& data,
                                        const ClientUpdateConfig& cfg,
                                        Rng& rng) const override {
    std::vector<std::uint32_t> all_units(hidden_);
    std::iota(all_units.begin(), all_units.end(), 0u);
    MlpSparseProblem problem(vocab_, hidden_, classes_, std::move(all_units),
                             localize_sparse_full(data.sparse));
    return client_update_model_delta(problem, model, cfg, rng);
  }

  SelectClientResult client_update_select(const SelectionConfig& sel,
                                          const std::vector<KeySeq>& keys,
                                          const std::vector<std::vector<Slice>>& slices,
                                          const ClientDataset& data,
                                          const ClientUpdateConfig& cfg,
                                          Rng& rng) const override {
    if (sel.plan == PlanKind::kFullModel) {
      std::vector<std::uint32_t> all_units(hidden_);
      std::iota(all_units.begin(), all_units.end(), 0u);
      MlpSparseProblem problem(vocab_, hidden_, classes_, std::move(all_units),
                               localize_sparse_full(data.sparse));
      auto res = client_update_model_delta(problem, slices.at(0).at(0), cfg, rng);
      SelectClientResult out;
      out.update_slices = {{std::move(res.delta)}};
      out.mean_loss = res.mean_loss;
      out.local_params = model_dim();
      return out;
    }

    const KeySeq& feature_keys = keys.at(0);
    const KeySeq& unit_keys = keys.at(1);
    const std::size_t m = feature_keys.size();
    const std::size_t d = unit_keys.size();
    SelectClientResult out;
    out.update_slices.resize(2);
    if (m == 0) return out;

    // Local layout [w1 rows (m x hidden) | b1 | b2 | w2 rows (d x classes)].
    std::vector<double> y0(m * hidden_ + hidden_ + classes_ + d * classes_);
    const auto& structured = slices.at(0);
    const auto& random = slices.at(1);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy_n(structured[i].begin(), hidden_, y0.begin() + i * hidden_);
    }
    std::copy_n(structured[0].begin() + hidden_, hidden_ + classes_,
                y0.begin() + m * hidden_);
    const std::size_t w2_off = m * hidden_ + hidden_ + classes_;
    for (std::size_t j = 0; j < d; ++j) {
      std::copy_n(random[j].begin(), classes_, y0.begin() + w2_off + j * classes_);
    }

    std::vector<std::uint32_t> units(unit_keys.begin(), unit_keys.end());
    MlpSparseProblem problem(m, hidden_, classes_, std::move(units),
                             localize_sparse(data.sparse, feature_keys, true));
    auto res = client_update_model_delta(problem, y0, cfg, rng);

    out.update_slices[0].reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Slice u(2 * hidden_ + classes_);
      std::copy_n(res.delta.begin() + i * hidden_, hidden_, u.begin());
      std::copy_n(res.delta.begin() + m * hidden_, hidden_ + classes_,
                  u.begin() + hidden_);
      out.update_slices[0].push_back(std::move(u));
    }
    out.update_slices[1].reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      Slice u(classes_);
      std::copy_n(res.delta.begin() + w2_off + j * classes_, classes_, u.begin());
      out.update_slices[1].push_back(std::move(u));
    }
    out.mean_loss = res.mean_loss;
    out.local_params = y0.size();
    return out;
  }

  double evaluate(std::span<const double> model,
                  const FederatedDataset& eval) const override {
    return evaluate_sparse_mlp_accuracy(model, vocab_, hidden_, classes_, eval);
  }

  std::string metric_name() const override { return "accuracy"; }

 private:
  std::size_t vocab_;
  std::size_t hidden_;
  std::size_t classes_;
  std::shared_ptr<const ParamLayout> layout_;
};

void check_cohort(const FederatedDataset& train, const Cohort& cohort) {
  if (cohort.empty()) throw EmptyCohort();
  for (ClientId id : cohort) {
    if (id >= train.clients.size()) {
      throw BadConfig("cohort member outside the client pool");
    }
  }
}

}  // namespace

Cohort sample_cohort(std::size_t pool_size, std::size_t cohort_size,
                     std::uint64_t seed) {
  if (cohort_size > pool_size) {
    throw CohortTooLarge("cohort of " + std::to_string(cohort_size) +
                         " from a pool of " + std::to_string(pool_size));
  }
  Rng rng(seed);
  Cohort cohort;
  cohort.reserve(cohort_size);
  for (std::uint64_t v : rng.sample_without_replacement(pool_size, cohort_size)) {
    cohort.push_back(static_cast<ClientId>(v));
  }
  return cohort;
}

std::unique_ptr<TaskModel> make_task_model(const ExperimentConfig& cfg,
                                           const FederatedDataset& train_data) {
  if (cfg.model.kind == ModelKind::kSparseLogReg) {
    if (train_data.kind != DataKind::kSparse) {
      throw ConfigConflict("sparse_logreg needs sparse data");
    }
    return std::make_unique<LogRegTask>(train_data.feature_dim,
                                        train_data.label_dim,
                                        cfg.training.recall_k);
  }
  if (train_data.kind == DataKind::kDense) {
    return std::make_unique<DenseMlpTask>(train_data.feature_dim, cfg.model.hidden,
                                          train_data.label_dim);
  }
  for (const auto& client : train_data.clients) {
    for (const auto& e : client.sparse) {
      if (e.labels.size() != 1) {
        throw ConfigConflict("mlp training on a sparse task needs single-label examples");
      }
    }
  }
  return std::make_unique<SparseMlpTask>(train_data.feature_dim, cfg.model.hidden,
                                         train_data.label_dim);
}

RoundStats run_round_baseline(std::vector<double>& model, ServerOptimizer& opt,
                              const TaskModel& task,
                              const FederatedDataset& train, const Cohort& cohort,
                              const TrainingConfig& training,
                              std::uint64_t round_seed) {
  check_cohort(train, cohort);
  const ClientUpdateConfig cfg = client_config(training);
  const std::size_t dim = model.size();

  const auto received = broadcast(at_server(model), cohort);

  std::vector<std::vector<double>> updates(cohort.size());
  std::vector<double> losses(cohort.size(), 0.0);
  std::vector<double> weights(cohort.size(), 0.0);
  for (std::size_t pos = 0; pos < cohort.size(); ++pos) {
    const ClientId id = cohort[pos];
    const ClientDataset& data = train.clients[id];
    Rng rng(derive_seed(round_seed, kSgdStream, id));
    auto res = task.client_update_full(received.at(pos), data, cfg, rng);
    updates[pos] = std::move(res.delta);
    losses[pos] = res.mean_loss;
    weights[pos] = static_cast<double>(data.size(train.kind));
  }

  ClientsValue<std::vector<double>> placed(cohort, std::move(updates));
  const std::vector<double> update = training.weight_by_examples
                                         ? weighted_mean(placed, weights)
                                         : aggregate_mean(placed).value;
  opt.apply(model, update);

  RoundStats stats;
  stats.train_loss = ordered_mean(cohort, losses);
  stats.accounting.scalars_down = dim * cohort.size();
  stats.accounting.scalars_up = dim * cohort.size();
  stats.accounting.max_client_params = dim;
  return stats;
}

RoundStats run_round_select(std::vector<double>& model, ServerOptimizer& opt,
                            const TaskModel& task,
                            const std::vector<PlanPtr>& channels,
                            const SelectionConfig& selection,
                            const DeliveryMode& delivery,
                            const FederatedDataset& train, const Cohort& cohort,
                            const TrainingConfig& training,
                            std::uint64_t round_seed) {
  check_cohort(train, cohort);
  if (channels.empty()) throw BadConfig("select round needs at least one plan");
  const ClientUpdateConfig cfg = client_config(training);
  const std::size_t n_channels = channels.size();

  // Key choice per client, then one federated select per channel.
  std::vector<std::vector<KeySeq>> keys_by_client(cohort.size());
  for (std::size_t pos = 0; pos < cohort.size(); ++pos) {
    const ClientId id = cohort[pos];
    Rng rng(derive_seed(round_seed, kKeysStream, id));
    keys_by_client[pos] =
        task.choose_keys(selection, train.clients[id], rng, round_seed);
    if (keys_by_client[pos].size() != n_channels) {
      throw ShapeMismatch("key chooser emitted the wrong channel count");
    }
  }

  RoundStats stats;
  std::vector<ClientsValue<KeySeq>> keys_by_channel;
  std::vector<DeliveryResult> delivered;
  keys_by_channel.reserve(n_channels);
  delivered.reserve(n_channels);
  for (std::size_t ch = 0; ch < n_channels; ++ch) {
    std::vector<KeySeq> per_client(cohort.size());
    for (std::size_t pos = 0; pos < cohort.size(); ++pos) {
      per_client[pos] = keys_by_client[pos][ch];
    }
    keys_by_channel.emplace_back(cohort, std::move(per_client));
    delivered.push_back(
        deliver(delivery, at_server(model), keys_by_channel[ch], *channels[ch]));
    const DeliveryStats& ds = delivered[ch].stats;
    stats.accounting.scalars_down += ds.scalars_down_total();
    stats.accounting.psi_evals += ds.psi_evals;
    stats.accounting.client_psi_evals += ds.client_psi_evals;
    stats.accounting.wasted_slices += ds.wasted_slices;
    stats.accounting.cache_hits += ds.cache_hits;
  }

  // Local training on the assembled sub-models.
  std::vector<std::vector<std::vector<Slice>>> updates(n_channels);
  for (auto& u : updates) u.resize(cohort.size());
  std::vector<double> losses(cohort.size(), 0.0);
  std::vector<double> weights(cohort.size(), 0.0);
  for (std::size_t pos = 0; pos < cohort.size(); ++pos) {
    const ClientId id = cohort[pos];
    const ClientDataset& data = train.clients[id];
    std::vector<std::vector<Slice>> slices(n_channels);
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
      slices[ch] = delivered[ch].slices.at(pos);
    }
    Rng rng(derive_seed(round_seed, kSgdStream, id));
    auto res = task.client_update_select(selection, keys_by_client[pos], slices,
                                         data, cfg, rng);
    if (res.update_slices.size() != n_channels) {
      throw ShapeMismatch("client update emitted the wrong channel count");
    }
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
      updates[ch][pos] = std::move(res.update_slices[ch]);
    }
    losses[pos] = res.mean_loss;
    weights[pos] = static_cast<double>(data.size(train.kind));
    stats.accounting.scalars_up += res.local_params;
    stats.accounting.max_client_params =
        std::max(stats.accounting.max_client_params, res.local_params);
  }

  // Deselect aggregation; channels cover disjoint coordinates so their
  // aggregated updates sum into one server update.
  const DeselectNorm norm = training.per_key_normalization
                                ? DeselectNorm::kPerKeyCount
                                : DeselectNorm::kCohortSize;
  std::vector<double> update(model.size(), 0.0);
  if (training.weight_by_examples) {
    ClientsValue<double> placed_weights(cohort, weights);
    double total = 0.0;
    for (std::size_t pos : placed_weights.order_by_client()) {
      const double w = weights[pos];
      total += w;
      for (std::size_t ch = 0; ch < n_channels; ++ch) {
        const std::vector<double> dense = channels[ch]->deselect(
            updates[ch][pos], keys_by_channel[ch].at(pos));
        for (std::size_t i = 0; i < update.size(); ++i) update[i] += w * dense[i];
      }
    }
    if (total > 0.0) {
      for (double& v : update) v /= total;
    }
  } else {
    for (std::size_t ch = 0; ch < n_channels; ++ch) {
      ClientsValue<std::vector<Slice>> placed(cohort, std::move(updates[ch]));
      const auto aggregated =
          aggregate_mean_deselect(placed, keys_by_channel[ch], *channels[ch], norm);
      for (std::size_t i = 0; i < update.size(); ++i) {
        update[i] += aggregated.value[i];
      }
    }
  }
  opt.apply(model, update);

  stats.train_loss = ordered_mean(cohort, losses);
  return stats;
}

namespace {

FederatedSplits split_loaded(FederatedDataset data, double valid_fraction,
                             double test_fraction) {
  const std::size_t n = data.clients.size();
  std::size_t n_valid = static_cast<std::size_t>(valid_fraction * n);
  std::size_t n_test = static_cast<std::size_t>(test_fraction * n);
  if (n > 2) {
    n_valid = std::max<std::size_t>(n_valid, 1);
    n_test = std::max<std::size_t>(n_test, 1);
  }
  if (n_valid + n_test >= n) {
    n_valid = 0;
    n_test = 0;
  }
  FederatedSplits out;
  for (FederatedDataset* d : {&out.train, &out.valid, &out.test}) {
    d->kind = data.kind;
    d->feature_dim = data.feature_dim;
    d->label_dim = data.label_dim;
  }
  out.train.split = Split::kTrain;
  out.valid.split = Split::kValid;
  out.test.split = Split::kTest;
  const std::size_t n_train = n - n_valid - n_test;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      out.train.clients.push_back(std::move(data.clients[i]));
    } else if (i < n_train + n_valid) {
      out.valid.clients.push_back(std::move(data.clients[i]));
    } else {
      out.test.clients.push_back(std::move(data.clients[i]));
    }
  }
  return out;
}

}  // namespace

FederatedSplits build_task_data(const TaskConfig& task) {
  switch (task.kind) {
    case TaskKind::kSyntheticTag:
      return gen_sparse_tag_dataset(task.tag);
    case TaskKind::kSyntheticDense:
      return gen_dense_task(task.dense);
    case TaskKind::kShards: {
      namespace fs = std::filesystem;
      const fs::path root(task.shard_path);
      if (fs::is_directory(root / "train")) {
        FederatedSplits out;
        out.train = load_client_shards((root / "train").string());
        out.train.split = Split::kTrain;
        std::size_t feature_dim = out.train.feature_dim;
        std::size_t label_dim = out.train.label_dim;
        if (fs::is_directory(root / "valid")) {
          out.valid = load_client_shards((root / "valid").string());
          out.valid.split = Split::kValid;
          feature_dim = std::max(feature_dim, out.valid.feature_dim);
          label_dim = std::max(label_dim, out.valid.label_dim);
        } else {
          out.valid.kind = out.train.kind;
        }
        if (fs::is_directory(root / "test")) {
          out.test = load_client_shards((root / "test").string());
          out.test.split = Split::kTest;
          feature_dim = std::max(feature_dim, out.test.feature_dim);
          label_dim = std::max(label_dim, out.test.label_dim);
        } else {
          out.test.kind = out.train.kind;
        }
        for (FederatedDataset* d : {&out.train, &out.valid, &out.test}) {
          d->feature_dim = feature_dim;
          d->label_dim = label_dim;
        }
        return out;
      }
      return split_loaded(load_client_shards(task.shard_path), 0.1, 0.1);
    }
  }
  throw BadConfig("unreachable task kind");
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const FederatedSplits splits = build_task_data(cfg.task);
  if (splits.train.clients.empty()) throw BadConfig("no training clients");
  const auto task = make_task_model(cfg, splits.train);
  const bool baseline = cfg.selection.strategy == StrategyKind::kNone;
  const std::vector<PlanPtr> channels =
      baseline ? std::vector<PlanPtr>{} : task->make_channels(cfg.selection);

  const FederatedDataset& eval_set = !splits.valid.clients.empty() ? splits.valid
                                     : !splits.test.clients.empty()
                                         ? splits.test
                                         : splits.train;
  const std::size_t model_dim = task->model_dim();
  const TrainingConfig& tr = cfg.training;

  std::vector<MetricsRow> rows;
  for (std::size_t trial = 0; trial < tr.trials; ++trial) {
    Rng init_rng(derive_seed(tr.seed, kInitStream, trial));
    std::vector<double> model = task->init_params(init_rng);
    ServerOptimizer opt(tr.optimizer, model.size());

    for (std::size_t round = 1; round <= tr.rounds; ++round) {
      const std::uint64_t round_seed = derive_seed(tr.seed, trial, round);
      const Cohort cohort =
          sample_cohort(splits.train.clients.size(), tr.cohort_size,
                        derive_seed(round_seed, kCohortStream));

      RoundStats stats =
          baseline ? run_round_baseline(model, opt, *task, splits.train, cohort,
                                        tr, round_seed)
                   : run_round_select(model, opt, *task, channels, cfg.selection,
                                      cfg.delivery, splits.train, cohort, tr,
                                      round_seed);
      stats.round = round;

      const double rel_size =
          static_cast<double>(stats.accounting.max_client_params) /
          static_cast<double>(model_dim);
      auto make_row = [&](const std::string& phase, const std::string& metric,
                          double value) {
        MetricsRow row;
        row.trial = trial;
        row.round = round;
        row.phase = phase;
        row.metric = metric;
        row.value = value;
        row.scalars_down = stats.accounting.scalars_down;
        row.scalars_up = stats.accounting.scalars_up;
        row.psi_evals = stats.accounting.psi_evals;
        row.wasted_slices = stats.accounting.wasted_slices;
        row.rel_model_size = rel_size;
        return row;
      };

      rows.push_back(make_row("train", "train_loss", stats.train_loss));
      if (round % tr.eval_every == 0 || round == tr.rounds) {
        rows.push_back(
            make_row("eval", task->metric_name(), task->evaluate(model, eval_set)));
      }
      if (round == tr.rounds && !splits.test.clients.empty()) {
        rows.push_back(make_row("test", task->metric_name(),
                                task->evaluate(model, splits.test)));
      }
    }
  }
  return rows;
}

}  // namespace fedselect
