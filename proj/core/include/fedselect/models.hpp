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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "fedselect/dataset.hpp"
#include "fedselect/params.hpp"
#include "fedselect/rng.hpp"
#include "fedselect/select_plan.hpp"

namespace fedselect {

// ---------------------------------------------------------------------------
// Parameter layouts and initialization

/// One-versus-rest logistic regression over sparse inputs. The weight
/// matrix is stored feature-major ([vocab, tags]) so each feature's row
/// can back a row-select plan; the bias is a broadcast block.
std::shared_ptr<const ParamLayout> sparse_logreg_layout(std::size_t vocab,
                                                        std::size_t tags);

/// Dense-input MLP with one selectable hidden layer: [w1 (in,hidden) |
/// b1 (hidden) | w2 (hidden,classes) | b2 (classes)]. w1/b1/w2 back a
/// neuron-select plan; b2 is broadcast.
std::shared_ptr<const ParamLayout> mlp_layout(std::size_t in_dim,
                                              std::size_t hidden,
                                              std::size_t classes);

/// Sparse-input MLP for mixed key selection: w1 rows are selectable per
/// feature, w2 rows per hidden unit, both biases broadcast.
std::shared_ptr<const ParamLayout> sparse_mlp_layout(std::size_t vocab,
                                                     std::size_t hidden,
                                                     std::size_t classes);

std::vector<double> init_logreg_params(const ParamLayout& layout, Rng& rng);
std::vector<double> init_mlp_params(const ParamLayout& layout, std::size_t in_dim,
                                    std::size_t hidden, Rng& rng);

// ---------------------------------------------------------------------------
// Gradients

/// Gradient accumulator that tracks which coordinates were written, so a
/// step over a sparse batch touches only the support instead of all of
/// R^s. Untouched coordinates read as exactly zero.
class SparseGrad {
 public:
  void reset(std::size_t dim) {
    if (values_.size() != dim) {
      values_.assign(dim, 0.0);
      marked_.assign(dim, 0);
      touched_.clear();
      return;
    }
    for (std::size_t i : touched_) {
      values_[i] = 0.0;
      marked_[i] = 0;
    }
    touched_.clear();
  }

  void add(std::size_t i, double v) {
    if (!marked_[i]) {
      marked_[i] = 1;
      touched_.push_back(i);
    }
    values_[i] += v;
  }

  double value(std::size_t i) const { return values_[i]; }
  const std::vector<std::size_t>& touched() const { return touched_; }
  std::size_t dim() const { return values_.size(); }

  /// Densified copy (zeros off the touched set).
  std::vector<double> dense() const { return values_; }

 private:
  std::vector<double> values_;
  std::vector<std::uint8_t> marked_;
  std::vector<std::size_t> touched_;
};

// ---------------------------------------------------------------------------
// Client-local problems
//
// A problem owns a client's localized examples and evaluates mean loss
// and gradient over a batch, in the parameter layout the client actually
// holds. The same code path serves the full model (identity
// localization) and any slice, which keeps the two bit-identical where
// they overlap.

/// A sparse example remapped onto local rows. Entries stay ordered by
/// ascending global feature id so accumulation order matches the
/// full-model path exactly.
struct LocalSparseExample {
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
  std::vector<std::uint32_t> labels;
};

/// Remaps examples onto the rows delivered for `keys`, in key order.
/// Features outside the key set are dropped when `drop_missing` is set
/// and raise FeatureNotInSlice otherwise.
std::vector<LocalSparseExample> localize_sparse(
    const std::vector<SparseExample>& examples, const KeySeq& keys,
    bool drop_missing);

/// Identity localization for full-model training.
std::vector<LocalSparseExample> localize_sparse_full(
    const std::vector<SparseExample>& examples);

/// One-versus-rest logistic regression over local rows.
/// Parameter layout: [w (rows x tags) row-major | b (tags) if has_bias].
class LogRegProblem {
 public:
  LogRegProblem(std::size_t rows, std::size_t tags, bool has_bias,
                std::vector<LocalSparseExample> examples);

  std::size_t dim() const { return rows_ * tags_ + (has_bias_ ? tags_ : 0); }
  std::size_t num_examples() const { return examples_.size(); }

  /// Mean loss over the batch; the exact gradient is accumulated into
  /// `grad` (already reset to dim()) unless it is null.
  double loss_and_grad(std::span<const double> params,
                       std::span<const std::uint32_t> batch,
                       SparseGrad* grad) const;

 private:
  std::size_t rows_;
  std::size_t tags_;
  bool has_bias_;
  std::vector<LocalSparseExample> examples_;
};

/// Dense-input tanh MLP with softmax cross-entropy. Two parameter
/// layouts share one arithmetic path:
///   full:   [w1 (in,hidden) | b1 | w2 (hidden,classes) | b2]
///   sliced: [unit_0 ... unit_{m-1} | b2], unit = [w1 column | b1 entry |
///           w2 row]
class MlpDenseProblem {
 public:
  static MlpDenseProblem full(std::size_t in_dim, std::size_t hidden,
                              std::size_t classes,
                              std::vector<DenseExample> examples);
  static MlpDenseProblem sliced(std::size_t in_dim, std::size_t units,
                                std::size_t classes,
                                std::vector<DenseExample> examples);

  std::size_t dim() const;
  std::size_t num_examples() const { return examples_.size(); }
  std::size_t units() const { return units_; }

  double loss_and_grad(std::span<const double> params,
                       std::span<const std::uint32_t> batch,
                       SparseGrad* grad) const;

 private:
  MlpDenseProblem() = default;

  std::size_t w1_at(std::size_t i, std::size_t j) const;
  std::size_t b1_at(std::size_t j) const;
  std::size_t w2_at(std::size_t j, std::size_t k) const;
  std::size_t b2_at(std::size_t k) const;

  std::size_t in_dim_ = 0;
  std::size_t units_ = 0;  // local unit count (h when full)
  std::size_t classes_ = 0;
  bool sliced_ = false;
  std::vector<DenseExample> examples_;
};

/// Sparse-input tanh MLP used by mixed key selection. The client holds
/// full-width w1 rows for its features, both biases, and w2 rows for its
/// active hidden units; gradients land only on coordinates the sliced
/// forward pass actually uses. Examples must carry a single label.
/// Parameter layout: [w1 rows (rows x hidden) | b1 (hidden) | b2
/// (classes) | w2 rows (units x classes)].
class MlpSparseProblem {
 public:
  MlpSparseProblem(std::size_t rows, std::size_t hidden, std::size_t classes,
                   std::vector<std::uint32_t> active_units,
                   std::vector<LocalSparseExample> examples);

  std::size_t dim() const {
    return rows_ * hidden_ + hidden_ + classes_ + active_units_.size() * classes_;
  }
  std::size_t num_examples() const { return examples_.size(); }

  double loss_and_grad(std::span<const double> params,
                       std::span<const std::uint32_t> batch,
                       SparseGrad* grad) const;

 private:
  std::size_t rows_;
  std::size_t hidden_;
  std::size_t classes_;
  std::vector<std::uint32_t> active_units_;
  std::vector<LocalSparseExample> examples_;
};

// ---------------------------------------------------------------------------
// Model-delta client update

struct ClientUpdateConfig {
  int epochs = 1;
  std::size_t batch_size = 20;
  double lr = 0.1;
};

struct ClientUpdateResult {
  std::vector<double> delta;  // received params minus locally trained params
  double mean_loss = 0.0;
  std::size_t steps = 0;
};

/// Runs E epochs of minibatch SGD from y0 (per-epoch shuffle, last short
/// batch kept) and returns u = y0 - y'. The server descends via
/// x <- x - eta * u, so eta = 1 with plain SGD recovers model averaging.
template <class Problem>
ClientUpdateResult client_update_model_delta(const Problem& problem,
                                             std::span<const double> y0,
                                             const ClientUpdateConfig& cfg,
                                             Rng& rng) {
  const std::size_t n = problem.num_examples();
  if (n == 0) throw EmptyDataset();
  if (cfg.epochs < 1) throw BadConfig("client epochs must be >= 1");
  if (cfg.batch_size < 1) throw BadConfig("batch size must be >= 1");
  if (!(cfg.lr >= 0.0)) throw BadConfig("client learning rate must be >= 0");
  if (y0.size() != problem.dim()) {
    throw ShapeMismatch("initial parameters do not match the problem layout");
  }

  std::vector<double> y(y0.begin(), y0.end());
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  SparseGrad grad;

  double loss_sum = 0.0;
  std::size_t steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t at = 0; at < n; at += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n - at);
      grad.reset(y.size());
      loss_sum += problem.loss_and_grad(
          y, std::span<const std::uint32_t>(order).subspan(at, len), &grad);
      for (std::size_t i : grad.touched()) y[i] -= cfg.lr * grad.value(i);
      ++steps;
    }
  }

  ClientUpdateResult result;
  result.delta.resize(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) result.delta[i] = y0[i] - y[i];
  result.mean_loss = loss_sum / static_cast<double>(steps);
  result.steps = steps;
  return result;
}

// ---------------------------------------------------------------------------
// Gradient checking

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  bool pass = false;
};

/// Central finite differences at h = 1e-6 over up to `coord_budget`
/// random coordinates (all coordinates when the dimension is within
/// budget). The relative error divisor is max(1, |analytic|, |numeric|).
template <class LossFn>
GradCheckReport grad_check(LossFn&& loss_fn, std::span<const double> params,
                           double tolerance, Rng& rng,
                           std::size_t coord_budget = 100) {
  constexpr double kStep = 1e-6;
  SparseGrad analytic;
  analytic.reset(params.size());
  loss_fn(params, &analytic);

  std::vector<std::size_t> coords;
  if (params.size() <= coord_budget) {
    coords.resize(params.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
  } else {
    for (std::uint64_t c : rng.sample_without_replacement(params.size(), coord_budget)) {
      coords.push_back(static_cast<std::size_t>(c));
    }
  }

  std::vector<double> perturbed(params.begin(), params.end());
  GradCheckReport report;
  for (std::size_t i : coords) {
    const double saved = perturbed[i];
    perturbed[i] = saved + kStep;
    const double up = loss_fn(perturbed, nullptr);
    perturbed[i] = saved - kStep;
    const double down = loss_fn(perturbed, nullptr);
    perturbed[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double a = analytic.value(i);
    const double rel = std::abs(a - numeric) /
                       std::max({1.0, std::abs(a), std::abs(numeric)});
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  report.coords_checked = coords.size();
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Per-example fraction of true labels found in the top-k scores; ties
/// in the top-k cut are broken by the smaller label id.
double recall_at_k(std::span<const double> scores,
                   std::span<const std::uint32_t> true_labels, std::size_t k);

/// Index of the maximum score; the first maximum wins.
std::size_t argmax_index(std::span<const double> scores);

/// Mean recall@k of the full logistic-regression model over every
/// example in the dataset.
double evaluate_logreg_recall(std::span<const double> x, std::size_t vocab,
                              std::size_t tags, const FederatedDataset& data,
                              std::size_t k);

/// Mean argmax accuracy of the full dense MLP.
double evaluate_mlp_accuracy(std::span<const double> x, std::size_t in_dim,
                             std::size_t hidden, std::size_t classes,
                             const FederatedDataset& data);

/// Mean argmax accuracy of the full sparse-input MLP (single-label
/// examples; the first listed label is the class).
double evaluate_sparse_mlp_accuracy(std::span<const double> x, std::size_t vocab,
                                    std::size_t hidden, std::size_t classes,
                                    const FederatedDataset& data);

}  // namespace fedselect
