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

#include "fedselect/models.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace fedselect {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Numerically stable binary cross-entropy of sigmoid(z) against y.
double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Layouts and initialization

std::shared_ptr<const ParamLayout> sparse_logreg_layout(std::size_t vocab,
                                                        std::size_t tags) {
  if (vocab == 0 || tags == 0) throw BadConfig("logreg needs vocab >= 1, tags >= 1");
  return std::make_shared<ParamLayout>(std::vector<BlockSpec>{
      {"weights", {vocab, tags}, true},
      {"bias", {tags}, false},
  });
}

std::shared_ptr<const ParamLayout> mlp_layout(std::size_t in_dim,
                                              std::size_t hidden,
                                              std::size_t classes) {
  if (in_dim == 0 || hidden == 0 || classes == 0) {
    throw BadConfig("mlp needs positive dimensions");
  }
  return std::make_shared<ParamLayout>(std::vector<BlockSpec>{
      {"w1", {in_dim, hidden}, true},
      {"b1", {hidden}, true},
      {"w2", {hidden, classes}, true},
      {"b2", {classes}, false},
  });
}

std::shared_ptr<const ParamLayout> sparse_mlp_layout(std::size_t vocab,
                                                     std::size_t hidden,
                                                     std::size_t classes) {
  if (vocab == 0 || hidden == 0 || classes == 0) {
    throw BadConfig("mlp needs positive dimensions");
  }
  // Biases sit between the two weight matrices so a client's assembled
  // sub-model ([w1 rows | b1 | b2 | w2 rows]) matches the full layout
  // when everything is selected.
  return std::make_shared<ParamLayout>(std::vector<BlockSpec>{
      {"w1", {vocab, hidden}, true},
      {"b1", {hidden}, false},
      {"b2", {classes}, false},
      {"w2", {hidden, classes}, true},
  });
}

std::vector<double> init_logreg_params(const ParamLayout& layout, Rng& rng) {
  std::vector<double> x(layout.size(), 0.0);
  auto weights = layout.block_view(std::span<double>(x), "weights");
  for (double& w : weights) w = 0.01 * rng.normal();
  return x;
}

std::vector<double> init_mlp_params(const ParamLayout& layout, std::size_t in_dim,
                                    std::size_t hidden, Rng& rng) {
  std::vector<double> x(layout.size(), 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : layout.block_view(std::span<double>(x), "w1")) w = s1 * rng.normal();
  for (double& w : layout.block_view(std::span<double>(x), "w2")) w = s2 * rng.normal();
  return x;
}

// ---------------------------------------------------------------------------
// Localization

std::vector<LocalSparseExample> localize_sparse(
    const std::vector<SparseExample>& examples, const KeySeq& keys,
    bool drop_missing) {
  std::unordered_map<std::uint32_t, std::uint32_t> row_of;
  row_of.reserve(keys.size());
  for (std::size_t r = 0; r < keys.size(); ++r) {
    row_of.emplace(static_cast<std::uint32_t>(keys[r]), static_cast<std::uint32_t>(r));
  }
  std::vector<LocalSparseExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    LocalSparseExample local;
    local.labels = e.labels;
    local.rows.reserve(e.indices.size());
    local.values.reserve(e.indices.size());
    for (std::size_t i = 0; i < e.indices.size(); ++i) {
      const auto it = row_of.find(e.indices[i]);
      if (it == row_of.end()) {
        if (drop_missing) continue;
        throw FeatureNotInSlice("feature " + std::to_string(e.indices[i]) +
                                " is not covered by the client's keys");
      }
      local.rows.push_back(it->second);
      local.values.push_back(e.values[i]);
    }
    out.push_back(std::move(local));
  }
  return out;
}

std::vector<LocalSparseExample> localize_sparse_full(
    const std::vector<SparseExample>& examples) {
  std::vector<LocalSparseExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    out.push_back(LocalSparseExample{e.indices, e.values, e.labels});
  }
  return out;
}

// ---------------------------------------------------------------------------
// LogRegProblem

LogRegProblem::LogRegProblem(std::size_t rows, std::size_t tags, bool has_bias,
                             std::vector<LocalSparseExample> examples)
    : rows_(rows), tags_(tags), has_bias_(has_bias), examples_(std::move(examples)) {
  if (tags_ == 0) throw BadConfig("logreg needs at least one tag");
  for (const auto& e : examples_) {
    for (std::uint32_t r : e.rows) {
      if (r >= rows_) throw FeatureNotInSlice("localized row out of range");
    }
  }
}

double LogRegProblem::loss_and_grad(std::span<const double> params,
                                    std::span<const std::uint32_t> batch,
                                    SparseGrad* grad) const {
  if (params.size() != dim()) throw ShapeMismatch("logreg params have wrong size");
  if (batch.empty()) throw EmptyDataset("empty batch");
  const std::size_t bias_off = rows_ * tags_;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  std::vector<double> logits(tags_);
  std::vector<std::uint8_t> is_label(tags_);
  double loss = 0.0;

  for (std::uint32_t ex_idx : batch) {
    const LocalSparseExample& e = examples_[ex_idx];
    for (std::size_t j = 0; j < tags_; ++j) {
      logits[j] = has_bias_ ? params[bias_off + j] : 0.0;
      is_label[j] = 0;
    }
    for (std::uint32_t lbl : e.labels) is_label[lbl] = 1;
    for (std::size_t i = 0; i < e.rows.size(); ++i) {
      const double v = e.values[i];
      const std::size_t at = static_cast<std::size_t>(e.rows[i]) * tags_;
      for (std::size_t j = 0; j < tags_; ++j) logits[j] += v * params[at + j];
    }
    for (std::size_t j = 0; j < tags_; ++j) {
      const double y = is_label[j] ? 1.0 : 0.0;
      loss += bce_from_logit(logits[j], y);
      if (grad != nullptr) {
        const double g = (sigmoid(logits[j]) - y) * inv_batch;
        if (has_bias_) grad->add(bias_off + j, g);
        for (std::size_t i = 0; i < e.rows.size(); ++i) {
          grad->add(static_cast<std::size_t>(e.rows[i]) * tags_ + j,
                    e.values[i] * g);
        }
      }
    }
  }
  return loss * inv_batch;
}

// ---------------------------------------------------------------------------
// MlpDenseProblem

MlpDenseProblem MlpDenseProblem::full(std::size_t in_dim, std::size_t hidden,
                                      std::size_t classes,
                                      std::vector<DenseExample> examples) {
  MlpDenseProblem p;
  p.in_dim_ = in_dim;
  p.units_ = hidden;
  p.classes_ = classes;
  p.sliced_ = false;
  p.examples_ = std::move(examples);
  return p;
}

MlpDenseProblem MlpDenseProblem::sliced(std::size_t in_dim, std::size_t units,
                                        std::size_t classes,
                                        std::vector<DenseExample> examples) {
  MlpDenseProblem p;
  p.in_dim_ = in_dim;
  p.units_ = units;
  p.classes_ = classes;
  p.sliced_ = true;
  p.examples_ = std::move(examples);
  return p;
}

std::size_t MlpDenseProblem::dim() const {
  if (sliced_) return units_ * (in_dim_ + 1 + classes_) + classes_;
  return in_dim_ * units_ + units_ + units_ * classes_ + classes_;
}

std::size_t MlpDenseProblem::w1_at(std::size_t i, std::size_t j) const {
  if (sliced_) return j * (in_dim_ + 1 + classes_) + i;
  return i * units_ + j;
}

std::size_t MlpDenseProblem::b1_at(std::size_t j) const {
  if (sliced_) return j * (in_dim_ + 1 + classes_) + in_dim_;
  return in_dim_ * units_ + j;
}

std::size_t MlpDenseProblem::w2_at(std::size_t j, std::size_t k) const {
  if (sliced_) return j * (in_dim_ + 1 + classes_) + in_dim_ + 1 + k;
  return in_dim_ * units_ + units_ + j * classes_ + k;
}

std::size_t MlpDenseProblem::b2_at(std::size_t k) const {
  if (sliced_) return units_ * (in_dim_ + 1 + classes_) + k;
  return in_dim_ * units_ + units_ + units_ * classes_ + k;
}

double MlpDenseProblem::loss_and_grad(std::span<const double> params,
                                      std::span<const std::uint32_t> batch,
                                      SparseGrad* grad) const {
  if (params.size() != dim()) throw ShapeMismatch("mlp params have wrong size");
  if (batch.empty()) throw EmptyDataset("empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  std::vector<double> act(units_);
  std::vector<double> logits(classes_);
  std::vector<double> probs(classes_);
  double loss = 0.0;

  for (std::uint32_t ex_idx : batch) {
    const DenseExample& e = examples_[ex_idx];
    const std::vector<double>& x = e.features;

    for (std::size_t j = 0; j < units_; ++j) {
      double pre = params[b1_at(j)];
      for (std::size_t i = 0; i < in_dim_; ++i) pre += x[i] * params[w1_at(i, j)];
      act[j] = std::tanh(pre);
    }
    for (std::size_t k = 0; k < classes_; ++k) logits[k] = params[b2_at(k)];
    for (std::size_t j = 0; j < units_; ++j) {
      for (std::size_t k = 0; k < classes_; ++k) {
        logits[k] += act[j] * params[w2_at(j, k)];
      }
    }

    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (std::size_t k = 0; k < classes_; ++k) {
      probs[k] = std::exp(logits[k] - zmax);
      denom += probs[k];
    }
    for (double& p : probs) p /= denom;
    loss += std::log(denom) + zmax - logits[e.label];

    if (grad != nullptr) {
      for (std::size_t k = 0; k < classes_; ++k) {
        const double dz = (probs[k] - (k == e.label ? 1.0 : 0.0)) * inv_batch;
        grad->add(b2_at(k), dz);
      }
      for (std::size_t j = 0; j < units_; ++j) {
        double d_act = 0.0;
        for (std::size_t k = 0; k < classes_; ++k) {
          const double dz = (probs[k] - (k == e.label ? 1.0 : 0.0)) * inv_batch;
          grad->add(w2_at(j, k), act[j] * dz);
          d_act += params[w2_at(j, k)] * dz;
        }
        const double d_pre = d_act * (1.0 - act[j] * act[j]);
        grad->add(b1_at(j), d_pre);
        for (std::size_t i = 0; i < in_dim_; ++i) {
          grad->add(w1_at(i, j), x[i] * d_pre);
        }
      }
    }
  }
  return loss * inv_batch;
}

// ---------------------------------------------------------------------------
// MlpSparseProblem

MlpSparseProblem::MlpSparseProblem(std::size_t rows, std::size_t hidden,
                                   std::size_t classes,
                                   std::vector<std::uint32_t> active_units,
                                   std::vector<LocalSparseExample> examples)
    : rows_(rows),
      hidden_(hidden),
      classes_(classes),
      active_units_(std::move(active_units)),
      examples_(std::move(examples)) {
  for (std::uint32_t j : active_units_) {
    if (j >= hidden_) throw ShapeMismatch("active unit out of range");
  }
  for (const auto& e : examples_) {
    if (e.labels.size() != 1) {
      throw BadConfig("sparse mlp training needs single-label examples");
    }
  }
}

double MlpSparseProblem::loss_and_grad(std::span<const double> params,
                                       std::span<const std::uint32_t> batch,
                                       SparseGrad* grad) const {
  if (params.size() != dim()) throw ShapeMismatch("mlp params have wrong size");
  if (batch.empty()) throw EmptyDataset("empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::size_t b1_off = rows_ * hidden_;
  const std::size_t b2_off = b1_off + hidden_;
  const std::size_t w2_off = b2_off + classes_;
  const std::size_t units = active_units_.size();

  std::vector<double> act(units);
  std::vector<double> logits(classes_);
  std::vector<double> probs(classes_);
  double loss = 0.0;

  for (std::uint32_t ex_idx : batch) {
    const LocalSparseExample& e = examples_[ex_idx];
    const std::uint32_t label = e.labels[0];

    for (std::size_t jj = 0; jj < units; ++jj) {
      const std::size_t j = active_units_[jj];
      double pre = params[b1_off + j];
      for (std::size_t i = 0; i < e.rows.size(); ++i) {
        pre += e.values[i] * params[static_cast<std::size_t>(e.rows[i]) * hidden_ + j];
      }
      act[jj] = std::tanh(pre);
    }
    for (std::size_t k = 0; k < classes_; ++k) logits[k] = params[b2_off + k];
    for (std::size_t jj = 0; jj < units; ++jj) {
      for (std::size_t k = 0; k < classes_; ++k) {
        logits[k] += act[jj] * params[w2_off + jj * classes_ + k];
      }
    }

    const double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (std::size_t k = 0; k < classes_; ++k) {
      probs[k] = std::exp(logits[k] - zmax);
      denom += probs[k];
    }
    for (double& p : probs) p /= denom;
    loss += std::log(denom) + zmax - logits[label];

    if (grad != nullptr) {
      for (std::size_t k = 0; k < classes_; ++k) {
        const double dz = (probs[k] - (k == label ? 1.0 : 0.0)) * inv_batch;
        grad->add(b2_off + k, dz);
      }
      for (std::size_t jj = 0; jj < units; ++jj) {
        const std::size_t j = active_units_[jj];
        double d_act = 0.0;
        for (std::size_t k = 0; k < classes_; ++k) {
          const double dz = (probs[k] - (k == label ? 1.0 : 0.0)) * inv_batch;
          grad->add(w2_off + jj * classes_ + k, act[jj] * dz);
          d_act += params[w2_off + jj * classes_ + k] * dz;
        }
        const double d_pre = d_act * (1.0 - act[jj] * act[jj]);
        grad->add(b1_off + j, d_pre);
        for (std::size_t i = 0; i < e.rows.size(); ++i) {
          grad->add(static_cast<std::size_t>(e.rows[i]) * hidden_ + j,
                    e.values[i] * d_pre);
        }
      }
    }
  }
  return loss * inv_batch;
}

// ---------------------------------------------------------------------------
// Evaluation

double recall_at_k(std::span<const double> scores,
                   std::span<const std::uint32_t> true_labels, std::size_t k) {
  if (true_labels.empty()) throw EmptyDataset("example has no true labels");
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  const std::size_t cut = std::min(k, order.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cut; ++i) {
    for (std::uint32_t lbl : true_labels) {
      if (order[i] == lbl) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(true_labels.size());
}

std::size_t argmax_index(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

double evaluate_logreg_recall(std::span<const double> x, std::size_t vocab,
                              std::size_t tags, const FederatedDataset& data,
                              std::size_t k) {
  if (data.num_examples() == 0) throw EmptyDataset("empty evaluation set");
  const std::size_t bias_off = vocab * tags;
  std::vector<double> scores(tags);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& client : data.clients) {
    for (const auto& e : client.sparse) {
      for (std::size_t j = 0; j < tags; ++j) scores[j] = x[bias_off + j];
      for (std::size_t i = 0; i < e.indices.size(); ++i) {
        const std::size_t at = static_cast<std::size_t>(e.indices[i]) * tags;
        for (std::size_t j = 0; j < tags; ++j) scores[j] += e.values[i] * x[at + j];
      }
      total += recall_at_k(scores, e.labels, k);
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double evaluate_mlp_accuracy(std::span<const double> x, std::size_t in_dim,
                             std::size_t hidden, std::size_t classes,
                             const FederatedDataset& data) {
  if (data.num_examples() == 0) throw EmptyDataset("empty evaluation set");
  const std::size_t b1_off = in_dim * hidden;
  const std::size_t w2_off = b1_off + hidden;
  const std::size_t b2_off = w2_off + hidden * classes;
  std::vector<double> act(hidden);
  std::vector<double> logits(classes);
  std::size_t correct = 0;
  std::size_t count = 0;
  for (const auto& client : data.clients) {
    for (const auto& e : client.dense) {
      for (std::size_t j = 0; j < hidden; ++j) {
        double pre = x[b1_off + j];
        for (std::size_t i = 0; i < in_dim; ++i) {
          pre += e.features[i] * x[i * hidden + j];
        }
        act[j] = std::tanh(pre);
      }
      for (std::size_t k = 0; k < classes; ++k) logits[k] = x[b2_off + k];
      for (std::size_t j = 0; j < hidden; ++j) {
        for (std::size_t k = 0; k < classes; ++k) {
          logits[k] += act[j] * x[w2_off + j * classes + k];
        }
      }
      correct += (argmax_index(logits) == e.label) ? 1 : 0;
      ++count;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(count);
}

double evaluate_sparse_mlp_accuracy(std::span<const double> x, std::size_t vocab,
                                    std::size_t hidden, std::size_t classes,
                                    const FederatedDataset& data) {
  if (data.num_examples() == 0) throw EmptyDataset("empty evaluation set");
  const std::size_t b1_off = vocab * hidden;
  const std::size_t b2_off = b1_off + hidden;
  const std::size_t w2_off = b2_off + classes;
  std::vector<double> act(hidden);
  std::vector<double> logits(classes);
  std::size_t correct = 0;
  std::size_t count = 0;
  for (const auto& client : data.clients) {
    for (const auto& e : client.sparse) {
      for (std::size_t j = 0; j < hidden; ++j) {
        double pre = x[b1_off + j];
        for (std::size_t i = 0; i < e.indices.size(); ++i) {
          pre += e.values[i] * x[static_cast<std::size_t>(e.indices[i]) * hidden + j];
        }
        act[j] = std::tanh(pre);
      }
      for (std::size_t k = 0; k < classes; ++k) logits[k] = x[b2_off + k];
      for (std::size_t j = 0; j < hidden; ++j) {
        for (std::size_t k = 0; k < classes; ++k) {
          logits[k] += act[j] * x[w2_off + j * classes + k];
        }
      }
      correct += (argmax_index(logits) == e.labels[0]) ? 1 : 0;
      ++count;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(count);
}

}  // namespace fedselect
