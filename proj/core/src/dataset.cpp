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

#include "fedselect/dataset.hpp"

#include <cmath>

namespace fedselect {

void validate_example(const SparseExample& e, std::size_t feature_dim,
                      std::size_t label_dim) {
  if (e.indices.size() != e.values.size()) {
    throw ShapeMismatch("sparse example has mismatched indices/values");
  }
  for (std::size_t i = 0; i < e.indices.size(); ++i) {
    if (e.indices[i] >= feature_dim) {
      throw BadConfig("feature index out of range");
    }
    if (i > 0 && e.indices[i] <= e.indices[i - 1]) {
      throw BadConfig("sparse indices must be strictly increasing");
    }
    if (!std::isfinite(e.values[i])) throw BadConfig("non-finite feature value");
  }
  if (e.labels.empty()) throw BadConfig("training example needs at least one label");
  for (std::size_t i = 0; i < e.labels.size(); ++i) {
    if (e.labels[i] >= label_dim) throw BadConfig("label out of range");
    if (i > 0 && e.labels[i] <= e.labels[i - 1]) {
      throw BadConfig("labels must be sorted and distinct");
    }
  }
}

void validate_example(const DenseExample& e, std::size_t feature_dim,
                      std::size_t label_dim) {
  if (e.features.size() != feature_dim) {
    throw ShapeMismatch("dense example has wrong dimension");
  }
  for (double v : e.features) {
    if (!std::isfinite(v)) throw BadConfig("non-finite feature value");
  }
  if (e.label >= label_dim) throw BadConfig("label out of range");
}

std::vector<std::uint64_t> feature_counts(const std::vector<SparseExample>& examples,
                                          std::size_t feature_dim) {
  std::vector<std::uint64_t> counts(feature_dim, 0);
  for (const auto& e : examples) {
    for (std::uint32_t idx : e.indices) ++counts[idx];
  }
  return counts;
}

}  // namespace fedselect
