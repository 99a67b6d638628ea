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
#include <vector>

#include "fedselect/errors.hpp"
#include "fedselect/federated.hpp"

namespace fedselect {

/// Sparse feature vector with a non-empty set of tag labels. Indices are
/// strictly increasing; binary indicator values are the common case.
struct SparseExample {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::vector<std::uint32_t> labels;  // sorted, distinct

  bool operator==(const SparseExample&) const = default;
};

/// Dense feature vector with a single class label.
struct DenseExample {
  std::vector<double> features;
  std::uint32_t label = 0;

  bool operator==(const DenseExample&) const = default;
};

enum class DataKind { kSparse, kDense };
enum class Split { kTrain, kValid, kTest };

/// One client's local data. Exactly one of the two example lists is
/// populated, matching the owning dataset's kind.
struct ClientDataset {
  ClientId id = 0;
  std::vector<SparseExample> sparse;
  std::vector<DenseExample> dense;

  std::size_t size(DataKind kind) const {
    return kind == DataKind::kSparse ? sparse.size() : dense.size();
  }

  bool operator==(const ClientDataset&) const = default;
};

/// A federation of client datasets for one split.
struct FederatedDataset {
  DataKind kind = DataKind::kSparse;
  Split split = Split::kTrain;
  std::size_t feature_dim = 0;  // vocabulary size n or dense dimension d
  std::size_t label_dim = 0;    // tag count t or class count c
  std::vector<ClientDataset> clients;

  std::size_t num_examples() const {
    std::size_t n = 0;
    for (const auto& c : clients) n += c.size(kind);
    return n;
  }

  bool operator==(const FederatedDataset&) const = default;
};

/// Client-disjoint train/valid/test portions of one federation.
struct FederatedSplits {
  FederatedDataset train;
  FederatedDataset valid;
  FederatedDataset test;

  bool operator==(const FederatedSplits&) const = default;
};

/// Throws unless the example satisfies its invariants for the given
/// dimensions (strictly increasing indices, labels in range, non-empty
/// label set).
void validate_example(const SparseExample& e, std::size_t feature_dim,
                      std::size_t label_dim);
void validate_example(const DenseExample& e, std::size_t feature_dim,
                      std::size_t label_dim);

/// Per-key frequency of each feature across a client's examples (one
/// count per occurrence), the statistic behind structured key selection.
std::vector<std::uint64_t> feature_counts(const std::vector<SparseExample>& examples,
                                          std::size_t feature_dim);

}  // namespace fedselect
