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

#include "fedselect/dataset.hpp"

namespace fedselect {

/// Synthetic multi-label tag task over sparse binary bag-of-words
/// features. Word frequencies are Zipf-distributed globally; each client
/// mixes a few topics so its vocabulary concentrates on a small subset
/// (heterogeneous supports). Labels come from a planted per-word tag
/// assignment with noise, so there is a learnable signal.
struct SyntheticTagConfig {
  std::size_t clients = 100;
  std::size_t vocab = 500;           // n
  std::size_t tags = 10;             // t
  std::size_t min_examples = 20;     // per client
  std::size_t max_examples = 50;
  std::size_t min_words = 5;         // per example
  std::size_t max_words = 25;
  double zipf_exponent = 1.3;        // > 1
  std::size_t topics = 10;
  std::size_t topics_per_client = 2;
  double label_noise = 0.25;         // stddev added to planted tag scores
  bool single_label = false;         // emit exactly one tag per example
  double valid_fraction = 0.1;       // client fraction held out for eval
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

FederatedSplits gen_sparse_tag_dataset(const SyntheticTagConfig& config);

/// Synthetic dense classification task: Gaussian class clusters with a
/// per-client Dirichlet skew over class frequencies. heterogeneity -> 0
/// recovers a shared label marginal across clients.
struct DenseTaskConfig {
  std::size_t clients = 60;
  std::size_t dim = 16;              // d
  std::size_t classes = 4;           // c
  std::size_t min_examples = 20;
  std::size_t max_examples = 60;
  double cluster_spread = 1.0;       // within-class stddev
  double cluster_separation = 2.0;   // scale of class centers
  double heterogeneity = 0.5;        // 0 = identical label marginals
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

FederatedSplits gen_dense_task(const DenseTaskConfig& config);

/// Loads a directory of per-client shard files (extension .fdc, one
/// client per file, lexicographic file order fixes the client ids).
/// Line formats:
///   sparse: <label[,label...]>\t<idx:val[ idx:val...]>
///   dense:  <label>\t<v1,v2,...>
/// Lines starting with '#' and blank lines are skipped. Sparse indices
/// must be strictly increasing.
FederatedDataset load_client_shards(const std::string& directory);

/// Writes one .fdc shard file per client under the directory (the
/// inverse of load_client_shards).
void write_client_shards(const FederatedDataset& data,
                         const std::string& directory);

}  // namespace fedselect
