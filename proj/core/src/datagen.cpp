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

#include "fedselect/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedselect/rng.hpp"

namespace fedselect {

namespace {

constexpr std::uint64_t kGlobalStream = 0x676c6f62;  // "glob"
constexpr std::uint64_t kClientStream = 0x636c6e74;  // "clnt"

// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = std::max(rng.uniform01(), 1e-300);
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = rng.normal();
    double v = 1.0 + c * z;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

struct SplitCounts {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

SplitCounts split_counts(std::size_t clients, double valid_fraction,
                         double test_fraction) {
  if (valid_fraction < 0.0 || test_fraction < 0.0 ||
      valid_fraction + test_fraction >= 1.0) {
    throw BadConfig("split fractions must be non-negative and sum below 1");
  }
  SplitCounts c;
  c.valid = static_cast<std::size_t>(std::floor(valid_fraction * clients));
  c.test = static_cast<std::size_t>(std::floor(test_fraction * clients));
  if (valid_fraction > 0.0 && c.valid == 0) c.valid = 1;
  if (test_fraction > 0.0 && c.test == 0) c.test = 1;
  if (c.valid + c.test >= clients) {
    throw BadConfig("not enough clients to populate the requested splits");
  }
  c.train = clients - c.valid - c.test;
  return c;
}

FederatedSplits split_federation(DataKind kind, std::size_t feature_dim,
                                 std::size_t label_dim,
                                 std::vector<ClientDataset> clients,
                                 const SplitCounts& counts) {
  FederatedSplits out;
  for (FederatedDataset* d : {&out.train, &out.valid, &out.test}) {
    d->kind = kind;
    d->feature_dim = feature_dim;
    d->label_dim = label_dim;
  }
  out.train.split = Split::kTrain;
  out.valid.split = Split::kValid;
  out.test.split = Split::kTest;
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (i < counts.train) {
      out.train.clients.push_back(std::move(clients[i]));
    } else if (i < counts.train + counts.valid) {
      out.valid.clients.push_back(std::move(clients[i]));
    } else {
      out.test.clients.push_back(std::move(clients[i]));
    }
  }
  return out;
}

}  // namespace

FederatedSplits gen_sparse_tag_dataset(const SyntheticTagConfig& cfg) {
  if (cfg.clients == 0) throw BadConfig("federation needs at least one client");
  if (cfg.tags < 2 || cfg.vocab < cfg.tags) {
    throw BadConfig("need vocab >= tags >= 2");
  }
  if (!(cfg.zipf_exponent > 1.0)) throw BadConfig("zipf exponent must exceed 1");
  if (cfg.min_examples == 0 || cfg.min_examples > cfg.max_examples) {
    throw BadConfig("bad examples-per-client range");
  }
  if (cfg.min_words == 0 || cfg.min_words > cfg.max_words) {
    throw BadConfig("bad words-per-example range");
  }
  if (cfg.topics_per_client == 0 || cfg.topics_per_client > cfg.topics) {
    throw BadConfig("bad topic mixture");
  }
  const SplitCounts counts =
      split_counts(cfg.clients, cfg.valid_fraction, cfg.test_fraction);

  // Global structure: Zipf weight per word (id = frequency rank), a topic
  // per word, and a planted primary tag per word.
  Rng global(derive_seed(cfg.seed, kGlobalStream));
  std::vector<double> zipf(cfg.vocab);
  for (std::size_t w = 0; w < cfg.vocab; ++w) {
    zipf[w] = std::pow(static_cast<double>(w + 1), -cfg.zipf_exponent);
  }
  std::vector<std::uint32_t> topic_of(cfg.vocab);
  std::vector<std::uint32_t> tag_of(cfg.vocab);
  for (std::size_t w = 0; w < cfg.vocab; ++w) {
    topic_of[w] = static_cast<std::uint32_t>(global.below(cfg.topics));
    tag_of[w] = static_cast<std::uint32_t>(global.below(cfg.tags));
  }

  std::vector<ClientDataset> clients(cfg.clients);
  std::vector<double> tag_scores(cfg.tags);
  for (std::size_t c = 0; c < cfg.clients; ++c) {
    Rng rng(derive_seed(cfg.seed, kClientStream, c));
    clients[c].id = static_cast<ClientId>(c);

    // The client's vocabulary: words whose topic is in its mixture.
    std::vector<std::uint64_t> my_topics =
        rng.sample_without_replacement(cfg.topics, cfg.topics_per_client);
    std::vector<std::uint8_t> topic_mine(cfg.topics, 0);
    for (std::uint64_t t : my_topics) topic_mine[t] = 1;
    std::vector<std::uint32_t> candidates;
    std::vector<double> cumulative;
    double total = 0.0;
    for (std::size_t w = 0; w < cfg.vocab; ++w) {
      if (topic_mine[topic_of[w]]) {
        candidates.push_back(static_cast<std::uint32_t>(w));
        total += zipf[w];
        cumulative.push_back(total);
      }
    }
    if (candidates.empty()) {
      // Degenerate mixture (tiny vocab); fall back to the full vocabulary.
      for (std::size_t w = 0; w < cfg.vocab; ++w) {
        candidates.push_back(static_cast<std::uint32_t>(w));
        total += zipf[w];
        cumulative.push_back(total);
      }
    }

    const std::size_t n_examples =
        cfg.min_examples + rng.below(cfg.max_examples - cfg.min_examples + 1);
    clients[c].sparse.reserve(n_examples);
    for (std::size_t e = 0; e < n_examples; ++e) {
      const std::size_t want = std::min<std::size_t>(
          cfg.min_words + rng.below(cfg.max_words - cfg.min_words + 1),
          candidates.size());
      std::vector<std::uint32_t> words;
      words.reserve(want);
      std::size_t attempts = 0;
      while (words.size() < want && attempts < 50 * want + 100) {
        ++attempts;
        const double r = rng.uniform01() * total;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
        const std::uint32_t w =
            candidates[static_cast<std::size_t>(it - cumulative.begin())];
        if (std::find(words.begin(), words.end(), w) == words.end()) {
          words.push_back(w);
        }
      }
      std::sort(words.begin(), words.end());

      // Planted labels: count word votes per tag, perturb, keep the top
      // scorers (always at least the argmax).
      std::fill(tag_scores.begin(), tag_scores.end(), 0.0);
      for (std::uint32_t w : words) tag_scores[tag_of[w]] += 1.0;
      for (double& s : tag_scores) s += cfg.label_noise * rng.normal();
      std::size_t best = 0;
      for (std::size_t j = 1; j < cfg.tags; ++j) {
        if (tag_scores[j] > tag_scores[best]) best = j;
      }
      std::vector<std::uint32_t> labels;
      if (cfg.single_label) {
        labels.push_back(static_cast<std::uint32_t>(best));
      } else {
        const double cutoff = std::max(0.75 * tag_scores[best], 1e-9);
        for (std::size_t j = 0; j < cfg.tags; ++j) {
          if (j == best || tag_scores[j] >= cutoff) {
            labels.push_back(static_cast<std::uint32_t>(j));
          }
        }
      }
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

      SparseExample example;
      example.indices = std::move(words);
      example.values.assign(example.indices.size(), 1.0);
      example.labels = std::move(labels);
      validate_example(example, cfg.vocab, cfg.tags);
      clients[c].sparse.push_back(std::move(example));
    }
  }

  return split_federation(DataKind::kSparse, cfg.vocab, cfg.tags,
                          std::move(clients), counts);
}

FederatedSplits gen_dense_task(const DenseTaskConfig& cfg) {
  if (cfg.clients == 0) throw BadConfig("federation needs at least one client");
  if (cfg.dim == 0 || cfg.classes < 2) throw BadConfig("need dim >= 1, classes >= 2");
  if (cfg.min_examples == 0 || cfg.min_examples > cfg.max_examples) {
    throw BadConfig("bad examples-per-client range");
  }
  if (cfg.heterogeneity < 0.0) throw BadConfig("heterogeneity must be >= 0");
  const SplitCounts counts =
      split_counts(cfg.clients, cfg.valid_fraction, cfg.test_fraction);

  Rng global(derive_seed(cfg.seed, kGlobalStream));
  std::vector<std::vector<double>> centers(cfg.classes,
                                           std::vector<double>(cfg.dim));
  for (auto& center : centers) {
    for (double& v : center) v = cfg.cluster_separation * global.normal();
  }

  std::vector<ClientDataset> clients(cfg.clients);
  for (std::size_t c = 0; c < cfg.clients; ++c) {
    Rng rng(derive_seed(cfg.seed, kClientStream, c));
    clients[c].id = static_cast<ClientId>(c);

    // Class mixture: Dirichlet(1/heterogeneity); the limit 0 is the
    // shared uniform marginal.
    std::vector<double> probs(cfg.classes, 1.0 / static_cast<double>(cfg.classes));
    if (cfg.heterogeneity > 0.0) {
      const double alpha = 1.0 / cfg.heterogeneity;
      double total = 0.0;
      for (double& p : probs) {
        p = sample_gamma(alpha, rng);
        total += p;
      }
      for (double& p : probs) p /= total;
    }
    std::vector<double> cum(cfg.classes);
    double acc = 0.0;
    for (std::size_t k = 0; k < cfg.classes; ++k) {
      acc += probs[k];
      cum[k] = acc;
    }

    const std::size_t n_examples =
        cfg.min_examples + rng.below(cfg.max_examples - cfg.min_examples + 1);
    clients[c].dense.reserve(n_examples);
    for (std::size_t e = 0; e < n_examples; ++e) {
      const double r = rng.uniform01() * acc;
      std::size_t label = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
      if (label >= cfg.classes) label = cfg.classes - 1;
      DenseExample example;
      example.label = static_cast<std::uint32_t>(label);
      example.features.resize(cfg.dim);
      for (std::size_t i = 0; i < cfg.dim; ++i) {
        example.features[i] = centers[label][i] + cfg.cluster_spread * rng.normal();
      }
      validate_example(example, cfg.dim, cfg.classes);
      clients[c].dense.push_back(std::move(example));
    }
  }

  return split_federation(DataKind::kDense, cfg.dim, cfg.classes,
                          std::move(clients), counts);
}

// ---------------------------------------------------------------------------
// Shard files

namespace {

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);
  return parts;
}

std::uint32_t parse_u32(const std::string& text, const std::string& file,
                        std::size_t line) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected an unsigned integer, got '" + text + "'");
  }
}

double parse_f64(const std::string& text, const std::string& file,
                 std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected a number, got '" + text + "'");
  }
}

}  // namespace

FederatedDataset load_client_shards(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) {
    throw BadConfig("shard path is not a directory: " + directory);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".fdc") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw BadConfig("no .fdc shard files under " + directory);
  std::sort(files.begin(), files.end());

  FederatedDataset data;
  bool kind_known = false;
  std::size_t dense_dim = 0;

  for (std::size_t f = 0; f < files.size(); ++f) {
    const std::string fname = files[f].filename().string();
    std::ifstream in(files[f]);
    if (!in) throw IoError("cannot open " + files[f].string());

    ClientDataset client;
    client.id = static_cast<ClientId>(f);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;

      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw ParseError(fname, line_no, "missing tab separator");
      }
      const std::string head = line.substr(0, tab);
      const std::string body = line.substr(tab + 1);
      if (body.empty()) throw ParseError(fname, line_no, "empty feature field");

      const bool sparse_line = body.find(':') != std::string::npos;
      if (!kind_known) {
        data.kind = sparse_line ? DataKind::kSparse : DataKind::kDense;
        kind_known = true;
      } else if (sparse_line != (data.kind == DataKind::kSparse)) {
        throw ParseError(fname, line_no, "mixed sparse and dense lines");
      }

      if (data.kind == DataKind::kSparse) {
        SparseExample e;
        for (const std::string& part : split_on(head, ',')) {
          e.labels.push_back(parse_u32(part, fname, line_no));
        }
        std::sort(e.labels.begin(), e.labels.end());
        e.labels.erase(std::unique(e.labels.begin(), e.labels.end()),
                       e.labels.end());
        for (const std::string& pair : split_on(body, ' ')) {
          if (pair.empty()) continue;
          const std::size_t colon = pair.find(':');
          if (colon == std::string::npos) {
            throw ParseError(fname, line_no, "expected idx:val, got '" + pair + "'");
          }
          const std::uint32_t idx = parse_u32(pair.substr(0, colon), fname, line_no);
          if (!e.indices.empty() && idx <= e.indices.back()) {
            throw ParseError(fname, line_no, "indices must be strictly increasing");
          }
          e.indices.push_back(idx);
          e.values.push_back(parse_f64(pair.substr(colon + 1), fname, line_no));
        }
        if (e.indices.empty()) throw ParseError(fname, line_no, "example has no features");
        for (std::uint32_t idx : e.indices) {
          data.feature_dim = std::max<std::size_t>(data.feature_dim, idx + 1);
        }
        for (std::uint32_t lbl : e.labels) {
          data.label_dim = std::max<std::size_t>(data.label_dim, lbl + 1);
        }
        client.sparse.push_back(std::move(e));
      } else {
        DenseExample e;
        e.label = parse_u32(head, fname, line_no);
        for (const std::string& part : split_on(body, ',')) {
          e.features.push_back(parse_f64(part, fname, line_no));
        }
        if (dense_dim == 0) {
          dense_dim = e.features.size();
        } else if (e.features.size() != dense_dim) {
          throw ParseError(fname, line_no, "dense dimension differs across lines");
        }
        data.label_dim = std::max<std::size_t>(data.label_dim, e.label + 1);
        client.dense.push_back(std::move(e));
      }
    }
    if (client.sparse.empty() && client.dense.empty()) {
      throw ParseError(fname, 0, "client shard holds no examples");
    }
    data.clients.push_back(std::move(client));
  }
  if (data.kind == DataKind::kDense) data.feature_dim = dense_dim;

  for (const auto& client : data.clients) {
    for (const auto& e : client.sparse) {
      validate_example(e, data.feature_dim, data.label_dim);
    }
    for (const auto& e : client.dense) {
      validate_example(e, data.feature_dim, data.label_dim);
    }
  }
  return data;
}

void write_client_shards(const FederatedDataset& data,
                         const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  char buf[64];
  for (std::size_t c = 0; c < data.clients.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "client_%05zu.fdc", c);
    std::ofstream out(fs::path(directory) / buf);
    if (!out) throw IoError("cannot write shard under " + directory);
    const ClientDataset& client = data.clients[c];
    if (data.kind == DataKind::kSparse) {
      for (const auto& e : client.sparse) {
        for (std::size_t i = 0; i < e.labels.size(); ++i) {
          out << (i ? "," : "") << e.labels[i];
        }
        out << '\t';
        for (std::size_t i = 0; i < e.indices.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%.17g", e.values[i]);
          out << (i ? " " : "") << e.indices[i] << ':' << buf;
        }
        out << '\n';
      }
    } else {
      for (const auto& e : client.dense) {
        out << e.label << '\t';
        for (std::size_t i = 0; i < e.features.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%.17g", e.features[i]);
          out << (i ? "," : "") << buf;
        }
        out << '\n';
      }
    }
  }
}

}  // namespace fedselect
