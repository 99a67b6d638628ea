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

#include "fedselect/keys.hpp"

#include <algorithm>
#include <cmath>

#include "fedselect/errors.hpp"

namespace fedselect {

KeySeq keys_top_m(std::span<const std::uint64_t> counts, std::size_t m) {
  KeySeq positive;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) positive.push_back(k);
  }
  std::sort(positive.begin(), positive.end(), [&](SelectKey a, SelectKey b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  if (positive.size() > m) positive.resize(m);
  return positive;
}

namespace {

KeySeq sample_from_pool(KeySeq pool, std::size_t m, Rng& rng) {
  if (pool.size() <= m) return pool;
  KeySeq out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace

KeySeq keys_random_from_local(std::span<const std::uint64_t> counts,
                              std::size_t m, Rng& rng) {
  KeySeq positive;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) positive.push_back(k);
  }
  return sample_from_pool(std::move(positive), m, rng);
}

KeySeq keys_random_top(std::span<const std::uint64_t> counts, std::size_t m,
                       Rng& rng) {
  return sample_from_pool(keys_top_m(counts, 2 * m), m, rng);
}

KeySeq keys_uniform_random(std::uint64_t keyspace, std::size_t m, Rng& rng,
                           bool shared_per_round, std::uint64_t round_seed) {
  if (m > keyspace) {
    throw TooManyKeys("requested " + std::to_string(m) + " keys from a keyspace of " +
                      std::to_string(keyspace));
  }
  if (shared_per_round) {
    // One sample per round: every client derives the same stream from
    // the round seed, so the server could equally have drawn the keys.
    Rng shared(derive_seed(round_seed, 0x73686172u));  // "shar"
    return shared.sample_without_replacement(keyspace, m);
  }
  return rng.sample_without_replacement(keyspace, m);
}

std::size_t scaled_key_count(double alpha, std::uint64_t keyspace) {
  const double scaled = alpha * static_cast<double>(keyspace);
  const auto rounded = static_cast<std::size_t>(std::llround(scaled));
  return std::max<std::size_t>(rounded, 1);
}

MixedKeys keys_mixed_alpha(double alpha,
                           std::span<const std::uint64_t> structured_counts,
                           std::uint64_t random_keyspace, Rng& rng) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw BadAlpha("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  MixedKeys out;
  out.structured =
      keys_top_m(structured_counts, scaled_key_count(alpha, structured_counts.size()));
  out.random = keys_uniform_random(
      random_keyspace, std::min<std::size_t>(scaled_key_count(alpha, random_keyspace),
                                             random_keyspace),
      rng);
  return out;
}

}  // namespace fedselect
