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
#include <span>

#include "fedselect/rng.hpp"
#include "fedselect/select_plan.hpp"

namespace fedselect {

/// The m keys with the highest positive counts, ordered by count
/// descending with ties broken by the smaller key. Returns fewer than m
/// keys when fewer have positive counts.
KeySeq keys_top_m(std::span<const std::uint64_t> counts, std::size_t m);

/// Uniform sample without replacement from the keys with positive counts.
KeySeq keys_random_from_local(std::span<const std::uint64_t> counts,
                              std::size_t m, Rng& rng);

/// Uniform sample of m keys from the top-2m pool of keys_top_m. A pool
/// smaller than m is returned whole.
KeySeq keys_random_top(std::span<const std::uint64_t> counts, std::size_t m,
                       Rng& rng);

/// Uniform sample without replacement from [0, keyspace). When
/// shared_per_round is set the sample is a function of round_seed only,
/// so every client in the round draws the identical key set.
KeySeq keys_uniform_random(std::uint64_t keyspace, std::size_t m, Rng& rng,
                           bool shared_per_round = false,
                           std::uint64_t round_seed = 0);

struct MixedKeys {
  KeySeq structured;  // top-m over the structured counts
  KeySeq random;      // uniform over the random keyspace
};

/// Key counts scaled by alpha: m = round(alpha * n) structured keys and
/// d = round(alpha * h) random keys, each clamped to at least one.
/// Rounding is half-away-from-zero.
MixedKeys keys_mixed_alpha(double alpha,
                           std::span<const std::uint64_t> structured_counts,
                           std::uint64_t random_keyspace, Rng& rng);

/// Rounding rule shared by mixed-key sizing.
std::size_t scaled_key_count(double alpha, std::uint64_t keyspace);

}  // namespace fedselect
