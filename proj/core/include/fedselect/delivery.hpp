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
#include <string>
#include <vector>

#include "fedselect/select_plan.hpp"

namespace fedselect {

/// How slices reach the clients. Slice values are identical across all
/// modes; only the cost profile and key visibility differ.
///  - kBroadcastCompute: ship the whole model, clients select locally.
///    Keys never leave the devices.
///  - kOnDemand: clients upload keys, the server computes each requested
///    slice (optionally memoizing within the round).
///  - kPregenerated: the server computes all K slices up front (as if
///    publishing them to a CDN) and clients fetch by key.
enum class DeliveryKind { kBroadcastCompute, kOnDemand, kPregenerated };

enum class CacheScope { kNone, kPerRound };

DeliveryKind delivery_kind_from_string(const std::string& name);
std::string to_string(DeliveryKind kind);

struct DeliveryMode {
  DeliveryKind kind = DeliveryKind::kOnDemand;
  CacheScope cache = CacheScope::kNone;  // meaningful for kOnDemand

  /// True whenever clients must reveal their select keys to the serving
  /// side; only broadcast-and-compute keeps them on-device.
  bool keys_visible_to_server() const {
    return kind != DeliveryKind::kBroadcastCompute;
  }
};

/// Exact per-round delivery counters. Costs are scalar counts, not
/// bytes, and are deterministic for fixed inputs.
struct DeliveryStats {
  std::uint64_t psi_evals = 0;         // server-side select evaluations
  std::uint64_t client_psi_evals = 0;  // client-side (broadcast-compute)
  std::uint64_t wasted_slices = 0;     // pre-generated but never fetched
  std::uint64_t cache_hits = 0;
  std::vector<std::uint64_t> scalars_down;  // per cohort position

  std::uint64_t scalars_down_total() const {
    std::uint64_t total = 0;
    for (std::uint64_t v : scalars_down) total += v;
    return total;
  }
};

struct DeliveryResult {
  ClientsValue<std::vector<Slice>> slices;
  DeliveryStats stats;
};

/// Runs one federated select under the given mode. In the select modes a
/// client's download is the sum of its base slice sizes plus the fused
/// broadcast block counted once; under broadcast-compute every client
/// downloads the full model.
DeliveryResult deliver(const DeliveryMode& mode,
                       const ServerValue<std::vector<double>>& x,
                       const ClientsValue<KeySeq>& keys, const SelectPlan& plan);

/// Totals across rounds plus the headline ratio of peak client model
/// size to server model size.
struct AccountTotals {
  std::uint64_t scalars_down = 0;
  std::uint64_t scalars_up = 0;
  std::uint64_t psi_evals = 0;
  std::uint64_t client_psi_evals = 0;
  std::uint64_t wasted_slices = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t max_client_params = 0;
  double rel_client_model_size = 0.0;
};

struct RoundAccounting {
  std::uint64_t scalars_down = 0;
  std::uint64_t scalars_up = 0;
  std::uint64_t psi_evals = 0;
  std::uint64_t client_psi_evals = 0;
  std::uint64_t wasted_slices = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t max_client_params = 0;
};

AccountTotals account_summary(std::span<const RoundAccounting> rounds,
                              std::size_t model_dim);

}  // namespace fedselect
