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

#include "fedselect/delivery.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace fedselect {

DeliveryKind delivery_kind_from_string(const std::string& name) {
  if (name == "broadcast_compute") return DeliveryKind::kBroadcastCompute;
  if (name == "on_demand") return DeliveryKind::kOnDemand;
  if (name == "pregenerated") return DeliveryKind::kPregenerated;
  throw BadConfig("unknown delivery mode '" + name + "'");
}

std::string to_string(DeliveryKind kind) {
  switch (kind) {
    case DeliveryKind::kBroadcastCompute: return "broadcast_compute";
    case DeliveryKind::kOnDemand: return "on_demand";
    case DeliveryKind::kPregenerated: return "pregenerated";
  }
  return "on_demand";
}

namespace {

void check_keys(const ClientsValue<KeySeq>& keys, const SelectPlan& plan) {
  for (std::size_t n = 0; n < keys.size(); ++n) {
    const KeySeq& seq = keys.at(n);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] >= plan.keyspace()) {
        throw KeyOutOfRange(seq[i], plan.keyspace(), n, i);
      }
    }
  }
}

std::uint64_t select_download(const SelectPlan& plan, const KeySeq& seq) {
  std::uint64_t scalars = 0;
  for (SelectKey k : seq) scalars += plan.base_slice_size(k);
  if (!seq.empty()) scalars += plan.broadcast_size();
  return scalars;
}

}  // namespace

DeliveryResult deliver(const DeliveryMode& mode,
                       const ServerValue<std::vector<double>>& x,
                       const ClientsValue<KeySeq>& keys, const SelectPlan& plan) {
  if (x.value.size() != plan.model_dim()) {
    throw ShapeMismatch("server model does not match the plan's layout");
  }
  check_keys(keys, plan);

  DeliveryResult result;
  result.stats.scalars_down.assign(keys.size(), 0);
  std::vector<std::vector<Slice>> delivered(keys.size());

  switch (mode.kind) {
    case DeliveryKind::kBroadcastCompute: {
      // Full model to every client; selection happens on-device.
      for (std::size_t n = 0; n < keys.size(); ++n) {
        const KeySeq& seq = keys.at(n);
        result.stats.scalars_down[n] = plan.model_dim();
        result.stats.client_psi_evals += seq.size();
        delivered[n].reserve(seq.size());
        for (SelectKey k : seq) delivered[n].push_back(plan.slice(x.value, k));
      }
      break;
    }
    case DeliveryKind::kOnDemand: {
      std::map<SelectKey, Slice> cache;
      for (std::size_t n = 0; n < keys.size(); ++n) {
        const KeySeq& seq = keys.at(n);
        result.stats.scalars_down[n] = select_download(plan, seq);
        delivered[n].reserve(seq.size());
        for (SelectKey k : seq) {
          if (mode.cache == CacheScope::kPerRound) {
            auto it = cache.find(k);
            if (it == cache.end()) {
              ++result.stats.psi_evals;
              it = cache.emplace(k, plan.slice(x.value, k)).first;
            } else {
              ++result.stats.cache_hits;
            }
            delivered[n].push_back(it->second);
          } else {
            ++result.stats.psi_evals;
            delivered[n].push_back(plan.slice(x.value, k));
          }
        }
      }
      break;
    }
    case DeliveryKind::kPregenerated: {
      std::vector<Slice> shelf;
      shelf.reserve(plan.keyspace());
      for (SelectKey k = 0; k < plan.keyspace(); ++k) {
        shelf.push_back(plan.slice(x.value, k));
      }
      result.stats.psi_evals = plan.keyspace();
      std::vector<std::uint8_t> fetched(plan.keyspace(), 0);
      for (std::size_t n = 0; n < keys.size(); ++n) {
        const KeySeq& seq = keys.at(n);
        result.stats.scalars_down[n] = select_download(plan, seq);
        delivered[n].reserve(seq.size());
        for (SelectKey k : seq) {
          fetched[k] = 1;
          delivered[n].push_back(shelf[k]);
        }
      }
      std::uint64_t unique = 0;
      for (std::uint8_t f : fetched) unique += f;
      result.stats.wasted_slices = plan.keyspace() - unique;
      break;
    }
  }

  result.slices = ClientsValue<std::vector<Slice>>(keys.cohort(), std::move(delivered));
  return result;
}

AccountTotals account_summary(std::span<const RoundAccounting> rounds,
                              std::size_t model_dim) {
  AccountTotals totals;
  for (const auto& r : rounds) {
    totals.scalars_down += r.scalars_down;
    totals.scalars_up += r.scalars_up;
    totals.psi_evals += r.psi_evals;
    totals.client_psi_evals += r.client_psi_evals;
    totals.wasted_slices += r.wasted_slices;
    totals.cache_hits += r.cache_hits;
    totals.max_client_params = std::max(totals.max_client_params, r.max_client_params);
  }
  if (model_dim > 0 && totals.max_client_params > 0) {
    totals.rel_client_model_size = static_cast<double>(totals.max_client_params) /
                                   static_cast<double>(model_dim);
  }
  return totals;
}

}  // namespace fedselect
