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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedselect/federated.hpp"
#include "fedselect/params.hpp"

namespace fedselect {

/// A client's select key: integer in [0, K) for the plan's keyspace K.
using SelectKey = std::uint64_t;

/// Ordered sequence of select keys for one client. Duplicates are
/// permitted; order is significant and is respected by delivery.
using KeySeq = std::vector<SelectKey>;

/// One delivered model slice, flattened to scalars.
using Slice = std::vector<double>;

/// A select plan pairs a keyspace of size K with a select function
/// (model, key) -> slice and its inverse scatter over a flat parameter
/// vector in R^s. Plans are immutable and safe to share across threads.
class SelectPlan {
 public:
  virtual ~SelectPlan() = default;

  const ParamLayout& layout() const { return *layout_; }
  const std::shared_ptr<const ParamLayout>& layout_ptr() const { return layout_; }

  /// Full model dimension s.
  std::size_t model_dim() const { return layout_->size(); }

  /// Keyspace size K.
  virtual std::uint64_t keyspace() const = 0;

  /// Scalar count of the slice for key k.
  virtual std::size_t slice_size(SelectKey k) const = 0;

  /// Selects the slice for key k; never mutates x.
  virtual Slice slice(std::span<const double> x, SelectKey k) const = 0;

  /// Convenience over blocked storage; the params must use this plan's
  /// layout.
  Slice slice(const BlockedParams& params, SelectKey k) const;

  /// Scatter-adds one slice-shaped update into a dense vector in R^s.
  virtual void scatter_add(std::span<double> dense, std::span<const double> update,
                           SelectKey k) const = 0;

  /// Deselect: maps a client's ordered slice updates back to a dense
  /// vector with zeros outside the touched coordinates. Duplicate keys
  /// accumulate. Plans that append a broadcast block override this so
  /// the broadcast part lands exactly once per client.
  virtual std::vector<double> deselect(std::span<const Slice> updates,
                                       const KeySeq& keys) const;

  /// Block names this plan selects over (used for collision checks when
  /// composing plans).
  virtual const std::vector<std::string>& selected_blocks() const = 0;

  /// Scalars of broadcast payload appended to every slice (0 for pure
  /// select plans).
  virtual std::size_t broadcast_size() const { return 0; }

  /// Slice size excluding the appended broadcast part.
  std::size_t base_slice_size(SelectKey k) const {
    return slice_size(k) - broadcast_size();
  }

  void check_key(SelectKey k) const;

 protected:
  explicit SelectPlan(std::shared_ptr<const ParamLayout> layout);

  std::shared_ptr<const ParamLayout> layout_;
};

using PlanPtr = std::shared_ptr<const SelectPlan>;

/// Federated select: client n receives [psi(x, z_1), ..., psi(x, z_m)] in
/// key order. Overlapping keys across clients yield identical slices.
ClientsValue<std::vector<Slice>> fed_select(
    const ServerValue<std::vector<double>>& x,
    const ClientsValue<KeySeq>& keys, const SelectPlan& plan);

/// How the deselect aggregate divides the summed scatters.
enum class DeselectNorm {
  kCohortSize,   // divide every coordinate by N (the default)
  kPerKeyCount,  // divide each coordinate by the number of client scatters
                 // that touched it (coordinates nobody touched stay zero)
};

/// Aggregate with deselection: (1/N) * sum_n phi(u_n, z_n), placed at the
/// server. Division is by cohort size N regardless of how many clients
/// selected each key, unless kPerKeyCount is requested.
ServerValue<std::vector<double>> aggregate_mean_deselect(
    const ClientsValue<std::vector<Slice>>& updates,
    const ClientsValue<KeySeq>& keys, const SelectPlan& plan,
    DeselectNorm norm = DeselectNorm::kCohortSize);

/// Composite-key encodings used by the merged and flattened plans.
SelectKey encode_merged_key(SelectKey k1, SelectKey k2, std::uint64_t second_keyspace);
SelectKey encode_multikey(const KeySeq& keys, std::uint64_t keyspace);

/// Combines a select plan with the broadcast of one extra block: every
/// slice of the returned plan carries the block's current value appended
/// after the base slice.
PlanPtr fuse_broadcast_into_select(PlanPtr plan, const std::string& block_name);

/// Merges two plans over disjoint blocks of the same layout into one
/// plan over keyspace K1*K2. The composite key is k1*K2 + k2 (second key
/// least significant); the slice is the pair of component slices.
PlanPtr merge_select_plans(PlanPtr first, PlanPtr second);

/// Rewrites an m-key select as a single-key select over keyspace K^m.
/// The composite key for [z_1, ..., z_m] is sum_i z_i * K^(m-i) with z_m
/// least significant; the slice is the concatenation of the m slices.
PlanPtr flatten_multikey_plan(PlanPtr plan, std::size_t key_count);

}  // namespace fedselect
