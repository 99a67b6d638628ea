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

#include "fedselect/select_plan.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace fedselect {

SelectPlan::SelectPlan(std::shared_ptr<const ParamLayout> layout)
    : layout_(std::move(layout)) {
  if (!layout_) throw BadConfig("select plan needs a parameter layout");
}

void SelectPlan::check_key(SelectKey k) const {
  if (k >= keyspace()) throw KeyOutOfRange(k, keyspace());
}

Slice SelectPlan::slice(const BlockedParams& params, SelectKey k) const {
  if (params.layout != layout_) {
    throw ShapeMismatch("blocked params use a different layout than the plan");
  }
  return slice(std::span<const double>(params.values), k);
}

std::vector<double> SelectPlan::deselect(std::span<const Slice> updates,
                                         const KeySeq& keys) const {
  if (updates.size() != keys.size()) {
    throw ShapeMismatch("slice-update count differs from key count");
  }
  std::vector<double> dense(model_dim(), 0.0);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (updates[i].size() != slice_size(keys[i])) {
      throw ShapeMismatch("slice update does not match the slice shape for its key");
    }
    scatter_add(dense, updates[i], keys[i]);
  }
  return dense;
}

ClientsValue<std::vector<Slice>> fed_select(
    const ServerValue<std::vector<double>>& x,
    const ClientsValue<KeySeq>& keys, const SelectPlan& plan) {
  if (x.value.size() != plan.model_dim()) {
    throw ShapeMismatch("server model does not match the plan's layout");
  }
  for (std::size_t n = 0; n < keys.size(); ++n) {
    const KeySeq& seq = keys.at(n);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] >= plan.keyspace()) {
        throw KeyOutOfRange(seq[i], plan.keyspace(), n, i);
      }
    }
  }
  std::vector<std::vector<Slice>> out(keys.size());
  for (std::size_t n = 0; n < keys.size(); ++n) {
    const KeySeq& seq = keys.at(n);
    out[n].reserve(seq.size());
    for (SelectKey k : seq) out[n].push_back(plan.slice(x.value, k));
  }
  return ClientsValue<std::vector<Slice>>(keys.cohort(), std::move(out));
}

ServerValue<std::vector<double>> aggregate_mean_deselect(
    const ClientsValue<std::vector<Slice>>& updates,
    const ClientsValue<KeySeq>& keys, const SelectPlan& plan,
    DeselectNorm norm) {
  if (updates.empty()) throw EmptyCohort("aggregate over empty cohort");
  if (updates.size() != keys.size()) {
    throw ShapeMismatch("updates and keys cover different cohorts");
  }
  const std::size_t dim = plan.model_dim();
  std::vector<double> sum(dim, 0.0);
  std::vector<double> touch_counts;
  if (norm == DeselectNorm::kPerKeyCount) touch_counts.assign(dim, 0.0);

  for (std::size_t pos : updates.order_by_client()) {
    const std::vector<double> dense = plan.deselect(updates.at(pos), keys.at(pos));
    for (std::size_t i = 0; i < dim; ++i) sum[i] += dense[i];
    if (norm == DeselectNorm::kPerKeyCount) {
      // Count coordinate touches by scattering all-ones updates through
      // the same deselect path.
      std::vector<Slice> ones;
      ones.reserve(keys.at(pos).size());
      for (SelectKey k : keys.at(pos)) ones.emplace_back(plan.slice_size(k), 1.0);
      const std::vector<double> touched = plan.deselect(ones, keys.at(pos));
      for (std::size_t i = 0; i < dim; ++i) {
        if (touched[i] != 0.0) touch_counts[i] += 1.0;
      }
    }
  }

  if (norm == DeselectNorm::kCohortSize) {
    const double inv = 1.0 / static_cast<double>(updates.size());
    for (double& v : sum) v *= inv;
  } else {
    for (std::size_t i = 0; i < dim; ++i) {
      if (touch_counts[i] > 0.0) sum[i] /= touch_counts[i];
    }
  }
  return at_server(std::move(sum));
}

namespace {

class FusedBroadcastPlan final : public SelectPlan {
 public:
  FusedBroadcastPlan(PlanPtr base, std::string block_name)
      : SelectPlan(base->layout_ptr()),
        base_(std::move(base)),
        block_(std::move(block_name)),
        block_offset_(layout_->offset_of(block_)),
        block_size_(layout_->block_named(block_).size()),
        selected_(base_->selected_blocks()) {
    for (const auto& name : selected_) {
      if (name == block_) {
        throw BlockCollision("block '" + block_ + "' is already selected by the plan");
      }
    }
  }

  std::uint64_t keyspace() const override { return base_->keyspace(); }

  std::size_t slice_size(SelectKey k) const override {
    return base_->slice_size(k) + block_size_;
  }

  Slice slice(std::span<const double> x, SelectKey k) const override {
    Slice s = base_->slice(x, k);
    s.insert(s.end(), x.begin() + block_offset_,
             x.begin() + block_offset_ + block_size_);
    return s;
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    if (update.size() != slice_size(k)) {
      throw ShapeMismatch("fused slice update has wrong size");
    }
    const std::size_t base_len = update.size() - block_size_;
    base_->scatter_add(dense, update.subspan(0, base_len), k);
    for (std::size_t i = 0; i < block_size_; ++i) {
      dense[block_offset_ + i] += update[base_len + i];
    }
  }

  std::vector<double> deselect(std::span<const Slice> updates,
                               const KeySeq& keys) const override {
    if (updates.size() != keys.size()) {
      throw ShapeMismatch("slice-update count differs from key count");
    }
    // The appended broadcast part is identical across a client's slices;
    // apply it once, then deselect the stripped base updates.
    std::vector<Slice> bases;
    bases.reserve(updates.size());
    for (std::size_t i = 0; i < updates.size(); ++i) {
      if (updates[i].size() != slice_size(keys[i])) {
        throw ShapeMismatch("fused slice update has wrong size");
      }
      bases.emplace_back(updates[i].begin(),
                         updates[i].end() - static_cast<std::ptrdiff_t>(block_size_));
    }
    std::vector<double> dense = base_->deselect(bases, keys);
    if (!updates.empty()) {
      const Slice& first = updates[0];
      const std::size_t start = first.size() - block_size_;
      for (std::size_t i = 0; i < block_size_; ++i) {
        dense[block_offset_ + i] += first[start + i];
      }
    }
    return dense;
  }

  const std::vector<std::string>& selected_blocks() const override {
    return selected_;
  }

  std::size_t broadcast_size() const override {
    return base_->broadcast_size() + block_size_;
  }

 private:
  PlanPtr base_;
  std::string block_;
  std::size_t block_offset_;
  std::size_t block_size_;
  std::vector<std::string> selected_;
};

class MergedPlan final : public SelectPlan {
 public:
  MergedPlan(PlanPtr first, PlanPtr second)
      : SelectPlan(first->layout_ptr()),
        first_(std::move(first)),
        second_(std::move(second)) {
    if (first_->layout_ptr() != second_->layout_ptr()) {
      throw BadConfig("merged plans must share one parameter layout");
    }
    for (const auto& a : first_->selected_blocks()) {
      for (const auto& b : second_->selected_blocks()) {
        if (a == b) throw BlockCollision("merged plans overlap on block '" + a + "'");
      }
    }
    const std::uint64_t k1 = first_->keyspace();
    const std::uint64_t k2 = second_->keyspace();
    if (k2 != 0 && k1 > std::numeric_limits<std::uint64_t>::max() / k2) {
      throw KeyspaceOverflow("merged keyspace exceeds the key integer range");
    }
    keyspace_ = k1 * k2;
    selected_ = first_->selected_blocks();
    const auto& more = second_->selected_blocks();
    selected_.insert(selected_.end(), more.begin(), more.end());
  }

  std::uint64_t keyspace() const override { return keyspace_; }

  std::size_t slice_size(SelectKey k) const override {
    const auto [k1, k2] = split(k);
    return first_->slice_size(k1) + second_->slice_size(k2);
  }

  Slice slice(std::span<const double> x, SelectKey k) const override {
    const auto [k1, k2] = split(k);
    Slice s = first_->slice(x, k1);
    const Slice t = second_->slice(x, k2);
    s.insert(s.end(), t.begin(), t.end());
    return s;
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    const auto [k1, k2] = split(k);
    const std::size_t len1 = first_->slice_size(k1);
    if (update.size() != len1 + second_->slice_size(k2)) {
      throw ShapeMismatch("merged slice update has wrong size");
    }
    first_->scatter_add(dense, update.subspan(0, len1), k1);
    second_->scatter_add(dense, update.subspan(len1), k2);
  }

  std::vector<double> deselect(std::span<const Slice> updates,
                               const KeySeq& keys) const override {
    if (updates.size() != keys.size()) {
      throw ShapeMismatch("slice-update count differs from key count");
    }
    // Delegate to the component deselects so their own semantics (eg. a
    // fused broadcast part) are preserved.
    std::vector<Slice> parts1, parts2;
    KeySeq keys1, keys2;
    parts1.reserve(updates.size());
    parts2.reserve(updates.size());
    for (std::size_t i = 0; i < updates.size(); ++i) {
      const auto [k1, k2] = split(keys[i]);
      const std::size_t len1 = first_->slice_size(k1);
      if (updates[i].size() != len1 + second_->slice_size(k2)) {
        throw ShapeMismatch("merged slice update has wrong size");
      }
      parts1.emplace_back(updates[i].begin(), updates[i].begin() + len1);
      parts2.emplace_back(updates[i].begin() + len1, updates[i].end());
      keys1.push_back(k1);
      keys2.push_back(k2);
    }
    std::vector<double> dense = first_->deselect(parts1, keys1);
    const std::vector<double> dense2 = second_->deselect(parts2, keys2);
    for (std::size_t i = 0; i < dense.size(); ++i) dense[i] += dense2[i];
    return dense;
  }

  const std::vector<std::string>& selected_blocks() const override {
    return selected_;
  }

  std::size_t broadcast_size() const override {
    return first_->broadcast_size() + second_->broadcast_size();
  }

 private:
  std::pair<SelectKey, SelectKey> split(SelectKey k) const {
    check_key(k);
    const std::uint64_t k2 = second_->keyspace();
    return {k / k2, k % k2};
  }

  PlanPtr first_;
  PlanPtr second_;
  std::uint64_t keyspace_ = 0;
  std::vector<std::string> selected_;
};

class FlattenedPlan final : public SelectPlan {
 public:
  FlattenedPlan(PlanPtr base, std::size_t key_count)
      : SelectPlan(base->layout_ptr()),
        base_(std::move(base)),
        count_(key_count) {
    if (count_ < 1) throw BadConfig("flattened plan needs at least one key");
    const std::uint64_t k = base_->keyspace();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < count_; ++i) {
      if (k != 0 && total > std::numeric_limits<std::uint64_t>::max() / k) {
        throw KeyspaceOverflow("K^m exceeds the key integer range");
      }
      total *= k;
    }
    keyspace_ = total;
  }

  std::uint64_t keyspace() const override { return keyspace_; }

  std::size_t slice_size(SelectKey k) const override {
    std::size_t total = 0;
    for (SelectKey digit : digits(k)) total += base_->slice_size(digit);
    return total;
  }

  Slice slice(std::span<const double> x, SelectKey k) const override {
    Slice out;
    for (SelectKey digit : digits(k)) {
      const Slice s = base_->slice(x, digit);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    if (update.size() != slice_size(k)) {
      throw ShapeMismatch("flattened slice update has wrong size");
    }
    std::size_t at = 0;
    for (SelectKey digit : digits(k)) {
      const std::size_t len = base_->slice_size(digit);
      base_->scatter_add(dense, update.subspan(at, len), digit);
      at += len;
    }
  }

  const std::vector<std::string>& selected_blocks() const override {
    return base_->selected_blocks();
  }

  /// Decomposes a composite key into its m base keys, most significant
  /// digit first (the last original key is the least significant digit).
  KeySeq digits(SelectKey k) const {
    check_key(k);
    KeySeq out(count_);
    const std::uint64_t base = base_->keyspace();
    for (std::size_t i = count_; i-- > 0;) {
      out[i] = k % base;
      k /= base;
    }
    return out;
  }

 private:
  PlanPtr base_;
  std::size_t count_;
  std::uint64_t keyspace_ = 0;
};

}  // namespace

SelectKey encode_merged_key(SelectKey k1, SelectKey k2, std::uint64_t second_keyspace) {
  return k1 * second_keyspace + k2;
}

SelectKey encode_multikey(const KeySeq& keys, std::uint64_t keyspace) {
  SelectKey out = 0;
  for (SelectKey k : keys) out = out * keyspace + k;
  return out;
}

PlanPtr fuse_broadcast_into_select(PlanPtr plan, const std::string& block_name) {
  return std::make_shared<FusedBroadcastPlan>(std::move(plan), block_name);
}

PlanPtr merge_select_plans(PlanPtr first, PlanPtr second) {
  return std::make_shared<MergedPlan>(std::move(first), std::move(second));
}

PlanPtr flatten_multikey_plan(PlanPtr plan, std::size_t key_count) {
  return std::make_shared<FlattenedPlan>(std::move(plan), key_count);
}

}  // namespace fedselect
