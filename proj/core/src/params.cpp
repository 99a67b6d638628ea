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

#include "fedselect/params.hpp"

#include <unordered_set>

namespace fedselect {

ParamLayout::ParamLayout(std::vector<BlockSpec> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw BadConfig("parameter layout needs at least one block");
  std::unordered_set<std::string> seen;
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.name.empty()) throw BadConfig("block name must be non-empty");
    if (!seen.insert(b.name).second) {
      throw BlockCollision("duplicate block name: " + b.name);
    }
    offsets_.push_back(total_);
    total_ += b.size();
  }
}

bool ParamLayout::has_block(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return true;
  }
  return false;
}

std::size_t ParamLayout::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  throw BadConfig("no block named '" + std::string(name) + "'");
}

std::span<const double> ParamLayout::block_view(std::span<const double> flat,
                                                std::string_view name) const {
  if (flat.size() != total_) throw ShapeMismatch("flat vector does not match layout");
  const std::size_t i = index_of(name);
  return flat.subspan(offsets_[i], blocks_[i].size());
}

std::span<double> ParamLayout::block_view(std::span<double> flat,
                                          std::string_view name) const {
  if (flat.size() != total_) throw ShapeMismatch("flat vector does not match layout");
  const std::size_t i = index_of(name);
  return flat.subspan(offsets_[i], blocks_[i].size());
}

BlockedParams make_blocked_params(std::shared_ptr<const ParamLayout> layout) {
  BlockedParams p;
  p.values.assign(layout->size(), 0.0);
  p.layout = std::move(layout);
  return p;
}

}  // namespace fedselect
