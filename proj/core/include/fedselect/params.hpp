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
#include <string_view>
#include <vector>

#include "fedselect/errors.hpp"

namespace fedselect {

/// One named block of a parameter vector. Blocks flagged selectable may
/// back a select plan; the rest are broadcast in full when needed.
struct BlockSpec {
  std::string name;
  std::vector<std::size_t> shape;
  bool selectable = true;

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }
};

/// Immutable layout of a blocked parameter vector: named blocks mapped
/// onto contiguous flat offsets covering [0, s) exactly once. Models and
/// select plans share one layout object.
class ParamLayout {
 public:
  explicit ParamLayout(std::vector<BlockSpec> blocks);

  std::size_t size() const { return total_; }
  std::size_t block_count() const { return blocks_.size(); }

  const BlockSpec& block(std::size_t i) const { return blocks_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::size_t block_size(std::size_t i) const { return blocks_[i].size(); }

  bool has_block(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  std::size_t offset_of(std::string_view name) const {
    return offsets_[index_of(name)];
  }
  const BlockSpec& block_named(std::string_view name) const {
    return blocks_[index_of(name)];
  }

  /// View of one block inside a flat parameter vector.
  std::span<const double> block_view(std::span<const double> flat,
                                     std::string_view name) const;
  std::span<double> block_view(std::span<double> flat,
                               std::string_view name) const;

 private:
  std::vector<BlockSpec> blocks_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

/// A model's parameters: the shared layout plus flat 64-bit storage.
struct BlockedParams {
  std::shared_ptr<const ParamLayout> layout;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

BlockedParams make_blocked_params(std::shared_ptr<const ParamLayout> layout);

}  // namespace fedselect
