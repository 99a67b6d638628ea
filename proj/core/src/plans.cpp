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

#include "fedselect/plans.hpp"

#include <utility>

namespace fedselect {
namespace {

class RowSelectPlan final : public SelectPlan {
 public:
  RowSelectPlan(std::shared_ptr<const ParamLayout> layout,
                const std::string& block_name)
      : SelectPlan(std::move(layout)), selected_{block_name} {
    const BlockSpec& spec = layout_->block_named(block_name);
    if (spec.shape.size() != 2) {
      throw BadConfig("row select needs a 2-D block, got '" + block_name + "'");
    }
    if (!spec.selectable) {
      throw BadConfig("block '" + block_name + "' is flagged broadcast-always");
    }
    rows_ = spec.shape[0];
    width_ = spec.shape[1];
    offset_ = layout_->offset_of(block_name);
  }

  std::uint64_t keyspace() const override { return rows_; }

  std::size_t slice_size(SelectKey) const override { return width_; }

  Slice slice(std::span<const double> x, SelectKey k) const override {
    check_key(k);
    const std::size_t at = offset_ + static_cast<std::size_t>(k) * width_;
    return Slice(x.begin() + at, x.begin() + at + width_);
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    check_key(k);
    if (update.size() != width_) throw ShapeMismatch("row update has wrong width");
    const std::size_t at = offset_ + static_cast<std::size_t>(k) * width_;
    for (std::size_t i = 0; i < width_; ++i) dense[at + i] += update[i];
  }

  const std::vector<std::string>& selected_blocks() const override {
    return selected_;
  }

 private:
  std::vector<std::string> selected_;
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::size_t offset_ = 0;
};

class BlockSelectPlan final : public SelectPlan {
 public:
  BlockSelectPlan(std::shared_ptr<const ParamLayout> layout,
                  std::vector<std::string> components)
      : SelectPlan(std::move(layout)), selected_(std::move(components)) {
    if (selected_.empty()) throw BadConfig("block select needs at least one component");
    offsets_.reserve(selected_.size());
    sizes_.reserve(selected_.size());
    for (const auto& name : selected_) {
      const BlockSpec& spec = layout_->block_named(name);
      if (!spec.selectable) {
        throw BadConfig("block '" + name + "' is flagged broadcast-always");
      }
      offsets_.push_back(layout_->offset_of(name));
      sizes_.push_back(spec.size());
    }
  }

  std::uint64_t keyspace() const override { return selected_.size(); }

  std::size_t slice_size(SelectKey k) const override {
    check_key(k);
    return sizes_[static_cast<std::size_t>(k)];
  }

  Slice slice(std::span<const double> x, SelectKey k) const override {
    check_key(k);
    const std::size_t i = static_cast<std::size_t>(k);
    return Slice(x.begin() + offsets_[i], x.begin() + offsets_[i] + sizes_[i]);
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    check_key(k);
    const std::size_t i = static_cast<std::size_t>(k);
    if (update.size() != sizes_[i]) {
      throw ShapeMismatch("component update has wrong size");
    }
    for (std::size_t j = 0; j < sizes_[i]; ++j) dense[offsets_[i] + j] += update[j];
  }

  const std::vector<std::string>& selected_blocks() const override {
    return selected_;
  }

 private:
  std::vector<std::string> selected_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> sizes_;
};

class NeuronSelectPlan final : public SelectPlan {
 public:
  NeuronSelectPlan(std::shared_ptr<const ParamLayout> layout,
                   const std::string& input_weights,
                   const std::string& hidden_bias,
                   const std::string& output_weights)
      : SelectPlan(std::move(layout)),
        selected_{input_weights, hidden_bias, output_weights} {
    const BlockSpec& w1 = layout_->block_named(input_weights);
    const BlockSpec& b1 = layout_->block_named(hidden_bias);
    const BlockSpec& w2 = layout_->block_named(output_weights);
    if (w1.shape.size() != 2 || b1.shape.size() != 1 || w2.shape.size() != 2) {
      throw BadConfig("neuron select needs matrix, vector, matrix blocks");
    }
    in_dim_ = w1.shape[0];
    units_ = w1.shape[1];
    out_dim_ = w2.shape[1];
    if (b1.shape[0] != units_ || w2.shape[0] != units_) {
      throw ShapeMismatch("hidden-layer blocks disagree on the unit count");
    }
    w1_off_ = layout_->offset_of(input_weights);
    b1_off_ = layout_->offset_of(hidden_bias);
    w2_off_ = layout_->offset_of(output_weights);
  }

  std::uint64_t keyspace() const override { return units_; }

  std::size_t slice_size(SelectKey) const override {
    return in_dim_ + 1 + out_dim_;
  }

  // Slice layout: [input column | bias entry | output row].
  Slice slice(std::span<const double> x, SelectKey k) const override {
    check_key(k);
    const std::size_t j = static_cast<std::size_t>(k);
    Slice s;
    s.reserve(slice_size(k));
    for (std::size_t i = 0; i < in_dim_; ++i) {
      s.push_back(x[w1_off_ + i * units_ + j]);
    }
    s.push_back(x[b1_off_ + j]);
    for (std::size_t i = 0; i < out_dim_; ++i) {
      s.push_back(x[w2_off_ + j * out_dim_ + i]);
    }
    return s;
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    check_key(k);
    if (update.size() != slice_size(k)) {
      throw ShapeMismatch("neuron update has wrong size");
    }
    const std::size_t j = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i < in_dim_; ++i) {
      dense[w1_off_ + i * units_ + j] += update[i];
    }
    dense[b1_off_ + j] += update[in_dim_];
    for (std::size_t i = 0; i < out_dim_; ++i) {
      dense[w2_off_ + j * out_dim_ + i] += update[in_dim_ + 1 + i];
    }
  }

  const std::vector<std::string>& selected_blocks() const override {
    return selected_;
  }

 private:
  std::vector<std::string> selected_;
  std::size_t in_dim_ = 0;
  std::size_t units_ = 0;
  std::size_t out_dim_ = 0;
  std::size_t w1_off_ = 0;
  std::size_t b1_off_ = 0;
  std::size_t w2_off_ = 0;
};

class FullModelPlan final : public SelectPlan {
 public:
  FullModelPlan(std::shared_ptr<const ParamLayout> layout, std::uint64_t keyspace)
      : SelectPlan(std::move(layout)), keyspace_(keyspace) {
    if (keyspace_ < 1) throw BadConfig("keyspace must be positive");
    for (std::size_t i = 0; i < layout_->block_count(); ++i) {
      selected_.push_back(layout_->block(i).name);
    }
  }

  std::uint64_t keyspace() const override { return keyspace_; }

  std::size_t slice_size(SelectKey) const override { return layout_->size(); }

  Slice slice(std::span<const double> x, SelectKey k) const override {
    check_key(k);
    return Slice(x.begin(), x.end());
  }

  void scatter_add(std::span<double> dense, std::span<const double> update,
                   SelectKey k) const override {
    check_key(k);
    if (update.size() != dense.size()) {
      throw ShapeMismatch("full-model update has wrong size");
    }
    for (std::size_t i = 0; i < dense.size(); ++i) dense[i] += update[i];
  }

  const std::vector<std::string>& selected_blocks() const override {
    return selected_;
  }

 private:
  std::uint64_t keyspace_;
  std::vector<std::string> selected_;
};

}  // namespace

PlanPtr make_row_select_plan(std::shared_ptr<const ParamLayout> layout,
                             const std::string& block_name) {
  return std::make_shared<RowSelectPlan>(std::move(layout), block_name);
}

PlanPtr make_block_select_plan(std::shared_ptr<const ParamLayout> layout,
                               std::vector<std::string> component_blocks) {
  return std::make_shared<BlockSelectPlan>(std::move(layout),
                                           std::move(component_blocks));
}

PlanPtr make_neuron_select_plan(std::shared_ptr<const ParamLayout> layout,
                                const std::string& input_weights,
                                const std::string& hidden_bias,
                                const std::string& output_weights) {
  return std::make_shared<NeuronSelectPlan>(std::move(layout), input_weights,
                                            hidden_bias, output_weights);
}

PlanPtr make_full_model_plan(std::shared_ptr<const ParamLayout> layout,
                             std::uint64_t keyspace) {
  return std::make_shared<FullModelPlan>(std::move(layout), keyspace);
}

}  // namespace fedselect
