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

#include <string>
#include <vector>

#include "fedselect/select_plan.hpp"

namespace fedselect {

/// Selects row k of a 2-D block; K = row count. This is the plan behind
/// per-feature selection of a feature-major weight matrix.
PlanPtr make_row_select_plan(std::shared_ptr<const ParamLayout> layout,
                             const std::string& block_name);

/// Selects whole component blocks: psi(x, i) = a_i. Slice shapes may
/// differ per key; a shared block is attached via
/// fuse_broadcast_into_select.
PlanPtr make_block_select_plan(std::shared_ptr<const ParamLayout> layout,
                               std::vector<std::string> component_blocks);

/// Selects one hidden unit's full connectivity: psi(x, j) = (column j of
/// the input weights, entry j of the hidden bias, row j of the output
/// weights). The K slices partition the three blocks exactly.
PlanPtr make_neuron_select_plan(std::shared_ptr<const ParamLayout> layout,
                                const std::string& input_weights,
                                const std::string& hidden_bias,
                                const std::string& output_weights);

/// Constant select function psi(x, k) = x for every key: federated
/// select over this plan reduces to broadcast.
PlanPtr make_full_model_plan(std::shared_ptr<const ParamLayout> layout,
                             std::uint64_t keyspace = 1);

}  // namespace fedselect
