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

#include "fedselect/errors.hpp"

namespace fedselect {

enum class OptimizerKind { kSgd, kAdagrad, kAdam };

OptimizerKind optimizer_kind_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct ServerOptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double lr = 0.1;      // eta
  double tau = 1e-7;    // adaptivity constant
  double beta1 = 0.9;   // Adam first-moment decay
  double beta2 = 0.999; // Adam second-moment decay
};

/// First-order server update treating the aggregated client delta u as a
/// gradient estimate. State lives on the single server model copy and is
/// mutated in place:
///   Sgd:     x -= eta * u
///   Adagrad: v += u^2;             x -= eta * u / (sqrt(v) + tau)
///   Adam:    m = b1*m + (1-b1)*u;  v = b2*v + (1-b2)*u^2;
///            bias-correct both by the step count;
///            x -= eta * m_hat / (sqrt(v_hat) + tau)
class ServerOptimizer {
 public:
  ServerOptimizer(const ServerOptimizerConfig& config, std::size_t dim);

  void apply(std::vector<double>& x, std::span<const double> update);

  const ServerOptimizerConfig& config() const { return config_; }
  std::int64_t step_count() const { return steps_; }
  const std::vector<double>& accumulator() const { return accum_; }
  const std::vector<double>& momentum() const { return momentum_; }

 private:
  ServerOptimizerConfig config_;
  std::vector<double> accum_;     // v
  std::vector<double> momentum_;  // m (Adam only)
  std::int64_t steps_ = 0;
};

}  // namespace fedselect
