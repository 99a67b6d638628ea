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

#include "fedselect/optimizer.hpp"

#include <cmath>

namespace fedselect {

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adagrad") return OptimizerKind::kAdagrad;
  if (name == "adam") return OptimizerKind::kAdam;
  throw BadConfig("unknown optimizer '" + name + "'");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kAdagrad: return "adagrad";
    case OptimizerKind::kAdam: return "adam";
  }
  return "sgd";
}

ServerOptimizer::ServerOptimizer(const ServerOptimizerConfig& config,
                                 std::size_t dim)
    : config_(config) {
  if (config_.kind != OptimizerKind::kSgd) {
    if (!(config_.tau > 0.0)) throw BadConfig("adaptivity constant tau must be > 0");
    accum_.assign(dim, 0.0);
  }
  if (config_.kind == OptimizerKind::kAdam) {
    momentum_.assign(dim, 0.0);
  }
}

void ServerOptimizer::apply(std::vector<double>& x, std::span<const double> u) {
  if (x.size() != u.size()) {
    throw ShapeMismatch("server update does not match the model dimension");
  }
  if (!accum_.empty() && accum_.size() != x.size()) {
    throw ShapeMismatch("optimizer state does not match the model dimension");
  }
  const double eta = config_.lr;
  switch (config_.kind) {
    case OptimizerKind::kSgd:
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= eta * u[i];
      break;
    case OptimizerKind::kAdagrad:
      for (std::size_t i = 0; i < x.size(); ++i) {
        accum_[i] += u[i] * u[i];
        x[i] -= eta * u[i] / (std::sqrt(accum_[i]) + config_.tau);
      }
      break;
    case OptimizerKind::kAdam: {
      const double b1 = config_.beta1;
      const double b2 = config_.beta2;
      const double t = static_cast<double>(steps_ + 1);
      const double corr1 = 1.0 - std::pow(b1, t);
      const double corr2 = 1.0 - std::pow(b2, t);
      for (std::size_t i = 0; i < x.size(); ++i) {
        momentum_[i] = b1 * momentum_[i] + (1.0 - b1) * u[i];
        accum_[i] = b2 * accum_[i] + (1.0 - b2) * u[i] * u[i];
        const double m_hat = momentum_[i] / corr1;
        const double v_hat = accum_[i] / corr2;
        x[i] -= eta * m_hat / (std::sqrt(v_hat) + config_.tau);
      }
      break;
    }
  }
  ++steps_;
}

}  // namespace fedselect
