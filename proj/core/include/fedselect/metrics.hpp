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
#include <string>
#include <vector>

namespace fedselect {

/// One emitted measurement. Counter columns carry the owning round's
/// accounting; rel_model_size is peak client parameters over the server
/// model size.
struct MetricsRow {
  std::size_t trial = 0;
  std::size_t round = 0;
  std::string phase;   // "train" | "eval" | "test"
  std::string metric;  // e.g. "train_loss", "recall_at_5", "accuracy"
  double value = 0.0;
  std::uint64_t scalars_down = 0;
  std::uint64_t scalars_up = 0;
  std::uint64_t psi_evals = 0;
  std::uint64_t wasted_slices = 0;
  double rel_model_size = 0.0;
};

/// CSV rendering with the fixed header
/// trial,round,phase,metric,value,scalars_down,scalars_up,psi_evals,wasted_slices,rel_model_size
/// Rows are sorted by (trial, round, phase, metric); floats print with 17
/// significant digits so a replayed run is byte-identical.
std::string metrics_csv_string(std::vector<MetricsRow> rows);

/// Writes the CSV, replacing any existing file.
void emit_metrics_csv(std::vector<MetricsRow> rows, const std::string& path);

}  // namespace fedselect
