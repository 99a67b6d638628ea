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

#include "fedselect/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "fedselect/errors.hpp"

namespace fedselect {

std::string metrics_csv_string(std::vector<MetricsRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.trial, a.round, a.phase, a.metric) <
           std::tie(b.trial, b.round, b.phase, b.metric);
  });
  std::string out =
      "trial,round,phase,metric,value,scalars_down,scalars_up,psi_evals,"
      "wasted_slices,rel_model_size\n";
  char buf[64];
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.round);
    out += ',';
    out += r.phase;
    out += ',';
    out += r.metric;
    out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.value);
    out += buf;
    out += ',';
    out += std::to_string(r.scalars_down);
    out += ',';
    out += std::to_string(r.scalars_up);
    out += ',';
    out += std::to_string(r.psi_evals);
    out += ',';
    out += std::to_string(r.wasted_slices);
    out += ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.rel_model_size);
    out += buf;
    out += '\n';
  }
  return out;
}

void emit_metrics_csv(std::vector<MetricsRow> rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << metrics_csv_string(std::move(rows));
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace fedselect
