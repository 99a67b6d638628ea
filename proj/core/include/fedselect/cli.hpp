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

namespace fedselect {

/// Runs one experiment from the command line:
///   --config PATH      required JSON configuration
///   --seed N           overrides training.seed
///   --rounds N         overrides training.rounds
///   --output-dir PATH  overrides output_dir
///   --quiet            suppresses progress output
/// Writes metrics.csv and config.resolved.json into the output directory.
/// Returns 0 on success, 1 on configuration errors, 2 on runtime errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace fedselect
