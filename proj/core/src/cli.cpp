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

#include "fedselect/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fedselect/experiment_config.hpp"
#include "fedselect/metrics.hpp"
#include "fedselect/training.hpp"

namespace fedselect {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Deterministic federated-learning simulator with keyed model slicing"};
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON experiment configuration")
      ->required();
  auto* seed_opt = app.add_option("--seed", seed, "override training.seed");
  auto* rounds_opt = app.add_option("--rounds", rounds, "override training.rounds");
  auto* out_opt = app.add_option("--output-dir", output_dir, "override output_dir");
  app.add_flag("--quiet", quiet, "suppress progress output");

  // CLI11 parses argv-style reversed vectors.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    return app.exit(e);  // --help
  }

  ExperimentConfig cfg;
  try {
    cfg = parse_config(read_file(config_path));
    if (seed_opt->count() > 0) cfg.training.seed = seed;
    if (rounds_opt->count() > 0) cfg.training.rounds = rounds;
    if (out_opt->count() > 0) cfg.output_dir = output_dir;
    validate_config(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    std::filesystem::create_directories(cfg.output_dir);
    {
      std::ofstream out(std::filesystem::path(cfg.output_dir) /
                            "config.resolved.json",
                        std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write resolved config");
      out << resolved_config_json(cfg);
    }

    if (!quiet) {
      std::cout << "task=" << to_string(cfg.task.kind)
                << " model=" << to_string(cfg.model.kind)
                << " plan=" << to_string(cfg.selection.plan)
                << " strategy=" << to_string(cfg.selection.strategy)
                << " rounds=" << cfg.training.rounds
                << " trials=" << cfg.training.trials << "\n";
    }

    const std::vector<MetricsRow> rows = run_experiment(cfg);
    const std::string csv_path =
        (std::filesystem::path(cfg.output_dir) / "metrics.csv").string();
    emit_metrics_csv(rows, csv_path);
    if (!quiet) {
      std::cout << "wrote " << rows.size() << " rows to " << csv_path << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace fedselect
