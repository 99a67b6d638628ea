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

#include "fedselect/experiment_config.hpp"

#include <set>
#include <string>

#include <json.hpp>

namespace fedselect {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw BadConfig("'" + path + "' must be a JSON object");
}

void reject_unknown(const json& j, const std::string& prefix,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw UnknownKey(prefix.empty() ? key : prefix + "." + key);
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw BadConfig(std::string("config key '") + key + "' has the wrong type");
  }
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "synthetic_tag") return TaskKind::kSyntheticTag;
  if (s == "synthetic_dense") return TaskKind::kSyntheticDense;
  if (s == "shards") return TaskKind::kShards;
  throw BadConfig("unknown task kind '" + s + "'");
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "sparse_logreg") return ModelKind::kSparseLogReg;
  if (s == "mlp") return ModelKind::kMlp;
  throw BadConfig("unknown model kind '" + s + "'");
}

PlanKind plan_kind_from_string(const std::string& s) {
  if (s == "full_model") return PlanKind::kFullModel;
  if (s == "row_select") return PlanKind::kRowSelect;
  if (s == "neuron_select") return PlanKind::kNeuronSelect;
  if (s == "mixed_rows") return PlanKind::kMixedRows;
  throw BadConfig("unknown plan kind '" + s + "'");
}

StrategyKind strategy_kind_from_string(const std::string& s) {
  if (s == "none") return StrategyKind::kNone;
  if (s == "top_m") return StrategyKind::kTopM;
  if (s == "random_from_local") return StrategyKind::kRandomFromLocal;
  if (s == "random_top") return StrategyKind::kRandomTop;
  if (s == "uniform_random") return StrategyKind::kUniformRandom;
  if (s == "mixed") return StrategyKind::kMixed;
  throw BadConfig("unknown strategy kind '" + s + "'");
}

CacheScope cache_scope_from_string(const std::string& s) {
  if (s == "none") return CacheScope::kNone;
  if (s == "per_round") return CacheScope::kPerRound;
  throw BadConfig("unknown cache scope '" + s + "'");
}

void parse_task(const json& j, TaskConfig& task) {
  require_object(j, "task");
  std::string kind = "synthetic_tag";
  read(j, "kind", kind);
  task.kind = task_kind_from_string(kind);

  switch (task.kind) {
    case TaskKind::kSyntheticTag: {
      reject_unknown(j, "task",
                     {"kind", "clients", "vocab", "tags", "min_examples",
                      "max_examples", "min_words", "max_words", "zipf_exponent",
                      "topics", "topics_per_client", "label_noise", "single_label",
                      "valid_fraction", "test_fraction", "seed"});
      auto& t = task.tag;
      read(j, "clients", t.clients);
      read(j, "vocab", t.vocab);
      read(j, "tags", t.tags);
      read(j, "min_examples", t.min_examples);
      read(j, "max_examples", t.max_examples);
      read(j, "min_words", t.min_words);
      read(j, "max_words", t.max_words);
      read(j, "zipf_exponent", t.zipf_exponent);
      read(j, "topics", t.topics);
      read(j, "topics_per_client", t.topics_per_client);
      read(j, "label_noise", t.label_noise);
      read(j, "single_label", t.single_label);
      read(j, "valid_fraction", t.valid_fraction);
      read(j, "test_fraction", t.test_fraction);
      read(j, "seed", t.seed);
      break;
    }
    case TaskKind::kSyntheticDense: {
      reject_unknown(j, "task",
                     {"kind", "clients", "dim", "classes", "min_examples",
                      "max_examples", "cluster_spread", "cluster_separation",
                      "heterogeneity", "valid_fraction", "test_fraction", "seed"});
      auto& d = task.dense;
      read(j, "clients", d.clients);
      read(j, "dim", d.dim);
      read(j, "classes", d.classes);
      read(j, "min_examples", d.min_examples);
      read(j, "max_examples", d.max_examples);
      read(j, "cluster_spread", d.cluster_spread);
      read(j, "cluster_separation", d.cluster_separation);
      read(j, "heterogeneity", d.heterogeneity);
      read(j, "valid_fraction", d.valid_fraction);
      read(j, "test_fraction", d.test_fraction);
      read(j, "seed", d.seed);
      break;
    }
    case TaskKind::kShards: {
      reject_unknown(j, "task", {"kind", "path"});
      read(j, "path", task.shard_path);
      if (task.shard_path.empty()) {
        throw BadConfig("task.path is required for the shards task");
      }
      break;
    }
  }
}

void parse_model(const json& j, ModelConfig& model) {
  require_object(j, "model");
  reject_unknown(j, "model", {"kind", "hidden"});
  std::string kind = "sparse_logreg";
  read(j, "kind", kind);
  model.kind = model_kind_from_string(kind);
  read(j, "hidden", model.hidden);
}

void parse_selection(const json& j, SelectionConfig& sel) {
  require_object(j, "selection");
  reject_unknown(j, "selection", {"plan", "strategy", "m", "alpha", "shared_per_round"});
  std::string plan = "full_model";
  std::string strategy = "none";
  read(j, "plan", plan);
  read(j, "strategy", strategy);
  sel.plan = plan_kind_from_string(plan);
  sel.strategy = strategy_kind_from_string(strategy);
  read(j, "m", sel.m);
  read(j, "alpha", sel.alpha);
  read(j, "shared_per_round", sel.shared_per_round);
}

void parse_training(const json& j, TrainingConfig& tr) {
  require_object(j, "training");
  reject_unknown(j, "training",
                 {"rounds", "cohort_size", "client_lr", "server_lr", "optimizer",
                  "tau", "beta1", "beta2", "epochs", "batch_size", "eval_every",
                  "trials", "seed", "recall_k", "per_key_normalization",
                  "weight_by_examples"});
  read(j, "rounds", tr.rounds);
  read(j, "cohort_size", tr.cohort_size);
  read(j, "client_lr", tr.client_lr);
  read(j, "server_lr", tr.optimizer.lr);
  if (j.contains("optimizer")) {
    std::string opt;
    read(j, "optimizer", opt);
    tr.optimizer.kind = optimizer_kind_from_string(opt);
  }
  read(j, "tau", tr.optimizer.tau);
  read(j, "beta1", tr.optimizer.beta1);
  read(j, "beta2", tr.optimizer.beta2);
  read(j, "epochs", tr.epochs);
  read(j, "batch_size", tr.batch_size);
  read(j, "eval_every", tr.eval_every);
  read(j, "trials", tr.trials);
  read(j, "seed", tr.seed);
  read(j, "recall_k", tr.recall_k);
  read(j, "per_key_normalization", tr.per_key_normalization);
  read(j, "weight_by_examples", tr.weight_by_examples);
}

void parse_delivery(const json& j, DeliveryMode& mode) {
  require_object(j, "delivery");
  reject_unknown(j, "delivery", {"mode", "cache"});
  if (j.contains("mode")) {
    std::string m;
    read(j, "mode", m);
    mode.kind = delivery_kind_from_string(m);
  }
  if (j.contains("cache")) {
    std::string c;
    read(j, "cache", c);
    mode.cache = cache_scope_from_string(c);
  }
}

bool sparse_task(const ExperimentConfig& cfg) {
  // Shard datasets declare their kind at load time; treat them as
  // sparse-capable here and re-validate once loaded.
  return cfg.task.kind != TaskKind::kSyntheticDense;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  const auto& sel = cfg.selection;
  const auto& tr = cfg.training;

  if (tr.rounds < 1) throw BadConfig("training.rounds must be >= 1");
  if (tr.cohort_size < 1) throw BadConfig("training.cohort_size must be >= 1");
  if (tr.trials < 1) throw BadConfig("training.trials must be >= 1");
  if (tr.epochs < 1) throw BadConfig("training.epochs must be >= 1");
  if (tr.batch_size < 1) throw BadConfig("training.batch_size must be >= 1");
  if (tr.eval_every < 1) throw BadConfig("training.eval_every must be >= 1");
  if (!(tr.client_lr >= 0.0)) throw BadConfig("training.client_lr must be >= 0");

  if (cfg.model.kind == ModelKind::kSparseLogReg &&
      cfg.task.kind == TaskKind::kSyntheticDense) {
    throw ConfigConflict("sparse_logreg needs a sparse task");
  }
  if (cfg.model.kind == ModelKind::kMlp && cfg.model.hidden < 1) {
    throw BadConfig("model.hidden must be >= 1");
  }

  switch (sel.strategy) {
    case StrategyKind::kNone:
      if (sel.plan != PlanKind::kFullModel) {
        throw ConfigConflict("strategy 'none' trains without select; plan must be full_model");
      }
      break;
    case StrategyKind::kTopM:
    case StrategyKind::kRandomFromLocal:
    case StrategyKind::kRandomTop:
      if (!sparse_task(cfg) || cfg.model.kind != ModelKind::kSparseLogReg) {
        throw ConfigConflict("structured key strategies need a sparse task and the sparse_logreg model");
      }
      if (sel.plan != PlanKind::kRowSelect) {
        throw ConfigConflict("structured key strategies need the row_select plan");
      }
      if (sel.m < 1) throw ConfigConflict("selection.m must be >= 1");
      break;
    case StrategyKind::kUniformRandom:
      if (sel.plan == PlanKind::kMixedRows) {
        throw ConfigConflict("uniform_random does not drive the mixed_rows plan");
      }
      if (sel.plan == PlanKind::kNeuronSelect && cfg.model.kind != ModelKind::kMlp) {
        throw ConfigConflict("neuron_select needs the mlp model");
      }
      if (sel.plan == PlanKind::kRowSelect &&
          cfg.model.kind != ModelKind::kSparseLogReg) {
        throw ConfigConflict("row_select needs the sparse_logreg model");
      }
      if (sel.plan == PlanKind::kFullModel) {
        if (sel.m > 1) {
          throw ConfigConflict("the full_model plan has a single key; m must be 1");
        }
      } else if (sel.m < 1) {
        throw ConfigConflict("selection.m must be >= 1");
      }
      break;
    case StrategyKind::kMixed:
      if (sel.plan != PlanKind::kMixedRows) {
        throw ConfigConflict("strategy 'mixed' needs the mixed_rows plan");
      }
      if (cfg.model.kind != ModelKind::kMlp || !sparse_task(cfg)) {
        throw ConfigConflict("mixed selection needs the mlp model on a sparse task");
      }
      if (cfg.task.kind == TaskKind::kSyntheticTag && !cfg.task.tag.single_label) {
        throw ConfigConflict("mixed selection trains a softmax head; set task.single_label");
      }
      if (!(sel.alpha > 0.0) || sel.alpha > 1.0) {
        throw ConfigConflict("selection.alpha must lie in (0, 1]");
      }
      break;
  }

  if (sel.plan == PlanKind::kNeuronSelect &&
      (cfg.model.kind != ModelKind::kMlp ||
       cfg.task.kind == TaskKind::kSyntheticTag)) {
    if (cfg.model.kind != ModelKind::kMlp) {
      throw ConfigConflict("neuron_select needs the mlp model");
    }
    throw ConfigConflict("neuron_select needs a dense task");
  }
  if (sel.plan == PlanKind::kRowSelect && cfg.model.kind != ModelKind::kSparseLogReg) {
    throw ConfigConflict("row_select needs the sparse_logreg model");
  }
  if (sel.plan != PlanKind::kFullModel && sel.strategy == StrategyKind::kNone) {
    throw ConfigConflict("a select plan needs a key strategy");
  }
  if (sel.shared_per_round && sel.strategy != StrategyKind::kUniformRandom) {
    throw ConfigConflict("shared_per_round applies to uniform_random selection only");
  }
  if (tr.weight_by_examples && tr.per_key_normalization) {
    throw ConfigConflict(
        "weight_by_examples and per_key_normalization cannot combine");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw BadConfig(std::string("config is not valid JSON: ") + e.what());
  }
  require_object(j, "config");
  reject_unknown(j, "", {"task", "model", "selection", "training", "delivery",
                         "output_dir"});

  ExperimentConfig cfg;
  if (j.contains("task")) parse_task(j.at("task"), cfg.task);
  if (j.contains("model")) parse_model(j.at("model"), cfg.model);
  if (j.contains("selection")) parse_selection(j.at("selection"), cfg.selection);
  if (j.contains("training")) parse_training(j.at("training"), cfg.training);
  if (j.contains("delivery")) parse_delivery(j.at("delivery"), cfg.delivery);
  read(j, "output_dir", cfg.output_dir);

  // The full-model plan has exactly one key; default m accordingly.
  if (cfg.selection.plan == PlanKind::kFullModel &&
      cfg.selection.strategy != StrategyKind::kNone && cfg.selection.m == 0) {
    cfg.selection.m = 1;
  }

  validate_config(cfg);
  return cfg;
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kSyntheticTag: return "synthetic_tag";
    case TaskKind::kSyntheticDense: return "synthetic_dense";
    case TaskKind::kShards: return "shards";
  }
  return "synthetic_tag";
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kSparseLogReg ? "sparse_logreg" : "mlp";
}

std::string to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::kFullModel: return "full_model";
    case PlanKind::kRowSelect: return "row_select";
    case PlanKind::kNeuronSelect: return "neuron_select";
    case PlanKind::kMixedRows: return "mixed_rows";
  }
  return "full_model";
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kNone: return "none";
    case StrategyKind::kTopM: return "top_m";
    case StrategyKind::kRandomFromLocal: return "random_from_local";
    case StrategyKind::kRandomTop: return "random_top";
    case StrategyKind::kUniformRandom: return "uniform_random";
    case StrategyKind::kMixed: return "mixed";
  }
  return "none";
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
  json j;
  json task;
  task["kind"] = to_string(cfg.task.kind);
  switch (cfg.task.kind) {
    case TaskKind::kSyntheticTag: {
      const auto& t = cfg.task.tag;
      task["clients"] = t.clients;
      task["vocab"] = t.vocab;
      task["tags"] = t.tags;
      task["min_examples"] = t.min_examples;
      task["max_examples"] = t.max_examples;
      task["min_words"] = t.min_words;
      task["max_words"] = t.max_words;
      task["zipf_exponent"] = t.zipf_exponent;
      task["topics"] = t.topics;
      task["topics_per_client"] = t.topics_per_client;
      task["label_noise"] = t.label_noise;
      task["single_label"] = t.single_label;
      task["valid_fraction"] = t.valid_fraction;
      task["test_fraction"] = t.test_fraction;
      task["seed"] = t.seed;
      break;
    }
    case TaskKind::kSyntheticDense: {
      const auto& d = cfg.task.dense;
      task["clients"] = d.clients;
      task["dim"] = d.dim;
      task["classes"] = d.classes;
      task["min_examples"] = d.min_examples;
      task["max_examples"] = d.max_examples;
      task["cluster_spread"] = d.cluster_spread;
      task["cluster_separation"] = d.cluster_separation;
      task["heterogeneity"] = d.heterogeneity;
      task["valid_fraction"] = d.valid_fraction;
      task["test_fraction"] = d.test_fraction;
      task["seed"] = d.seed;
      break;
    }
    case TaskKind::kShards:
      task["path"] = cfg.task.shard_path;
      break;
  }
  j["task"] = task;

  j["model"]["kind"] = to_string(cfg.model.kind);
  if (cfg.model.kind == ModelKind::kMlp) j["model"]["hidden"] = cfg.model.hidden;

  j["selection"]["plan"] = to_string(cfg.selection.plan);
  j["selection"]["strategy"] = to_string(cfg.selection.strategy);
  j["selection"]["m"] = cfg.selection.m;
  j["selection"]["alpha"] = cfg.selection.alpha;
  j["selection"]["shared_per_round"] = cfg.selection.shared_per_round;

  const auto& tr = cfg.training;
  j["training"]["rounds"] = tr.rounds;
  j["training"]["cohort_size"] = tr.cohort_size;
  j["training"]["client_lr"] = tr.client_lr;
  j["training"]["server_lr"] = tr.optimizer.lr;
  j["training"]["optimizer"] = to_string(tr.optimizer.kind);
  j["training"]["tau"] = tr.optimizer.tau;
  j["training"]["beta1"] = tr.optimizer.beta1;
  j["training"]["beta2"] = tr.optimizer.beta2;
  j["training"]["epochs"] = tr.epochs;
  j["training"]["batch_size"] = tr.batch_size;
  j["training"]["eval_every"] = tr.eval_every;
  j["training"]["trials"] = tr.trials;
  j["training"]["seed"] = tr.seed;
  j["training"]["recall_k"] = tr.recall_k;
  j["training"]["per_key_normalization"] = tr.per_key_normalization;
  j["training"]["weight_by_examples"] = tr.weight_by_examples;

  j["delivery"]["mode"] = to_string(cfg.delivery.kind);
  j["delivery"]["cache"] =
      cfg.delivery.cache == CacheScope::kPerRound ? "per_round" : "none";

  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace fedselect
