// Copyright 2026 The coeforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// coeforge command-line tool. Talks to the library only through the C API.

#include <coeforge/coeforge.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

using json = nlohmann::json;

namespace {

struct RewardFlags {
  std::string config_path;
  std::string encoder;
  std::optional<double> tau, delta, epsilon, gamma, iou_at;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> concurrency;
  std::optional<std::string> ablate;
  bool strict = false;
};

void add_reward_flags(CLI::App* cmd, RewardFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--encoder", f.encoder, "Encoder endpoint URL or mock:<dim>");
  cmd->add_option("--tau", f.tau, "Step similarity threshold");
  cmd->add_option("--delta", f.delta, "Max pairwise overlap threshold");
  cmd->add_option("--epsilon", f.epsilon, "Accuracy gate");
  cmd->add_option("--gamma", f.gamma, "Cold-start recall threshold");
  cmd->add_option("--iou-at", f.iou_at, "Grounding IoU threshold");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--concurrency", f.concurrency, "Worker pool size")->check(CLI::PositiveNumber);
  cmd->add_option("--ablate", f.ablate, "Comma list of acc|step|ground|format to zero");
  cmd->add_flag("--strict-answer-in-chain", f.strict,
                "Reject answers whose box is not among the step boxes");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Defaults < config file < flags; COEFORGE_ENCODER beats --encoder.
json effective_config(const RewardFlags& f) {
  json cfg = json::object();
  if (!f.config_path.empty()) {
    cfg = json::parse(read_file(f.config_path), nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) {
      throw std::runtime_error("config file " + f.config_path + " is not a JSON object");
    }
  }
  auto set_reward = [&](const char* key, const json& v) { cfg["reward"][key] = v; };
  if (f.tau) set_reward("tau", *f.tau);
  if (f.delta) set_reward("delta", *f.delta);
  if (f.epsilon) set_reward("epsilon", *f.epsilon);
  if (f.gamma) set_reward("gamma", *f.gamma);
  if (f.iou_at) set_reward("iou_at", *f.iou_at);
  if (f.strict) set_reward("strict_answer_in_chain", true);
  if (!f.encoder.empty()) cfg["encoder"] = f.encoder;
  if (const char* env = std::getenv("COEFORGE_ENCODER"); env != nullptr && *env != '\0') {
    cfg["encoder"] = env;
  }
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.concurrency) cfg["concurrency"] = *f.concurrency;
  if (f.ablate) cfg["ablate"] = *f.ablate;
  return cfg;
}

int report(coe_status status) {
  if (status == COE_OK) return 0;
  std::cerr << "coeforge: " << coe_status_name(status) << ": " << coe_last_error_message() << "\n";
  return status == COE_PROVIDER_UNAVAILABLE ? 2 : 1;
}

class Engine {
 public:
  explicit Engine(const json& cfg) { status_ = coe_engine_create(cfg.dump().c_str(), &engine_); }
  ~Engine() { coe_engine_destroy(engine_); }
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  coe_status status() const { return status_; }
  const coe_engine* get() const { return engine_; }

 private:
  coe_engine* engine_ = nullptr;
  coe_status status_ = COE_OK;
};

// Runs fn(engine, &exit_code) and folds library failures into exit codes.
template <typename Fn>
int with_engine(const RewardFlags& flags, Fn&& fn) {
  json cfg;
  try {
    cfg = effective_config(flags);
  } catch (const std::exception& err) {
    std::cerr << "coeforge: " << err.what() << "\n";
    return 1;
  }
  Engine engine(cfg);
  if (engine.status() != COE_OK) return report(engine.status());
  int exit_code = 0;
  const coe_status status = fn(engine.get(), &exit_code);
  if (status != COE_OK) return report(status);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-of-Evidence reward scoring, evaluation and simulation"};
  app.set_version_flag("--version", std::string(coe_version()));
  app.require_subcommand(1);

  RewardFlags flags;
  std::string dataset, predictions, out;

  auto* score = app.add_subcommand("score", "Reward breakdown per prediction");
  auto* evaluate = app.add_subcommand("evaluate", "EM, IoU@0.5, SA and no-answer metrics");
  for (auto* cmd : {score, evaluate}) {
    cmd->add_option("--dataset", dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--predictions", predictions, "Predictions JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output file")->required();
    add_reward_flags(cmd, flags);
  }

  std::string candidates, rejections;
  auto* filter = app.add_subcommand("filter", "Cold-start recall filter");
  filter->add_option("--candidates", candidates, "Candidate JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  filter->add_option("--out", out, "Retained candidates JSONL")->required();
  filter->add_option("--rejections", rejections, "Rejection log (default: <out>.rejections)");
  add_reward_flags(filter, flags);

  std::string sources, retrievals;
  int m = 3;
  double prob = 0.2;
  auto* build = app.add_subcommand("build-candidates", "Multi-image candidate sets");
  build->add_option("--sources", sources, "Source pages JSONL")->required()->check(CLI::ExistingFile);
  build->add_option("--retrievals", retrievals, "Retrieved top-k JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--out", out, "Dataset JSONL")->required();
  build->add_option("--m", m, "Candidate set size")->capture_default_str();
  build->add_option("--prob", prob, "No-answer probability")->capture_default_str();
  build->add_option("--seed", flags.seed, "Random seed");

  std::string world;
  json sim_options = json::object();
  int steps = 500;
  std::size_t group_size = 8, encoder_dim = 256;
  double lr = 0.5, temperature = 1.0;
  auto* sim = app.add_subcommand("train-sim", "Template-policy optimization simulator");
  sim->add_option("--world", world, "World JSON (default: built-in)")->check(CLI::ExistingFile);
  sim->add_option("--out", out, "Trace JSONL")->required();
  sim->add_option("--steps", steps, "Iterations")->capture_default_str();
  sim->add_option("--group-size", group_size, "Rollouts per group")->capture_default_str();
  sim->add_option("--lr", lr, "Learning rate")->capture_default_str();
  sim->add_option("--temperature", temperature, "Softmax temperature")->capture_default_str();
  sim->add_option("--encoder-dim", encoder_dim, "Mock encoder dimension")->capture_default_str();
  add_reward_flags(sim, flags);

  auto* synth = app.add_subcommand("synth-dataset", "Write the synthetic evaluation corpus");
  synth->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  if (score->parsed()) {
    return with_engine(flags, [&](const coe_engine* e, int* rc) {
      return coe_run_score(e, dataset.c_str(), predictions.c_str(), out.c_str(), rc);
    });
  }
  if (evaluate->parsed()) {
    return with_engine(flags, [&](const coe_engine* e, int* rc) {
      return coe_run_evaluate(e, dataset.c_str(), predictions.c_str(), out.c_str(), rc);
    });
  }
  if (filter->parsed()) {
    if (rejections.empty()) rejections = out + ".rejections";
    return with_engine(flags, [&](const coe_engine* e, int* rc) {
      char* cfg_text = nullptr;
      if (const auto st = coe_engine_config(e, &cfg_text); st != COE_OK) return st;
      const double gamma = json::parse(cfg_text)["reward"]["gamma"].get<double>();
      coe_string_free(cfg_text);
      return coe_run_filter(candidates.c_str(), out.c_str(), rejections.c_str(), gamma, rc);
    });
  }
  if (build->parsed()) {
    int rc = 0;
    const auto st = coe_run_build_candidates(sources.c_str(), retrievals.c_str(), out.c_str(), m,
                                             prob, flags.seed.value_or(3407), &rc);
    return st == COE_OK ? rc : report(st);
  }
  if (sim->parsed()) {
    sim_options = {{"steps", steps},
                   {"group_size", group_size},
                   {"learning_rate", lr},
                   {"temperature", temperature},
                   {"encoder_dim", encoder_dim}};
    return with_engine(flags, [&](const coe_engine* e, int* rc) {
      return coe_run_train_sim(e, world.c_str(), out.c_str(), sim_options.dump().c_str(), rc);
    });
  }
  if (synth->parsed()) return report(coe_write_synthetic_corpus(out.c_str()));
  return 1;
}
