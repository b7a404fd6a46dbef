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

#include "coeforge/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coeforge/error.hpp"
#include "coeforge/io.hpp"
#include "coeforge/parser.hpp"

namespace coeforge {

using json = nlohmann::json;

GroupAdvantage group_advantage(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    fail(ErrorCode::kGroupTooSmall,
         "group advantage needs at least 2 rewards, got " + std::to_string(rewards.size()));
  }
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);

  GroupAdvantage out;
  out.advantages.assign(rewards.size(), 0.0);
  if (sd < kDegenerateStd) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out.advantages[i] = (rewards[i] - mean) / sd;
  return out;
}

std::string_view template_kind_name(TemplateKind kind) noexcept {
  switch (kind) {
    case TemplateKind::kGroundedCorrect: return "grounded_correct";
    case TemplateKind::kUngroundedCorrect: return "ungrounded_correct";
    case TemplateKind::kDuplicatedBox: return "duplicated_box";
    case TemplateKind::kWrongAnswer: return "wrong_answer";
    case TemplateKind::kMalformed: return "malformed";
  }
  return "unknown";
}

TemplateKind parse_template_kind(std::string_view name) {
  for (auto k : {TemplateKind::kGroundedCorrect, TemplateKind::kUngroundedCorrect,
                 TemplateKind::kDuplicatedBox, TemplateKind::kWrongAnswer,
                 TemplateKind::kMalformed}) {
    if (template_kind_name(k) == name) return k;
  }
  fail(ErrorCode::kSchemaError, "unknown template kind '" + std::string(name) + "'");
}

std::shared_ptr<MockEncoder> SyntheticWorld::make_encoder(std::size_t dimension) const {
  auto enc = std::make_shared<MockEncoder>(dimension);
  for (const auto& page : pages) enc->register_layout(page.ref.page_id, page.regions);
  return enc;
}

std::size_t SyntheticWorld::validate(const RewardConfig& cfg, std::size_t dimension) const {
  query.validate();
  if (templates.empty()) fail(ErrorCode::kInvalidArgument, "world has no templates");
  const auto enc = make_encoder(dimension);
  std::optional<std::size_t> grounded;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    if (templates[i].kind != TemplateKind::kGroundedCorrect) continue;
    if (grounded) fail(ErrorCode::kInvalidArgument, "world has several grounded-correct templates");
    grounded = i;
  }
  if (!grounded) fail(ErrorCode::kInvalidArgument, "world lacks a grounded-correct template");
  const auto b = total_reward(templates[*grounded].response, query, *enc, cfg);
  if (b.total != 4.0) {
    fail(ErrorCode::kInvalidArgument, "grounded-correct template scores " +
                                          std::to_string(b.total) + ", expected 4");
  }
  return *grounded;
}

namespace {

CoETrajectory blueprint(std::vector<ReasoningStep> steps, std::string answer, EvidenceRef ev) {
  CoETrajectory t;
  t.steps = std::move(steps);
  t.answer_text = std::move(answer);
  t.answer_evidence = ev;
  t.format_ok = true;
  return t;
}

}  // namespace

SyntheticWorld default_world() {
  SyntheticWorld w;
  const BoundingBox title = make_box(40, 40, 760, 120);
  const BoundingBox intro = make_box(40, 160, 760, 300);
  const BoundingBox revenue = make_box(40, 340, 760, 460);
  const BoundingBox footer = make_box(40, 900, 760, 960);
  const BoundingBox staff = make_box(40, 40, 760, 200);
  const BoundingBox dividend = make_box(40, 300, 760, 420);

  const std::string title_text = "Acme Corporation Annual Report 2020";
  const std::string revenue_text =
      "Total revenue for fiscal year 2020 reached 42 million dollars up from 35 million";
  const std::string staff_text =
      "Employee headcount grew to 310 staff across four regional offices";

  w.pages.push_back({PageRef{"acme-p1", "acme-p1.png", 800, 1000},
                     {{title, title_text},
                      {intro,
                       "Acme Corporation designs industrial sensors and was founded in 1987 by "
                       "Jane Doe in Toledo Ohio"},
                      {revenue, revenue_text},
                      {footer, "Confidential internal document page 1 of 2"}}});
  w.pages.push_back({PageRef{"acme-p2", "acme-p2.png", 800, 1000},
                     {{staff, staff_text},
                      {dividend, "Board members approved a dividend of 3 cents per share"}}});

  std::vector<PageRef> refs;
  for (const auto& p : w.pages) refs.push_back(p.ref);
  w.query = make_answerable("acme-revenue-2020",
                            "What was the total revenue of Acme in fiscal year 2020?",
                            "42 million dollars", revenue, refs, 0);

  auto add = [&](std::string name, TemplateKind kind, const CoETrajectory& t) {
    w.templates.push_back({std::move(name), kind, serialize_trajectory(t)});
  };
  add("grounded_correct", TemplateKind::kGroundedCorrect,
      blueprint({{title_text, {{1, title}}},
                 {revenue_text, {{1, revenue}}},
                 {"Therefore the revenue in 2020 was 42 million dollars", {}}},
                "42 million dollars", {1, revenue}));
  // Right answer and answer box; the step boxes point at unrelated regions.
  add("ungrounded_correct", TemplateKind::kUngroundedCorrect,
      blueprint({{title_text, {{1, footer}}},
                 {revenue_text, {{2, staff}}},
                 {"Therefore the revenue in 2020 was 42 million dollars", {}}},
                "42 million dollars", {1, revenue}));
  // Repeats one box across steps and answers from it.
  add("duplicated_box", TemplateKind::kDuplicatedBox,
      blueprint({{title_text, {{1, title}}},
                 {"The report title reads Acme Corporation Annual Report 2020", {{1, title}}},
                 {"Therefore the revenue in 2020 was 42 million dollars", {}}},
                "42 million dollars", {1, title}));
  add("wrong_answer", TemplateKind::kWrongAnswer,
      blueprint({{title_text, {{1, title}}}, {staff_text, {{2, staff}}}}, "310 staff",
                {2, staff}));
  w.templates.push_back(
      {"malformed", TemplateKind::kMalformed,
       "<think>Revenue is on the first page {\"bbox_2d\": [40, 340, 760, 460], "
       "\"image_index\": 1}\n<answer>42 million dollars</answer>"});
  return w;
}

json world_to_json(const SyntheticWorld& w) {
  json pages = json::array();
  for (const auto& p : w.pages) {
    json regions = json::array();
    for (const auto& r : p.regions) regions.push_back({{"box", box_to_json(r.box)}, {"text", r.text}});
    json page = page_to_json(p.ref);
    page["regions"] = std::move(regions);
    pages.push_back(std::move(page));
  }
  json templates = json::array();
  for (const auto& t : w.templates) {
    templates.push_back(
        {{"name", t.name}, {"kind", template_kind_name(t.kind)}, {"response", t.response}});
  }
  return json{{"schema", schema::kWorld},
              {"pages", std::move(pages)},
              {"query", record_to_json(w.query)},
              {"templates", std::move(templates)}};
}

SyntheticWorld world_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema::kWorld) {
    fail(ErrorCode::kSchemaError, "world file must carry schema " + std::string(schema::kWorld));
  }
  SyntheticWorld w;
  try {
    for (const auto& p : j.at("pages")) {
      SyntheticPage page{page_from_json(p), {}};
      for (const auto& r : p.at("regions")) {
        page.regions.push_back({box_from_json(r.at("box")), r.at("text").get<std::string>()});
      }
      w.pages.push_back(std::move(page));
    }
    w.query = record_from_json(j.at("query"));
    for (const auto& t : j.at("templates")) {
      w.templates.push_back({t.at("name").get<std::string>(),
                             parse_template_kind(t.at("kind").get<std::string>()),
                             t.at("response").get<std::string>()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaError, std::string("malformed world file: ") + e.what());
  }
  return w;
}

TemplatePolicy::TemplatePolicy(std::size_t n_templates, double temperature)
    : logits_(n_templates, 0.0), temperature_(temperature) {
  if (n_templates == 0) fail(ErrorCode::kInvalidArgument, "policy needs at least one template");
  if (!(temperature > 0.0)) fail(ErrorCode::kInvalidArgument, "temperature must be positive");
}

std::vector<double> TemplatePolicy::probabilities() const {
  const double peak = *std::max_element(logits_.begin(), logits_.end());
  std::vector<double> p(logits_.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((logits_[i] - peak) / temperature_);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

std::size_t TemplatePolicy::sample(Rng& rng) const {
  const auto p = probabilities();
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

std::size_t TemplatePolicy::modal() const {
  return static_cast<std::size_t>(
      std::distance(logits_.begin(), std::max_element(logits_.begin(), logits_.end())));
}

void TemplatePolicy::update(std::span<const std::size_t> sampled,
                            std::span<const double> advantages, double learning_rate) {
  if (sampled.size() != advantages.size() || sampled.empty()) {
    fail(ErrorCode::kInvalidArgument, "sampled/advantages size mismatch");
  }
  const auto p = probabilities();
  std::vector<double> grad(logits_.size(), 0.0);
  // d log p_i / d logit_j = (1[i == j] - p_j) / T
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    for (std::size_t j = 0; j < grad.size(); ++j) {
      const double indicator = sampled[k] == j ? 1.0 : 0.0;
      grad[j] += advantages[k] * (indicator - p[j]) / temperature_;
    }
  }
  const double scale = learning_rate / static_cast<double>(sampled.size());
  for (std::size_t j = 0; j < grad.size(); ++j) logits_[j] += scale * grad[j];
}

double SimulationTrace::sa_pass_rate_tail(std::size_t window) const {
  if (iterations.empty()) return 0.0;
  const std::size_t n = std::min(window, iterations.size());
  double sum = 0.0;
  for (std::size_t i = iterations.size() - n; i < iterations.size(); ++i) {
    sum += iterations[i].sa_pass_rate;
  }
  return sum / static_cast<double>(n);
}

SimulationTrace run_simulation(const SyntheticWorld& world, const RewardConfig& cfg,
                               const SimulationOptions& options) {
  if (options.steps < 1) fail(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (options.group_size < 2) fail(ErrorCode::kInvalidArgument, "group size must be >= 2");
  cfg.validate();
  world.validate(cfg, options.encoder_dim);
  const auto encoder = world.make_encoder(options.encoder_dim);

  SimulationTrace trace;
  for (const auto& t : world.templates) trace.template_names.push_back(t.name);

  TemplatePolicy policy(world.templates.size(), options.temperature);
  Rng rng(options.seed);
  std::vector<std::size_t> sampled(options.group_size);
  std::vector<double> rewards(options.group_size);

  for (int it = 1; it <= options.steps; ++it) {
    for (auto& s : sampled) s = policy.sample(rng);
    int sa_pass = 0;
    for (std::size_t k = 0; k < sampled.size(); ++k) {
      const auto b = total_reward(world.templates[sampled[k]].response, world.query, *encoder,
                                  cfg, options.ablation);
      rewards[k] = b.total;
      if (b.s_min && *b.s_min >= cfg.tau) ++sa_pass;
    }
    const auto adv = group_advantage(rewards);
    policy.update(sampled, adv.advantages, options.learning_rate);

    IterationRecord rec;
    rec.iteration = it;
    rec.mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                      static_cast<double>(rewards.size());
    rec.probabilities = policy.probabilities();
    rec.modal_template = policy.modal();
    rec.sampled = sampled;
    rec.sa_pass_rate = static_cast<double>(sa_pass) / static_cast<double>(sampled.size());
    trace.iterations.push_back(std::move(rec));
  }
  trace.final_probabilities = policy.probabilities();
  trace.modal_template = policy.modal();
  return trace;
}

std::string trace_to_jsonl(const SimulationTrace& trace, const SimulationOptions& options,
                           const RewardConfig& cfg) {
  std::vector<json> rows;
  rows.reserve(trace.iterations.size());
  for (const auto& rec : trace.iterations) {
    rows.push_back({{"iteration", rec.iteration},
                    {"mean_reward", rec.mean_reward},
                    {"modal_template", trace.template_names[rec.modal_template]},
                    {"probabilities", rec.probabilities},
                    {"sampled", rec.sampled},
                    {"sa_pass_rate", rec.sa_pass_rate}});
  }
  json header{{"schema", schema::kTrace},
              {"templates", trace.template_names},
              {"steps", options.steps},
              {"seed", options.seed},
              {"group_size", options.group_size},
              {"learning_rate", options.learning_rate},
              {"temperature", options.temperature},
              {"encoder", "mock:" + std::to_string(options.encoder_dim)},
              {"ablation",
               {{"acc", options.ablation.acc},
                {"step", options.ablation.step},
                {"ground", options.ablation.ground},
                {"format", options.ablation.format}}},
              {"config", config_to_json(cfg)}};
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& row : rows) {
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace coeforge
