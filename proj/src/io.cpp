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

#include "coeforge/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coeforge/error.hpp"

namespace coeforge {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) { fail(ErrorCode::kSchemaError, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string string_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) schema_error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int int_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number_integer()) schema_error(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

double number_field(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) schema_error(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

bool present(const json& j, const char* key) { return j.contains(key) && !j.at(key).is_null(); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json box_to_json(const BoundingBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) schema_error("box must be an array of four numbers");
  for (const auto& v : j) {
    if (!v.is_number()) schema_error("box coordinates must be numbers");
  }
  try {
    return make_box(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                    j[3].get<double>());
  } catch (const Error& err) {
    schema_error(std::string("invalid box: ") + err.what());
  }
}

json page_to_json(const PageRef& p) {
  return json{{"page_id", p.page_id}, {"image", p.image_locator}, {"width", p.width},
              {"height", p.height}};
}

PageRef page_from_json(const json& j) {
  PageRef p{string_field(j, "page_id"), string_field(j, "image"), int_field(j, "width"),
            int_field(j, "height")};
  if (p.width <= 0 || p.height <= 0) {
    schema_error("page '" + p.page_id + "' must have positive width and height");
  }
  return p;
}

json record_to_json(const GroundTruthRecord& r) {
  json j{{"query_id", r.query_id}, {"question", r.question}, {"gold_answer", r.gold_answer}};
  if (r.gold_page_index) j["gold_page_index"] = *r.gold_page_index;
  if (r.gold_box) j["gold_box"] = box_to_json(*r.gold_box);
  json pages = json::array();
  for (const auto& p : r.pages) pages.push_back(page_to_json(p));
  j["pages"] = std::move(pages);
  j["pos_idx"] = r.pos_idx;
  return j;
}

GroundTruthRecord record_from_json(const json& j) {
  if (!j.is_object()) schema_error("record must be a JSON object");
  GroundTruthRecord r;
  r.query_id = string_field(j, "query_id");
  try {
    r.question = string_field(j, "question");
    r.gold_answer = string_field(j, "gold_answer");
    if (present(j, "gold_page_index")) r.gold_page_index = int_field(j, "gold_page_index");
    if (present(j, "gold_box")) r.gold_box = box_from_json(j.at("gold_box"));
    const auto& pages = field(j, "pages");
    if (!pages.is_array()) schema_error("pages must be an array");
    for (const auto& p : pages) r.pages.push_back(page_from_json(p));
    r.pos_idx = int_field(j, "pos_idx");
  } catch (const Error& err) {
    schema_error("record '" + r.query_id + "': " + err.what());
  }
  r.validate();
  return r;
}

json breakdown_to_json(const RewardBreakdown& b) {
  json steps = json::array();
  for (const auto& s : b.per_step_scores) steps.push_back({{"step", s.step}, {"cosine", s.cosine}});
  return json{{"r_acc", b.r_acc},
              {"r_step", b.r_step},
              {"r_ground", b.r_ground},
              {"r_format", b.r_format},
              {"total", b.total},
              {"s_min", optional_number(b.s_min)},
              {"i_max", optional_number(b.i_max)},
              {"per_step_scores", std::move(steps)}};
}

RewardBreakdown breakdown_from_json(const json& j) {
  RewardBreakdown b;
  b.r_acc = number_field(j, "r_acc");
  b.r_step = number_field(j, "r_step");
  b.r_ground = number_field(j, "r_ground");
  b.r_format = number_field(j, "r_format");
  b.total = number_field(j, "total");
  if (present(j, "s_min")) b.s_min = number_field(j, "s_min");
  if (present(j, "i_max")) b.i_max = number_field(j, "i_max");
  if (j.contains("per_step_scores")) {
    for (const auto& s : j.at("per_step_scores")) {
      b.per_step_scores.push_back(
          {static_cast<std::size_t>(int_field(s, "step")), number_field(s, "cosine")});
    }
  }
  return b;
}

json evidence_to_json(const EvidenceRef& ref) {
  return json{{"bbox_2d", box_to_json(ref.box)}, {"image_index", ref.page_index}};
}

json trajectory_to_json(const CoETrajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json ev = json::array();
    for (const auto& e : s.evidence) ev.push_back(evidence_to_json(e));
    steps.push_back({{"text", s.text}, {"evidence", std::move(ev)}});
  }
  return json{{"steps", std::move(steps)},
              {"answer", t.answer_text},
              {"answer_evidence", t.answer_evidence ? evidence_to_json(*t.answer_evidence) : json(nullptr)},
              {"format_ok", t.format_ok}};
}

json config_to_json(const RewardConfig& c) {
  return json{{"tau", c.tau},
              {"delta", c.delta},
              {"epsilon", c.epsilon},
              {"gamma", c.gamma},
              {"iou_at", c.iou_at},
              {"weights",
               {{"acc", c.weights.acc},
                {"step", c.weights.step},
                {"ground", c.weights.ground},
                {"format", c.weights.format}}},
              {"strict_answer_in_chain", c.strict_answer_in_chain}};
}

RewardConfig config_from_json(const json& j, RewardConfig c) {
  if (!j.is_object()) schema_error("reward config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "tau") {
      c.tau = number_field(j, "tau");
    } else if (key == "delta") {
      c.delta = number_field(j, "delta");
    } else if (key == "epsilon") {
      c.epsilon = number_field(j, "epsilon");
    } else if (key == "gamma") {
      c.gamma = number_field(j, "gamma");
    } else if (key == "iou_at") {
      c.iou_at = number_field(j, "iou_at");
    } else if (key == "strict_answer_in_chain") {
      if (!value.is_boolean()) schema_error("strict_answer_in_chain must be a boolean");
      c.strict_answer_in_chain = value.get<bool>();
    } else if (key == "weights") {
      if (!value.is_object()) schema_error("weights must be an object");
      if (value.contains("acc")) c.weights.acc = number_field(value, "acc");
      if (value.contains("step")) c.weights.step = number_field(value, "step");
      if (value.contains("ground")) c.weights.ground = number_field(value, "ground");
      if (value.contains("format")) c.weights.format = number_field(value, "format");
    } else {
      schema_error("unknown reward config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::string to_jsonl(std::string_view schema_tag, const std::vector<json>& rows) {
  std::string out = json{{"schema", schema_tag}}.dump();
  out.push_back('\n');
  for (const auto& row : rows) {
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<json> parse_jsonl(std::string_view text, std::string_view schema_tag,
                              std::string_view source_name) {
  std::vector<json> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    auto parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      schema_error(where + ": line is not a JSON object");
    }
    if (!header_seen) {
      if (!parsed.contains("schema") || parsed.at("schema") != schema_tag) {
        schema_error(where + ": expected schema tag {\"schema\": \"" + std::string(schema_tag) +
                     "\"}");
      }
      header_seen = true;
      continue;
    }
    rows.push_back(std::move(parsed));
  }
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path);
}

std::vector<json> read_jsonl(const std::string& path, std::string_view schema_tag) {
  return parse_jsonl(read_text_file(path), schema_tag, path);
}

std::vector<GroundTruthRecord> read_dataset(const std::string& path, bool resolve_images) {
  const auto rows = read_jsonl(path, schema::kDataset);
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<GroundTruthRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    GroundTruthRecord rec;
    try {
      rec = record_from_json(rows[i]);
    } catch (const Error& err) {
      schema_error(path + ": record " + std::to_string(i + 1) + ": " + err.what());
    }
    if (resolve_images) {
      for (auto& page : rec.pages) {
        const auto& loc = page.image_locator;
        const bool has_scheme = loc.find("://") != std::string::npos || loc.rfind("sha256:", 0) == 0;
        if (!loc.empty() && !has_scheme && std::filesystem::path(loc).is_relative()) {
          page.image_locator = (base / loc).lexically_normal().string();
        }
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string dataset_to_jsonl(const std::vector<GroundTruthRecord>& records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(record_to_json(r));
  return to_jsonl(schema::kDataset, rows);
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::vector<PredictionRecord> out;
  for (const auto& row : read_jsonl(path, schema::kPredictions)) {
    out.push_back({string_field(row, "query_id"), string_field(row, "response")});
  }
  return out;
}

std::string predictions_to_jsonl(const std::vector<PredictionRecord>& predictions) {
  std::vector<json> rows;
  for (const auto& p : predictions) rows.push_back({{"query_id", p.query_id}, {"response", p.response}});
  return to_jsonl(schema::kPredictions, rows);
}

}  // namespace coeforge
