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

#include "coeforge/parser.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <optional>

#include <json.hpp>

#include "coeforge/error.hpp"
#include "coeforge/textmatch.hpp"

namespace coeforge {
namespace {

using json = nlohmann::json;

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";
constexpr std::string_view kEvidenceKey = "bbox_2d";
constexpr std::string_view kPageKey = "image_index";

bool names_evidence(std::string_view text) {
  return text.find(kEvidenceKey) != std::string_view::npos ||
         text.find(kPageKey) != std::string_view::npos;
}
constexpr std::string_view kAnswerPrefix = "the answer is:";

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool all_ws(std::string_view s) { return std::all_of(s.begin(), s.end(), is_ws); }

// Collapses whitespace runs to one space and trims both ends.
std::string squash(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_ws(c)) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

struct Span {
  std::size_t begin;
  std::size_t end;  // one past the closing brace
};

// End of the JSON-ish object starting at s[open] == '{', honoring strings.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

std::vector<Span> find_evidence_objects(std::string_view body) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] != '{') {
      ++i;
      continue;
    }
    const auto end = balanced_end(body, i);
    if (!end) {
      // An unclosed object that names the evidence key runs to the end of the
      // body and is reported as malformed.
      if (names_evidence(body.substr(i))) {
        spans.push_back({i, body.size()});
        break;
      }
      ++i;
      continue;
    }
    if (names_evidence(body.substr(i, *end - i))) {
      spans.push_back({i, *end});
    }
    i = *end;
  }
  return spans;
}

class Parser {
 public:
  Parser(std::string_view raw, const ParseOptions& options) : raw_(raw), options_(options) {}

  ParseOutcome run() {
    out_.trajectory.raw = std::string(raw_);
    if (raw_.size() > kMaxResponseBytes) {
      fatal("ResponseTooLarge", "response exceeds 1 MiB", 0, raw_.size());
      return finish();
    }
    check_tags();

    const auto think = block(kThinkOpen, kThinkClose);
    if (think) parse_steps(*think);
    if (out_.trajectory.steps.empty()) {
      fatal("NoSteps", "think block yields zero reasoning steps", 0, 0);
    }

    const auto answer = block(kAnswerOpen, kAnswerClose);
    if (answer) {
      parse_answer(*answer);
    }

    auto& t = out_.trajectory;
    if (!t.steps.empty() && t.evidence_count() == 0) {
      warn("NoStepEvidence", "reasoning steps carry no evidence objects");
    }
    if (t.answer_evidence && !t.answer_evidence_in_chain()) {
      if (options_.strict_answer_in_chain) {
        fatal("AnswerEvidenceNotInChain", "answer box does not appear among step boxes", 0, 0);
      } else {
        warn("AnswerEvidenceNotInChain", "answer box does not appear among step boxes");
      }
    }
    return finish();
  }

 private:
  void fatal(std::string code, std::string message, std::size_t b, std::size_t e) {
    out_.diagnostics.push_back({std::move(code), Severity::kFatal, std::move(message), b, e});
  }
  void warn(std::string code, std::string message) {
    out_.diagnostics.push_back({std::move(code), Severity::kWarning, std::move(message), 0, 0});
  }

  std::vector<std::size_t> occurrences(std::string_view tag) const {
    std::vector<std::size_t> at;
    for (auto p = raw_.find(tag); p != std::string_view::npos; p = raw_.find(tag, p + 1)) {
      at.push_back(p);
    }
    return at;
  }

  void check_tags() {
    const std::array<std::string_view, 4> tags{kThinkOpen, kThinkClose, kAnswerOpen,
                                               kAnswerClose};
    std::array<std::size_t, 4> pos{};
    bool counts_ok = true;
    for (std::size_t k = 0; k < tags.size(); ++k) {
      const auto at = occurrences(tags[k]);
      if (at.empty()) {
        fatal("MissingTag", "missing " + std::string(tags[k]), raw_.size(), raw_.size());
        counts_ok = false;
      } else if (at.size() > 1) {
        fatal("DuplicateTag", "duplicated " + std::string(tags[k]), at[1],
              at[1] + tags[k].size());
        counts_ok = false;
      } else {
        pos[k] = at.front();
      }
    }
    if (!counts_ok) return;
    if (!(pos[0] < pos[1] && pos[1] < pos[2] && pos[2] < pos[3])) {
      fatal("MisorderedTags", "tags must appear as <think></think><answer></answer>", pos[0],
            pos[3]);
      return;
    }
    const std::size_t think_end = pos[1] + kThinkClose.size();
    const std::size_t answer_end = pos[3] + kAnswerClose.size();
    if (!all_ws(raw_.substr(0, pos[0]))) {
      fatal("OutsideContent", "non-whitespace content before <think>", 0, pos[0]);
    }
    if (!all_ws(raw_.substr(think_end, pos[2] - think_end))) {
      fatal("OutsideContent", "non-whitespace content between blocks", think_end, pos[2]);
    }
    if (!all_ws(raw_.substr(answer_end))) {
      fatal("TrailingContent", "non-whitespace content after </answer>", answer_end,
            raw_.size());
    }
  }

  struct Body {
    std::string_view text;
    std::size_t offset;
  };

  // First open tag and the first matching close after it.
  std::optional<Body> block(std::string_view open, std::string_view close) const {
    const auto b = raw_.find(open);
    if (b == std::string_view::npos) return std::nullopt;
    const auto start = b + open.size();
    const auto e = raw_.find(close, start);
    if (e == std::string_view::npos) return std::nullopt;
    return Body{raw_.substr(start, e - start), start};
  }

  std::optional<EvidenceRef> parse_evidence(std::string_view text, std::size_t b,
                                            std::size_t e) {
    const json j = json::parse(text, nullptr, false);
    auto malformed = [&](const std::string& why) {
      fatal("MalformedEvidence", why, b, e);
      return std::nullopt;
    };
    if (j.is_discarded()) return malformed("evidence object is not valid JSON");
    if (!j.is_object()) return malformed("evidence is not a JSON object");
    if (j.size() != 2 || !j.contains("bbox_2d") || !j.contains("image_index")) {
      return malformed("evidence object must have exactly bbox_2d and image_index");
    }
    const auto& coords = j.at("bbox_2d");
    if (!coords.is_array() || coords.size() != 4) {
      return malformed("bbox_2d must be an array of four numbers");
    }
    std::array<double, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!coords[k].is_number()) return malformed("bbox_2d coordinate is not numeric");
      v[k] = coords[k].get<double>();
    }
    const auto& idx = j.at("image_index");
    if (!idx.is_number_integer()) {
      return malformed("image_index must be an integer");
    }
    const auto page = idx.get<long long>();
    if (page < 1 || page > 1'000'000) {
      fatal("BadPageIndex", "image_index must be >= 1", b, e);
      return std::nullopt;
    }
    try {
      return EvidenceRef{static_cast<int>(page), make_box(v[0], v[1], v[2], v[3])};
    } catch (const Error& err) {
      fatal(std::string(error_code_name(err.code())), err.what(), b, e);
      return std::nullopt;
    }
  }

  // Evidence keys outside every balanced object mean a damaged evidence object.
  void check_fragments(const Body& body, const std::vector<Span>& spans) {
    std::size_t cursor = 0;
    auto gap = [&](std::size_t end) {
      if (names_evidence(body.text.substr(cursor, end - cursor))) {
        fatal("MalformedEvidence", "evidence key outside a balanced evidence object",
              body.offset + cursor, body.offset + end);
      }
    };
    for (const auto& s : spans) {
      gap(s.begin);
      cursor = s.end;
    }
    gap(body.text.size());
  }

  void parse_steps(const Body& body) {
    const auto spans = find_evidence_objects(body.text);
    check_fragments(body, spans);
    std::string line;
    std::vector<EvidenceRef> evidence;
    bool line_has_object = false;
    std::size_t line_begin = body.offset;

    auto close_line = [&](std::size_t line_end) {
      std::string text = squash(line);
      if (!text.empty() || line_has_object) {
        if (text.empty()) {
          fatal("EmptyStepText", "step consists of an evidence object only", line_begin,
                line_end);
        }
        out_.trajectory.steps.push_back({std::move(text), std::move(evidence)});
      }
      line.clear();
      evidence.clear();
      line_has_object = false;
    };

    std::size_t next = 0;
    for (std::size_t i = 0; i < body.text.size();) {
      if (next < spans.size() && spans[next].begin == i) {
        const auto& s = spans[next++];
        line_has_object = true;
        if (auto ref = parse_evidence(body.text.substr(s.begin, s.end - s.begin),
                                      body.offset + s.begin, body.offset + s.end)) {
          evidence.push_back(*ref);
        }
        i = s.end;
        continue;
      }
      if (body.text[i] == '\n') {
        close_line(body.offset + i);
        line_begin = body.offset + i + 1;
      } else {
        line.push_back(body.text[i]);
      }
      ++i;
    }
    close_line(body.offset + body.text.size());
  }

  void parse_answer(const Body& body) {
    const auto spans = find_evidence_objects(body.text);
    check_fragments(body, spans);
    std::string rest;
    std::size_t cursor = 0;
    for (const auto& s : spans) {
      rest.append(body.text.substr(cursor, s.begin - cursor));
      rest.push_back(' ');
      cursor = s.end;
    }
    rest.append(body.text.substr(cursor));

    std::string answer = squash(rest);
    if (answer.size() >= kAnswerPrefix.size()) {
      const bool prefixed = std::equal(
          kAnswerPrefix.begin(), kAnswerPrefix.end(), answer.begin(), [](char p, char c) {
            return p == static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          });
      if (prefixed) answer = squash(std::string_view(answer).substr(kAnswerPrefix.size()));
    }
    out_.trajectory.answer_text = std::move(answer);

    if (spans.size() > 1) {
      fatal("MultipleAnswerEvidence", "answer block holds more than one evidence object",
            body.offset + spans[1].begin, body.offset + spans[1].end);
      return;
    }
    if (spans.empty()) {
      // The no-answer sentinel carries no box.
      if (!is_no_answer(out_.trajectory.answer_text)) {
        fatal("MissingAnswerEvidence", "answer block lacks an evidence object", body.offset,
              body.offset + body.text.size());
      }
      return;
    }
    const auto& s = spans.front();
    out_.trajectory.answer_evidence = parse_evidence(
        body.text.substr(s.begin, s.end - s.begin), body.offset + s.begin, body.offset + s.end);
  }

  ParseOutcome finish() {
    out_.trajectory.format_ok =
        std::none_of(out_.diagnostics.begin(), out_.diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::kFatal; });
    return std::move(out_);
  }

  std::string_view raw_;
  ParseOptions options_;
  ParseOutcome out_;
};

void append_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

bool serializable_text(std::string_view s) {
  if (s.find('\n') != std::string_view::npos) return false;
  if (names_evidence(s)) return false;
  for (auto tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose}) {
    if (s.find(tag) != std::string_view::npos) return false;
  }
  return true;
}

}  // namespace

bool ParseOutcome::has(std::string_view code) const noexcept {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

ParseOutcome parse_response(std::string_view raw, const ParseOptions& options) {
  return Parser(raw, options).run();
}

std::string format_evidence(const EvidenceRef& ref) {
  std::string out = "{\"bbox_2d\": [";
  append_number(out, ref.box.x1);
  out += ", ";
  append_number(out, ref.box.y1);
  out += ", ";
  append_number(out, ref.box.x2);
  out += ", ";
  append_number(out, ref.box.y2);
  out += "], \"image_index\": ";
  out += std::to_string(ref.page_index);
  out += "}";
  return out;
}

std::string serialize_trajectory(const CoETrajectory& t) {
  auto reject = [](const std::string& why) {
    fail(ErrorCode::kUnserializableTrajectory, why);
  };
  if (!t.format_ok) reject("trajectory is not format_ok");
  if (t.steps.empty()) reject("trajectory has no steps");
  if (!t.answer_evidence && !is_no_answer(t.answer_text)) {
    reject("answer evidence is required unless the answer is \"No answer\"");
  }
  if (!serializable_text(t.answer_text)) reject("answer text contains reserved tokens");

  std::string out(kThinkOpen);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& step = t.steps[i];
    const std::string text = squash(step.text);
    if (text.empty()) reject("step " + std::to_string(i) + " has empty text");
    if (!serializable_text(text)) reject("step text contains reserved tokens");
    if (i) out.push_back('\n');
    out += text;
    for (const auto& ev : step.evidence) {
      out.push_back(' ');
      out += format_evidence(ev);
    }
  }
  out += kThinkClose;
  out += "\n";
  out += kAnswerOpen;
  out += "The answer is: ";
  out += squash(t.answer_text);
  if (t.answer_evidence) {
    out.push_back(' ');
    out += format_evidence(*t.answer_evidence);
  }
  out += kAnswerClose;

  // Prose braces or quotes next to an evidence object can change what the
  // scanner detects; refuse rather than emit text that parses differently.
  const auto back = parse_response(out).trajectory;
  CoETrajectory expected = t;
  for (auto& step : expected.steps) step.text = squash(step.text);
  expected.answer_text = squash(t.answer_text);
  if (!same_structure(back, expected)) {
    reject("trajectory text does not survive a parse round trip");
  }
  return out;
}

std::vector<ContextEvidencePair> extract_pairs(const CoETrajectory& t) {
  std::vector<ContextEvidencePair> pairs;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    for (const auto& ev : t.steps[i].evidence) {
      pairs.push_back({i, t.steps[i].text, ev});
    }
  }
  return pairs;
}

}  // namespace coeforge
