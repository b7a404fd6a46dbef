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

#include <filesystem>
#include <map>

#include "coeforge/commands.hpp"
#include "coeforge/error.hpp"
#include "coeforge/imaging.hpp"
#include "coeforge/io.hpp"
#include "coeforge/parser.hpp"

namespace coeforge {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RegionKey {
  std::string page_id;
  std::size_t region = 0;
};

struct QuerySpec {
  std::string id;
  std::string question;
  std::string gold;  // empty for unanswerable
  std::vector<std::string> pages;
  RegionKey gold_region;
  RegionKey context;
};

std::vector<SyntheticPage> corpus_pages() {
  auto pages = default_world().pages;
  pages.push_back({PageRef{"acme-p3", "acme-p3.png", 800, 1000},
                   {{make_box(40, 40, 760, 120), "Acme Product Catalog sensors and controllers"},
                    {make_box(40, 200, 760, 320), "Sensor model X100 sells for 250 dollars per unit"},
                    {make_box(40, 400, 760, 520), "Controller model Z9 weighs 1.2 kilograms"}}});
  for (auto& p : pages) p.ref.image_locator = "pages/" + p.ref.page_id + ".png";
  return pages;
}

std::vector<QuerySpec> corpus_queries() {
  return {
      {"acme-single", "What was Acme's total revenue in fiscal year 2020?", "42 million dollars",
       {"acme-p1"}, {"acme-p1", 2}, {"acme-p1", 0}},
      {"multi-a", "What was Acme's total revenue in fiscal year 2020?", "42 million dollars",
       {"acme-p1", "acme-p2", "acme-p3"}, {"acme-p1", 2}, {"acme-p1", 0}},
      {"multi-b", "How many staff does Acme employ?", "310 staff", {"acme-p3", "acme-p2"},
       {"acme-p2", 0}, {"acme-p2", 1}},
      {"multi-c", "Who founded Acme Corporation?", "Jane Doe", {"acme-p2", "acme-p1"},
       {"acme-p1", 1}, {"acme-p1", 0}},
      {"multi-d", "What dividend did the board approve?", "3 cents per share",
       {"acme-p1", "acme-p2"}, {"acme-p2", 1}, {"acme-p2", 0}},
      {"multi-e", "What is the price of the X100 sensor?", "250 dollars", {"acme-p3", "acme-p1"},
       {"acme-p3", 1}, {"acme-p3", 0}},
      {"multi-f", "How much does the Z9 controller weigh?", "1.2 kilograms",
       {"acme-p2", "acme-p3", "acme-p1"}, {"acme-p3", 2}, {"acme-p3", 1}},
      {"multi-g", "In which city was Acme founded?", "Toledo Ohio", {"acme-p1", "acme-p3"},
       {"acme-p1", 1}, {"acme-p1", 0}},
      {"multi-h", "Which year does the Acme annual report cover?", "2020", {"acme-p3", "acme-p1"},
       {"acme-p1", 0}, {"acme-p1", 3}},
      {"noanswer-a", "What was Acme's total revenue in fiscal year 2020?", "",
       {"acme-p2", "acme-p3"}, {}, {"acme-p2", 0}},
      {"noanswer-b", "How many staff does Acme employ?", "", {"acme-p1", "acme-p3"}, {},
       {"acme-p1", 2}},
  };
}

std::vector<std::uint8_t> render_page(const SyntheticPage& page) {
  const auto w = static_cast<std::size_t>(page.ref.width);
  const auto h = static_cast<std::size_t>(page.ref.height);
  std::vector<std::uint8_t> rgb(w * h * 3, 255);
  std::uint8_t shade = 200;
  for (const auto& r : page.regions) {
    for (auto y = static_cast<std::size_t>(r.box.y1); y < static_cast<std::size_t>(r.box.y2); ++y) {
      for (auto x = static_cast<std::size_t>(r.box.x1); x < static_cast<std::size_t>(r.box.x2);
           ++x) {
        auto* px = &rgb[(y * w + x) * 3];
        px[0] = shade;
        px[1] = static_cast<std::uint8_t>(shade - 40);
        px[2] = static_cast<std::uint8_t>(255 - shade);
      }
    }
    shade = static_cast<std::uint8_t>(shade - 25);
  }
  return encode_png(page.ref.width, page.ref.height, rgb);
}

class Corpus {
 public:
  Corpus() : pages_(corpus_pages()) {
    for (std::size_t i = 0; i < pages_.size(); ++i) by_id_[pages_[i].ref.page_id] = i;
  }

  const std::vector<SyntheticPage>& pages() const { return pages_; }

  const TextRegion& region(const RegionKey& k) const {
    return pages_.at(by_id_.at(k.page_id)).regions.at(k.region);
  }

  EvidenceRef evidence(const QuerySpec& q, const RegionKey& k) const {
    const auto it = std::find(q.pages.begin(), q.pages.end(), k.page_id);
    if (it == q.pages.end()) fail(ErrorCode::kInvalidArgument, "region page not in candidate list");
    return {static_cast<int>(it - q.pages.begin()) + 1, region(k).box};
  }

  GroundTruthRecord record(const QuerySpec& q) const {
    std::vector<PageRef> refs;
    for (const auto& id : q.pages) refs.push_back(pages_.at(by_id_.at(id)).ref);
    if (q.gold.empty()) return make_unanswerable(q.id, q.question, refs);
    const auto ev = evidence(q, q.gold_region);
    return make_answerable(q.id, q.question, q.gold, ev.box, refs, pos_from_page_index(ev.page_index));
  }

 private:
  std::vector<SyntheticPage> pages_;
  std::map<std::string, std::size_t> by_id_;
};

CoETrajectory trajectory(std::vector<ReasoningStep> steps, std::string answer,
                         std::optional<EvidenceRef> ev) {
  CoETrajectory t;
  t.steps = std::move(steps);
  t.answer_text = std::move(answer);
  t.answer_evidence = ev;
  t.format_ok = true;
  return t;
}

std::vector<std::string> answerable_responses(const Corpus& c, const QuerySpec& q) {
  const auto g = c.evidence(q, q.gold_region);
  const auto ctx = c.evidence(q, q.context);
  const std::string gold_text = c.region(q.gold_region).text;
  const std::string ctx_text = c.region(q.context).text;
  const std::string conclude = "So the answer is " + q.gold;
  const std::string first_word = q.gold.substr(0, q.gold.find(' '));

  EvidenceRef shifted = g;
  shifted.box.y1 += 0.6 * g.box.height() + 0.5;
  shifted.box.y2 += 0.6 * g.box.height() + 0.5;
  EvidenceRef off_page = g;
  off_page.page_index = static_cast<int>(q.pages.size()) + 1;

  std::vector<std::string> out;
  auto add = [&](const CoETrajectory& t) { out.push_back(serialize_trajectory(t)); };
  add(trajectory({{gold_text, {g}}, {conclude, {}}}, q.gold, g));
  add(trajectory({{ctx_text, {ctx}}, {gold_text, {g}}, {conclude, {}}}, q.gold, g));
  add(trajectory({{gold_text, {ctx}}, {conclude, {}}}, q.gold, g));
  add(trajectory({{ctx_text, {g}}, {gold_text, {g}}}, q.gold, g));
  add(trajectory({{ctx_text, {ctx}}}, "17 unicorns", ctx));
  add(trajectory({{gold_text, {g}}}, "about " + first_word, g));
  add(trajectory({{gold_text, {}}, {conclude, {}}}, q.gold, shifted));
  add(trajectory({{ctx_text, {ctx}}}, std::string(kNoAnswer), std::nullopt));
  out.push_back("<think>" + gold_text + "\n<answer>" + q.gold + "</answer>");
  add(trajectory({{gold_text, {off_page}}}, q.gold, g));
  return out;
}

std::vector<std::string> unanswerable_responses(const Corpus& c, const QuerySpec& q) {
  const auto ctx = c.evidence(q, q.context);
  const std::string ctx_text = c.region(q.context).text;
  std::vector<std::string> out;
  auto add = [&](const CoETrajectory& t) { out.push_back(serialize_trajectory(t)); };
  add(trajectory({{ctx_text, {ctx}}, {"None of the pages states it", {}}},
                 std::string(kNoAnswer), std::nullopt));
  add(trajectory({{"Nothing relevant appears on these pages", {}}}, std::string(kNoAnswer),
                 std::nullopt));
  add(trajectory({{ctx_text, {ctx}}}, "42 million dollars", ctx));
  out.push_back("<answer>No answer</answer>");
  add(trajectory({{ctx_text, {ctx}}}, "no answer.", ctx));
  return out;
}

}  // namespace

void write_synthetic_corpus(const std::string& out_dir) {
  const Corpus corpus;
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root / "pages", ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + (root / "pages").string() + ": " + ec.message());

  for (const auto& page : corpus.pages()) {
    const auto png = render_page(page);
    const auto path = (root / page.ref.image_locator).string();
    write_text_file(path, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    json regions = json::array();
    for (const auto& r : page.regions) regions.push_back({{"box", box_to_json(r.box)}, {"text", r.text}});
    write_text_file(region_sidecar_path(path), json{{"regions", regions}}.dump(2) + "\n");
  }

  std::vector<GroundTruthRecord> records;
  std::vector<PredictionRecord> predictions;
  for (const auto& q : corpus_queries()) {
    records.push_back(corpus.record(q));
    const auto responses =
        q.gold.empty() ? unanswerable_responses(corpus, q) : answerable_responses(corpus, q);
    for (const auto& r : responses) predictions.push_back({q.id, r});
  }
  write_text_file((root / "dataset.jsonl").string(), dataset_to_jsonl(records));
  write_text_file((root / "predictions.jsonl").string(), predictions_to_jsonl(predictions));
  write_text_file((root / "world.json").string(), world_to_json(default_world()).dump(2) + "\n");
}

}  // namespace coeforge
