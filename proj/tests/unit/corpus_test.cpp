// Copyright 2026 The Target Radar Authors.
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

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "helpers.hpp"
#include "json.hpp"
#include "target_radar/corpus.hpp"

using namespace target_radar;
using nlohmann::json;
namespace tu = testing_util;

namespace {

Corpus mini_corpus() { return ingest_paragraphs(tu::mini() / "paragraphs.jsonl"); }

std::string line_error(const std::string& jsonl) {
  std::istringstream in(jsonl);
  try {
    read_paragraphs(in);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Corpus, MiniatureStatsMatchHandCount) {
  auto corpus = mini_corpus();
  auto labels = ingest_labels(tu::mini() / "labels.jsonl", &corpus);
  auto expected = json::parse(read_file(tu::mini() / "expected.json"))["stats"];
  auto s = stats(corpus, labels);
  EXPECT_EQ(s.net_zero, expected["net_zero"].get<std::size_t>());
  EXPECT_EQ(s.reduction, expected["reduction"].get<std::size_t>());
  EXPECT_EQ(s.other, expected["other"].get<std::size_t>());
  EXPECT_EQ(s.none, expected["none"].get<std::size_t>());
  EXPECT_EQ(s.total, 50u);
}

TEST(Corpus, MiniatureTestSliceSupports) {
  auto corpus = mini_corpus();
  auto labels = ingest_labels(tu::mini() / "labels.jsonl", &corpus);
  auto splits = load_splits(tu::mini() / "splits.jsonl", &corpus);
  auto expected = json::parse(read_file(tu::mini() / "expected.json"))["test_slice_support"];
  std::map<std::string, std::map<std::string, std::size_t>> got;
  for (const auto& id : ids_in_split(splits, Split::Test)) {
    auto c = labels.consensus(id);
    ASSERT_TRUE(c);
    auto& row = got[field_value(corpus.at(id), "translated")];
    for (Label l : kAllLabels) {
      row[std::string(label_name(l))] += c->get(l);
      row["overall"] += c->get(l);
    }
  }
  for (const auto& [slice, counts] : expected.items())
    for (const auto& [name, n] : counts.items()) EXPECT_EQ(got[slice][name], n.get<std::size_t>()) << slice << "/" << name;
}

TEST(Corpus, ConsensusUsesLatestRoundAndMajority) {
  auto corpus = mini_corpus();
  auto labels = ingest_labels(tu::mini() / "labels.jsonl", &corpus);
  // two of three say other
  EXPECT_TRUE(labels.consensus("mini-012")->other);
  // one of three says reduction
  EXPECT_FALSE(labels.consensus("mini-030")->reduction);
  // ann_b revised mini-007 in round 1
  auto latest = labels.latest_per_annotator("mini-007");
  bool saw_b = false;
  for (auto* r : latest)
    if (r->annotator == "ann_b") {
      saw_b = true;
      EXPECT_EQ(r->round, 1);
      EXPECT_TRUE(r->labels.reduction);
    }
  EXPECT_TRUE(saw_b);
  EXPECT_FALSE(labels.consensus("mini-049"));
}

TEST(Corpus, UnannotatedParagraphsCountAsNone) {
  Corpus c;
  c.add({"a", "d", "Some text.", "UNK", "en", false, Source::Policy});
  c.add({"b", "d", "More text.", "UNK", "en", false, Source::Policy});
  AnnotationStore empty;
  auto s = stats(c, empty);
  EXPECT_EQ(s.none, 2u);
  EXPECT_EQ(s.total, 2u);
}

TEST(Corpus, ValidationErrorsCarryLineNumbers) {
  const std::string good = R"({"id":"p1","doc_id":"d","text":"x","geography_iso":"NOR","language":"en","translated":false,"source":"law"})";
  EXPECT_EQ(line_error(good + "\n"), "");
  EXPECT_NE(line_error(good + "\n" + good + "\n").find("line 2: duplicate paragraph id"), std::string::npos);
  EXPECT_NE(line_error(good + "\n{not json\n").find("line 2: malformed JSON"), std::string::npos);
  EXPECT_NE(line_error(R"({"id":"p1","doc_id":"d","text":"   ","geography_iso":"NOR","language":"en","translated":false,"source":"law"})")
                .find("non-empty"),
            std::string::npos);
  EXPECT_NE(line_error(R"({"id":"p1","doc_id":"d","text":"x","geography_iso":"no","language":"en","translated":false,"source":"law"})")
                .find("geography_iso"),
            std::string::npos);
  EXPECT_NE(line_error(R"({"id":"p1","doc_id":"d","text":"x","geography_iso":"NOR","language":"en","translated":"no","source":"law"})")
                .find("boolean"),
            std::string::npos);
  EXPECT_NE(line_error(R"({"doc_id":"d","text":"x"})").find("missing field 'id'"), std::string::npos);
}

TEST(Corpus, DanglingAndDuplicateAnnotationsRejected) {
  auto corpus = mini_corpus();
  std::istringstream dangling(R"({"paragraph_id":"nope","annotator":"a","round":0,"labels":{"net_zero":false,"reduction":false,"other":false},"timestamp":"2026-01-01T00:00:00Z"})");
  EXPECT_THROW(read_labels(dangling, &corpus), ValidationError);
  AnnotationStore s;
  AnnotationRecord r{"mini-001", "a", 0, {}, "2026-01-01T00:00:00Z"};
  s.add(r);
  EXPECT_THROW(s.add(r), ValidationError);
  r.round = 1;
  EXPECT_NO_THROW(s.add(r));
}

TEST(Corpus, RoundTripThroughJsonl) {
  auto corpus = mini_corpus();
  std::ostringstream out;
  write_paragraphs(out, corpus);
  std::istringstream in(out.str());
  EXPECT_EQ(read_paragraphs(in), corpus);
}

TEST(Split, PartitionsLabelledParagraphsDeterministically) {
  auto corpus = mini_corpus();
  auto labels = ingest_labels(tu::mini() / "labels.jsonl", &corpus);
  auto a = split(corpus, &labels, {}, 42, {"translated"});
  auto b = split(corpus, &labels, {}, 42, {"translated"});
  auto c = split(corpus, &labels, {}, 43, {"translated"});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::set<std::string> ids;
  for (const auto& s : a) EXPECT_TRUE(ids.insert(s.paragraph_id).second);
  EXPECT_EQ(ids.size(), 48u);  // two paragraphs are unannotated
  EXPECT_FALSE(ids.count("mini-049"));
}

TEST(Split, EachStratumWithinOneOfItsShare) {
  auto corpus = mini_corpus();
  SplitFractions f{0.6, 0.2, 0.2};
  auto s = split(corpus, nullptr, f, 7, {"translated"});
  std::map<std::string, std::array<std::size_t, 3>> counts;
  std::map<std::string, std::size_t> sizes;
  for (const auto& a : s) {
    auto key = field_value(corpus.at(a.paragraph_id), "translated");
    ++counts[key][static_cast<std::size_t>(a.split)];
    ++sizes[key];
  }
  const std::array<double, 3> frac = {0.6, 0.2, 0.2};
  for (const auto& [key, c] : counts)
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_LE(std::abs(static_cast<double>(c[i]) - frac[i] * static_cast<double>(sizes[key])), 1.0) << key;
}

TEST(Split, AllocateCountsSumsToN) {
  for (std::size_t n = 0; n < 40; ++n) {
    auto c = allocate_counts(n, {0.8, 0.1, 0.1});
    EXPECT_EQ(c[0] + c[1] + c[2], n);
  }
  auto c = allocate_counts(10, {0.8, 0.1, 0.1});
  EXPECT_EQ(c, (std::array<std::size_t, 3>{8, 1, 1}));
}

TEST(Split, RejectsBadFractions) {
  auto corpus = mini_corpus();
  EXPECT_THROW(split(corpus, nullptr, {0.5, 0.2, 0.2}, 1), ValidationError);
  EXPECT_THROW(split(corpus, nullptr, {1.2, -0.1, -0.1}, 1), ValidationError);
}

TEST(Countries, TableCoversRegionsAndAliases) {
  auto geo = CountryTable::load_default();
  EXPECT_GE(geo.countries().size(), 240u);
  ASSERT_TRUE(geo.find("NOR"));
  EXPECT_EQ(geo.region_of("NOR"), "EU");
  EXPECT_EQ(geo.region_of("KEN"), "AF");
  EXPECT_EQ(geo.region_of("BRA"), "AM");
  EXPECT_EQ(geo.region_of("FJI"), "OC");
  EXPECT_EQ(geo.region_of("CHN"), "AS");
  EXPECT_EQ(geo.region_of("UNK"), "UNK");
  const auto& nor = geo.find("NOR")->aliases;
  EXPECT_NE(std::find(nor.begin(), nor.end(), "Norwegian"), nor.end());
}
