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

#include "helpers.hpp"
#include "target_radar/sampling.hpp"

using namespace target_radar;
namespace tu = testing_util;

namespace {

PredictionRecord pred(const std::string& id, double a, double b, double c) {
  PredictionRecord p;
  p.paragraph_id = id;
  p.scores = {a, b, c};
  return p;
}

}  // namespace

TEST(Negative, RequestedCapacityAndOverflow) {
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 100; ++i) preds.push_back(pred("n" + std::to_string(100 + i), 0.001 * i, 0.1, 0.1));
  auto r = negative_sample(preds, {0.5, 0.5, 0.5}, 100, 50);
  EXPECT_EQ(r.requested, 61u);  // llround(0.607 * 100)
  EXPECT_EQ(r.ids.size(), 50u);
  EXPECT_EQ(r.overflow, 11u);
  EXPECT_TRUE(r.shortfall.empty());
  auto small = negative_sample(preds, {0.5, 0.5, 0.5}, 10, 0);
  EXPECT_EQ(small.ids.size(), 6u);  // llround(6.07)
}

TEST(Negative, LowestMaxScoreFirstTiesById) {
  std::vector<PredictionRecord> preds = {pred("b", 0.2, 0.1, 0.1), pred("a", 0.1, 0.2, 0.0), pred("c", 0.05, 0.05, 0.05),
                                         pred("pos", 0.9, 0.1, 0.1)};
  auto r = negative_sample(preds, {0.5, 0.5, 0.5}, 10, 0, 0.5);
  EXPECT_EQ(r.ids, (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_EQ(r.shortfall.at("negative"), 2u);
}

TEST(Negative, RejectsBadArguments) {
  std::vector<PredictionRecord> preds = {pred("a", 0.1, 0.1, 0.1)};
  EXPECT_THROW(negative_sample(preds, {0.5, 0.5, 0.5}, 10, 0, 1.0), ValidationError);
  EXPECT_THROW(negative_sample(preds, {0.5, 0.5, 0.5}, 10, 0, 0.0), ValidationError);
  EXPECT_THROW(negative_sample(preds, {0.5, 0.5, 0.5}, 10, 11), ValidationError);
  EXPECT_THROW(negative_sample(preds, {0.5, 0.5, 0.5}, 0, 0), ValidationError);
}

TEST(Uncertainty, MatchesBruteForceOrdering) {
  Rng r(9);
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 200; ++i)
    preds.push_back(pred("u" + std::to_string(i), std::round(r.uniform() * 50) / 50, r.uniform(), r.uniform()));
  std::array<double, kNumLabels> tau = {0.5, 0.3, 0.7};
  auto got = uncertainty_sample(preds, tau, 25);
  // Oracle: O(n^2) selection of the smallest distance, ties by id.
  std::vector<std::string> expect;
  std::set<std::string> used;
  for (int k = 0; k < 25; ++k) {
    const PredictionRecord* best = nullptr;
    double bd = 0;
    for (const auto& p : preds) {
      if (used.count(p.paragraph_id)) continue;
      double d = 1e9;
      for (std::size_t j = 0; j < kNumLabels; ++j) d = std::min(d, std::abs(p.scores[j] - tau[j]));
      if (!best || d < bd || (d == bd && p.paragraph_id < best->paragraph_id)) best = &p, bd = d;
    }
    used.insert(best->paragraph_id);
    expect.push_back(best->paragraph_id);
  }
  EXPECT_EQ(got.ids, expect);
}

TEST(Stratified, QuotasShortfallAndDeterminism) {
  auto corpus = ingest_paragraphs(tu::mini() / "paragraphs.jsonl");
  auto geo = CountryTable::load_default();
  std::vector<std::string> pool;
  for (const auto& p : corpus) pool.push_back(p.id);
  std::map<std::string, std::size_t> q = {{"EU", 3}, {"AF/translated", 50}};
  auto a = stratified_sample(corpus, pool, q, 42, geo);
  auto b = stratified_sample(corpus, pool, q, 42, geo);
  EXPECT_EQ(a.ids, b.ids);
  std::size_t eu = 0, af = 0;
  for (const auto& id : a.ids) {
    const auto& p = corpus.at(id);
    eu += geo.region_of(p.geography_iso) == "EU";
    af += geo.region_of(p.geography_iso) == "AF" && p.translated;
  }
  EXPECT_EQ(eu, 3u);
  EXPECT_EQ(af + eu, a.ids.size());
  EXPECT_EQ(a.shortfall.at("AF/translated"), 50 - af);
  EXPECT_THROW(stratified_sample(corpus, pool, {{"XX", 1}}, 42, geo), ValidationError);
  EXPECT_THROW(stratified_sample(corpus, pool, {{"EU/sometimes", 1}}, 42, geo), ValidationError);
}

TEST(Stratified, BalancedQuotasFillBatch) {
  auto corpus = ingest_paragraphs(tu::mini() / "paragraphs.jsonl");
  auto geo = CountryTable::load_default();
  std::vector<std::string> pool;
  for (const auto& p : corpus) pool.push_back(p.id);
  auto q = balanced_quotas(corpus, pool, 12, geo);
  std::size_t sum = 0;
  for (const auto& [k, n] : q) sum += n;
  EXPECT_EQ(sum, 12u);
  auto r = stratified_sample(corpus, pool, q, 1, geo);
  EXPECT_EQ(r.ids.size(), 12u);
  EXPECT_EQ(r.total_shortfall(), 0u);
}

TEST(Unlabeled, ExcludesAnnotatedParagraphs) {
  auto corpus = ingest_paragraphs(tu::mini() / "paragraphs.jsonl");
  auto labels = ingest_labels(tu::mini() / "labels.jsonl", &corpus);
  EXPECT_EQ(unlabeled_ids(corpus, labels), (std::vector<std::string>{"mini-049", "mini-050"}));
}
