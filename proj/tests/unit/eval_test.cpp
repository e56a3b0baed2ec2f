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

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "target_radar/eval.hpp"
#include "target_radar/synthetic.hpp"

using namespace target_radar;
namespace tu = testing_util;

namespace {

struct RandomSet {
  std::vector<PredictionRecord> preds;
  GoldMap gold;
};

RandomSet random_set(Rng& r, std::size_t n) {
  RandomSet s;
  for (std::size_t i = 0; i < n; ++i) {
    PredictionRecord p;
    p.paragraph_id = "p" + std::to_string(i);
    LabelSet g;
    for (Label l : kAllLabels) {
      p.scores[index_of(l)] = r.uniform();
      p.decisions.set(l, r.below(2) == 1);
      g.set(l, r.below(3) == 0);
    }
    s.preds.push_back(p);
    s.gold[p.paragraph_id] = g;
  }
  return s;
}

// Plain loops over the raw decisions, independent of Confusion/Prf.
struct OracleCell {
  double p, r, f;
};

OracleCell oracle(const RandomSet& s, std::optional<Label> only) {
  double tp = 0, fp = 0, fn = 0;
  for (const auto& pr : s.preds)
    for (Label l : kAllLabels) {
      if (only && l != *only) continue;
      bool d = pr.decisions.get(l), g = s.gold.at(pr.paragraph_id).get(l);
      tp += d && g;
      fp += d && !g;
      fn += !d && g;
    }
  double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

std::pair<double, double> pr_at(const std::vector<double>& s, const std::vector<bool>& g, double tau) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    bool d = s[i] >= tau;
    tp += d && g[i];
    fp += d && !g[i];
    fn += !d && g[i];
  }
  return {tp + fp > 0 ? tp / (tp + fp) : 0.0, tp + fn > 0 ? tp / (tp + fn) : 0.0};
}

}  // namespace

TEST(Metrics, F1CellToFourPlaces) {
  EXPECT_NEAR(f1_score(0.8, 0.9), 0.8471, 5e-5);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Metrics, MatchBruteForceOnRandomSets) {
  Rng r(2026);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_set(r, 1 + r.below(60));
    auto m = metrics(confusion(s.preds, s.gold));
    auto all = oracle(s, std::nullopt);
    EXPECT_EQ(m.micro.precision, all.p);
    EXPECT_EQ(m.micro.recall, all.r);
    EXPECT_EQ(m.micro.f1, all.f);
    for (Label l : kAllLabels) {
      auto o = oracle(s, l);
      const auto& c = m.per_label[index_of(l)];
      EXPECT_EQ(c.precision, o.p);
      EXPECT_EQ(c.recall, o.r);
      EXPECT_EQ(c.f1, o.f);
    }
  }
}

TEST(Metrics, UndefinedCellsAreFlagged) {
  RandomSet s;
  PredictionRecord p;
  p.paragraph_id = "a";
  s.preds.push_back(p);
  s.gold["a"] = LabelSet{};
  auto m = metrics(confusion(s.preds, s.gold));
  EXPECT_TRUE(m.micro.undefined_precision);
  EXPECT_TRUE(m.micro.undefined_support);
  EXPECT_EQ(m.micro.f1, 0.0);
}

TEST(Metrics, MismatchedIdsRejected) {
  Rng r(1);
  auto s = random_set(r, 5);
  s.gold.erase("p0");
  EXPECT_THROW(confusion(s.preds, s.gold), ValidationError);
}

TEST(Aggregate, MeanAndSampleSigma) {
  std::vector<Metrics> runs(3);
  runs[0].micro.f1 = 1.0;
  runs[1].micro.f1 = 2.0;
  runs[2].micro.f1 = 3.0;
  auto a = aggregate(runs);
  EXPECT_DOUBLE_EQ(a.micro.f1.mean, 2.0);
  EXPECT_DOUBLE_EQ(a.micro.f1.sigma, 1.0);
  EXPECT_EQ(aggregate({runs[0]}).micro.f1.sigma, 0.0);
}

TEST(Calibrate, WorkedFixture) {
  std::vector<double> s = {0.9, 0.8, 0.6, 0.4, 0.7, 0.3, 0.2};
  std::vector<bool> g = {true, true, true, true, false, false, false};
  auto t = calibrate_scores(s, g, 0.8, 0.8);
  EXPECT_TRUE(t.feasible);
  EXPECT_DOUBLE_EQ(t.precision, 0.8);
  EXPECT_DOUBLE_EQ(t.recall, 1.0);
  auto [p, r] = pr_at(s, g, t.tau);
  EXPECT_DOUBLE_EQ(p, 0.8);
  EXPECT_DOUBLE_EQ(r, 1.0);
  EXPECT_GT(t.tau, 0.3);
  EXPECT_LE(t.tau, 0.4);
}

TEST(Calibrate, FeasibleWheneverExhaustiveSweepIsFeasible) {
  Rng r(77);
  int feasible_cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 2 + r.below(30);
    std::vector<double> s(n);
    std::vector<bool> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = r.below(2) == 1;
      // coarse grid so ties occur
      s[i] = std::round((g[i] ? 0.3 + 0.7 * r.uniform() : 0.7 * r.uniform()) * 20) / 20;
    }
    // Oracle: every distinct score as a cut, plus a cut above them all.
    std::set<double> cuts(s.begin(), s.end());
    cuts.insert(2.0);
    bool any = false;
    double best_f1 = -1;
    for (double c : cuts) {
      auto [p, rc] = pr_at(s, g, c);
      if (p >= 0.8 - 1e-12 && rc >= 0.8 - 1e-12) {
        any = true;
        best_f1 = std::max(best_f1, f1_score(p, rc));
      }
    }
    auto t = calibrate_scores(s, g, 0.8, 0.8);
    auto [p, rc] = pr_at(s, g, t.tau);
    EXPECT_DOUBLE_EQ(p, t.precision);
    EXPECT_DOUBLE_EQ(rc, t.recall);
    EXPECT_EQ(t.feasible, any) << "trial " << trial;
    if (any) {
      ++feasible_cases;
      EXPECT_GE(p, 0.8 - 1e-12);
      EXPECT_GE(rc, 0.8 - 1e-12);
      EXPECT_DOUBLE_EQ(t.f1, best_f1);
    }
  }
  EXPECT_GT(feasible_cases, 30);
}

TEST(Calibrate, SingleThresholdPoolsLabels) {
  Rng r(4);
  auto s = random_set(r, 40);
  auto t = calibrate_single(s.preds, s.gold);
  EXPECT_EQ(t.per_label[0].tau, t.per_label[1].tau);
  EXPECT_EQ(t.per_label[1].tau, t.per_label[2].tau);
  auto applied = apply_thresholds(s.preds, t.taus());
  for (const auto& p : applied)
    for (Label l : kAllLabels) EXPECT_EQ(p.decisions.get(l), p.scores[index_of(l)] >= t.per_label[0].tau);
}

TEST(Calibrate, EmptyValidationRejected) {
  EXPECT_THROW(calibrate_scores({}, {}, 0.8, 0.8), ValidationError);
  EXPECT_THROW(calibrate({}, {}), ValidationError);
}

TEST(Slices, SupportsSumToOverall) {
  auto corpus = ingest_paragraphs(tu::mini() / "paragraphs.jsonl");
  auto labels = ingest_labels(tu::mini() / "labels.jsonl", &corpus);
  auto splits = load_splits(tu::mini() / "splits.jsonl", &corpus);
  std::vector<PredictionRecord> preds;
  GoldMap gold;
  for (const auto& id : ids_in_split(splits, Split::Test)) {
    PredictionRecord p;
    p.paragraph_id = id;
    gold[id] = *labels.consensus(id);
    p.decisions = gold[id];
    preds.push_back(p);
  }
  auto slices = slice_eval(preds, gold, corpus, "translated");
  ASSERT_EQ(slices.size(), 2u);
  EXPECT_EQ(slices["original"].metrics.micro.support, 5u);
  EXPECT_EQ(slices["translated"].metrics.micro.support, 6u);
  EXPECT_EQ(slices["original"].metrics.micro.f1, 1.0);
}

TEST(Sweep, PicksBestValidationPoint) {
  auto s = synthetic::template_corpus(120, 3);
  FeaturizerConfig fc;
  fc.hash_dim = 1u << 12;
  SweepGrid grid{{0.05, 2.0}, {0.0001}, {2}};
  auto r = sweep(s.corpus, s.labels, s.splits, fc, TrainConfig{}, grid);
  ASSERT_EQ(r.points.size(), 2u);
  for (const auto& p : r.points) EXPECT_LE(p.val.micro.f1, r.points[r.best].val.micro.f1);
  EXPECT_EQ(r.best_model.thresholds, r.points[r.best].thresholds.taus());
}

TEST(SplitLogLoss, ZeroModelGivesLn2) {
  auto s = synthetic::template_corpus(40, 2);
  ModelParams m;
  m.featurizer.hash_dim = 1u << 10;
  m.weights = LinearWeights(feature_dim(m.featurizer));
  EXPECT_NEAR(split_log_loss(m, s.corpus, s.labels, s.splits, Split::Val), std::log(2.0), 1e-12);
  EXPECT_THROW(split_log_loss(m, s.corpus, s.labels, {}, Split::Val), ValidationError);
}
