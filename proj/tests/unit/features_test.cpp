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

#include "target_radar/features.hpp"

using namespace target_radar;

TEST(Idf, SmoothedFormulaOracle) {
  // Three documents; bucket 7 appears in one of them, bucket 9 in none.
  IdfTable t(3, {{7, 1}});
  EXPECT_DOUBLE_EQ(t.idf(7), std::log(4.0 / 2.0) + 1.0);
  EXPECT_DOUBLE_EQ(t.idf(9), std::log(4.0) + 1.0);
}

TEST(Idf, FitCountsDocumentsNotOccurrences) {
  FeaturizerConfig c;
  c.ngram_high = 1;
  std::vector<std::string> docs = {"solar solar solar", "wind", "solar wind"};
  auto t = IdfTable::fit(docs, c);
  EXPECT_EQ(t.n_docs(), 3u);
  auto solar = hashed_ngrams("solar", c)[0].bucket;
  EXPECT_EQ(t.df().at(solar), 2u);
  EXPECT_THROW(IdfTable::fit(std::vector<std::string>{}, c), ValidationError);
}

TEST(Ngrams, DoNotCrossSentenceBreaks) {
  FeaturizerConfig c;
  std::set<std::string> grams;
  for (const auto& g : hashed_ngrams("Plant trees. Cut coal", c)) grams.insert(g.text);
  EXPECT_TRUE(grams.count("plant trees"));
  EXPECT_TRUE(grams.count("cut coal"));
  EXPECT_FALSE(grams.count("trees cut"));
  // decimals stay inside a segment
  grams.clear();
  for (const auto& g : hashed_ngrams("by 2.5 % now", c)) grams.insert(g.text);
  EXPECT_TRUE(grams.count("2 5 %") || grams.count("2.5 %") || grams.count("5 %"));
}

TEST(Featurize, UnitNormHashedPartAndRuleTail) {
  FeaturizerConfig c;
  auto x = featurize("Reduce emissions by 40% by 2030 and reach net zero by 2050.", c);
  EXPECT_EQ(x.dim, feature_dim(c));
  double norm2 = 0.0;
  for (std::size_t i = 0; i < x.entries.size(); ++i) {
    if (i > 0) {
      EXPECT_LT(x.entries[i - 1].first, x.entries[i].first);
    }
    if (x.entries[i].first < c.hash_dim) norm2 += x.entries[i].second * x.entries[i].second;
  }
  EXPECT_NEAR(norm2, 1.0, 1e-12);
  EXPECT_EQ(x.value(c.hash_dim + 0), 1.0);  // quantifiable
  EXPECT_EQ(x.value(c.hash_dim + 1), 1.0);  // has_deadline
  EXPECT_EQ(x.value(c.hash_dim + 2), 1.0);  // net-zero phrase
  EXPECT_EQ(x.value(c.hash_dim + 5), 1.0);  // percent
}

TEST(Featurize, DeterministicAndSeedSensitive) {
  FeaturizerConfig a, b;
  b.seed = 43;
  const std::string text = "Install 400 MW of solar capacity by 2030.";
  EXPECT_EQ(featurize(text, a), featurize(text, a));
  EXPECT_NE(featurize(text, a), featurize(text, b));
  for (const auto& g : hashed_ngrams(text, a)) {
    EXPECT_TRUE(g.sign == 1 || g.sign == -1);
    EXPECT_LT(g.bucket, a.hash_dim);
  }
}

TEST(Featurize, ConfigValidation) {
  FeaturizerConfig c;
  c.hash_dim = 1000;
  EXPECT_THROW(c.validate(), ValidationError);
  c.hash_dim = 1024;
  c.ngram_low = 3;
  c.ngram_high = 2;
  EXPECT_THROW(c.validate(), ValidationError);
}
