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

// Sparse paragraph features: signed feature hashing of lowercased word
// n-grams, optional smoothed IDF, L2 normalisation, and eight trailing
// dimensions carrying rule-grammar flags.
//
// Bucket and sign come from FNV-1a 64 over the UTF-8 bytes of the n-gram
// (tokens joined by a single space), with the offset basis mixed with the
// configured seed. Model files depend on this being bit-exact.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "target_radar/common.hpp"
#include "target_radar/rulegrammar.hpp"

namespace target_radar {

struct FeaturizerConfig {
  std::uint32_t hash_dim = 1u << 18;
  int ngram_low = 1;
  int ngram_high = 3;
  std::size_t min_token_len = 1;
  bool idf_weighting = true;
  std::uint64_t seed = 42;

  void validate() const {
    if (hash_dim < (1u << 10) || (hash_dim & (hash_dim - 1)) != 0)
      throw ValidationError("hash_dim must be a power of two >= 1024");
    if (ngram_low < 1 || ngram_low > ngram_high) throw ValidationError("invalid ngram_range");
    if (min_token_len < 1) throw ValidationError("min_token_len must be >= 1");
  }

  bool operator==(const FeaturizerConfig&) const = default;
};

inline constexpr std::size_t kRuleDims = 8;

inline const std::array<std::string_view, kRuleDims>& rule_dim_names() {
  static constexpr std::array<std::string_view, kRuleDims> kNames = {
      "rule:quantifiable",  "rule:has_deadline",    "rule:has_netzero_phrase", "rule:aim_score",
      "rule:conditional",   "rule:percent_present", "rule:year_present",       "rule:netzero_count"};
  return kNames;
}

inline std::size_t feature_dim(const FeaturizerConfig& c) { return c.hash_dim + kRuleDims; }

inline nlohmann::json to_json(const FeaturizerConfig& c) {
  return {{"hash", "fnv1a64"}, {"hash_dim", c.hash_dim}, {"ngram_range", {c.ngram_low, c.ngram_high}},
          {"min_token_len", c.min_token_len}, {"idf_weighting", c.idf_weighting}, {"seed", c.seed}};
}

inline FeaturizerConfig featurizer_config_from_json(const nlohmann::json& j) {
  FeaturizerConfig c;
  if (j.value("hash", std::string("fnv1a64")) != "fnv1a64") throw ValidationError("unsupported feature hash");
  c.hash_dim = j.at("hash_dim").get<std::uint32_t>();
  c.ngram_low = j.at("ngram_range").at(0).get<int>();
  c.ngram_high = j.at("ngram_range").at(1).get<int>();
  c.min_token_len = j.at("min_token_len").get<std::size_t>();
  c.idf_weighting = j.at("idf_weighting").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

struct FeatureVector {
  std::size_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;  // strictly increasing index

  double value(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::uint32_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
  }
  bool operator==(const FeatureVector&) const = default;
};

struct HashedNgram {
  std::string text;
  std::uint32_t bucket = 0;
  int sign = 1;
};

// Lowercased word tokens (and '%') grouped into segments that n-grams do not
// cross. A segment ends at . ! ? ; : followed by whitespace or end of text.
inline std::vector<std::vector<std::string>> ngram_segments(std::string_view text, std::size_t min_token_len = 1) {
  auto tokens = rules::tokenize(text);
  std::vector<std::vector<std::string>> segments(1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.word || t.lower == "%") {
      if (t.lower.size() >= min_token_len) segments.back().push_back(t.lower);
      continue;
    }
    static const std::string_view kBreaks = ".!?;:";
    bool sentence_end = kBreaks.find(t.lower[0]) != std::string_view::npos &&
                        (i + 1 == tokens.size() || tokens[i + 1].start > t.end);
    if (sentence_end && !segments.back().empty()) segments.emplace_back();
  }
  if (segments.back().empty()) segments.pop_back();
  return segments;
}

inline std::vector<HashedNgram> hashed_ngrams(std::string_view text, const FeaturizerConfig& c) {
  std::vector<HashedNgram> out;
  const std::uint64_t bucket_basis = kFnvOffset ^ c.seed;
  const std::uint64_t sign_basis = kFnvOffset ^ (c.seed + 0x9e3779b97f4a7c15ULL);
  for (const auto& seg : ngram_segments(text, c.min_token_len)) {
    for (std::size_t i = 0; i < seg.size(); ++i) {
      std::string gram;
      for (int n = 1; n <= c.ngram_high && i + static_cast<std::size_t>(n) <= seg.size(); ++n) {
        if (n > 1) gram += ' ';
        gram += seg[i + static_cast<std::size_t>(n) - 1];
        if (n < c.ngram_low) continue;
        auto bucket = static_cast<std::uint32_t>(fnv1a64(gram, bucket_basis) & (c.hash_dim - 1));
        int sign = (fnv1a64(gram, sign_basis) >> 63) ? -1 : 1;
        out.push_back({gram, bucket, sign});
      }
    }
  }
  return out;
}

// Signed counts per bucket before weighting and normalisation.
inline std::map<std::uint32_t, double> hashed_counts(std::string_view text, const FeaturizerConfig& c) {
  std::map<std::uint32_t, double> counts;
  for (const auto& g : hashed_ngrams(text, c)) counts[g.bucket] += g.sign;
  return counts;
}

// Smoothed inverse document frequency over hashed buckets:
// idf(b) = ln((1 + N) / (1 + df(b))) + 1.
class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::size_t n_docs, std::map<std::uint32_t, std::uint32_t> df) : n_docs_(n_docs), df_(std::move(df)) {}

  template <typename TextRange>
  static IdfTable fit(const TextRange& texts, const FeaturizerConfig& c) {
    std::map<std::uint32_t, std::uint32_t> df;
    std::size_t n = 0;
    for (const auto& text : texts) {
      ++n;
      std::vector<std::uint32_t> seen;
      for (const auto& g : hashed_ngrams(text, c)) seen.push_back(g.bucket);
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (auto b : seen) ++df[b];
    }
    if (n == 0) throw ValidationError("cannot fit IDF on an empty training subset");
    return IdfTable(n, std::move(df));
  }

  double idf(std::uint32_t bucket) const {
    auto it = df_.find(bucket);
    double df = it == df_.end() ? 0.0 : it->second;
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
  }

  std::size_t n_docs() const { return n_docs_; }
  const std::map<std::uint32_t, std::uint32_t>& df() const { return df_; }
  bool operator==(const IdfTable&) const = default;

  nlohmann::json to_json() const {
    nlohmann::json pairs = nlohmann::json::array();
    for (auto [b, d] : df_) pairs.push_back({b, d});
    return {{"n_docs", n_docs_}, {"df", pairs}};
  }
  static IdfTable from_json(const nlohmann::json& j) {
    std::map<std::uint32_t, std::uint32_t> df;
    for (const auto& p : j.at("df")) df[p.at(0).get<std::uint32_t>()] = p.at(1).get<std::uint32_t>();
    return IdfTable(j.at("n_docs").get<std::size_t>(), std::move(df));
  }

 private:
  std::size_t n_docs_ = 0;
  std::map<std::uint32_t, std::uint32_t> df_;
};

inline std::array<double, kRuleDims> rule_features(const rules::RuleAnalysis& a) {
  using rules::SpanKind;
  double aim = std::clamp(a.aim_score, 0, 3) / 3.0;
  double nz = static_cast<double>(std::min<std::size_t>(a.count(SpanKind::NetZeroPhrase), 3)) / 3.0;
  return {a.quantifiable ? 1.0 : 0.0,
          a.has_deadline ? 1.0 : 0.0,
          a.has_netzero_phrase ? 1.0 : 0.0,
          aim,
          a.conditional ? 1.0 : 0.0,
          a.has(SpanKind::Percent) ? 1.0 : 0.0,
          a.has(SpanKind::YearDeadline) ? 1.0 : 0.0,
          nz};
}

inline FeatureVector featurize(std::string_view text, const rules::RuleAnalysis& analysis,
                               const FeaturizerConfig& c, const IdfTable* idf = nullptr) {
  FeatureVector v;
  v.dim = feature_dim(c);
  auto counts = hashed_counts(text, c);
  double norm2 = 0.0;
  for (auto& [bucket, value] : counts) {
    if (idf && c.idf_weighting) value *= idf->idf(bucket);
    norm2 += value * value;
  }
  if (norm2 > 0.0) {
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& [bucket, value] : counts)
      if (value != 0.0) v.entries.emplace_back(bucket, value * inv);
  }
  auto rule = rule_features(analysis);
  for (std::size_t k = 0; k < kRuleDims; ++k)
    if (rule[k] != 0.0) v.entries.emplace_back(static_cast<std::uint32_t>(c.hash_dim + k), rule[k]);
  return v;
}

inline FeatureVector featurize(std::string_view text, const FeaturizerConfig& c, const IdfTable* idf = nullptr,
                               const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  return featurize(text, rules::analyze(text, lex), c, idf);
}

}  // namespace target_radar
