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

// Bias diagnostics for the linear model: exact per-feature attribution,
// counterfactual perturbation of years, country names and arbitrary tokens,
// and round-year statistics over a labelled corpus.
//
// The probes measure how sensitive a trained model is to a token. They say
// nothing about where that sensitivity came from.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "target_radar/classifier.hpp"
#include "target_radar/common.hpp"
#include "target_radar/corpus.hpp"
#include "target_radar/features.hpp"
#include "target_radar/rulegrammar.hpp"

namespace target_radar {

struct AttributionEntry {
  std::uint32_t index = 0;
  std::string name;  // reserved rule name, or an n-gram hashing to the bucket
  double value = 0.0;
  double contribution = 0.0;
};

struct AttributionReport {
  Label label = Label::NetZero;
  std::vector<AttributionEntry> entries;  // |contribution| descending, ties by index
  double bias = 0.0;
  double logit = 0.0;

  double sum() const {
    double s = bias;
    for (const auto& e : entries) s += e.contribution;
    return s;
  }
};

// Names every active dimension of `x`. Hashed buckets get the first n-gram of
// `text` (in reading order) that lands in them.
inline std::map<std::uint32_t, std::string> dimension_names(std::string_view text, const FeaturizerConfig& c) {
  std::map<std::uint32_t, std::string> names;
  for (const auto& g : hashed_ngrams(text, c)) names.emplace(g.bucket, g.text);
  for (std::size_t k = 0; k < kRuleDims; ++k)
    names[static_cast<std::uint32_t>(c.hash_dim + k)] = std::string(rule_dim_names()[k]);
  return names;
}

inline std::vector<AttributionReport> attribute(const ModelParams& m, std::string_view text,
                                                const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  FeatureVector x = m.features(text, lex);
  auto names = dimension_names(text, m.featurizer);
  std::vector<AttributionReport> out;
  for (Label l : kAllLabels) {
    std::size_t k = index_of(l);
    AttributionReport r;
    r.label = l;
    r.bias = m.weights.b[k];
    r.logit = m.weights.logit(k, x);
    for (auto [i, v] : x.entries) {
      auto it = names.find(i);
      r.entries.push_back({i, it == names.end() ? "bucket:" + std::to_string(i) : it->second, v, m.weights.at(k, i) * v});
    }
    std::stable_sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
      if (std::abs(a.contribution) != std::abs(b.contribution)) return std::abs(a.contribution) > std::abs(b.contribution);
      return a.index < b.index;
    });
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perturbation.

struct PerturbationEntry {
  std::string paragraph_id;
  std::string original;
  std::string replacement;
  std::array<double, kNumLabels> delta{};  // perturbed score minus original score
};

struct PerturbationResult {
  std::vector<PerturbationEntry> entries;
  std::size_t skipped = 0;  // paragraphs without any matching token

  double mean_abs_delta(Label l) const {
    if (entries.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : entries) s += std::abs(e.delta[index_of(l)]);
    return s / static_cast<double>(entries.size());
  }
};

struct Occurrence {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string replacement;
};

// Applies one replacement at a time, so every occurrence gets its own entry.
inline void perturb_each(const ModelParams& m, const Paragraph& p, const std::vector<Occurrence>& occ,
                         PerturbationResult& out, const rules::Lexicons& lex) {
  if (occ.empty()) {
    ++out.skipped;
    return;
  }
  auto base = score(m, m.features(p.text, lex));
  for (const auto& o : occ) {
    std::string text = p.text.substr(0, o.start) + o.replacement + p.text.substr(o.end);
    auto s = score(m, m.features(text, lex));
    PerturbationEntry e{p.id, p.text.substr(o.start, o.end - o.start), o.replacement, {}};
    for (std::size_t k = 0; k < kNumLabels; ++k) e.delta[k] = s[k] - base[k];
    out.entries.push_back(std::move(e));
  }
}

inline bool is_round_year(int y) { return y % 5 == 0; }

// Round years move forward by one; others go to the nearest round year
// (ties upward).
inline int default_year_shift(int y) {
  if (is_round_year(y)) return y + 1;
  int down = y - y % 5;
  return y - down >= 3 ? down + 5 : down;
}

template <typename ParagraphRange>
PerturbationResult perturb_years(const ModelParams& m, const ParagraphRange& paragraphs,
                                 const std::function<int(int)>& mapping = default_year_shift,
                                 const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  PerturbationResult out;
  for (const Paragraph& p : paragraphs) {
    std::vector<Occurrence> occ;
    for (const auto& y : rules::find_years(p.text)) {
      int to = mapping(y.year);
      if (to != y.year) occ.push_back({y.start, y.end, std::to_string(to)});
    }
    perturb_each(m, p, occ, out, lex);
  }
  return out;
}

// Whole-token, case-insensitive occurrences of a phrase.
inline std::vector<std::pair<std::size_t, std::size_t>> find_phrase(std::string_view text,
                                                                    const rules::PhraseMatcher& matcher) {
  auto tokens = rules::tokenize(text);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& mt : matcher.find_all(tokens)) out.emplace_back(tokens[mt.first_token].start, tokens[mt.last_token].end);
  return out;
}

// Builds a matcher entry from free text so punctuation inside names
// ("Côte d'Ivoire") lines up with the tokenizer.
inline std::string phrase_entry(std::string_view phrase) {
  std::string out;
  for (const auto& t : rules::tokenize(phrase)) {
    if (!out.empty()) out += ' ';
    out += t.lower;
  }
  return out;
}

template <typename ParagraphRange>
PerturbationResult perturb_token(const ModelParams& m, const ParagraphRange& paragraphs, std::string_view from,
                                 std::string_view to, const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  rules::PhraseMatcher matcher({phrase_entry(from)});
  PerturbationResult out;
  for (const Paragraph& p : paragraphs) {
    std::vector<Occurrence> occ;
    for (auto [s, e] : find_phrase(p.text, matcher)) occ.push_back({s, e, std::string(to)});
    perturb_each(m, p, occ, out, lex);
  }
  return out;
}

inline constexpr std::string_view kNeutralCountry = "the country";

inline rules::PhraseMatcher country_matcher(const CountryTable& geo) {
  rules::PhraseMatcher matcher;
  for (const auto& c : geo.countries()) {
    matcher.add(phrase_entry(c.name));
    for (const auto& a : c.aliases) matcher.add(phrase_entry(a));
  }
  return matcher;
}

template <typename ParagraphRange>
PerturbationResult perturb_countries(const ModelParams& m, const ParagraphRange& paragraphs, const CountryTable& geo,
                                     const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  if (geo.countries().empty()) throw ValidationError("country lexicon is empty");
  auto matcher = country_matcher(geo);
  PerturbationResult out;
  for (const Paragraph& p : paragraphs) {
    std::vector<Occurrence> occ;
    for (auto [s, e] : find_phrase(p.text, matcher)) occ.push_back({s, e, std::string(kNeutralCountry)});
    perturb_each(m, p, occ, out, lex);
  }
  return out;
}

// Mean |delta| per replaced surface form, largest first.
inline std::vector<std::pair<std::string, double>> delta_by_token(const PerturbationResult& r, Label l) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& e : r.entries) {
    auto& a = acc[to_lower_ascii(e.original)];
    a.first += std::abs(e.delta[index_of(l)]);
    ++a.second;
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [tok, a] : acc) out.emplace_back(tok, a.first / static_cast<double>(a.second));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

// ---------------------------------------------------------------------------

struct RoundYearStats {
  std::optional<double> round_fraction_positive;  // empty when no year tokens
  std::optional<double> round_fraction_negative;
  std::size_t years_positive = 0;
  std::size_t years_negative = 0;
  std::map<int, std::size_t> histogram;

  std::size_t total() const { return years_positive + years_negative; }
};

// `positive` says whether a paragraph carries any target label; paragraphs
// missing from the map are ignored.
inline RoundYearStats round_year_stats(const Corpus& corpus, const std::map<std::string, bool>& positive) {
  RoundYearStats s;
  std::size_t round_pos = 0, round_neg = 0;
  for (const auto& p : corpus) {
    auto it = positive.find(p.id);
    if (it == positive.end()) continue;
    for (const auto& y : rules::find_years(p.text)) {
      ++s.histogram[y.year];
      bool r = is_round_year(y.year);
      if (it->second) ++s.years_positive, round_pos += r;
      else ++s.years_negative, round_neg += r;
    }
  }
  if (s.years_positive) s.round_fraction_positive = static_cast<double>(round_pos) / static_cast<double>(s.years_positive);
  if (s.years_negative) s.round_fraction_negative = static_cast<double>(round_neg) / static_cast<double>(s.years_negative);
  return s;
}

inline std::map<std::string, bool> any_positive(const std::map<std::string, LabelSet>& labels) {
  std::map<std::string, bool> out;
  for (const auto& [id, ls] : labels) out[id] = ls.any();
  return out;
}

// ---------------------------------------------------------------------------
// Reports.

inline nlohmann::json to_json(const AttributionReport& r, std::size_t top = 20) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(top, r.entries.size()); ++i) {
    const auto& e = r.entries[i];
    entries.push_back({{"feature", e.name}, {"index", e.index}, {"value", e.value}, {"contribution", e.contribution}});
  }
  return {{"label", label_name(r.label)}, {"bias", r.bias}, {"logit", r.logit}, {"entries", entries}};
}

inline nlohmann::json to_json(const PerturbationResult& r, std::size_t top = 50) {
  nlohmann::json j;
  j["skipped"] = r.skipped;
  j["perturbations"] = r.entries.size();
  for (Label l : kAllLabels) j["mean_abs_delta"][std::string(label_name(l))] = r.mean_abs_delta(l);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(top, r.entries.size()); ++i) {
    const auto& e = r.entries[i];
    nlohmann::json d;
    for (Label l : kAllLabels) d[std::string(label_name(l))] = e.delta[index_of(l)];
    rows.push_back({{"paragraph_id", e.paragraph_id}, {"original", e.original}, {"replacement", e.replacement}, {"delta", d}});
  }
  j["entries"] = rows;
  j["note"] = "deltas measure model sensitivity to the replaced token, not the origin of that sensitivity";
  return j;
}

inline nlohmann::json to_json(const RoundYearStats& s) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("undefined-support"); };
  nlohmann::json hist = nlohmann::json::object();
  for (auto [y, n] : s.histogram) hist[std::to_string(y)] = n;
  return {{"round_fraction_positive", opt(s.round_fraction_positive)},
          {"round_fraction_negative", opt(s.round_fraction_negative)},
          {"years_positive", s.years_positive},
          {"years_negative", s.years_negative},
          {"histogram", hist}};
}

}  // namespace target_radar
