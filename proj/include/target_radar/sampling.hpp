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

// Annotation batch builders: stratified oversampling by region and
// translation status, confident-negative sampling to steer the label ratio,
// and boundary-distance uncertainty sampling for active-learning rounds.
//
// Shortfalls are always reported; batches are never padded.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "target_radar/classifier.hpp"
#include "target_radar/common.hpp"
#include "target_radar/corpus.hpp"

namespace target_radar {

enum class Strategy { Stratified, Negative, Uncertainty };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Stratified: return "stratified";
    case Strategy::Negative: return "negative";
    case Strategy::Uncertainty: return "uncertainty";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "stratified") return Strategy::Stratified;
  if (s == "negative") return Strategy::Negative;
  if (s == "uncertainty") return Strategy::Uncertainty;
  return std::nullopt;
}

// 1584 / 2610 rounded: the negative share of the published dataset.
inline constexpr double kDefaultNegativeRatio = 0.607;

struct BatchItem {
  std::string paragraph_id;
  Strategy strategy = Strategy::Stratified;
  std::size_t rank = 0;  // 1-based
  int round = 0;

  bool operator==(const BatchItem&) const = default;
};

struct SampleResult {
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> shortfall;  // stratum (or "negative") -> missing count
  std::size_t overflow = 0;                       // negatives requested beyond batch capacity
  std::size_t requested = 0;

  std::size_t total_shortfall() const {
    std::size_t n = 0;
    for (const auto& [k, v] : shortfall) n += v;
    return n;
  }
};

inline std::vector<BatchItem> to_batch(const std::vector<std::string>& ids, Strategy s, int round) {
  std::vector<BatchItem> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], s, i + 1, round});
  return out;
}

inline nlohmann::json batch_item_to_json(const BatchItem& b) {
  return {{"paragraph_id", b.paragraph_id}, {"strategy", strategy_name(b.strategy)}, {"rank", b.rank}, {"round", b.round}};
}

inline void write_batch(std::ostream& out, const std::vector<BatchItem>& batch) {
  for (const auto& b : batch) out << batch_item_to_json(b).dump() << '\n';
}

inline nlohmann::json to_json(const SampleResult& r) {
  return {{"selected", r.ids.size()}, {"requested", r.requested}, {"shortfall", r.shortfall}, {"overflow", r.overflow}};
}

// Ids of corpus paragraphs that carry no annotation at all.
inline std::vector<std::string> unlabeled_ids(const Corpus& corpus, const AnnotationStore& labels) {
  std::vector<std::string> out;
  for (const auto& p : corpus)
    if (!labels.has_labels(p.id)) out.push_back(p.id);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

inline const std::set<std::string>& known_regions() {
  static const std::set<std::string> kRegions = {"AF", "AM", "AS", "EU", "OC", "UNK"};
  return kRegions;
}

// Quota keys are "<region>" or "<region>/<translated|original>".
inline bool quota_matches(const std::string& key, const Paragraph& p, const CountryTable& geo) {
  auto slash = key.find('/');
  std::string region = key.substr(0, slash);
  if (geo.region_of(p.geography_iso) != region) return false;
  if (slash == std::string::npos) return true;
  return key.substr(slash + 1) == field_value(p, "translated");
}

inline void validate_quota_key(const std::string& key) {
  auto slash = key.find('/');
  if (!known_regions().count(key.substr(0, slash))) throw ValidationError("quota references unknown region '" + key + "'");
  if (slash != std::string::npos) {
    auto t = key.substr(slash + 1);
    if (t != "translated" && t != "original") throw ValidationError("quota references unknown stratum '" + key + "'");
  }
}

// Quotas are filled in key order from a per-key seeded shuffle of the pool;
// an id already taken by an earlier key is not reused.
inline SampleResult stratified_sample(const Corpus& corpus, const std::vector<std::string>& pool,
                                      const std::map<std::string, std::size_t>& quotas, std::uint64_t seed,
                                      const CountryTable& geo) {
  if (pool.empty()) throw ValidationError("empty unlabeled pool");
  for (const auto& [key, n] : quotas) validate_quota_key(key);
  std::vector<std::string> sorted_pool = pool;
  std::sort(sorted_pool.begin(), sorted_pool.end());
  sorted_pool.erase(std::unique(sorted_pool.begin(), sorted_pool.end()), sorted_pool.end());

  SampleResult r;
  std::set<std::string> taken;
  for (const auto& [key, quota] : quotas) {
    r.requested += quota;
    std::vector<std::string> members;
    for (const auto& id : sorted_pool)
      if (!taken.count(id) && quota_matches(key, corpus.at(id), geo)) members.push_back(id);
    Rng rng(seed ^ fnv1a64(key));
    rng.shuffle(members);
    std::size_t n = std::min(quota, members.size());
    for (std::size_t i = 0; i < n; ++i) {
      r.ids.push_back(members[i]);
      taken.insert(members[i]);
    }
    if (n < quota) r.shortfall[key] = quota - n;
  }
  return r;
}

// Equal-share quotas over every region x translation stratum present in the
// pool. Used when no model exists yet.
inline std::map<std::string, std::size_t> balanced_quotas(const Corpus& corpus, const std::vector<std::string>& pool,
                                                          std::size_t batch_size, const CountryTable& geo) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& id : pool) {
    const auto& p = corpus.at(id);
    ++sizes[geo.region_of(p.geography_iso) + "/" + field_value(p, "translated")];
  }
  std::map<std::string, std::size_t> quotas;
  std::size_t remaining = std::min(batch_size, pool.size());
  // Round-robin so that small strata are filled first.
  while (remaining > 0) {
    bool progressed = false;
    for (const auto& [key, size] : sizes) {
      if (remaining == 0) break;
      if (quotas[key] < size) {
        ++quotas[key];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return quotas;
}

// Confident negatives: every label scored below its threshold. Lowest max-score
// first; ties by id.
inline SampleResult negative_sample(const std::vector<PredictionRecord>& preds,
                                    const std::array<double, kNumLabels>& thresholds, std::size_t batch_size,
                                    std::size_t presumed_positives, double target_ratio = kDefaultNegativeRatio) {
  if (!(target_ratio > 0.0 && target_ratio < 1.0)) throw ValidationError("negative ratio must lie in (0, 1)");
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  if (presumed_positives > batch_size) throw ValidationError("presumed positives exceed batch size");

  std::vector<std::pair<double, std::string>> pool;
  for (const auto& p : preds) {
    bool negative = true;
    double mx = 0.0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      negative &= p.scores[k] < thresholds[k];
      mx = std::max(mx, p.scores[k]);
    }
    if (negative) pool.emplace_back(mx, p.paragraph_id);
  }
  std::sort(pool.begin(), pool.end());

  SampleResult r;
  r.requested = static_cast<std::size_t>(std::llround(target_ratio * static_cast<double>(batch_size)));
  std::size_t capacity = batch_size - presumed_positives;
  std::size_t wanted = std::min(r.requested, capacity);
  r.overflow = r.requested - wanted;
  std::size_t n = std::min(wanted, pool.size());
  for (std::size_t i = 0; i < n; ++i) r.ids.push_back(pool[i].second);
  if (n < wanted) r.shortfall["negative"] = wanted - n;
  return r;
}

inline double boundary_distance(const PredictionRecord& p, const std::array<double, kNumLabels>& thresholds) {
  double d = std::abs(p.scores[0] - thresholds[0]);
  for (std::size_t k = 1; k < kNumLabels; ++k) d = std::min(d, std::abs(p.scores[k] - thresholds[k]));
  return d;
}

// Closest to any decision boundary first; ties by id.
inline SampleResult uncertainty_sample(const std::vector<PredictionRecord>& preds,
                                       const std::array<double, kNumLabels>& thresholds, std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  if (preds.empty()) throw ValidationError("empty unlabeled pool");
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& p : preds) ranked.emplace_back(boundary_distance(p, thresholds), p.paragraph_id);
  std::sort(ranked.begin(), ranked.end());
  ranked.erase(std::unique(ranked.begin(), ranked.end(),
                           [](const auto& a, const auto& b) { return a.second == b.second; }),
               ranked.end());
  SampleResult r;
  r.requested = batch_size;
  for (std::size_t i = 0; i < std::min(batch_size, ranked.size()); ++i) r.ids.push_back(ranked[i].second);
  return r;
}

}  // namespace target_radar
