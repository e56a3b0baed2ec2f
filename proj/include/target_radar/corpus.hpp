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

// Paragraph corpus, annotation store, label statistics and stratified
// train/val/test splitting. All interchange is JSONL, one record per line.

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "target_radar/common.hpp"

namespace target_radar {

using json = nlohmann::json;

enum class Source { Law, Policy, Unfccc };

inline std::string_view source_name(Source s) {
  switch (s) {
    case Source::Law: return "law";
    case Source::Policy: return "policy";
    case Source::Unfccc: return "unfccc";
  }
  return "?";
}

inline std::optional<Source> parse_source(std::string_view s) {
  if (s == "law") return Source::Law;
  if (s == "policy") return Source::Policy;
  if (s == "unfccc") return Source::Unfccc;
  return std::nullopt;
}

struct Paragraph {
  std::string id;
  std::string doc_id;
  std::string text;
  std::string geography_iso = "UNK";
  std::string language = "en";
  bool translated = false;
  Source source = Source::Policy;

  bool operator==(const Paragraph&) const = default;
};

struct AnnotationRecord {
  std::string paragraph_id;
  std::string annotator;
  int round = 0;
  LabelSet labels;
  std::string timestamp;

  bool operator==(const AnnotationRecord&) const = default;
};

enum class Split { Train, Val, Test };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

struct SplitAssignment {
  std::string paragraph_id;
  Split split = Split::Train;
  bool operator==(const SplitAssignment&) const = default;
};

// ---------------------------------------------------------------------------
// Geography: ISO alpha-3 code to UN M49 region, plus country names used by
// the country-perturbation probe. Loaded from data/countries.tsv.

struct Country {
  std::string iso3;
  std::string region;  // AF, AM, AS, EU, OC
  std::string name;
  std::vector<std::string> aliases;  // adjectival forms and alternate names
};

class CountryTable {
 public:
  CountryTable() = default;
  explicit CountryTable(std::vector<Country> countries) : countries_(std::move(countries)) {
    for (std::size_t i = 0; i < countries_.size(); ++i) by_iso_[countries_[i].iso3] = i;
  }

  // Format: iso3 <TAB> region <TAB> name <TAB> alias;alias;...
  static CountryTable load(const std::filesystem::path& path) {
    std::vector<Country> out;
    std::size_t lineno = 0;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty() || trim(line).front() == '#') continue;
      auto cols = split_string(line, '\t');
      if (cols.size() < 3) throw ValidationError("countries table: expected >= 3 columns", lineno);
      Country c{std::string(trim(cols[0])), std::string(trim(cols[1])), std::string(trim(cols[2])), {}};
      if (cols.size() > 3)
        for (auto& a : split_string(cols[3], ';'))
          if (!trim(a).empty()) c.aliases.emplace_back(trim(a));
      out.push_back(std::move(c));
    }
    return CountryTable(std::move(out));
  }

  static CountryTable load_default() { return load(data_dir() / "countries.tsv"); }

  const Country* find(std::string_view iso3) const {
    auto it = by_iso_.find(std::string(iso3));
    return it == by_iso_.end() ? nullptr : &countries_[it->second];
  }

  std::string region_of(std::string_view iso3) const {
    const Country* c = find(iso3);
    return c ? c->region : "UNK";
  }

  const std::vector<Country>& countries() const { return countries_; }

 private:
  std::vector<Country> countries_;
  std::unordered_map<std::string, std::size_t> by_iso_;
};

// ---------------------------------------------------------------------------

class Corpus {
 public:
  Corpus() = default;

  void add(Paragraph p, std::size_t line = 0) {
    validate(p, line);
    if (index_.count(p.id)) throw ValidationError("duplicate paragraph id '" + p.id + "'", line);
    index_.emplace(p.id, paragraphs_.size());
    paragraphs_.push_back(std::move(p));
  }

  const Paragraph* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &paragraphs_[it->second];
  }
  const Paragraph& at(std::string_view id) const {
    const Paragraph* p = find(id);
    if (!p) throw ValidationError("unknown paragraph id '" + std::string(id) + "'");
    return *p;
  }
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::size_t size() const { return paragraphs_.size(); }
  bool empty() const { return paragraphs_.empty(); }
  const std::vector<Paragraph>& paragraphs() const { return paragraphs_; }
  auto begin() const { return paragraphs_.begin(); }
  auto end() const { return paragraphs_.end(); }

  bool operator==(const Corpus& o) const { return paragraphs_ == o.paragraphs_; }

  static void validate(const Paragraph& p, std::size_t line = 0) {
    if (p.id.empty()) throw ValidationError("field 'id' must be a non-empty string", line);
    if (trim(p.text).empty()) throw ValidationError("field 'text' must be non-empty after trimming", line);
    const auto& g = p.geography_iso;
    bool iso_ok = g == "UNK" || (g.size() == 3 && std::all_of(g.begin(), g.end(), [](char c) {
                                   return c >= 'A' && c <= 'Z';
                                 }));
    if (!iso_ok) throw ValidationError("field 'geography_iso' must be ISO alpha-3 or \"UNK\", got '" + g + "'", line);
  }

 private:
  std::vector<Paragraph> paragraphs_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Append-only store of annotation records. (paragraph_id, annotator, round)
// is unique.
class AnnotationStore {
 public:
  void add(AnnotationRecord r, std::size_t line = 0) {
    if (r.paragraph_id.empty()) throw ValidationError("field 'paragraph_id' must be non-empty", line);
    if (r.annotator.empty()) throw ValidationError("field 'annotator' must be non-empty", line);
    if (r.round < 0) throw ValidationError("field 'round' must be non-negative", line);
    auto key = std::make_tuple(r.paragraph_id, r.annotator, r.round);
    if (keys_.count(key))
      throw ValidationError("duplicate annotation for paragraph '" + r.paragraph_id + "', annotator '" +
                                r.annotator + "', round " + std::to_string(r.round),
                            line);
    keys_.insert(key);
    by_paragraph_[r.paragraph_id].push_back(records_.size());
    records_.push_back(std::move(r));
  }

  bool contains(const std::string& paragraph_id, const std::string& annotator, int round) const {
    return keys_.count(std::make_tuple(paragraph_id, annotator, round)) > 0;
  }

  bool has_labels(std::string_view paragraph_id) const {
    return by_paragraph_.count(std::string(paragraph_id)) > 0;
  }

  bool labelled_by(std::string_view paragraph_id, std::string_view annotator) const {
    auto it = by_paragraph_.find(std::string(paragraph_id));
    if (it == by_paragraph_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](std::size_t i) { return records_[i].annotator == annotator; });
  }

  // Latest-round record per annotator for one paragraph, ordered by annotator.
  std::vector<const AnnotationRecord*> latest_per_annotator(std::string_view paragraph_id) const {
    std::map<std::string, const AnnotationRecord*> latest;
    auto it = by_paragraph_.find(std::string(paragraph_id));
    if (it == by_paragraph_.end()) return {};
    for (std::size_t i : it->second) {
      const auto& r = records_[i];
      auto& slot = latest[r.annotator];
      if (!slot || r.round > slot->round) slot = &r;
    }
    std::vector<const AnnotationRecord*> out;
    for (auto& [_, r] : latest) out.push_back(r);
    return out;
  }

  // Majority vote per label over each annotator's latest record; ties are
  // resolved as positive. nullopt when the paragraph has no annotations.
  std::optional<LabelSet> consensus(std::string_view paragraph_id) const {
    auto latest = latest_per_annotator(paragraph_id);
    if (latest.empty()) return std::nullopt;
    LabelSet out;
    for (Label l : kAllLabels) {
      std::size_t pos = 0;
      for (auto* r : latest) pos += r->labels.get(l);
      out.set(l, 2 * pos >= latest.size());
    }
    return out;
  }

  std::map<std::string, LabelSet> consensus_map() const {
    std::map<std::string, LabelSet> out;
    for (auto& [id, _] : by_paragraph_) out[id] = *consensus(id);
    return out;
  }

  std::set<std::string> annotators() const {
    std::set<std::string> out;
    for (auto& r : records_) out.insert(r.annotator);
    return out;
  }

  const std::vector<AnnotationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<AnnotationRecord> records_;
  std::set<std::tuple<std::string, std::string, int>> keys_;
  std::map<std::string, std::vector<std::size_t>> by_paragraph_;
};

// ---------------------------------------------------------------------------
// JSON record conversion.

namespace detail {

inline const json& require(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ValidationError(std::string("missing field '") + field + "'", line);
  return *it;
}

inline std::string require_string(const json& obj, const char* field, std::size_t line) {
  const json& v = require(obj, field, line);
  if (!v.is_string()) throw ValidationError(std::string("field '") + field + "' must be a string", line);
  return v.get<std::string>();
}

inline bool require_bool(const json& obj, const char* field, std::size_t line) {
  const json& v = require(obj, field, line);
  if (!v.is_boolean()) throw ValidationError(std::string("field '") + field + "' must be a boolean", line);
  return v.get<bool>();
}

inline json parse_line(std::string_view line, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ValidationError("malformed JSON", lineno);
  if (!j.is_object()) throw ValidationError("record must be a JSON object", lineno);
  return j;
}

// Very small ISO-8601 shape check: YYYY-MM-DD with optional time part.
inline bool looks_like_iso8601(std::string_view s) {
  if (s.size() < 10) return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!is_ascii_digit(static_cast<unsigned char>(s[i]))) return false;
  if (s[4] != '-' || s[7] != '-') return false;
  return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

template <typename Fn>
void for_each_jsonl_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    fn(parse_line(line, lineno), lineno);
  }
}

}  // namespace detail

inline Paragraph paragraph_from_json(const json& j, std::size_t line = 0) {
  Paragraph p;
  p.id = detail::require_string(j, "id", line);
  p.doc_id = detail::require_string(j, "doc_id", line);
  p.text = detail::require_string(j, "text", line);
  p.geography_iso = detail::require_string(j, "geography_iso", line);
  p.language = detail::require_string(j, "language", line);
  p.translated = detail::require_bool(j, "translated", line);
  auto src = detail::require_string(j, "source", line);
  auto parsed = parse_source(src);
  if (!parsed) throw ValidationError("unknown value '" + src + "' for field 'source'", line);
  p.source = *parsed;
  return p;
}

inline json paragraph_to_json(const Paragraph& p) {
  return json{{"id", p.id},
              {"doc_id", p.doc_id},
              {"text", p.text},
              {"geography_iso", p.geography_iso},
              {"language", p.language},
              {"translated", p.translated},
              {"source", source_name(p.source)}};
}

inline AnnotationRecord annotation_from_json(const json& j, std::size_t line = 0) {
  AnnotationRecord r;
  r.paragraph_id = detail::require_string(j, "paragraph_id", line);
  r.annotator = detail::require_string(j, "annotator", line);
  const json& round = detail::require(j, "round", line);
  if (!round.is_number_integer() || round.get<long long>() < 0)
    throw ValidationError("field 'round' must be a non-negative integer", line);
  r.round = round.get<int>();
  r.labels.net_zero = detail::require_bool(j, "net_zero", line);
  r.labels.reduction = detail::require_bool(j, "reduction", line);
  r.labels.other = detail::require_bool(j, "other", line);
  r.timestamp = detail::require_string(j, "timestamp", line);
  if (!detail::looks_like_iso8601(r.timestamp))
    throw ValidationError("field 'timestamp' must be ISO-8601, got '" + r.timestamp + "'", line);
  return r;
}

inline json annotation_to_json(const AnnotationRecord& r) {
  return json{{"paragraph_id", r.paragraph_id},
              {"annotator", r.annotator},
              {"round", r.round},
              {"net_zero", r.labels.net_zero},
              {"reduction", r.labels.reduction},
              {"other", r.labels.other},
              {"timestamp", r.timestamp}};
}

// ---------------------------------------------------------------------------
// Ingestion.

inline Corpus read_paragraphs(std::istream& in) {
  Corpus corpus;
  detail::for_each_jsonl_line(in, [&](const json& j, std::size_t line) {
    corpus.add(paragraph_from_json(j, line), line);
  });
  return corpus;
}

inline Corpus ingest_paragraphs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open paragraphs file: " + path.string());
  return read_paragraphs(in);
}

// When `corpus` is given every paragraph_id must resolve in it.
inline AnnotationStore read_labels(std::istream& in, const Corpus* corpus = nullptr) {
  AnnotationStore store;
  detail::for_each_jsonl_line(in, [&](const json& j, std::size_t line) {
    auto r = annotation_from_json(j, line);
    if (corpus && !corpus->contains(r.paragraph_id))
      throw ValidationError("dangling paragraph_id '" + r.paragraph_id + "' not found in corpus", line);
    store.add(std::move(r), line);
  });
  return store;
}

inline AnnotationStore ingest_labels(const std::filesystem::path& path, const Corpus* corpus = nullptr) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open labels file: " + path.string());
  return read_labels(in, corpus);
}

inline void write_paragraphs(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus) out << paragraph_to_json(p).dump() << '\n';
}

inline void write_labels(std::ostream& out, const AnnotationStore& store) {
  for (const auto& r : store.records()) out << annotation_to_json(r).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Label statistics (the Table-1 quintuple).

struct LabelStats {
  std::size_t net_zero = 0;
  std::size_t reduction = 0;
  std::size_t other = 0;
  std::size_t none = 0;
  std::size_t total = 0;

  std::size_t count(Label l) const {
    switch (l) {
      case Label::NetZero: return net_zero;
      case Label::Reduction: return reduction;
      case Label::Other: return other;
    }
    return 0;
  }
  bool operator==(const LabelStats&) const = default;
};

inline json to_json(const LabelStats& s) {
  return json{{"net_zero", s.net_zero}, {"reduction", s.reduction}, {"other", s.other},
              {"none", s.none}, {"total", s.total}};
}

// Paragraphs with no annotation, and paragraphs whose consensus is all-false,
// both count as "none". A multi-label paragraph increments every class.
inline LabelStats stats(const Corpus& corpus, const AnnotationStore& labels) {
  LabelStats s;
  for (const auto& p : corpus) {
    ++s.total;
    auto ls = labels.consensus(p.id);
    if (!ls || !ls->any()) {
      ++s.none;
      continue;
    }
    s.net_zero += ls->net_zero;
    s.reduction += ls->reduction;
    s.other += ls->other;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Splitting.

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Value of a paragraph field used for stratification and slicing.
inline std::string field_value(const Paragraph& p, std::string_view field, const CountryTable* geo = nullptr) {
  if (field == "translated") return p.translated ? "translated" : "original";
  if (field == "source") return std::string(source_name(p.source));
  if (field == "language") return p.language;
  if (field == "geography_iso") return p.geography_iso;
  if (field == "doc_id") return p.doc_id;
  if (field == "region") {
    if (!geo) throw ValidationError("field 'region' requires a country table");
    return geo->region_of(p.geography_iso);
  }
  throw ValidationError("unknown paragraph field '" + std::string(field) + "'");
}

inline std::string stratum_key(const Paragraph& p, const std::vector<std::string>& strata,
                               const CountryTable* geo) {
  std::string key;
  for (const auto& f : strata) {
    if (!key.empty()) key += '|';
    key += field_value(p, f, geo);
  }
  return key;
}

// Per-stratum counts by largest remainder, so every split is within one
// item of its requested share. Ties go to train, then val, then test.
inline std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitFractions& f) {
  const std::array<double, 3> frac = {f.train, f.val, f.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    double exact = frac[i] * static_cast<double>(n);
    double fl = std::min(std::floor(exact), static_cast<double>(n - assigned));
    counts[i] = static_cast<std::size_t>(fl);
    rem[i] = exact - fl;
    assigned += counts[i];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (rem[i] > rem[best]) best = i;
    ++counts[best];
    rem[best] = -1.0;
    ++assigned;
  }
  return counts;
}

// Splits the labelled paragraphs (every paragraph when `labels` is null or
// empty). Items are ordered by id before shuffling, so the assignment depends
// only on the item set, the fractions, the strata and the seed.
inline std::vector<SplitAssignment> split(const Corpus& corpus, const AnnotationStore* labels,
                                          const SplitFractions& fractions, std::uint64_t seed,
                                          const std::vector<std::string>& strata = {},
                                          const CountryTable* geo = nullptr) {
  const double sum = fractions.train + fractions.val + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1, got " + std::to_string(sum));
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0)
    throw ValidationError("split fractions must be non-negative");
  if (corpus.empty()) throw ValidationError("cannot split an empty corpus");

  const bool only_labelled = labels && !labels->empty();
  std::map<std::string, std::vector<std::string>> by_stratum;
  for (const auto& p : corpus) {
    if (only_labelled && !labels->has_labels(p.id)) continue;
    by_stratum[stratum_key(p, strata, geo)].push_back(p.id);
  }
  if (by_stratum.empty()) throw ValidationError("no labelled paragraphs to split");

  Rng rng(seed);
  std::vector<SplitAssignment> out;
  for (auto& [key, ids] : by_stratum) {
    std::sort(ids.begin(), ids.end());
    rng.shuffle(ids);
    auto counts = allocate_counts(ids.size(), fractions);
    std::size_t i = 0;
    for (Split s : {Split::Train, Split::Val, Split::Test})
      for (std::size_t c = 0; c < counts[static_cast<std::size_t>(s)]; ++c) out.push_back({ids[i++], s});
  }
  std::sort(out.begin(), out.end(),
            [](const SplitAssignment& a, const SplitAssignment& b) { return a.paragraph_id < b.paragraph_id; });
  return out;
}

inline void write_splits(std::ostream& out, const std::vector<SplitAssignment>& splits) {
  for (const auto& s : splits)
    out << json{{"paragraph_id", s.paragraph_id}, {"split", split_name(s.split)}}.dump() << '\n';
}

inline std::vector<SplitAssignment> read_splits(std::istream& in, const Corpus* corpus = nullptr) {
  std::vector<SplitAssignment> out;
  std::set<std::string> seen;
  detail::for_each_jsonl_line(in, [&](const json& j, std::size_t line) {
    SplitAssignment a;
    a.paragraph_id = detail::require_string(j, "paragraph_id", line);
    auto name = detail::require_string(j, "split", line);
    auto s = parse_split(name);
    if (!s) throw ValidationError("unknown value '" + name + "' for field 'split'", line);
    a.split = *s;
    if (corpus && !corpus->contains(a.paragraph_id))
      throw ValidationError("dangling paragraph_id '" + a.paragraph_id + "' not found in corpus", line);
    if (!seen.insert(a.paragraph_id).second)
      throw ValidationError("paragraph '" + a.paragraph_id + "' assigned to more than one split", line);
    out.push_back(std::move(a));
  });
  return out;
}

inline std::vector<SplitAssignment> load_splits(const std::filesystem::path& path, const Corpus* corpus = nullptr) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open splits file: " + path.string());
  return read_splits(in, corpus);
}

inline std::vector<std::string> ids_in_split(const std::vector<SplitAssignment>& splits, Split which) {
  std::vector<std::string> out;
  for (const auto& s : splits)
    if (s.split == which) out.push_back(s.paragraph_id);
  return out;
}

}  // namespace target_radar
