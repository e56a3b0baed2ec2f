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

// Topic rollup for 'Other' targets: sentence-level condensation, a count
// vectorizer over stop-word-filtered 1..3-grams, seeded spherical k-means,
// class-based TF-IDF topic words, and a curated topic -> group mapping.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "target_radar/common.hpp"
#include "target_radar/rulegrammar.hpp"

namespace target_radar::topics {

// ---------------------------------------------------------------------------
// Condensation.

struct Sentence {
  std::size_t start = 0;
  std::size_t end = 0;
};

// Boundaries: . ? ! followed by whitespace or end of text, and newlines.
inline std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::size_t s = start, e = end;
    while (s < e && is_ascii_space(static_cast<unsigned char>(text[s]))) ++s;
    while (e > s && is_ascii_space(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > s) out.push_back({s, e});
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      flush(i + 1);
    } else if ((c == '.' || c == '?' || c == '!') &&
               (i + 1 == text.size() || is_ascii_space(static_cast<unsigned char>(text[i + 1])))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return out;
}

inline bool keeps_sentence(rules::SpanKind k) {
  using rules::SpanKind;
  return k == SpanKind::YearDeadline || k == SpanKind::RelativeDeadline || k == SpanKind::Percent ||
         k == SpanKind::Number || k == SpanKind::NumberWord;
}

// Sentences mentioning "target" or carrying a date/number/percent span,
// joined by single spaces; the whole paragraph when nothing qualifies.
inline std::string preprocess(std::string_view text, const std::vector<rules::Span>& spans) {
  std::string out;
  for (const auto& s : split_sentences(text)) {
    std::string_view sentence = text.substr(s.start, s.end - s.start);
    bool keep = to_lower_ascii(sentence).find("target") != std::string::npos;
    for (const auto& sp : spans)
      keep |= keeps_sentence(sp.kind) && sp.start < s.end && sp.end > s.start;
    if (!keep) continue;
    if (!out.empty()) out += ' ';
    out += sentence;
  }
  return out.empty() ? std::string(text) : out;
}

inline std::string preprocess(std::string_view text, const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  return preprocess(text, rules::analyze(text, lex).spans);
}

// ---------------------------------------------------------------------------
// Vectorizer.

// Word tokens of two or more characters, lowercased. Underscores count as word
// characters; general-punctuation code points (curly quotes, dashes) and
// non-breaking spaces separate words.
inline std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t chars = 0;
  auto flush = [&] {
    if (chars >= 2) out.push_back(cur);
    cur.clear();
    chars = 0;
  };
  for (std::size_t i = 0; i < text.size();) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (is_ascii_alnum(c) || c == '_') {
        cur += static_cast<char>(to_lower_ascii(std::string_view(&text[i], 1))[0]);
        ++chars;
      } else {
        flush();
      }
      ++i;
      continue;
    }
    std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : c >= 0xC0 ? 2 : 1;
    len = std::min(len, text.size() - i);
    std::string_view cp = text.substr(i, len);
    bool separator = (len == 3 && static_cast<unsigned char>(cp[0]) == 0xE2 && static_cast<unsigned char>(cp[1]) == 0x80) ||
                     cp == "\xC2\xA0" || cp == "\xC2\xAB" || cp == "\xC2\xBB";
    if (separator) {
      flush();
    } else {
      cur += cp;
      ++chars;
    }
    i += len;
  }
  flush();
  return out;
}

using StopWords = std::set<std::string, std::less<>>;

inline StopWords load_stop_words(const std::filesystem::path& path) {
  StopWords s;
  for (auto& w : read_lines(path)) s.insert(to_lower_ascii(trim(w)));
  return s;
}

inline const StopWords& default_stop_words() {
  static const StopWords kWords = load_stop_words(data_dir() / "stopwords_en.txt");
  return kWords;
}

// n-grams are formed after stop words are removed, so they may bridge a
// removed word ("deforestation and reforestation" -> "deforestation
// reforestation").
inline std::vector<std::string> analyze_terms(std::string_view text, const StopWords& stop, int ngram_low,
                                              int ngram_high) {
  std::vector<std::string> words;
  for (auto& w : word_tokens(text))
    if (!stop.count(w)) words.push_back(std::move(w));
  std::vector<std::string> out;
  for (int n = ngram_low; n <= ngram_high; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i) {
      std::string g = words[i];
      for (int j = 1; j < n; ++j) g += ' ' + words[i + static_cast<std::size_t>(j)];
      out.push_back(std::move(g));
    }
  }
  return out;
}

using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

struct Vocab {
  std::vector<std::string> terms;  // sorted
  std::unordered_map<std::string, std::uint32_t> index;

  static Vocab from_terms(std::vector<std::string> terms) {
    Vocab v;
    std::sort(terms.begin(), terms.end());
    v.terms = std::move(terms);
    for (std::size_t i = 0; i < v.terms.size(); ++i) v.index[v.terms[i]] = static_cast<std::uint32_t>(i);
    return v;
  }
  std::size_t size() const { return terms.size(); }
};

struct VectorizerConfig {
  int ngram_low = 1;
  int ngram_high = 3;
  std::size_t min_df = 5;

  bool operator==(const VectorizerConfig&) const = default;
};

template <typename TextRange>
Vocab build_vocab(const TextRange& texts, const VectorizerConfig& c, const StopWords& stop) {
  std::map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    auto terms = analyze_terms(t, stop, c.ngram_low, c.ngram_high);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto& term : terms) ++df[term];
  }
  std::vector<std::string> keep;
  for (auto& [term, n] : df)
    if (n >= c.min_df) keep.push_back(term);
  return Vocab::from_terms(std::move(keep));
}

inline SparseVec count_vector(std::string_view text, const Vocab& v, const VectorizerConfig& c, const StopWords& stop) {
  std::map<std::uint32_t, double> counts;
  for (auto& term : analyze_terms(text, stop, c.ngram_low, c.ngram_high)) {
    auto it = v.index.find(term);
    if (it != v.index.end()) counts[it->second] += 1.0;
  }
  return SparseVec(counts.begin(), counts.end());
}

inline void l2_normalize(SparseVec& x) {
  double n = 0.0;
  for (auto& [i, val] : x) n += val * val;
  if (n == 0.0) return;
  n = std::sqrt(n);
  for (auto& [i, val] : x) val /= n;
}

// ---------------------------------------------------------------------------
// Seeded spherical k-means.

using Seed = std::vector<std::string>;  // phrases for one seed topic

inline const std::vector<Seed>& default_seeds() {
  static const std::vector<Seed> kSeeds = {{"energy efficiency"}, {"renewable energy"}, {"energy sources"},
                                           {"land use"},          {"forests", "forest cover"},
                                           {"deforestation and reforestation"}};
  return kSeeds;
}

struct TopicConfig {
  std::size_t k = 60;
  std::size_t top_n_words = 8;
  std::size_t max_iter = 100;
  std::size_t n_init = 10;  // initialisations; the lowest final objective wins
  double tol = 1e-6;
  std::uint64_t seed = 42;
  VectorizerConfig vectorizer;
};

struct TopicModel {
  TopicConfig config;
  std::vector<Seed> seeds;
  Vocab vocab;
  std::vector<std::vector<double>> centroids;  // k x |vocab|, unit length or zero
  std::vector<std::vector<std::string>> topic_words;
  std::vector<double> objective;  // after each Lloyd iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t k() const { return centroids.size(); }
};

inline double dot(const SparseVec& x, const std::vector<double>& c) {
  double s = 0.0;
  for (auto [i, v] : x) s += v * c[i];
  return s;
}

inline double squared_norm(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) s += v * v;
  return s;
}

inline double squared_norm(const SparseVec& x) {
  double s = 0.0;
  for (auto [i, v] : x) s += v * v;
  return s;
}

// Nearest centroid by cosine similarity; ties go to the lower topic id.
inline std::size_t nearest(const SparseVec& x, const std::vector<std::vector<double>>& centroids, double* sim = nullptr) {
  std::size_t best = 0;
  double best_sim = -2.0;
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    double s = dot(x, centroids[j]);
    if (s > best_sim) best_sim = s, best = j;
  }
  if (sim) *sim = best_sim;
  return best;
}

inline std::vector<double> seed_centroid(const Seed& seed, const Vocab& v, const VectorizerConfig& c,
                                         const StopWords& stop) {
  std::vector<double> out(v.size(), 0.0);
  for (const auto& phrase : seed)
    for (auto& term : analyze_terms(phrase, stop, c.ngram_low, c.ngram_high)) {
      auto it = v.index.find(term);
      if (it != v.index.end()) out[it->second] = 1.0;
    }
  double n = std::sqrt(squared_norm(out));
  if (n > 0.0)
    for (double& x : out) x /= n;
  return out;
}

// True when the text contains one of the seed's phrases as a whole n-gram,
// after the same stop-word removal the vectorizer applies.
inline bool mentions_seed(std::string_view text, const Seed& seed, const StopWords& stop) {
  for (const auto& phrase : seed) {
    const std::size_t n = analyze_terms(phrase, stop, 1, 1).size();
    if (n == 0) continue;
    const auto target = analyze_terms(phrase, stop, n, n);
    const auto grams = analyze_terms(text, stop, n, n);
    if (!target.empty() && std::find(grams.begin(), grams.end(), target.front()) != grams.end()) return true;
  }
  return false;
}

namespace detail {

inline double sq_dist(const SparseVec& x, double x_norm2, const std::vector<double>& c, double c_norm2) {
  return std::max(0.0, x_norm2 + c_norm2 - 2.0 * dot(x, c));
}

inline std::vector<double> dense(const SparseVec& x, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (auto [i, v] : x) out[i] = v;
  return out;
}

// Greedy k-means++ continuing from the given centers: each new center is the
// best of 2 + ln(k) candidates drawn with probability proportional to D^2.
inline void kmeanspp(const std::vector<SparseVec>& docs, std::vector<std::vector<double>>& centers, std::size_t k,
                     std::size_t dim, Rng& rng) {
  const std::size_t n = docs.size();
  std::vector<double> xn(n);
  for (std::size_t i = 0; i < n; ++i) xn[i] = squared_norm(docs[i]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  auto absorb = [&](const std::vector<double>& c, std::vector<double>& dist) {
    double cn = squared_norm(c);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], sq_dist(docs[i], xn[i], c, cn));
  };
  if (centers.empty()) centers.push_back(dense(docs[rng.below(n)], dim));
  for (const auto& c : centers) absorb(c, d2);

  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t best = 0;
    double best_pot = std::numeric_limits<double>::infinity();
    std::vector<double> best_d2;
    for (std::size_t t = 0; t < trials; ++t) {
      std::size_t cand;
      if (total <= 0.0) {
        cand = rng.below(n);
      } else {
        double u = rng.uniform() * total, acc = 0.0;
        cand = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc > u) {
            cand = i;
            break;
          }
        }
      }
      std::vector<double> nd = d2;
      absorb(dense(docs[cand], dim), nd);
      double pot = 0.0;
      for (double d : nd) pot += d;
      if (pot < best_pot) best_pot = pot, best = cand, best_d2 = std::move(nd);
    }
    centers.push_back(dense(docs[best], dim));
    d2 = std::move(best_d2);
  }
}

}  // namespace detail

// Spherical k-means objective: sum over documents of 1 - cos(x, centroid).
inline double objective(const std::vector<SparseVec>& docs, const std::vector<std::size_t>& assign,
                        const std::vector<std::vector<double>>& centroids) {
  double j = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) j += 1.0 - dot(docs[i], centroids[assign[i]]);
  return j;
}

struct FitResult {
  TopicModel model;
  std::vector<std::size_t> assignments;
};

// Clusters condensed texts. Seed topics take ids 0..seeds-1.
template <typename TextRange>
FitResult fit_topics(const TextRange& texts, const std::vector<Seed>& seeds, const TopicConfig& cfg,
                     const StopWords& stop = default_stop_words()) {
  std::vector<std::string> docs_text(std::begin(texts), std::end(texts));
  if (cfg.k == 0) throw ValidationError("k must be >= 1");
  if (docs_text.size() < cfg.k)
    throw ValidationError("topic fitting needs at least k=" + std::to_string(cfg.k) + " documents, got " +
                          std::to_string(docs_text.size()));
  if (seeds.size() > cfg.k) throw ValidationError("more seed topics than k");

  FitResult r;
  TopicModel& m = r.model;
  m.config = cfg;
  m.seeds = seeds;
  m.vocab = build_vocab(docs_text, cfg.vectorizer, stop);
  const std::size_t dim = m.vocab.size();

  std::vector<SparseVec> docs;
  for (const auto& t : docs_text) {
    docs.push_back(count_vector(t, m.vocab, cfg.vectorizer, stop));
    l2_normalize(docs.back());
  }

  // A seed centroid starts at the mean of the documents mentioning the seed,
  // so it covers their whole vocabulary and not only the phrase terms. With
  // no mention in the corpus it falls back to the phrase-term vector.
  std::vector<std::vector<double>> seed_centroids;
  for (const auto& s : seeds) {
    std::vector<double> c(dim, 0.0);
    for (std::size_t i = 0; i < docs.size(); ++i)
      if (mentions_seed(docs_text[i], s, stop))
        for (auto [t, v] : docs[i]) c[t] += v;
    double nrm = std::sqrt(squared_norm(c));
    if (nrm > 0.0) {
      for (double& x : c) x /= nrm;
      seed_centroids.push_back(std::move(c));
    } else {
      seed_centroids.push_back(seed_centroid(s, m.vocab, cfg.vectorizer, stop));
    }
  }

  const std::size_t n = docs.size();
  struct Run {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> assign;
    std::vector<double> objective;
    std::size_t iterations = 0;
    bool converged = false;
  };
  auto lloyd = [&](Rng& rng) {
    Run run;
    auto& centroids = run.centroids;
    centroids = seed_centroids;
    detail::kmeanspp(docs, centroids, cfg.k, dim, rng);
    auto& assign = run.assign;
    assign.assign(n, 0);
    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
      std::vector<double> sim(n);
      for (std::size_t i = 0; i < n; ++i) assign[i] = nearest(docs[i], centroids, &sim[i]);

      std::vector<std::vector<double>> next(cfg.k, std::vector<double>(dim, 0.0));
      std::vector<std::size_t> size(cfg.k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++size[assign[i]];
        for (auto [t, v] : docs[i]) next[assign[i]][t] += v;
      }
      for (auto& c : next) {
        double nrm = std::sqrt(squared_norm(c));
        if (nrm > 0.0)
          for (double& x : c) x /= nrm;
      }
      // Empty clusters take the worst-served non-empty document from a cluster
      // that can spare it.
      for (std::size_t j = 0; j < cfg.k; ++j) {
        if (size[j] > 0) continue;
        std::size_t far = n;
        double far_sim = 2.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (docs[i].empty() || size[assign[i]] < 2) continue;
          double s = dot(docs[i], next[assign[i]]);
          if (s < far_sim) far_sim = s, far = i;
        }
        if (far == n) continue;
        --size[assign[far]];
        assign[far] = j;
        size[j] = 1;
        next[j] = detail::dense(docs[far], dim);
      }

      double shift = 0.0;
      for (std::size_t j = 0; j < cfg.k; ++j) {
        double d = 0.0;
        for (std::size_t t = 0; t < dim; ++t) d += (next[j][t] - centroids[j][t]) * (next[j][t] - centroids[j][t]);
        shift = std::max(shift, std::sqrt(d));
      }
      centroids = std::move(next);
      run.objective.push_back(objective(docs, assign, centroids));
      run.iterations = it + 1;
      if (shift < cfg.tol) {
        run.converged = true;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest(docs[i], centroids);
    return run;
  };

  Rng rng(cfg.seed);
  Run best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t init = 0; init < std::max<std::size_t>(1, cfg.n_init); ++init) {
    auto run = lloyd(rng);
    double final_obj = objective(docs, run.assign, run.centroids);
    if (final_obj < best_obj - 1e-12) best_obj = final_obj, best = std::move(run);
  }
  m.objective = std::move(best.objective);
  m.iterations = best.iterations;
  m.converged = best.converged;
  m.centroids = std::move(best.centroids);
  r.assignments = std::move(best.assign);
  return r;
}

template <typename TextRange>
std::vector<std::size_t> assign_topics(const TopicModel& m, const TextRange& texts,
                                       const StopWords& stop = default_stop_words()) {
  std::vector<std::size_t> out;
  for (const auto& t : texts) {
    auto x = count_vector(t, m.vocab, m.config.vectorizer, stop);
    l2_normalize(x);
    out.push_back(nearest(x, m.centroids));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class-based TF-IDF.

struct CtfidfTable {
  std::vector<std::vector<double>> tf;      // classes x terms
  std::vector<std::vector<double>> weight;  // tf * ln(1 + A / f)
  double average_words = 0.0;               // A
};

// tf(t, c) is the raw count in the concatenated class; f(t) the total count
// over all classes; A the mean number of words per class.
inline CtfidfTable ctfidf(const std::vector<std::vector<double>>& class_term_counts) {
  CtfidfTable t;
  t.tf = class_term_counts;
  if (t.tf.empty()) return t;
  const std::size_t terms = t.tf[0].size();
  std::vector<double> f(terms, 0.0);
  double total = 0.0;
  for (const auto& row : t.tf) {
    if (row.size() != terms) throw ValidationError("ragged class-term matrix");
    for (std::size_t j = 0; j < terms; ++j) f[j] += row[j], total += row[j];
  }
  t.average_words = total / static_cast<double>(t.tf.size());
  t.weight.assign(t.tf.size(), std::vector<double>(terms, 0.0));
  for (std::size_t c = 0; c < t.tf.size(); ++c)
    for (std::size_t j = 0; j < terms; ++j)
      if (f[j] > 0.0) t.weight[c][j] = t.tf[c][j] * std::log(1.0 + t.average_words / f[j]);
  return t;
}

// Top-n terms per class by weight, ties by term; zero-weight terms dropped.
inline std::vector<std::vector<std::string>> top_words(const CtfidfTable& t, const std::vector<std::string>& terms,
                                                       std::size_t n) {
  std::vector<std::vector<std::string>> out;
  for (const auto& row : t.weight) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] > 0.0) idx.push_back(j);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return row[a] != row[b] ? row[a] > row[b] : terms[a] < terms[b];
    });
    std::vector<std::string> words;
    for (std::size_t i = 0; i < std::min(n, idx.size()); ++i) words.push_back(terms[idx[i]]);
    out.push_back(std::move(words));
  }
  return out;
}

template <typename TextRange>
std::vector<std::vector<std::string>> ctfidf_words(const TopicModel& m, const TextRange& texts,
                                                   const std::vector<std::size_t>& assignments,
                                                   const StopWords& stop = default_stop_words()) {
  std::vector<std::vector<double>> counts(m.k(), std::vector<double>(m.vocab.size(), 0.0));
  std::size_t i = 0;
  for (const auto& t : texts) {
    if (i >= assignments.size()) throw ValidationError("fewer assignments than texts");
    std::size_t c = assignments[i++];
    if (c >= m.k()) throw ValidationError("assignment references unknown topic");
    for (auto [term, v] : count_vector(t, m.vocab, m.config.vectorizer, stop)) counts[c][term] += v;
  }
  if (i != assignments.size()) throw ValidationError("more assignments than texts");
  return top_words(ctfidf(counts), m.vocab.terms, m.config.top_n_words);
}

// ---------------------------------------------------------------------------
// Groups.

inline const std::vector<std::string>& group_names() {
  static const std::vector<std::string> kNames = {"Renewables (general)",
                                                  "Agriculture, forests & fisheries",
                                                  "Miscellaneous",
                                                  "Transport",
                                                  "Electricity, infrastructure & energy efficiency",
                                                  "Waste, water & plastic",
                                                  "Social wellbeing (health, education and social housing)",
                                                  "Wind & solar",
                                                  "Built environment & construction"};
  return kNames;
}

inline constexpr std::string_view kDiscarded = "discarded";

struct GroupMap {
  std::vector<std::string> groups;
  std::map<std::size_t, std::string> topic_group;

  void validate(std::size_t k) const {
    if (groups != group_names()) throw ValidationError("group list does not match the nine rollup groups");
    std::set<std::string> allowed(groups.begin(), groups.end());
    allowed.insert(std::string(kDiscarded));
    for (std::size_t t = 0; t < k; ++t) {
      auto it = topic_group.find(t);
      if (it == topic_group.end()) throw ValidationError("topic " + std::to_string(t) + " is not mapped to a group");
      if (!allowed.count(it->second)) throw ValidationError("topic " + std::to_string(t) + " maps to unknown group '" + it->second + "'");
    }
    for (const auto& [t, g] : topic_group)
      if (t >= k) throw ValidationError("group map references topic " + std::to_string(t) + " beyond k");
  }
};

namespace detail {

inline std::string toml_string(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw ValidationError("expected a quoted string", line);
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) {
      char e = v[++i];
      out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
    } else {
      out += v[i];
    }
  }
  return out;
}

inline std::string_view strip_comment(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

}  // namespace detail

// Reads the small TOML subset used by topic_groups.toml:
//   groups = ["...", ...]        (may span lines)
//   [topics]
//   0 = "Renewables (general)"
inline GroupMap parse_group_map(std::string_view text) {
  GroupMap g;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  bool in_groups = false;
  std::string groups_buf;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(detail::strip_comment(raw));
    if (in_groups) {
      groups_buf += std::string(line);
      if (line.find(']') != std::string_view::npos) in_groups = false;
      else continue;
    } else if (line.empty()) {
      continue;
    } else if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError("malformed section header", lineno);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    } else {
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ValidationError("expected key = value", lineno);
      std::string key(trim(line.substr(0, eq)));
      std::string_view value = trim(line.substr(eq + 1));
      if (section.empty() && key == "groups") {
        groups_buf = std::string(value);
        if (value.find(']') == std::string_view::npos) {
          in_groups = true;
          continue;
        }
      } else if (section == "topics") {
        if (key.size() > 1 && key.front() == '"') key = detail::toml_string(key, lineno);
        if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) { return is_ascii_digit(static_cast<unsigned char>(c)); }))
          throw ValidationError("topic key must be a non-negative integer", lineno);
        std::size_t id = std::stoul(key);
        if (!g.topic_group.emplace(id, detail::toml_string(value, lineno)).second)
          throw ValidationError("duplicate topic " + key, lineno);
        continue;
      } else {
        throw ValidationError("unexpected key '" + key + "'", lineno);
      }
    }
    // A complete groups array is in groups_buf.
    std::string_view arr = trim(groups_buf);
    if (arr.size() < 2 || arr.front() != '[' || arr.back() != ']') throw ValidationError("malformed groups array", lineno);
    arr = arr.substr(1, arr.size() - 2);
    std::size_t i = 0;
    while (i < arr.size()) {
      while (i < arr.size() && (is_ascii_space(static_cast<unsigned char>(arr[i])) || arr[i] == ',')) ++i;
      if (i >= arr.size()) break;
      if (arr[i] != '"') throw ValidationError("expected a quoted group name", lineno);
      std::size_t j = i + 1;
      while (j < arr.size() && !(arr[j] == '"' && arr[j - 1] != '\\')) ++j;
      if (j >= arr.size()) throw ValidationError("unterminated string", lineno);
      g.groups.push_back(detail::toml_string(arr.substr(i, j - i + 1), lineno));
      i = j + 1;
    }
  }
  if (in_groups) throw ValidationError("unterminated groups array", lineno);
  return g;
}

inline GroupMap load_group_map(const std::filesystem::path& path) { return parse_group_map(read_file(path)); }

struct GroupReport {
  std::map<std::string, std::size_t> counts;  // every group, zero included
  std::map<std::string, double> percent;
  std::size_t counted = 0;
  std::size_t discarded = 0;
};

inline GroupReport group_report(const std::vector<std::size_t>& assignments, const GroupMap& groups) {
  GroupReport r;
  for (const auto& name : groups.groups) r.counts[name] = 0;
  for (std::size_t t : assignments) {
    auto it = groups.topic_group.find(t);
    if (it == groups.topic_group.end()) throw ValidationError("topic " + std::to_string(t) + " is not mapped to a group");
    if (it->second == kDiscarded) {
      ++r.discarded;
      continue;
    }
    auto c = r.counts.find(it->second);
    if (c == r.counts.end()) throw ValidationError("topic " + std::to_string(t) + " maps to unknown group '" + it->second + "'");
    ++c->second;
    ++r.counted;
  }
  for (const auto& [name, n] : r.counts)
    r.percent[name] = r.counted ? 100.0 * static_cast<double>(n) / static_cast<double>(r.counted) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Serialization.

inline nlohmann::json to_json(const TopicModel& m) {
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : m.centroids) cents.push_back(base64_encode(pack_doubles(c)));
  return {{"format", "target-radar-topics"},
          {"k", m.k()},
          {"config",
           {{"top_n_words", m.config.top_n_words},
            {"max_iter", m.config.max_iter},
            {"n_init", m.config.n_init},
            {"tol", m.config.tol},
            {"seed", m.config.seed},
            {"ngram_range", {m.config.vectorizer.ngram_low, m.config.vectorizer.ngram_high}},
            {"min_df", m.config.vectorizer.min_df}}},
          {"seeds", m.seeds},
          {"vocab", m.vocab.terms},
          {"centroids_encoding", "base64-f64le"},
          {"centroids", cents},
          {"topic_words", m.topic_words},
          {"objective", m.objective},
          {"iterations", m.iterations},
          {"converged", m.converged}};
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "target-radar-topics") throw ValidationError("not a topic model file");
  TopicModel m;
  const auto& c = j.at("config");
  m.config.k = j.at("k").get<std::size_t>();
  m.config.top_n_words = c.at("top_n_words").get<std::size_t>();
  m.config.max_iter = c.at("max_iter").get<std::size_t>();
  m.config.n_init = c.value("n_init", std::size_t{1});
  m.config.tol = c.at("tol").get<double>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.config.vectorizer.ngram_low = c.at("ngram_range").at(0).get<int>();
  m.config.vectorizer.ngram_high = c.at("ngram_range").at(1).get<int>();
  m.config.vectorizer.min_df = c.at("min_df").get<std::size_t>();
  m.seeds = j.at("seeds").get<std::vector<Seed>>();
  m.vocab = Vocab::from_terms(j.at("vocab").get<std::vector<std::string>>());
  for (const auto& s : j.at("centroids")) {
    m.centroids.push_back(unpack_doubles(base64_decode(s.get<std::string>())));
    if (m.centroids.back().size() != m.vocab.size()) throw ValidationError("centroid width does not match vocabulary");
  }
  if (m.centroids.size() != m.config.k) throw ValidationError("centroid count does not match k");
  m.topic_words = j.at("topic_words").get<std::vector<std::vector<std::string>>>();
  m.objective = j.at("objective").get<std::vector<double>>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

inline nlohmann::json to_json(const GroupReport& r) {
  nlohmann::json groups = nlohmann::json::array();
  std::vector<std::pair<std::string, std::size_t>> rows(r.counts.begin(), r.counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [name, n] : rows) groups.push_back({{"group", name}, {"count", n}, {"percent", r.percent.at(name)}});
  return {{"groups", groups}, {"counted", r.counted}, {"discarded", r.discarded}};
}

}  // namespace target_radar::topics
