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

// Evaluation: confusion counts, per-label and micro-averaged P/R/F1, mean and
// sigma over repeated runs, slicing by a paragraph field, and threshold
// calibration to a precision/recall operating point.

#pragma once

#include <algorithm>
#include <array>
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

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp, fp += o.fp, fn += o.fn, tn += o.tn;
    return *this;
  }
  bool operator==(const Confusion&) const = default;
};

using ConfusionSet = std::array<Confusion, kNumLabels>;

using GoldMap = std::map<std::string, LabelSet>;

inline ConfusionSet confusion(const std::vector<PredictionRecord>& preds, const GoldMap& gold) {
  if (preds.size() != gold.size()) throw ValidationError("prediction and gold id sets differ in size");
  ConfusionSet out{};
  std::set<std::string> seen;
  for (const auto& p : preds) {
    auto it = gold.find(p.paragraph_id);
    if (it == gold.end()) throw ValidationError("prediction for '" + p.paragraph_id + "' has no gold label");
    if (!seen.insert(p.paragraph_id).second) throw ValidationError("duplicate prediction for '" + p.paragraph_id + "'");
    for (Label l : kAllLabels) {
      bool pred = p.decisions.get(l), truth = it->second.get(l);
      auto& c = out[index_of(l)];
      if (pred && truth) ++c.tp;
      else if (pred) ++c.fp;
      else if (truth) ++c.fn;
      else ++c.tn;
    }
  }
  return out;
}

inline double f1_score(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;          // gold positives
  bool undefined_precision = false;  // nothing predicted positive
  bool undefined_support = false;    // no gold positives

  static Prf from(const Confusion& c) {
    Prf m;
    m.support = c.tp + c.fn;
    m.undefined_precision = c.tp + c.fp == 0;
    m.undefined_support = m.support == 0;
    m.precision = m.undefined_precision ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    m.recall = m.undefined_support ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(m.support);
    m.f1 = f1_score(m.precision, m.recall);
    return m;
  }
};

struct Metrics {
  std::array<Prf, kNumLabels> per_label;
  Prf micro;  // counts summed across labels, then P/R/F1
  Prf macro;  // unweighted mean of per-label cells; not contractual
};

inline Metrics metrics(const ConfusionSet& cs) {
  Metrics m;
  Confusion total;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    m.per_label[k] = Prf::from(cs[k]);
    total += cs[k];
  }
  m.micro = Prf::from(total);
  for (const auto& p : m.per_label) {
    m.macro.precision += p.precision / kNumLabels;
    m.macro.recall += p.recall / kNumLabels;
    m.macro.f1 += p.f1 / kNumLabels;
    m.macro.support += p.support;
  }
  return m;
}

// Mean and sample standard deviation of every cell across runs.
struct Cell {
  double mean = 0.0;
  double sigma = 0.0;
};

struct AggregatedPrf {
  Cell precision, recall, f1;
};

struct AggregatedMetrics {
  std::size_t runs = 0;
  std::array<AggregatedPrf, kNumLabels> per_label;
  AggregatedPrf micro;
};

inline Cell aggregate_cell(const std::vector<double>& xs) {
  Cell c;
  if (xs.empty()) return c;
  for (double x : xs) c.mean += x;
  c.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - c.mean) * (x - c.mean);
    c.sigma = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return c;
}

inline AggregatedMetrics aggregate(const std::vector<Metrics>& runs) {
  AggregatedMetrics a;
  a.runs = runs.size();
  auto agg = [&](auto getter) {
    AggregatedPrf out;
    std::vector<double> p, r, f;
    for (const auto& m : runs) {
      const Prf& x = getter(m);
      p.push_back(x.precision), r.push_back(x.recall), f.push_back(x.f1);
    }
    out.precision = aggregate_cell(p), out.recall = aggregate_cell(r), out.f1 = aggregate_cell(f);
    return out;
  };
  for (std::size_t k = 0; k < kNumLabels; ++k) a.per_label[k] = agg([k](const Metrics& m) -> const Prf& { return m.per_label[k]; });
  a.micro = agg([](const Metrics& m) -> const Prf& { return m.micro; });
  return a;
}

struct SliceResult {
  ConfusionSet confusion{};
  Metrics metrics;
  std::size_t paragraphs = 0;
};

// Metrics per value of `field` (e.g. "translated"). Counts recombine: summing
// the slices' confusion counts gives the global confusion.
inline std::map<std::string, SliceResult> slice_eval(const std::vector<PredictionRecord>& preds, const GoldMap& gold,
                                                     const Corpus& corpus, const std::string& field,
                                                     const CountryTable* geo = nullptr) {
  confusion(preds, gold);  // validates id sets
  std::map<std::string, std::vector<PredictionRecord>> by_slice;
  for (const auto& p : preds) by_slice[field_value(corpus.at(p.paragraph_id), field, geo)].push_back(p);
  std::map<std::string, SliceResult> out;
  for (auto& [value, ps] : by_slice) {
    GoldMap g;
    for (const auto& p : ps) g[p.paragraph_id] = gold.at(p.paragraph_id);
    SliceResult r;
    r.confusion = confusion(ps, g);
    r.metrics = metrics(r.confusion);
    r.paragraphs = ps.size();
    out[value] = r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calibration.

struct LabelThreshold {
  double tau = 0.5;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool feasible = false;
};

struct Thresholds {
  std::array<LabelThreshold, kNumLabels> per_label;

  std::array<double, kNumLabels> taus() const {
    return {per_label[0].tau, per_label[1].tau, per_label[2].tau};
  }
};

// Sweeps every distinct score as a cut (decision: score >= cut). The decision
// set for cut u_j is shared by all tau in (u_{j-1}, u_j]; the returned tau is
// the midpoint of that interval. Among cuts meeting both targets the highest
// F1 wins (then the widest interval); when none does, the cut maximising
// min(P, R) is returned with feasible = false.
inline LabelThreshold calibrate_scores(const std::vector<double>& scores, const std::vector<bool>& gold,
                                       double target_precision, double target_recall) {
  if (scores.empty()) throw ValidationError("calibration requires a non-empty validation set");
  if (scores.size() != gold.size()) throw ValidationError("score and gold vectors differ in length");
  std::vector<std::pair<double, bool>> items;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    items.emplace_back(scores[i], gold[i]);
    positives += gold[i];
  }
  std::sort(items.begin(), items.end());

  struct Candidate {
    double lo, hi;
    std::size_t tp, fp;
  };
  std::vector<Candidate> cands;
  // Walk cuts from the top: predicted positives are items[i..n).
  std::size_t tp = 0, fp = 0;
  const double top = items.back().first;
  if (top < 1.0) cands.push_back({top, 1.0, 0, 0});
  for (std::size_t i = items.size(); i > 0;) {
    double cut = items[i - 1].first;
    while (i > 0 && items[i - 1].first == cut) {
      (items[i - 1].second ? tp : fp)++;
      --i;
    }
    double lo = i > 0 ? items[i - 1].first : 0.0;
    cands.push_back({lo, cut, tp, fp});
  }

  constexpr double kEps = 1e-12;
  auto eval = [&](const Candidate& c) {
    LabelThreshold t;
    t.tau = 0.5 * (c.lo + c.hi);
    t.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    t.recall = positives ? static_cast<double>(c.tp) / static_cast<double>(positives) : 0.0;
    t.f1 = f1_score(t.precision, t.recall);
    t.feasible = t.precision >= target_precision - kEps && t.recall >= target_recall - kEps;
    return t;
  };

  std::optional<std::pair<LabelThreshold, double>> best_feasible, best_fallback;
  for (const auto& c : cands) {
    auto t = eval(c);
    double width = c.hi - c.lo;
    if (t.feasible) {
      if (!best_feasible || t.f1 > best_feasible->first.f1 ||
          (t.f1 == best_feasible->first.f1 && width > best_feasible->second))
        best_feasible = {{t, width}};
    } else {
      double mn = std::min(t.precision, t.recall);
      auto better = [&] {
        if (!best_fallback) return true;
        double bmn = std::min(best_fallback->first.precision, best_fallback->first.recall);
        if (mn != bmn) return mn > bmn;
        if (t.f1 != best_fallback->first.f1) return t.f1 > best_fallback->first.f1;
        return width > best_fallback->second;
      };
      if (better()) best_fallback = {{t, width}};
    }
  }
  return best_feasible ? best_feasible->first : best_fallback->first;
}

inline Thresholds calibrate(const std::vector<PredictionRecord>& val_preds, const GoldMap& val_gold,
                            double target_precision = 0.8, double target_recall = 0.8) {
  if (val_preds.empty()) throw ValidationError("calibration requires a non-empty validation set");
  Thresholds out;
  for (Label l : kAllLabels) {
    std::vector<double> s;
    std::vector<bool> g;
    for (const auto& p : val_preds) {
      auto it = val_gold.find(p.paragraph_id);
      if (it == val_gold.end()) throw ValidationError("validation prediction '" + p.paragraph_id + "' has no gold label");
      s.push_back(p.scores[index_of(l)]);
      g.push_back(it->second.get(l));
    }
    out.per_label[index_of(l)] = calibrate_scores(s, g, target_precision, target_recall);
  }
  return out;
}

// One threshold shared by all labels, calibrated on pooled (micro) counts.
inline Thresholds calibrate_single(const std::vector<PredictionRecord>& val_preds, const GoldMap& val_gold,
                                   double target_precision = 0.8, double target_recall = 0.8) {
  std::vector<double> s;
  std::vector<bool> g;
  for (const auto& p : val_preds) {
    auto it = val_gold.find(p.paragraph_id);
    if (it == val_gold.end()) throw ValidationError("validation prediction '" + p.paragraph_id + "' has no gold label");
    for (Label l : kAllLabels) {
      s.push_back(p.scores[index_of(l)]);
      g.push_back(it->second.get(l));
    }
  }
  auto t = calibrate_scores(s, g, target_precision, target_recall);
  Thresholds out;
  out.per_label.fill(t);
  return out;
}

// Re-applies thresholds to stored scores.
inline std::vector<PredictionRecord> apply_thresholds(std::vector<PredictionRecord> preds,
                                                      const std::array<double, kNumLabels>& taus) {
  for (auto& p : preds) p.decisions = decide(p.scores, taus);
  return preds;
}

// ---------------------------------------------------------------------------
// Reports.

inline nlohmann::json to_json(const Prf& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support},
          {"undefined_precision", m.undefined_precision}, {"undefined_support", m.undefined_support}};
}

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j;
  for (Label l : kAllLabels) j[std::string(label_name(l))] = to_json(m.per_label[index_of(l)]);
  j["all"] = to_json(m.micro);
  j["macro"] = to_json(m.macro);
  return j;
}

inline nlohmann::json to_json(const AggregatedMetrics& a) {
  auto cell = [](const AggregatedPrf& p) {
    return nlohmann::json{{"precision", {{"mean", p.precision.mean}, {"sigma", p.precision.sigma}}},
                          {"recall", {{"mean", p.recall.mean}, {"sigma", p.recall.sigma}}},
                          {"f1", {{"mean", p.f1.mean}, {"sigma", p.f1.sigma}}}};
  };
  nlohmann::json j;
  j["runs"] = a.runs;
  for (Label l : kAllLabels) j[std::string(label_name(l))] = cell(a.per_label[index_of(l)]);
  j["all"] = cell(a.micro);
  return j;
}

inline nlohmann::json to_json(const std::map<std::string, SliceResult>& slices) {
  nlohmann::json j;
  for (const auto& [value, r] : slices) {
    nlohmann::json row = to_json(r.metrics);
    nlohmann::json count;
    for (Label l : kAllLabels) count[std::string(label_name(l))] = r.metrics.per_label[index_of(l)].support;
    count["overall"] = r.metrics.micro.support;
    row["count"] = count;
    row["paragraphs"] = r.paragraphs;
    j[value] = row;
  }
  return j;
}

inline nlohmann::json to_json(const Thresholds& t) {
  nlohmann::json j;
  for (Label l : kAllLabels) {
    const auto& x = t.per_label[index_of(l)];
    j[std::string(label_name(l))] = {{"tau", x.tau}, {"precision", x.precision}, {"recall", x.recall},
                                     {"f1", x.f1}, {"feasible", x.feasible}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Grid search. Every grid point is trained on the train split, calibrated on
// val and scored on val at the calibrated thresholds; the best val micro-F1
// wins (first in grid order on ties). The test split is never touched.

struct SweepGrid {
  std::vector<double> learning_rates{0.05, 0.5, 2.0};
  std::vector<double> weight_decays{0.01, 0.001, 0.0001};
  std::vector<int> epochs{5, 20, 40};
};

struct SweepPoint {
  TrainConfig config;
  Thresholds thresholds;
  Metrics val;
  std::string model_id;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::size_t best = 0;
  ModelParams best_model;  // carries the calibrated thresholds
};

inline SweepResult sweep(const Corpus& corpus, const AnnotationStore& labels, const std::vector<SplitAssignment>& splits,
                         const FeaturizerConfig& fc, const TrainConfig& base, const SweepGrid& grid,
                         const rules::Lexicons& lex = rules::Lexicons::builtin(), double target_precision = 0.8,
                         double target_recall = 0.8) {
  std::vector<std::string> val_ids;
  GoldMap gold;
  for (const auto& id : ids_in_split(splits, Split::Val))
    if (auto c = labels.consensus(id)) {
      val_ids.push_back(id);
      gold[id] = *c;
    }
  if (val_ids.empty()) throw ValidationError("sweep requires a labelled validation split");
  std::vector<Paragraph> val;
  for (const auto& id : val_ids) val.push_back(corpus.at(id));

  SweepResult out;
  double best_f1 = -1;
  for (double lr : grid.learning_rates)
    for (double wd : grid.weight_decays)
      for (int ep : grid.epochs) {
        TrainConfig tc = base;
        tc.learning_rate = lr;
        tc.weight_decay = wd;
        tc.epochs = ep;
        auto r = train(corpus, labels, splits, fc, tc, lex);
        auto preds = predict(r.model, val, lex);
        SweepPoint pt;
        pt.config = tc;
        pt.thresholds = calibrate(preds, gold, target_precision, target_recall);
        pt.val = metrics(confusion(apply_thresholds(preds, pt.thresholds.taus()), gold));
        if (pt.val.micro.f1 > best_f1) {
          best_f1 = pt.val.micro.f1;
          out.best = out.points.size();
          out.best_model = r.model;
          out.best_model.thresholds = pt.thresholds.taus();
          out.best_model.finalize();
        }
        pt.model_id = r.model.model_id;
        out.points.push_back(std::move(pt));
      }
  return out;
}

inline nlohmann::json to_json(const SweepResult& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points)
    pts.push_back({{"learning_rate", p.config.learning_rate},
                   {"weight_decay", p.config.weight_decay},
                   {"epochs", p.config.epochs},
                   {"val_micro_f1", p.val.micro.f1},
                   {"model_id", p.model_id}});
  return {{"points", pts}, {"best", s.best}, {"best_model_id", s.best_model.model_id}};
}

// Unweighted mean binary log-loss over the labelled paragraphs of one split.
// Used to compare training configurations by fit rather than by decisions.
inline double split_log_loss(const ModelParams& m, const Corpus& corpus, const AnnotationStore& labels,
                             const std::vector<SplitAssignment>& splits, Split which,
                             const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  std::vector<Example> data;
  for (const auto& id : ids_in_split(splits, which))
    if (auto c = labels.consensus(id)) data.push_back({m.features(corpus.at(id).text, lex), *c});
  if (data.empty()) throw ValidationError("split has no labelled paragraphs");
  return dataset_loss(m.weights, data, {1.0, 1.0, 1.0}, 0.0);
}

}  // namespace target_radar
