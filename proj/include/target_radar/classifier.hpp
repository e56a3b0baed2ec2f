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

// Multi-label logistic regression: three independent sigmoid outputs over a
// shared sparse feature vector, trained with mini-batch gradient descent on
// class-weighted binary cross-entropy plus L2 weight decay.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "target_radar/common.hpp"
#include "target_radar/corpus.hpp"
#include "target_radar/features.hpp"

namespace target_radar {

using ClassWeights = std::array<double, kNumLabels>;

struct TrainConfig {
  std::uint64_t seed = 42;
  int epochs = 5;
  double learning_rate = 0.05;
  double weight_decay = 0.01;
  int warmup_steps = 100;
  std::size_t batch_size = 16;
  // Weight on positive examples per label. Unset means inverse label
  // frequency, n_negative / n_positive, computed on the training split.
  std::optional<ClassWeights> positive_class_weights;

  void validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(learning_rate > 0)) throw ValidationError("learning_rate must be > 0");
    if (weight_decay < 0) throw ValidationError("weight_decay must be >= 0");
    if (warmup_steps < 0) throw ValidationError("warmup_steps must be >= 0");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j = {{"seed", c.seed},
                      {"epochs", c.epochs},
                      {"learning_rate", c.learning_rate},
                      {"weight_decay", c.weight_decay},
                      {"warmup_steps", c.warmup_steps},
                      {"schedule", "linear"},
                      {"batch_size", c.batch_size}};
  j["positive_class_weights"] = c.positive_class_weights ? nlohmann::json(*c.positive_class_weights) : nlohmann::json();
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.warmup_steps = j.at("warmup_steps").get<int>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  if (j.contains("positive_class_weights") && !j["positive_class_weights"].is_null())
    c.positive_class_weights = j["positive_class_weights"].get<ClassWeights>();
  c.validate();
  return c;
}

// Dense 3 x dim weights, row-major by label, plus one bias per label.
struct LinearWeights {
  std::size_t dim = 0;
  std::vector<double> w;
  std::array<double, kNumLabels> b{};

  LinearWeights() = default;
  explicit LinearWeights(std::size_t d) : dim(d), w(kNumLabels * d, 0.0) {}

  double& at(std::size_t label, std::size_t i) { return w[label * dim + i]; }
  double at(std::size_t label, std::size_t i) const { return w[label * dim + i]; }

  double logit(std::size_t label, const FeatureVector& x) const {
    double z = b[label];
    const double* row = w.data() + label * dim;
    for (auto [i, v] : x.entries) z += row[i] * v;
    return z;
  }

  bool operator==(const LinearWeights&) const = default;
};

struct Example {
  FeatureVector x;
  LabelSet y;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Sigmoid clamped to the open interval (0, 1).
inline double score_of(double z) {
  static const double kHi = std::nextafter(1.0, 0.0);
  return std::clamp(sigmoid(z), std::numeric_limits<double>::min(), kHi);
}

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

struct LossGrad {
  double loss = 0.0;
  LinearWeights grad;
};

// loss = mean over examples and labels of
//          w_k * y * -ln s(z) + (1 - y) * -ln(1 - s(z))
//        + (weight_decay / 2) * ||W||^2        (bias not decayed)
inline double regularisation(const LinearWeights& p, double weight_decay) {
  double sq = 0.0;
  for (double v : p.w) sq += v * v;
  return 0.5 * weight_decay * sq;
}

inline LossGrad loss_and_grad(const LinearWeights& p, std::span<const Example> batch, const ClassWeights& weights,
                              double weight_decay) {
  if (batch.empty()) throw ValidationError("loss_and_grad requires a non-empty batch");
  LossGrad out;
  out.grad = LinearWeights(p.dim);
  const double scale = 1.0 / (static_cast<double>(batch.size()) * kNumLabels);
  double data_loss = 0.0;
  for (const auto& ex : batch) {
    if (ex.x.dim != p.dim) throw ValidationError("feature dimension mismatch");
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const double z = p.logit(k, ex.x);
      const bool y = ex.y.get(kAllLabels[k]);
      const double s = sigmoid(z);
      double g;
      if (y) {
        data_loss += weights[k] * softplus(-z);
        g = weights[k] * (s - 1.0);
      } else {
        data_loss += softplus(z);
        g = s;
      }
      g *= scale;
      out.grad.b[k] += g;
      double* row = out.grad.w.data() + k * p.dim;
      for (auto [i, v] : ex.x.entries) row[i] += g * v;
    }
  }
  out.loss = data_loss * scale + regularisation(p, weight_decay);
  if (weight_decay != 0.0)
    for (std::size_t i = 0; i < p.w.size(); ++i) out.grad.w[i] += weight_decay * p.w[i];
  return out;
}

inline double dataset_loss(const LinearWeights& p, std::span<const Example> data, const ClassWeights& weights,
                           double weight_decay) {
  double sum = 0.0;
  for (const auto& ex : data)
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      double z = p.logit(k, ex.x);
      sum += ex.y.get(kAllLabels[k]) ? weights[k] * softplus(-z) : softplus(z);
    }
  return sum / (static_cast<double>(data.size()) * kNumLabels) + regularisation(p, weight_decay);
}

// Linear warmup from 0, then linear decay to 0 at the final step.
inline double scheduled_lr(const TrainConfig& c, std::size_t step, std::size_t total_steps) {
  const auto warmup = static_cast<std::size_t>(c.warmup_steps);
  if (step < warmup) return c.learning_rate * static_cast<double>(step) / static_cast<double>(std::max<std::size_t>(1, warmup));
  if (step >= total_steps) return 0.0;
  return c.learning_rate * static_cast<double>(total_steps - step) /
         static_cast<double>(std::max<std::size_t>(1, total_steps - warmup));
}

inline ClassWeights inverse_frequency_weights(std::span<const Example> data) {
  ClassWeights w{1.0, 1.0, 1.0};
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    std::size_t pos = 0;
    for (const auto& ex : data) pos += ex.y.get(kAllLabels[k]);
    if (pos > 0 && pos < data.size()) w[k] = static_cast<double>(data.size() - pos) / static_cast<double>(pos);
  }
  return w;
}

struct TrainReport {
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;
  ClassWeights class_weights{1.0, 1.0, 1.0};
  std::vector<std::string> warnings;
};

// Single-threaded; shuffles come from the seed only, so two runs with the
// same inputs produce bit-identical weights.
inline LinearWeights fit_linear(std::span<const Example> data, std::size_t dim, const TrainConfig& c,
                                TrainReport* report = nullptr) {
  c.validate();
  if (data.empty()) throw ValidationError("training split is empty");
  LinearWeights p(dim);
  ClassWeights cw = c.positive_class_weights ? *c.positive_class_weights : inverse_frequency_weights(data);

  std::array<bool, kNumLabels> frozen{};
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    bool any = std::any_of(data.begin(), data.end(), [&](const Example& e) { return e.y.get(kAllLabels[k]); });
    if (!any) {
      frozen[k] = true;
      warnings.push_back("label '" + std::string(label_name(kAllLabels[k])) +
                         "' has no positive training examples; its weights stay at initialisation");
    }
  }

  TrainReport local;
  TrainReport& r = report ? *report : local;
  r.class_weights = cw;
  r.warnings = warnings;
  r.epoch_loss.clear();
  r.initial_loss = dataset_loss(p, data, cw, c.weight_decay);

  const std::size_t steps_per_epoch = (data.size() + c.batch_size - 1) / c.batch_size;
  const std::size_t total = steps_per_epoch * static_cast<std::size_t>(c.epochs);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(c.seed);
  std::vector<Example> batch;
  std::size_t step = 0;
  for (int epoch = 0; epoch < c.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += c.batch_size, ++step) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + c.batch_size); ++i) batch.push_back(data[order[i]]);
      const double lr = scheduled_lr(c, step, total);
      if (lr == 0.0) continue;
      auto lg = loss_and_grad(p, batch, cw, c.weight_decay);
      for (std::size_t k = 0; k < kNumLabels; ++k) {
        if (frozen[k]) continue;
        p.b[k] -= lr * lg.grad.b[k];
        double* row = p.w.data() + k * dim;
        const double* grow = lg.grad.w.data() + k * dim;
        for (std::size_t i = 0; i < dim; ++i) row[i] -= lr * grow[i];
      }
    }
    r.epoch_loss.push_back(dataset_loss(p, data, cw, c.weight_decay));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Model: weights plus everything needed to featurize and decide.

inline constexpr int kModelFormatVersion = 1;

struct ModelParams {
  LinearWeights weights;
  std::array<double, kNumLabels> thresholds{0.5, 0.5, 0.5};
  FeaturizerConfig featurizer;
  TrainConfig train;
  std::optional<IdfTable> idf;
  std::vector<double> loss_history;  // initial loss, then one entry per epoch
  std::string model_id;

  std::string compute_id() const {
    Fingerprint f;
    f.update("target-radar-model/" + std::to_string(kModelFormatVersion));
    f.update(to_json(featurizer).dump());
    f.update(to_json(train).dump());
    f.update(idf ? idf->to_json().dump() : "null");
    f.update_u64(weights.dim);
    for (double v : weights.w) f.update_double(v);
    for (double v : weights.b) f.update_double(v);
    for (double v : thresholds) f.update_double(v);
    return f.hex();
  }

  void finalize() { model_id = compute_id(); }

  void validate() const {
    if (weights.dim != feature_dim(featurizer)) throw ValidationError("model dimension does not match featurizer config");
    if (weights.w.size() != kNumLabels * weights.dim) throw ValidationError("model weight payload has wrong size");
    for (double v : weights.w)
      if (!std::isfinite(v)) throw ValidationError("model weights contain NaN/Inf");
    for (double v : weights.b)
      if (!std::isfinite(v)) throw ValidationError("model bias contains NaN/Inf");
    for (double t : thresholds)
      if (!(t > 0.0 && t < 1.0)) throw ValidationError("thresholds must lie in (0, 1)");
  }

  FeatureVector features(std::string_view text, const rules::Lexicons& lex = rules::Lexicons::builtin()) const {
    return featurize(text, featurizer, idf ? &*idf : nullptr, lex);
  }
};

inline nlohmann::json model_to_json(const ModelParams& m) {
  return {{"format", "target-radar-model"},
          {"version", kModelFormatVersion},
          {"model_id", m.model_id},
          {"featurizer", to_json(m.featurizer)},
          {"train", to_json(m.train)},
          {"thresholds", m.thresholds},
          {"bias", m.weights.b},
          {"loss_history", m.loss_history},
          {"idf", m.idf ? m.idf->to_json() : nlohmann::json()},
          {"weights",
           {{"encoding", "base64-f64le"},
            {"rows", kNumLabels},
            {"cols", m.weights.dim},
            {"data", base64_encode(pack_doubles(m.weights.w))}}}};
}

inline ModelParams model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "target-radar-model") throw ValidationError("not a target-radar model file");
  if (j.value("version", 0) != kModelFormatVersion)
    throw ValidationError("unsupported model file version " + std::to_string(j.value("version", 0)));
  ModelParams m;
  m.featurizer = featurizer_config_from_json(j.at("featurizer"));
  m.train = train_config_from_json(j.at("train"));
  m.thresholds = j.at("thresholds").get<std::array<double, kNumLabels>>();
  const auto& w = j.at("weights");
  if (w.at("encoding") != "base64-f64le") throw ValidationError("unsupported weight encoding");
  m.weights.dim = w.at("cols").get<std::size_t>();
  m.weights.w = unpack_doubles(base64_decode(w.at("data").get<std::string>()));
  m.weights.b = j.at("bias").get<std::array<double, kNumLabels>>();
  m.loss_history = j.value("loss_history", std::vector<double>{});
  if (!j.at("idf").is_null()) m.idf = IdfTable::from_json(j.at("idf"));
  m.model_id = j.at("model_id").get<std::string>();
  m.validate();
  if (m.compute_id() != m.model_id) throw ValidationError("model_id does not match model content");
  return m;
}

inline void save_model(const std::filesystem::path& path, const ModelParams& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file: " + path.string());
  out << model_to_json(m).dump() << '\n';
}

inline ModelParams load_model(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ValidationError("model file is not valid JSON: " + path.string());
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Corpus-level training and prediction.

inline std::vector<Example> build_examples(const Corpus& corpus, const AnnotationStore& labels,
                                           const std::vector<std::string>& ids, const FeaturizerConfig& fc,
                                           const IdfTable* idf, const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  std::vector<Example> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto y = labels.consensus(id);
    if (!y) continue;
    out.push_back({featurize(corpus.at(id).text, fc, idf, lex), *y});
  }
  return out;
}

struct TrainResult {
  ModelParams model;
  TrainReport report;
};

inline TrainResult train(const Corpus& corpus, const AnnotationStore& labels, const std::vector<SplitAssignment>& splits,
                         const FeaturizerConfig& fc, const TrainConfig& tc,
                         const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  fc.validate();
  tc.validate();
  std::vector<std::string> ids;
  for (const auto& id : ids_in_split(splits, Split::Train))
    if (labels.has_labels(id)) ids.push_back(id);
  if (ids.empty()) throw ValidationError("training split is empty");

  TrainResult r;
  ModelParams& m = r.model;
  m.featurizer = fc;
  if (fc.idf_weighting) {
    std::vector<std::string> texts;
    for (const auto& id : ids) texts.push_back(corpus.at(id).text);
    m.idf = IdfTable::fit(texts, fc);
  }
  auto examples = build_examples(corpus, labels, ids, fc, m.idf ? &*m.idf : nullptr, lex);
  m.weights = fit_linear(examples, feature_dim(fc), tc, &r.report);
  m.train = tc;
  m.train.positive_class_weights = r.report.class_weights;
  m.loss_history.push_back(r.report.initial_loss);
  m.loss_history.insert(m.loss_history.end(), r.report.epoch_loss.begin(), r.report.epoch_loss.end());
  m.finalize();
  return r;
}

struct PredictionRecord {
  std::string paragraph_id;
  std::array<double, kNumLabels> scores{};
  LabelSet decisions;
  std::string model_id;
};

inline std::array<double, kNumLabels> score(const ModelParams& m, const FeatureVector& x) {
  std::array<double, kNumLabels> s{};
  for (std::size_t k = 0; k < kNumLabels; ++k) s[k] = score_of(m.weights.logit(k, x));
  return s;
}

inline LabelSet decide(const std::array<double, kNumLabels>& scores, const std::array<double, kNumLabels>& thresholds) {
  LabelSet d;
  for (std::size_t k = 0; k < kNumLabels; ++k) d.set(kAllLabels[k], scores[k] >= thresholds[k]);
  return d;
}

inline PredictionRecord predict_one(const ModelParams& m, const Paragraph& p,
                                    const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  PredictionRecord r;
  r.paragraph_id = p.id;
  r.scores = score(m, m.features(p.text, lex));
  r.decisions = decide(r.scores, m.thresholds);
  r.model_id = m.model_id;
  return r;
}

template <typename ParagraphRange>
std::vector<PredictionRecord> predict(const ModelParams& m, const ParagraphRange& paragraphs,
                                      const rules::Lexicons& lex = rules::Lexicons::builtin()) {
  std::vector<PredictionRecord> out;
  for (const Paragraph& p : paragraphs) out.push_back(predict_one(m, p, lex));
  return out;
}

inline nlohmann::json prediction_to_json(const PredictionRecord& r) {
  nlohmann::json scores, decisions;
  for (Label l : kAllLabels) {
    scores[std::string(label_name(l))] = r.scores[index_of(l)];
    decisions[std::string(label_name(l))] = r.decisions.get(l);
  }
  return {{"paragraph_id", r.paragraph_id}, {"scores", scores}, {"decisions", decisions}, {"model_id", r.model_id}};
}

inline PredictionRecord prediction_from_json(const nlohmann::json& j, std::size_t line = 0) {
  PredictionRecord r;
  r.paragraph_id = detail::require_string(j, "paragraph_id", line);
  const auto& s = detail::require(j, "scores", line);
  const auto& d = detail::require(j, "decisions", line);
  for (Label l : kAllLabels) {
    std::string name(label_name(l));
    if (!s.contains(name) || !s[name].is_number()) throw ValidationError("missing score '" + name + "'", line);
    r.scores[index_of(l)] = s[name].get<double>();
    if (!d.contains(name) || !d[name].is_boolean()) throw ValidationError("missing decision '" + name + "'", line);
    r.decisions.set(l, d[name].get<bool>());
  }
  r.model_id = j.value("model_id", std::string());
  return r;
}

inline void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& preds) {
  for (const auto& p : preds) out << prediction_to_json(p).dump() << '\n';
}

inline std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  detail::for_each_jsonl_line(in, [&](const nlohmann::json& j, std::size_t line) { out.push_back(prediction_from_json(j, line)); });
  return out;
}

inline std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open predictions file: " + path.string());
  return read_predictions(in);
}

}  // namespace target_radar
