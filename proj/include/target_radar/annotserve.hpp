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

// Annotation service: batches for active-learning rounds, label intake,
// inter-annotator agreement, and live label statistics, over HTTP+JSON.
//
// Persistence is the same JSONL label file the CLI reads. Each accepted record
// is appended as one line and fsync'd before the response is sent, so a crash
// can at worst lose the record being written, never an earlier one. A torn
// final line is reported on the next start rather than silently dropped.
//
// Readers take a shared lock; label writes, batch assembly and round changes
// take the exclusive lock.

#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "target_radar/classifier.hpp"
#include "target_radar/common.hpp"
#include "target_radar/corpus.hpp"
#include "target_radar/rulegrammar.hpp"
#include "target_radar/sampling.hpp"

namespace target_radar::annot {

using json = nlohmann::json;

// Error with an HTTP status and a stable machine-readable code.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message, json detail = json::object())
      : std::runtime_error(message), status_(status), code_(std::move(code)), detail_(std::move(detail)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }
  const json& detail() const { return detail_; }

 private:
  int status_;
  std::string code_;
  json detail_;
};

inline std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Appends one line and fsyncs it.
inline void append_durable(const std::filesystem::path& path, const std::string& line) {
  int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) throw std::runtime_error("cannot open " + path.string() + " for append");
  std::string data = line + "\n";
  const char* p = data.data();
  std::size_t left = data.size();
  while (left > 0) {
    ssize_t n = ::write(fd, p, left);
    if (n < 0) {
      ::close(fd);
      throw std::runtime_error("write failed on " + path.string());
    }
    p += n, left -= static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Agreement.

struct KappaCell {
  std::size_t support = 0;
  std::optional<double> kappa;  // empty when support < 2
  double observed = 0.0;
  double expected = 0.0;
  bool degenerate = false;  // expected agreement is 1; kappa set to 1 by convention
};

inline KappaCell cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw ValidationError("kappa inputs differ in length");
  KappaCell c;
  c.support = a.size();
  if (c.support < 2) return c;
  double n = static_cast<double>(c.support), agree = 0, pa = 0, pb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    pa += a[i];
    pb += b[i];
  }
  pa /= n, pb /= n;
  c.observed = agree / n;
  c.expected = pa * pb + (1 - pa) * (1 - pb);
  if (c.expected >= 1.0) {
    c.degenerate = true;
    c.kappa = 1.0;
  } else {
    c.kappa = (c.observed - c.expected) / (1.0 - c.expected);
  }
  return c;
}

struct PairAgreement {
  std::string a, b;
  std::size_t shared = 0;
  std::array<KappaCell, kNumLabels> per_label;
};

// Uses each annotator's latest-round record per paragraph.
inline std::vector<PairAgreement> pairwise_agreement(const AnnotationStore& store) {
  std::map<std::string, std::map<std::string, LabelSet>> by_annotator;
  std::map<std::string, int> latest_round;
  for (const auto& r : store.records()) {
    auto key = r.annotator + '\x1f' + r.paragraph_id;
    auto it = latest_round.find(key);
    if (it != latest_round.end() && it->second > r.round) continue;
    latest_round[key] = r.round;
    by_annotator[r.annotator][r.paragraph_id] = r.labels;
  }
  std::vector<PairAgreement> out;
  for (auto ia = by_annotator.begin(); ia != by_annotator.end(); ++ia) {
    for (auto ib = std::next(ia); ib != by_annotator.end(); ++ib) {
      PairAgreement pa{ia->first, ib->first, 0, {}};
      std::array<std::vector<bool>, kNumLabels> va, vb;
      for (const auto& [pid, la] : ia->second) {
        auto jt = ib->second.find(pid);
        if (jt == ib->second.end()) continue;
        ++pa.shared;
        for (Label l : kAllLabels) {
          va[index_of(l)].push_back(la.get(l));
          vb[index_of(l)].push_back(jt->second.get(l));
        }
      }
      for (std::size_t k = 0; k < kNumLabels; ++k) pa.per_label[k] = cohen_kappa(va[k], vb[k]);
      out.push_back(std::move(pa));
    }
  }
  return out;
}

inline json to_json(const std::vector<PairAgreement>& pairs) {
  json rows = json::array();
  bool any_overlap = false;
  for (const auto& p : pairs) {
    json labels;
    for (Label l : kAllLabels) {
      const auto& c = p.per_label[index_of(l)];
      labels[std::string(label_name(l))] = {{"kappa", c.kappa ? json(*c.kappa) : json()},
                                            {"support", c.support},
                                            {"observed", c.observed},
                                            {"expected", c.expected},
                                            {"undefined", !c.kappa.has_value()},
                                            {"degenerate", c.degenerate}};
    }
    any_overlap |= p.shared > 0;
    rows.push_back({{"annotators", {p.a, p.b}}, {"shared", p.shared}, {"labels", labels}});
  }
  json j = {{"pairs", rows}, {"metric", "cohen_kappa"}};
  if (!any_overlap) j["undefined"] = "no two annotators share a labelled paragraph";
  return j;
}

// Paragraphs where annotators' latest records disagree, most disagreeing
// labels first, then by id.
struct ReviewItem {
  std::string paragraph_id;
  std::vector<Label> disputed;
};

inline std::vector<ReviewItem> review_queue(const AnnotationStore& store) {
  std::vector<ReviewItem> out;
  std::set<std::string> ids;
  for (const auto& r : store.records()) ids.insert(r.paragraph_id);
  for (const auto& id : ids) {
    auto latest = store.latest_per_annotator(id);
    if (latest.size() < 2) continue;
    ReviewItem item{id, {}};
    for (Label l : kAllLabels) {
      bool first = latest.front()->labels.get(l);
      for (auto* r : latest)
        if (r->labels.get(l) != first) {
          item.disputed.push_back(l);
          break;
        }
    }
    if (!item.disputed.empty()) out.push_back(std::move(item));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.disputed.size() > b.disputed.size(); });
  return out;
}

// ---------------------------------------------------------------------------

struct ServiceConfig {
  std::filesystem::path label_log;   // JSONL, created when missing
  std::filesystem::path state_file;  // round counter and history
  std::optional<std::filesystem::path> batch_log;
  std::optional<std::filesystem::path> guidelines;  // defaults to <data>/guidelines.json
  bool auto_register = true;
  std::set<std::string> annotators;  // consulted when auto_register is off
  std::uint64_t seed = 42;
};

struct PostStatus {
  std::size_t index = 0;
  bool accepted = false;
  std::string reason;
};

class AnnotationService {
 public:
  AnnotationService(Corpus corpus, ServiceConfig cfg, CountryTable geo = {})
      : corpus_(std::move(corpus)), cfg_(std::move(cfg)), geo_(std::move(geo)) {
    if (std::filesystem::exists(cfg_.label_log)) store_ = ingest_labels(cfg_.label_log, &corpus_);
    if (std::filesystem::exists(cfg_.state_file)) {
      auto j = json::parse(read_file(cfg_.state_file));
      round_ = j.at("round").get<int>();
      history_ = j.value("history", json::array());
    } else {
      history_ = json::array();
    }
    for (const auto& r : store_.records()) registered_.insert(r.annotator);
    for (const auto& a : cfg_.annotators) registered_.insert(a);
    auto gpath = cfg_.guidelines ? *cfg_.guidelines : data_dir() / "guidelines.json";
    if (std::filesystem::exists(gpath)) {
      guidelines_ = json::parse(read_file(gpath));
      Fingerprint f;
      f.update(guidelines_.dump());
      guidelines_["version"] = f.hex();
    }
  }

  // Predictions over the whole corpus form an immutable snapshot that batch
  // assembly reads from.
  void set_model(const ModelParams& m) {
    auto preds = std::make_shared<const std::vector<PredictionRecord>>(predict(m, corpus_));
    std::unique_lock lock(mu_);
    predictions_ = std::move(preds);
    thresholds_ = m.thresholds;
    batches_.clear();
  }

  int round() const {
    std::shared_lock lock(mu_);
    return round_;
  }

  json get_batch(const std::string& annotator, std::size_t size) {
    if (annotator.empty()) throw ServiceError(400, "bad_request", "query parameter 'annotator' is required");
    if (size == 0) throw ServiceError(400, "bad_request", "size must be >= 1");
    std::unique_lock lock(mu_);
    if (!registered_.count(annotator)) {
      if (!cfg_.auto_register) throw ServiceError(404, "unknown_annotator", "annotator '" + annotator + "' is not registered");
      registered_.insert(annotator);
    }
    auto key = std::make_tuple(annotator, round_, size);
    auto cached = batches_.find(key);
    if (cached == batches_.end()) {
      std::vector<std::string> pool;
      for (const auto& p : corpus_)
        if (!store_.labelled_by(p.id, annotator)) pool.push_back(p.id);
      if (pool.empty()) throw ServiceError(409, "empty_pool", "no paragraphs left for annotator '" + annotator + "'");
      std::vector<BatchItem> batch;
      if (predictions_) {
        std::set<std::string> in_pool(pool.begin(), pool.end());
        std::vector<PredictionRecord> preds;
        for (const auto& p : *predictions_)
          if (in_pool.count(p.paragraph_id)) preds.push_back(p);
        batch = to_batch(uncertainty_sample(preds, thresholds_, size).ids, Strategy::Uncertainty, round_);
      } else {
        auto quotas = balanced_quotas(corpus_, pool, size, geo_);
        auto ids = stratified_sample(corpus_, pool, quotas, cfg_.seed ^ static_cast<std::uint64_t>(round_), geo_).ids;
        batch = to_batch(ids, Strategy::Stratified, round_);
      }
      if (cfg_.batch_log)
        for (const auto& b : batch) {
          auto j = batch_item_to_json(b);
          j["annotator"] = annotator;
          append_durable(*cfg_.batch_log, j.dump());
        }
      cached = batches_.emplace(key, std::move(batch)).first;
    }
    json items = json::array();
    for (const auto& b : cached->second) {
      const auto& p = corpus_.at(b.paragraph_id);
      items.push_back({{"paragraph", paragraph_to_json(p)},
                       {"rank", b.rank},
                       {"strategy", strategy_name(b.strategy)},
                       {"round", b.round}});
    }
    return {{"annotator", annotator}, {"round", round_}, {"items", items}};
  }

  // Per-record validation; accepted records are appended in order. Missing
  // round defaults to the current round, missing timestamp to server time.
  std::pair<std::size_t, std::vector<PostStatus>> post_labels(const json& body) {
    const json* records = &body;
    if (body.is_object() && body.contains("records")) records = &body["records"];
    if (!records->is_array()) throw ServiceError(400, "bad_request", "body must be an array of records or {\"records\": [...]}");
    std::unique_lock lock(mu_);
    std::vector<PostStatus> status;
    std::size_t accepted = 0;
    std::set<std::string> touched;
    for (std::size_t i = 0; i < records->size(); ++i) {
      PostStatus st{i, false, ""};
      try {
        json r = (*records)[i];
        if (!r.is_object()) throw ValidationError("record must be an object");
        if (!r.contains("round")) r["round"] = round_;
        if (!r.contains("timestamp")) r["timestamp"] = utc_now();
        auto rec = annotation_from_json(r);
        if (!corpus_.contains(rec.paragraph_id)) throw ValidationError("unknown paragraph '" + rec.paragraph_id + "'");
        if (!registered_.count(rec.annotator) && !cfg_.auto_register)
          throw ValidationError("unknown annotator '" + rec.annotator + "'");
        if (store_.contains(rec.paragraph_id, rec.annotator, rec.round)) {
          st.reason = "duplicate";
        } else {
          append_durable(cfg_.label_log, annotation_to_json(rec).dump());
          registered_.insert(rec.annotator);
          touched.insert(rec.annotator);
          store_.add(rec);
          st.accepted = true;
          ++accepted;
        }
      } catch (const ValidationError& e) {
        st.reason = e.what();
      } catch (const json::exception& e) {
        st.reason = e.what();
      }
      status.push_back(std::move(st));
    }
    for (auto it = batches_.begin(); it != batches_.end();)
      it = touched.count(std::get<0>(it->first)) ? batches_.erase(it) : std::next(it);
    return {accepted, std::move(status)};
  }

  json agreement() const {
    std::shared_lock lock(mu_);
    return to_json(pairwise_agreement(store_));
  }

  json review() const {
    std::shared_lock lock(mu_);
    json rows = json::array();
    for (const auto& item : review_queue(store_)) {
      json labels = json::array();
      for (Label l : item.disputed) labels.push_back(label_name(l));
      rows.push_back({{"paragraph_id", item.paragraph_id}, {"disputed", labels}});
    }
    return {{"items", rows}, {"order", "disagreement-first"}};
  }

  json stats() const {
    std::shared_lock lock(mu_);
    json j = to_json(target_radar::stats(corpus_, store_));
    std::map<int, std::array<std::size_t, kNumLabels + 1>> per_round;
    for (const auto& r : store_.records()) {
      auto& row = per_round[r.round];
      ++row[kNumLabels];
      for (Label l : kAllLabels) row[index_of(l)] += r.labels.get(l);
    }
    json rounds = json::array();
    for (const auto& [round, row] : per_round) {
      json entry = {{"round", round}, {"records", row[kNumLabels]}};
      for (Label l : kAllLabels) entry[std::string(label_name(l))] = row[index_of(l)];
      rounds.push_back(entry);
    }
    j["records"] = store_.size();
    j["current_round"] = round_;
    j["rounds"] = rounds;
    j["history"] = history_;
    return j;
  }

  json paragraph(const std::string& id) const {
    const Paragraph* p = corpus_.find(id);
    if (!p) throw ServiceError(404, "not_found", "unknown paragraph '" + id + "'");
    auto a = rules::analyze(p->text);
    json spans = json::array();
    for (const auto& s : a.spans)
      spans.push_back({{"start", s.start}, {"end", s.end}, {"kind", rules::span_kind_name(s.kind)}, {"surface", s.surface}});
    json j = paragraph_to_json(*p);
    j["spans"] = spans;
    j["rules"] = {{"quantifiable", a.quantifiable},
                  {"has_deadline", a.has_deadline},
                  {"has_netzero_phrase", a.has_netzero_phrase},
                  {"aim_score", a.aim_score},
                  {"conditional", a.conditional}};
    std::shared_lock lock(mu_);
    json labels = json::array();
    for (auto* r : store_.latest_per_annotator(id)) labels.push_back(annotation_to_json(*r));
    j["labels"] = labels;
    return j;
  }

  json advance_round() {
    std::unique_lock lock(mu_);
    ++round_;
    history_.push_back({{"round", round_}, {"started", utc_now()}});
    write_atomic(cfg_.state_file, json{{"round", round_}, {"history", history_}}.dump(2) + "\n");
    batches_.clear();
    return {{"round", round_}};
  }

  json guidelines() const {
    if (guidelines_.is_null()) throw ServiceError(404, "not_found", "no guidelines file configured");
    return guidelines_;
  }

  const Corpus& corpus() const { return corpus_; }

 private:
  Corpus corpus_;
  ServiceConfig cfg_;
  CountryTable geo_;
  mutable std::shared_mutex mu_;
  AnnotationStore store_;
  int round_ = 0;
  json history_;
  json guidelines_;
  std::set<std::string> registered_;
  std::shared_ptr<const std::vector<PredictionRecord>> predictions_;
  std::array<double, kNumLabels> thresholds_{0.5, 0.5, 0.5};
  std::map<std::tuple<std::string, int, std::size_t>, std::vector<BatchItem>> batches_;
};

// ---------------------------------------------------------------------------
// HTTP routing.

inline void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json; charset=utf-8");
}

inline void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                       const json& detail = json::object()) {
  send_json(res, {{"code", code}, {"message", message}, {"detail", detail}}, status);
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.code(), e.what(), e.detail());
  } catch (const ValidationError& e) {
    send_error(res, 400, "validation_error", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_json", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

inline void install_routes(httplib::Server& srv, AnnotationService& svc) {
  srv.Get("/batch", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::size_t size = 10;
      if (req.has_param("size")) {
        const auto s = req.get_param_value("size");
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return is_ascii_digit(static_cast<unsigned char>(c)); }))
          throw ServiceError(400, "bad_request", "size must be a positive integer");
        size = std::stoul(s);
      }
      send_json(res, svc.get_batch(req.get_param_value("annotator"), size));
    });
  });
  srv.Post("/labels", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto [accepted, status] = svc.post_labels(json::parse(req.body));
      json rows = json::array();
      for (const auto& s : status)
        rows.push_back({{"index", s.index}, {"status", s.accepted ? "accepted" : "rejected"}, {"reason", s.reason}});
      send_json(res, {{"accepted", accepted}, {"results", rows}});
    });
  });
  srv.Get("/agreement", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.agreement()); });
  });
  srv.Get("/review", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.review()); });
  });
  srv.Get("/stats", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.stats()); });
  });
  srv.Get(R"(/paragraph/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.paragraph(req.matches[1])); });
  });
  srv.Post("/rounds/advance", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.advance_round()); });
  });
  srv.Get("/guidelines", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, svc.guidelines()); });
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "not_found" : "http_error", "no such route");
  });
}

}  // namespace target_radar::annot
