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

// target-radar: command-line front end for the whole pipeline.
//
// Exit codes: 0 success, 1 validation or I/O error, 2 usage error.
// Every run prints a JSON manifest on stderr (and to --manifest if given).

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "target_radar/annotserve.hpp"
#include "target_radar/classifier.hpp"
#include "target_radar/corpus.hpp"
#include "target_radar/eval.hpp"
#include "target_radar/probes.hpp"
#include "target_radar/sampling.hpp"
#include "target_radar/synthetic.hpp"
#include "target_radar/topics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace target_radar;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::uint64_t seed = 42;
  std::string data_dir;
  std::string manifest;
};

// ---------------------------------------------------------------------------
// I/O helpers.

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Fn>
void write_lines(const std::string& path, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  write_text(path, out.str());
}

std::string file_hash(const std::string& path) {
  Fingerprint f;
  f.update(read_file(path));
  return f.hex();
}

std::string utc_timestamp() { return annot::utc_now(); }

rules::Lexicons lexicons(const Common& c) {
  auto dir = data_dir(c.data_dir.empty() ? std::nullopt : std::optional<fs::path>(c.data_dir)) / "lexicons";
  return fs::exists(dir) ? rules::Lexicons::load(dir) : rules::Lexicons::builtin();
}

CountryTable countries(const Common& c) {
  return CountryTable::load(data_dir(c.data_dir.empty() ? std::nullopt : std::optional<fs::path>(c.data_dir)) /
                            "countries.tsv");
}

fs::path data_path(const Common& c, const std::string& name) {
  return data_dir(c.data_dir.empty() ? std::nullopt : std::optional<fs::path>(c.data_dir)) / name;
}

std::vector<Paragraph> select(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::vector<Paragraph> out;
  for (const auto& id : ids) out.push_back(corpus.at(id));
  return out;
}

std::vector<Paragraph> all_paragraphs(const Corpus& corpus) { return {corpus.begin(), corpus.end()}; }

GoldMap gold_for(const AnnotationStore& labels, const std::vector<std::string>& ids) {
  GoldMap g;
  for (const auto& id : ids)
    if (auto c = labels.consensus(id)) g[id] = *c;
  return g;
}

std::vector<std::string> labelled(const AnnotationStore& labels, const std::vector<std::string>& ids) {
  std::vector<std::string> out;
  for (const auto& id : ids)
    if (labels.has_labels(id)) out.push_back(id);
  return out;
}

Split split_arg(const std::string& s) {
  auto v = parse_split(s);
  if (!v) throw ValidationError("unknown split '" + s + "' (train, val, test)");
  return *v;
}

std::vector<PredictionRecord> restrict(const std::vector<PredictionRecord>& preds, const GoldMap& gold) {
  std::vector<PredictionRecord> out;
  for (const auto& p : preds)
    if (gold.count(p.paragraph_id)) out.push_back(p);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"target-radar: climate target extraction toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--data-dir", common.data_dir, "Data directory (default: $TARGET_RADAR_DATA or the bundled data/)");
  app.add_option("--manifest", common.manifest, "Also write the run manifest to this file");

  std::map<std::string, std::string> inputs;  // option -> path, for manifest hashes
  std::function<void()> action;

  // ---- ingest
  std::string seed_file;
  bool no_seeds = false;
  std::string paragraphs_path, labels_path, splits_path, model_path, out_path, predictions_path;
  auto* ingest = app.add_subcommand("ingest", "Validate paragraphs/labels JSONL and write normalised copies");
  std::string out_dir;
  ingest->add_option("--paragraphs", paragraphs_path, "Paragraph JSONL")->required()->check(CLI::ExistingFile);
  ingest->add_option("--labels", labels_path, "Annotation JSONL")->check(CLI::ExistingFile);
  ingest->add_option("--out-dir", out_dir, "Directory for normalised copies");
  ingest->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      AnnotationStore labels;
      if (!labels_path.empty()) labels = ingest_labels(labels_path, &corpus);
      if (!out_dir.empty()) {
        write_lines((fs::path(out_dir) / "paragraphs.jsonl").string(), [&](std::ostream& o) { write_paragraphs(o, corpus); });
        if (!labels_path.empty())
          write_lines((fs::path(out_dir) / "labels.jsonl").string(), [&](std::ostream& o) { write_labels(o, labels); });
      }
      write_json("-", {{"paragraphs", corpus.size()}, {"label_records", labels.size()}, {"annotators", labels.annotators()}});
    };
  });

  // ---- stats
  auto* stats_cmd = app.add_subcommand("stats", "Label counts (net zero / reduction / other / none / total)");
  std::string slice_field = "translated", which_split = "test";
  stats_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--splits", splits_path, "Split metadata; adds per-slice positive supports")->check(CLI::ExistingFile);
  stats_cmd->add_option("--slice", slice_field, "Paragraph field to slice by")->capture_default_str();
  stats_cmd->add_option("--split", which_split, "Split whose slice supports are reported")->capture_default_str();
  stats_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      auto labels = ingest_labels(labels_path, &corpus);
      json out = to_json(stats(corpus, labels));
      if (!splits_path.empty()) {
        auto splits = load_splits(splits_path, &corpus);
        CountryTable geo;
        if (slice_field == "region") geo = countries(common);
        json slices = json::object();
        for (const auto& id : ids_in_split(splits, split_arg(which_split))) {
          auto c = labels.consensus(id);
          if (!c) continue;
          auto key = field_value(corpus.at(id), slice_field, &geo);
          auto& row = slices[key];
          if (row.is_null()) row = {{"net_zero", 0}, {"reduction", 0}, {"other", 0}, {"overall", 0}};
          for (Label l : kAllLabels) {
            std::string n(label_name(l));
            row[n] = row[n].get<int>() + c->get(l);
            row["overall"] = row["overall"].get<int>() + c->get(l);
          }
        }
        out["slice_support"] = {{"split", which_split}, {"field", slice_field}, {"slices", slices}};
      }
      write_json("-", out);
    };
  });

  // ---- split
  auto* split_cmd = app.add_subcommand("split", "Seeded stratified train/val/test split");
  SplitFractions fractions;
  std::vector<std::string> strata{"translated"};
  split_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--labels", labels_path, "Only labelled paragraphs are split when given")->check(CLI::ExistingFile);
  split_cmd->add_option("--train", fractions.train)->capture_default_str();
  split_cmd->add_option("--val", fractions.val)->capture_default_str();
  split_cmd->add_option("--test", fractions.test)->capture_default_str();
  split_cmd->add_option("--strata", strata, "Fields to stratify on")->delimiter(',');
  split_cmd->add_option("--out", out_path, "Output JSONL (default stdout)");
  split_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      AnnotationStore labels;
      if (!labels_path.empty()) labels = ingest_labels(labels_path, &corpus);
      CountryTable geo;
      if (std::find(strata.begin(), strata.end(), "region") != strata.end()) geo = countries(common);
      auto s = split(corpus, labels_path.empty() ? nullptr : &labels, fractions, common.seed, strata, &geo);
      write_lines(out_path, [&](std::ostream& o) { write_splits(o, s); });
    };
  });

  // ---- train
  auto* train_cmd = app.add_subcommand("train", "Train the multi-label linear classifier");
  FeaturizerConfig fc;
  TrainConfig tc;
  bool no_idf = false;
  train_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--splits", splits_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", out_path, "Model JSON")->required();
  train_cmd->add_option("--epochs", tc.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tc.learning_rate)->capture_default_str();
  train_cmd->add_option("--weight-decay", tc.weight_decay)->capture_default_str();
  train_cmd->add_option("--warmup-steps", tc.warmup_steps)->capture_default_str();
  train_cmd->add_option("--batch-size", tc.batch_size)->capture_default_str();
  train_cmd->add_option("--hash-dim", fc.hash_dim)->capture_default_str();
  train_cmd->add_option("--ngram-max", fc.ngram_high)->capture_default_str();
  train_cmd->add_flag("--no-idf", no_idf, "Disable IDF weighting");
  train_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      auto labels = ingest_labels(labels_path, &corpus);
      auto splits = load_splits(splits_path, &corpus);
      tc.seed = common.seed;
      fc.idf_weighting = !no_idf;
      auto r = train(corpus, labels, splits, fc, tc, lexicons(common));
      save_model(out_path, r.model);
      for (const auto& w : r.report.warnings) std::cerr << "warning: " << w << "\n";
      write_json("-", {{"model_id", r.model.model_id},
                       {"initial_loss", r.report.initial_loss},
                       {"epoch_loss", r.report.epoch_loss},
                       {"class_weights", r.report.class_weights},
                       {"warnings", r.report.warnings}});
    };
  });

  // ---- predict
  auto* predict_cmd = app.add_subcommand("predict", "Score paragraphs with a trained model");
  std::string only_split;
  predict_cmd->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--splits", splits_path)->check(CLI::ExistingFile);
  predict_cmd->add_option("--split", only_split, "Only paragraphs in this split (needs --splits)");
  predict_cmd->add_option("--out", out_path, "Predictions JSONL (default stdout)");
  predict_cmd->callback([&] {
    action = [&] {
      auto model = load_model(model_path);
      auto corpus = ingest_paragraphs(paragraphs_path);
      std::vector<Paragraph> ps;
      if (!only_split.empty()) {
        if (splits_path.empty()) throw ValidationError("--split needs --splits");
        ps = select(corpus, ids_in_split(load_splits(splits_path, &corpus), split_arg(only_split)));
      } else {
        ps = all_paragraphs(corpus);
      }
      auto preds = predict(model, ps, lexicons(common));
      write_lines(out_path, [&](std::ostream& o) { write_predictions(o, preds); });
    };
  });

  // ---- eval
  auto* eval_cmd = app.add_subcommand("eval", "Precision/recall/F1 per label and overall; mean and sigma over runs");
  std::vector<std::string> model_paths, prediction_paths;
  std::string eval_slice;
  eval_cmd->add_option("--model", model_paths, "One or more models (one run each)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictions", prediction_paths, "One or more prediction files")->check(CLI::ExistingFile);
  eval_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--splits", splits_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", which_split)->capture_default_str();
  eval_cmd->add_option("--slice", eval_slice, "Also report metrics per value of this field (e.g. translated)");
  eval_cmd->add_option("--out", out_path, "Report JSON (default stdout)");
  eval_cmd->callback([&] {
    action = [&] {
      if (model_paths.empty() == prediction_paths.empty()) throw ValidationError("give either --model or --predictions");
      auto corpus = ingest_paragraphs(paragraphs_path);
      auto labels = ingest_labels(labels_path, &corpus);
      auto ids = labelled(labels, ids_in_split(load_splits(splits_path, &corpus), split_arg(which_split)));
      auto gold = gold_for(labels, ids);
      std::vector<std::vector<PredictionRecord>> runs;
      auto lex = lexicons(common);
      for (const auto& m : model_paths) runs.push_back(predict(load_model(m), select(corpus, ids), lex));
      for (const auto& p : prediction_paths) runs.push_back(restrict(load_predictions(p), gold));
      std::vector<Metrics> ms;
      json per_run = json::array();
      for (const auto& r : runs) {
        ms.push_back(metrics(confusion(r, gold)));
        per_run.push_back(to_json(ms.back()));
      }
      json out = {{"split", which_split}, {"paragraphs", gold.size()}, {"runs", per_run}, {"summary", to_json(aggregate(ms))}};
      if (!eval_slice.empty()) {
        CountryTable geo;
        if (eval_slice == "region") geo = countries(common);
        json slices = json::array();
        for (const auto& r : runs) slices.push_back(to_json(slice_eval(r, gold, corpus, eval_slice, &geo)));
        out["slices"] = {{"field", eval_slice}, {"runs", slices}};
      }
      write_json(out_path, out);
    };
  });

  // ---- calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "Pick per-label thresholds on the validation split");
  double target_p = 0.8, target_r = 0.8;
  bool single = false;
  std::string model_out;
  cal_cmd->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  cal_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  cal_cmd->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  cal_cmd->add_option("--splits", splits_path)->required()->check(CLI::ExistingFile);
  cal_cmd->add_option("--precision", target_p)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cal_cmd->add_option("--recall", target_r)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cal_cmd->add_flag("--single-threshold", single, "One threshold shared by all labels");
  cal_cmd->add_option("--model-out", model_out, "Write the model with calibrated thresholds here");
  cal_cmd->callback([&] {
    action = [&] {
      auto model = load_model(model_path);
      auto corpus = ingest_paragraphs(paragraphs_path);
      auto labels = ingest_labels(labels_path, &corpus);
      auto ids = labelled(labels, ids_in_split(load_splits(splits_path, &corpus), Split::Val));
      auto gold = gold_for(labels, ids);
      auto preds = predict(model, select(corpus, ids), lexicons(common));
      auto t = single ? calibrate_single(preds, gold, target_p, target_r) : calibrate(preds, gold, target_p, target_r);
      if (!model_out.empty()) {
        model.thresholds = t.taus();
        model.finalize();
        save_model(model_out, model);
      }
      write_json("-", {{"targets", {{"precision", target_p}, {"recall", target_r}}},
                       {"single_threshold", single},
                       {"thresholds", to_json(t)},
                       {"model_id", model_out.empty() ? json() : json(model.model_id)}});
    };
  });

  // ---- sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid search over learning rate, weight decay and epochs; selects on val");
  SweepGrid grid;
  sweep_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--labels", labels_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--splits", splits_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--lr", grid.learning_rates)->delimiter(',');
  sweep_cmd->add_option("--weight-decay", grid.weight_decays)->delimiter(',');
  sweep_cmd->add_option("--epochs", grid.epochs)->delimiter(',');
  sweep_cmd->add_option("--precision", target_p)->capture_default_str();
  sweep_cmd->add_option("--recall", target_r)->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "Best model (calibrated thresholds) JSON")->required();
  sweep_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      auto labels = ingest_labels(labels_path, &corpus);
      auto splits = load_splits(splits_path, &corpus);
      tc.seed = common.seed;
      auto r = sweep(corpus, labels, splits, fc, tc, grid, lexicons(common), target_p, target_r);
      save_model(out_path, r.best_model);
      write_json("-", to_json(r));
    };
  });

  // ---- sample
  auto* sample_cmd = app.add_subcommand("sample", "Build an annotation batch");
  std::string strategy_str = "uncertainty";
  std::size_t batch_size = 50, presumed_positives = 0;
  double ratio = kDefaultNegativeRatio;
  int round_no = 0;
  std::map<std::string, std::size_t> quotas;
  sample_cmd->add_option("--strategy", strategy_str)->check(CLI::IsMember({"stratified", "negative", "uncertainty"}))->capture_default_str();
  sample_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--labels", labels_path, "Already-labelled paragraphs are excluded")->check(CLI::ExistingFile);
  sample_cmd->add_option("--model", model_path, "Needed by negative and uncertainty")->check(CLI::ExistingFile);
  sample_cmd->add_option("--batch-size", batch_size)->capture_default_str();
  sample_cmd->add_option("--quota", quotas, "Stratum quota, e.g. --quota AF 5 --quota EU/translated 2");
  sample_cmd->add_option("--ratio", ratio, "Target negative fraction")->capture_default_str();
  sample_cmd->add_option("--presumed-positives", presumed_positives)->capture_default_str();
  sample_cmd->add_option("--round", round_no)->capture_default_str();
  sample_cmd->add_option("--out", out_path, "batch.jsonl (default stdout)");
  sample_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      AnnotationStore labels;
      if (!labels_path.empty()) labels = ingest_labels(labels_path, &corpus);
      auto pool = unlabeled_ids(corpus, labels);
      auto strategy = *parse_strategy(strategy_str);
      SampleResult r;
      if (strategy == Strategy::Stratified) {
        auto geo = countries(common);
        auto q = quotas.empty() ? balanced_quotas(corpus, pool, batch_size, geo) : quotas;
        r = stratified_sample(corpus, pool, q, common.seed, geo);
      } else {
        if (model_path.empty()) throw ValidationError("--strategy " + strategy_str + " needs --model");
        auto model = load_model(model_path);
        auto preds = predict(model, select(corpus, pool), lexicons(common));
        r = strategy == Strategy::Negative ? negative_sample(preds, model.thresholds, batch_size, presumed_positives, ratio)
                                           : uncertainty_sample(preds, model.thresholds, batch_size);
      }
      write_lines(out_path, [&](std::ostream& o) { write_batch(o, to_batch(r.ids, strategy, round_no)); });
      std::cerr << to_json(r).dump() << "\n";
    };
  });

  // ---- probe
  auto* probe_cmd = app.add_subcommand("probe", "Bias probes");
  probe_cmd->require_subcommand(1);
  std::string paragraph_id;
  std::size_t top = 20;
  std::vector<std::string> year_map;
  auto add_model_corpus = [&](CLI::App* c) {
    c->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    c->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
    c->add_option("--out", out_path, "Report JSON (default stdout)");
  };
  auto* attr_cmd = probe_cmd->add_subcommand("attribute", "Per-feature contributions to each label's logit");
  add_model_corpus(attr_cmd);
  attr_cmd->add_option("--id", paragraph_id, "Paragraph id")->required();
  attr_cmd->add_option("--top", top)->capture_default_str();
  attr_cmd->callback([&] {
    action = [&] {
      auto model = load_model(model_path);
      auto corpus = ingest_paragraphs(paragraphs_path);
      json reports = json::array();
      for (const auto& r : attribute(model, corpus.at(paragraph_id).text, lexicons(common))) reports.push_back(to_json(r, top));
      write_json(out_path, {{"paragraph_id", paragraph_id}, {"labels", reports}});
    };
  });
  auto* years_cmd = probe_cmd->add_subcommand("years", "Score change when year tokens are shifted");
  add_model_corpus(years_cmd);
  years_cmd->add_option("--map", year_map, "Explicit mapping FROM=TO (repeatable); default shifts round years by one");
  years_cmd->callback([&] {
    action = [&] {
      auto model = load_model(model_path);
      auto corpus = ingest_paragraphs(paragraphs_path);
      std::function<int(int)> mapping = default_year_shift;
      std::map<int, int> explicit_map;
      for (const auto& m : year_map) {
        auto eq = m.find('=');
        if (eq == std::string::npos) throw ValidationError("--map expects FROM=TO, got '" + m + "'");
        explicit_map[std::stoi(m.substr(0, eq))] = std::stoi(m.substr(eq + 1));
      }
      if (!explicit_map.empty())
        mapping = [&](int y) {
          auto it = explicit_map.find(y);
          return it == explicit_map.end() ? y : it->second;
        };
      write_json(out_path, to_json(perturb_years(model, all_paragraphs(corpus), mapping, lexicons(common))));
    };
  });
  auto* countries_cmd = probe_cmd->add_subcommand("countries", "Score change when country names become \"the country\"");
  add_model_corpus(countries_cmd);
  countries_cmd->callback([&] {
    action = [&] {
      auto model = load_model(model_path);
      auto corpus = ingest_paragraphs(paragraphs_path);
      auto r = perturb_countries(model, all_paragraphs(corpus), countries(common), lexicons(common));
      json out = to_json(r);
      for (Label l : kAllLabels) {
        json ranked = json::array();
        auto rows = delta_by_token(r, l);
        for (std::size_t i = 0; i < std::min<std::size_t>(rows.size(), 20); ++i)
          ranked.push_back({{"token", rows[i].first}, {"mean_abs_delta", rows[i].second}});
        out["by_token"][std::string(label_name(l))] = ranked;
      }
      write_json(out_path, out);
    };
  });
  auto* rs_cmd = probe_cmd->add_subcommand("roundstats", "Share of round years (multiples of 5) in positive vs negative paragraphs");
  rs_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  rs_cmd->add_option("--labels", labels_path)->check(CLI::ExistingFile);
  rs_cmd->add_option("--predictions", predictions_path)->check(CLI::ExistingFile);
  rs_cmd->add_option("--out", out_path);
  rs_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      std::map<std::string, bool> positive;
      if (!labels_path.empty()) {
        positive = any_positive(ingest_labels(labels_path, &corpus).consensus_map());
      } else if (!predictions_path.empty()) {
        for (const auto& p : load_predictions(predictions_path)) positive[p.paragraph_id] = p.decisions.any();
      } else {
        throw ValidationError("give --labels or --predictions");
      }
      write_json(out_path, to_json(round_year_stats(corpus, positive)));
    };
  });

  // ---- topics
  auto* topics_cmd = app.add_subcommand("topics", "Topic rollup for 'Other' targets");
  topics_cmd->require_subcommand(1);
  topics::TopicConfig tcfg;
  std::string assignments_path, groups_path, topics_path;
  auto other_texts = [&](const Corpus& corpus, std::vector<std::string>& ids) {
    std::vector<std::string> texts;
    auto lex = lexicons(common);
    auto keep = [&](const std::string& id) {
      ids.push_back(id);
      texts.push_back(topics::preprocess(corpus.at(id).text, lex));
    };
    if (!predictions_path.empty()) {
      for (const auto& p : load_predictions(predictions_path))
        if (p.decisions.other) keep(p.paragraph_id);
    } else if (!labels_path.empty()) {
      for (const auto& [id, ls] : ingest_labels(labels_path, &corpus).consensus_map())
        if (ls.other) keep(id);
    } else {
      throw ValidationError("give --predictions or --labels to select 'Other' paragraphs");
    }
    return texts;
  };
  auto write_assignments = [&](const std::string& path, const std::vector<std::string>& ids,
                               const std::vector<std::size_t>& a) {
    write_lines(path, [&](std::ostream& o) {
      for (std::size_t i = 0; i < ids.size(); ++i) o << json{{"paragraph_id", ids[i]}, {"topic", a[i]}}.dump() << "\n";
    });
  };
  auto* fit_cmd = topics_cmd->add_subcommand("fit", "Fit seeded topics on condensed 'Other' paragraphs");
  fit_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--predictions", predictions_path, "Select paragraphs predicted 'Other'")->check(CLI::ExistingFile);
  fit_cmd->add_option("--labels", labels_path, "Select paragraphs labelled 'Other'")->check(CLI::ExistingFile);
  fit_cmd->add_option("--k", tcfg.k)->capture_default_str();
  fit_cmd->add_option("--min-df", tcfg.vectorizer.min_df)->capture_default_str();
  fit_cmd->add_option("--out", topics_path, "topics.json")->required();
  fit_cmd->add_option("--assignments", assignments_path, "Per-paragraph topic JSONL");
  auto* seed_opt = fit_cmd->add_option("--seed-file", seed_file, "One seed topic per line, phrases separated by '|'")
                       ->check(CLI::ExistingFile);
  fit_cmd->add_flag("--no-seeds", no_seeds, "Unseeded k-means")->excludes(seed_opt);
  fit_cmd->callback([&] {
    action = [&] {
      auto corpus = ingest_paragraphs(paragraphs_path);
      std::vector<std::string> ids;
      auto texts = other_texts(corpus, ids);
      tcfg.seed = common.seed;
      auto stop = topics::load_stop_words(data_path(common, "stopwords_en.txt"));
      std::vector<topics::Seed> seeds;
      if (!seed_file.empty()) {
        for (const auto& line : read_lines(seed_file)) {
          topics::Seed seed;
          for (const auto& part : split_string(line, '|'))
            if (auto t = trim(part); !t.empty()) seed.emplace_back(t);
          if (!seed.empty()) seeds.push_back(std::move(seed));
        }
      } else if (!no_seeds) {
        seeds = topics::default_seeds();
      }
      auto fit = topics::fit_topics(texts, seeds, tcfg, stop);
      fit.model.topic_words = topics::ctfidf_words(fit.model, texts, fit.assignments, stop);
      write_json(topics_path, topics::to_json(fit.model));
      if (!assignments_path.empty()) write_assignments(assignments_path, ids, fit.assignments);
    };
  });
  auto* assign_cmd = topics_cmd->add_subcommand("assign", "Assign 'Other' paragraphs to fitted topics");
  assign_cmd->add_option("--topics", topics_path, "topics.json")->required()->check(CLI::ExistingFile);
  assign_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  assign_cmd->add_option("--predictions", predictions_path)->check(CLI::ExistingFile);
  assign_cmd->add_option("--labels", labels_path)->check(CLI::ExistingFile);
  assign_cmd->add_option("--out", assignments_path, "Assignments JSONL (default stdout)");
  assign_cmd->callback([&] {
    action = [&] {
      auto model = topics::topic_model_from_json(json::parse(read_file(topics_path)));
      auto corpus = ingest_paragraphs(paragraphs_path);
      std::vector<std::string> ids;
      auto texts = other_texts(corpus, ids);
      auto stop = topics::load_stop_words(data_path(common, "stopwords_en.txt"));
      write_assignments(assignments_path, ids, topics::assign_topics(model, texts, stop));
    };
  });
  auto* report_cmd = topics_cmd->add_subcommand("report", "Share of 'Other' paragraphs per topic group");
  report_cmd->add_option("--assignments", assignments_path)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--groups", groups_path, "topic_groups.toml (default: bundled)");
  report_cmd->add_option("--k", tcfg.k)->capture_default_str();
  report_cmd->add_option("--out", out_path, "report.json (default stdout)");
  report_cmd->callback([&] {
    action = [&] {
      auto groups = topics::load_group_map(groups_path.empty() ? data_path(common, "topic_groups.toml") : fs::path(groups_path));
      groups.validate(tcfg.k);
      std::vector<std::size_t> a;
      std::ifstream in(assignments_path);
      detail::for_each_jsonl_line(in, [&](const json& j, std::size_t) { a.push_back(j.at("topic").get<std::size_t>()); });
      write_json(out_path, topics::to_json(topics::group_report(a, groups)));
    };
  });

  // ---- serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1", state_path;
  bool no_auto_register = false;
  std::vector<std::string> annotators;
  serve_cmd->add_option("--paragraphs", paragraphs_path)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--labels", labels_path, "Label log (JSONL, appended to)")->required();
  serve_cmd->add_option("--state", state_path, "Round state file (default: <labels>.state.json)");
  serve_cmd->add_option("--model", model_path, "Model for uncertainty batches")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--annotator", annotators, "Registered annotator (repeatable)");
  serve_cmd->add_flag("--no-auto-register", no_auto_register, "Reject annotators not registered with --annotator");
  serve_cmd->callback([&] {
    action = [&] {
      annot::ServiceConfig cfg;
      cfg.label_log = labels_path;
      cfg.state_file = state_path.empty() ? labels_path + ".state.json" : state_path;
      cfg.batch_log = labels_path + ".batches.jsonl";
      cfg.guidelines = data_path(common, "guidelines.json");
      cfg.auto_register = !no_auto_register;
      cfg.annotators = {annotators.begin(), annotators.end()};
      cfg.seed = common.seed;
      annot::AnnotationService svc(ingest_paragraphs(paragraphs_path), cfg, countries(common));
      if (!model_path.empty()) svc.set_model(load_model(model_path));
      httplib::Server srv;
      annot::install_routes(srv, svc);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!srv.listen(host, port)) throw ValidationError("cannot listen on " + host + ":" + std::to_string(port));
    };
  });

  // ---- synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic corpus");
  std::string kind = "template";
  std::size_t n = 500;
  synth_cmd->add_option("--kind", kind)->check(CLI::IsMember({"template", "spurious-country", "spurious-year"}))->capture_default_str();
  synth_cmd->add_option("--n", n)->capture_default_str();
  synth_cmd->add_option("--out-dir", out_dir)->required();
  synth_cmd->callback([&] {
    action = [&] {
      synthetic::SyntheticCorpus s;
      if (kind == "template") {
        s = synthetic::template_corpus(n, common.seed);
      } else {
        synthetic::SpuriousSpec spec;
        spec.planted = kind == "spurious-country" ? synthetic::Planted::Country : synthetic::Planted::RoundYear;
        spec.n = n;
        spec.seed = common.seed;
        s = synthetic::spurious_corpus(spec);
      }
      fs::path d(out_dir);
      write_lines((d / "paragraphs.jsonl").string(), [&](std::ostream& o) { write_paragraphs(o, s.corpus); });
      write_lines((d / "labels.jsonl").string(), [&](std::ostream& o) { write_labels(o, s.labels); });
      write_lines((d / "splits.jsonl").string(), [&](std::ostream& o) { write_splits(o, s.splits); });
      write_json("-", {{"paragraphs", s.corpus.size()}, {"out_dir", out_dir}});
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    return 2;
  }

  // Manifest: every option given on the command line, plus content hashes of
  // input files that exist.
  json manifest;
  std::string command;
  Fingerprint config;
  std::function<void(const CLI::App*)> walk = [&](const CLI::App* a) {
    for (const auto* sub : a->get_subcommands()) {
      command += (command.empty() ? "" : " ") + sub->get_name();
      walk(sub);
    }
    for (const auto* opt : a->get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--manifest") continue;
      std::string v;
      for (const auto& r : opt->results()) v += r + "\x1f";
      config.update(a->get_name() + opt->get_name() + "=" + v + "\x1e");
      for (const auto& r : opt->results())
        if (opt->get_name().find("out") == std::string::npos && fs::is_regular_file(r)) inputs[opt->get_name()] = r;
    }
  };
  walk(&app);
  manifest["command"] = command;
  manifest["seed"] = common.seed;
  manifest["version"] = kVersion;
  manifest["started"] = utc_timestamp();

  int rc = 0;
  try {
    json hashes = json::object();
    for (const auto& [opt, path] : inputs) hashes[opt] = {{"path", path}, {"fnv1a64", file_hash(path)}};
    manifest["inputs"] = hashes;
    manifest["config_hash"] = config.hex();
    if (action) action();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    rc = 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = 1;
  }
  manifest["finished"] = utc_timestamp();
  manifest["exit_code"] = rc;
  std::cerr << manifest.dump() << "\n";
  if (!common.manifest.empty()) {
    std::ofstream out(common.manifest);
    out << manifest.dump(2) << "\n";
  }
  return rc;
}
