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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails. `--only N` runs one criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "target_radar/eval.hpp"
#include "target_radar/probes.hpp"
#include "target_radar/rulegrammar.hpp"
#include "target_radar/synthetic.hpp"
#include "target_radar/topics.hpp"

using namespace target_radar;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream o;
  o.precision(prec);
  o << std::fixed << v;
  return o.str();
}

// Scratch directory for CLI runs.
struct Scratch {
  fs::path path;
  Scratch() {
    path = fs::temp_directory_path() / ("tr-accept-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

// Runs the CLI with stderr discarded. Returns exit code and stdout.
std::pair<int, std::string> run_cli(const std::vector<std::string>& args) {
  std::string cmd = shell_quote(TARGET_RADAR_CLI);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>/dev/null";
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path fixtures() { return data_dir() / "fixtures"; }
fs::path mini() { return data_dir() / "mini"; }

// ---------------------------------------------------------------------------

Outcome criterion_1() {
  auto t0 = Clock::now();
  std::size_t rows = 0, exact = 0, pass_rows = 0, fail_rows = 0, fail_flagged = 0;
  std::vector<std::string> table_mismatch, pass_without_both;
  for (const auto& line : read_lines(fixtures() / "grammar_gold.jsonl")) {
    auto row = json::parse(line);
    auto id = row["id"].get<std::string>();
    auto a = rules::analyze(row["text"].get<std::string>());
    const auto& e = row["expect"];
    ++rows;
    bool match = a.quantifiable == e["quantifiable"].get<bool>() && a.has_deadline == e["has_deadline"].get<bool>() &&
                 a.has(rules::SpanKind::AntiAimCue) == e["anti_aim"].get<bool>() &&
                 a.conditional == e["conditional"].get<bool>();
    if (match)
      ++exact;
    else
      table_mismatch.push_back(id);
    if (row["verdict"] == "pass") {
      ++pass_rows;
      if (!(a.quantifiable && a.has_deadline)) pass_without_both.push_back(id);
    } else {
      ++fail_rows;
      fail_flagged += !a.quantifiable || !a.has_deadline || a.has(rules::SpanKind::AntiAimCue) || a.conditional;
    }
  }
  double secs = seconds_since(t0);
  std::string d = "table " + std::to_string(exact) + "/" + std::to_string(rows) + " exact; fail rows flagged " +
                  std::to_string(fail_flagged) + "/" + std::to_string(fail_rows) + "; pass rows with quantifiable and deadline " +
                  std::to_string(pass_rows - pass_without_both.size()) + "/" + std::to_string(pass_rows);
  for (const auto& id : pass_without_both) d += " [" + id + " has no deadline in its text]";
  for (const auto& id : table_mismatch) d += " [mismatch " + id + "]";
  d += "; " + fmt(secs, 3) + "s";
  bool ok = rows > 0 && table_mismatch.empty() && pass_without_both.empty() && fail_flagged == fail_rows && secs < 1.0;
  return {ok, d};
}

Outcome criterion_2() {
  auto t0 = Clock::now();
  std::set<std::string> items;
  std::size_t pos = 0, pos_ok = 0, neg = 0, neg_clean = 0;
  std::vector<std::string> misses;
  for (const auto& line : read_lines(fixtures() / "netzero_positive.tsv")) {
    auto cols = split_string(line, '\t');
    if (cols.size() != 3) return {false, "malformed positive fixture line: " + line};
    items.insert(cols[0]);
    ++pos;
    auto spans = rules::detect_netzero_phrases(cols[1]);
    if (spans.size() == 1 && spans[0].surface == cols[2])
      ++pos_ok;
    else
      misses.push_back(cols[1]);
  }
  for (const auto& line : read_lines(fixtures() / "netzero_negative.txt")) {
    ++neg;
    neg_clean += rules::detect_netzero_phrases(line).empty();
  }
  bool variants = true;
  for (std::string v : {"carbon neutrality", "zero-emission", "fully decarbonize"})
    variants &= !rules::detect_netzero_phrases("The plan targets " + v + " by 2050.").empty();
  double secs = seconds_since(t0);
  std::string d = std::to_string(items.size()) + " scoped items, " + std::to_string(pos_ok) + "/" + std::to_string(pos) +
                  " positive sentences exact, " + std::to_string(neg_clean) + "/" + std::to_string(neg) +
                  " negatives clean, named variants " + (variants ? "ok" : "missed") + "; " + fmt(secs, 3) + "s";
  for (const auto& m : misses) d += " [miss: " + m + "]";
  return {items.size() == 13 && pos_ok == pos && neg == 50 && neg_clean == neg && variants && secs < 1.0, d};
}

Outcome criterion_3() {
  Rng r(20260);
  const double eps = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0;
  for (int inst = 0; inst < 20; ++inst) {
    std::size_t dim = 8 + r.below(24), n = 1 + r.below(12);
    std::vector<Example> batch;
    for (std::size_t i = 0; i < n; ++i) {
      Example e;
      e.x.dim = dim;
      for (std::uint32_t j = 0; j < dim; ++j)
        if (r.uniform() < 0.4) e.x.entries.emplace_back(j, 2.0 * r.uniform() - 1.0);
      for (Label l : kAllLabels) e.y.set(l, r.below(2) == 1);
      batch.push_back(std::move(e));
    }
    LinearWeights p(dim);
    for (double& v : p.w) v = 2.0 * r.uniform() - 1.0;
    for (double& v : p.b) v = 2.0 * r.uniform() - 1.0;
    ClassWeights cw{1.0 + 4.0 * r.uniform(), 1.0 + 4.0 * r.uniform(), 1.0 + 4.0 * r.uniform()};
    double wd = 0.1 * r.uniform();
    auto g = loss_and_grad(p, batch, cw, wd).grad;
    auto loss = [&](const LinearWeights& q) { return loss_and_grad(q, batch, cw, wd).loss; };
    auto check = [&](double analytic, double numeric) {
      worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
      ++checked;
    };
    for (std::size_t i = 0; i < dim; ++i) {
      LinearWeights hi = p, lo = p;
      hi.w[i] += eps;
      lo.w[i] -= eps;
      check(g.w[i], (loss(hi) - loss(lo)) / (2 * eps));
    }
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      LinearWeights hi = p, lo = p;
      hi.b[k] += eps;
      lo.b[k] -= eps;
      check(g.b[k], (loss(hi) - loss(lo)) / (2 * eps));
    }
  }
  std::ostringstream d;
  d << "20 instances, " << checked << " coordinates, max relative error " << std::scientific << worst;
  return {worst < 1e-4, d.str()};
}

Outcome criterion_4() {
  auto t0 = Clock::now();
  auto s = synthetic::template_corpus(500, 42);
  FeaturizerConfig fc;
  auto sw = sweep(s.corpus, s.labels, s.splits, fc, TrainConfig{}, SweepGrid{});
  GoldMap gold;
  std::vector<Paragraph> test;
  for (const auto& id : ids_in_split(s.splits, Split::Test)) {
    gold[id] = *s.labels.consensus(id);
    test.push_back(s.corpus.at(id));
  }
  auto preds = predict(sw.best_model, test);
  auto m = metrics(confusion(preds, gold));
  double secs = seconds_since(t0);
  const auto& best = sw.points[sw.best];
  std::string d = "test micro-F1 " + fmt(m.micro.f1) + " on " + std::to_string(test.size()) + " held-out paragraphs; " +
                  std::to_string(sw.points.size()) + "-point sweep picked lr " + fmt(best.config.learning_rate, 3) +
                  " wd " + fmt(best.config.weight_decay, 4) + " epochs " + std::to_string(best.config.epochs) +
                  " (val F1 " + fmt(best.val.micro.f1) + "); " + fmt(secs, 1) + "s";
  return {m.micro.f1 >= 0.95 && secs < 60.0, d};
}

Outcome criterion_5() {
  Rng r(5050);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + r.below(80);
    std::vector<PredictionRecord> preds;
    GoldMap gold;
    for (std::size_t i = 0; i < n; ++i) {
      PredictionRecord p;
      p.paragraph_id = "p" + std::to_string(i);
      LabelSet g;
      for (Label l : kAllLabels) {
        p.decisions.set(l, r.below(2) == 1);
        g.set(l, r.below(3) == 0);
      }
      gold[p.paragraph_id] = g;
      preds.push_back(p);
    }
    auto m = metrics(confusion(preds, gold));
    auto brute = [&](std::optional<Label> only) {
      double tp = 0, fp = 0, fn = 0;
      for (const auto& p : preds)
        for (Label l : kAllLabels) {
          if (only && l != *only) continue;
          bool d = p.decisions.get(l), g = gold.at(p.paragraph_id).get(l);
          tp += d && g;
          fp += d && !g;
          fn += !d && g;
        }
      double pr = tp + fp > 0 ? tp / (tp + fp) : 0.0, rc = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      return std::array<double, 3>{pr, rc, pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0.0};
    };
    auto same = [&](const Prf& c, std::array<double, 3> o) {
      return c.precision == o[0] && c.recall == o[1] && c.f1 == o[2];
    };
    mismatches += !same(m.micro, brute(std::nullopt));
    for (Label l : kAllLabels) mismatches += !same(m.per_label[index_of(l)], brute(l));
  }
  double cell = f1_score(0.8, 0.9);
  bool cell_ok = std::abs(cell - 0.8471) < 5e-5;
  return {mismatches == 0 && cell_ok, "100 random sets, " + std::to_string(mismatches) +
                                          " cells differ from brute force; F1(0.8, 0.9) = " + fmt(cell)};
}

Outcome criterion_6() {
  Rng r(606);
  std::size_t trials = 1000, oracle_feasible = 0, agree = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t n = 2 + r.below(40);
    std::vector<double> s(n);
    std::vector<bool> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = r.below(2) == 1;
      s[i] = std::round((g[i] ? 0.25 + 0.75 * r.uniform() : 0.75 * r.uniform()) * 40) / 40;
    }
    auto pr_at = [&](double tau) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        bool d = s[i] >= tau;
        tp += d && g[i];
        fp += d && !g[i];
        fn += !d && g[i];
      }
      return std::pair{tp + fp > 0 ? tp / (tp + fp) : 0.0, tp + fn > 0 ? tp / (tp + fn) : 0.0};
    };
    std::set<double> cuts(s.begin(), s.end());
    cuts.insert(2.0);
    bool any = false;
    for (double c : cuts) {
      auto [p, rc] = pr_at(c);
      any |= p >= 0.8 - 1e-12 && rc >= 0.8 - 1e-12;
    }
    auto th = calibrate_scores(s, g, 0.8, 0.8);
    auto [p, rc] = pr_at(th.tau);
    bool returned_feasible = th.feasible && p >= 0.8 - 1e-12 && rc >= 0.8 - 1e-12;
    oracle_feasible += any;
    agree += any ? returned_feasible : !th.feasible;
  }
  auto w = calibrate_scores({0.9, 0.8, 0.6, 0.4, 0.7, 0.3, 0.2}, {true, true, true, true, false, false, false}, 0.8, 0.8);
  bool worked = w.feasible && w.precision == 0.8 && w.recall == 1.0;
  std::string d = std::to_string(agree) + "/" + std::to_string(trials) + " trials agree with the exhaustive sweep (" +
                  std::to_string(oracle_feasible) + " feasible); worked fixture P=" + fmt(w.precision, 2) +
                  " R=" + fmt(w.recall, 2) + " tau=" + fmt(w.tau, 3);
  return {agree == trials && oracle_feasible > 0 && worked, d};
}

Outcome criterion_7() {
  auto [code, out] = run_cli({"stats", "--paragraphs", (mini() / "paragraphs.jsonl").string(), "--labels",
                              (mini() / "labels.jsonl").string(), "--splits", (mini() / "splits.jsonl").string()});
  if (code != 0) return {false, "stats exited with " + std::to_string(code)};
  auto got = json::parse(out);
  auto expected = json::parse(read_file(mini() / "expected.json"));
  bool totals = true;
  for (const auto& [k, v] : expected["stats"].items()) totals &= got[k] == v;
  bool slices = got["slice_support"]["slices"] == expected["test_slice_support"];
  std::string d = "published dataset not bundled; 50-paragraph miniature: " + std::to_string(got["net_zero"].get<int>()) +
                  " / " + std::to_string(got["reduction"].get<int>()) + " / " + std::to_string(got["other"].get<int>()) +
                  " / " + std::to_string(got["none"].get<int>()) + " / " + std::to_string(got["total"].get<int>()) +
                  (totals ? " match" : " differ") + ", test slice supports " + (slices ? "match" : "differ");
  return {totals && slices, d};
}

Outcome criterion_8() {
  Scratch tmp;
  auto p = (mini() / "paragraphs.jsonl").string(), l = (mini() / "labels.jsonl").string(),
       sp = (mini() / "splits.jsonl").string();
  struct Cmd {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> outs;
  };
  std::vector<Cmd> cmds = {
      {"split", {"split", "--paragraphs", p, "--labels", l}, {"--out"}},
      {"train", {"train", "--paragraphs", p, "--labels", l, "--splits", sp}, {"--out"}},
      {"sample", {"sample", "--strategy", "stratified", "--paragraphs", p, "--labels", l, "--batch-size", "10"}, {"--out"}},
      {"topics fit",
       {"topics", "fit", "--paragraphs", p, "--labels", l, "--k", "3", "--min-df", "1", "--no-seeds"},
       {"--out", "--assignments"}},
  };
  bool ok = true;
  std::string d;
  for (const auto& c : cmds) {
    std::vector<std::string> contents[2];
    bool ran = true;
    for (int run = 0; run < 2; ++run) {
      auto args = c.args;
      for (const auto& o : c.outs) {
        args.push_back(o);
        args.push_back((tmp.path / (std::to_string(run) + o.substr(2) + ".out")).string());
      }
      ran &= run_cli(args).first == 0;
      for (const auto& o : c.outs) contents[run].push_back(ran ? read_file(tmp.path / (std::to_string(run) + o.substr(2) + ".out")) : "");
    }
    bool same = ran && contents[0] == contents[1];
    for (const auto& s : contents[0]) same &= !s.empty();
    ok &= same;
    d += (d.empty() ? "" : ", ") + c.name + (same ? " identical" : ran ? " differs" : " failed");
  }
  return {ok, d};
}

// Trains on a spurious corpus and probes the planted token. The training
// configuration is the one with the lowest validation log-loss over a small
// grid, chosen before any probe is run.
struct ProbeCheck {
  bool top1 = false;
  std::size_t top1_hits = 0, positives = 0;
  double planted = 0, neutral = 0;
  TrainConfig config;
};

ProbeCheck probe_planted(synthetic::Planted kind) {
  synthetic::SpuriousSpec spec;
  spec.planted = kind;
  auto s = synthetic::spurious_corpus(spec);
  std::optional<ModelParams> model;
  TrainConfig chosen;
  double best_loss = INFINITY;
  for (double lr : {2.0, 10.0, 30.0, 100.0})
    for (double wd : {1e-4, 0.0}) {
      TrainConfig tc;
      tc.learning_rate = lr;
      tc.weight_decay = wd;
      tc.epochs = 100;
      auto m = train(s.corpus, s.labels, s.splits, FeaturizerConfig{}, tc).model;
      double loss = split_log_loss(m, s.corpus, s.labels, s.splits, Split::Val);
      if (loss < best_loss) best_loss = loss, model = std::move(m), chosen = tc;
    }

  std::vector<Paragraph> positives;
  for (const auto& id : ids_in_split(s.splits, Split::Test))
    if (s.labels.consensus(id)->get(spec.label)) positives.push_back(s.corpus.at(id));
  std::string token = synthetic::planted_token(kind);
  std::string feature = rules::tokenize(token).at(0).lower;

  ProbeCheck out;
  out.config = chosen;
  out.positives = positives.size();
  std::map<std::string, double> total;
  for (const auto& p : positives) {
    auto rep = attribute(*model, p.text)[index_of(spec.label)];
    if (!rep.entries.empty() && rep.entries[0].name == feature) ++out.top1_hits;
    for (const auto& e : rep.entries) total[e.name] += std::abs(e.contribution);
  }
  auto best = std::max_element(total.begin(), total.end(), [](auto& a, auto& b) { return a.second < b.second; });
  out.top1 = best != total.end() && best->first == feature;

  std::string replacement =
      kind == synthetic::Planted::Country ? std::string(kNeutralCountry) : std::to_string(default_year_shift(2050));
  out.planted = perturb_token(*model, positives, token, replacement).mean_abs_delta(spec.label);
  out.neutral = perturb_token(*model, positives, synthetic::kNeutralToken, synthetic::kNeutralReplacement)
                    .mean_abs_delta(spec.label);
  return out;
}

Outcome criterion_9() {
  bool ok = true;
  std::string d;
  for (auto kind : {synthetic::Planted::Country, synthetic::Planted::RoundYear}) {
    auto c = probe_planted(kind);
    double ratio = c.neutral > 0 ? c.planted / c.neutral : INFINITY;
    bool pass = c.top1 && c.top1_hits == c.positives && c.positives > 0 && ratio >= 10.0;
    ok &= pass;
    std::ostringstream o;
    o << synthetic::planted_token(kind) << ": top-1 on " << c.top1_hits << "/" << c.positives
      << " positives, mean |delta| " << fmt(c.planted) << " vs neutral " << std::scientific << std::setprecision(2)
      << c.neutral << " (" << std::fixed << std::setprecision(1) << ratio << "x; lr " << c.config.learning_rate
      << " wd " << c.config.weight_decay << " by val log-loss)";
    d += (d.empty() ? "" : "; ") + o.str();
  }
  return {ok, d};
}

Outcome criterion_10() {
  using namespace topics;
  // Objective monotone over several seeded random corpora.
  Rng r(1010);
  static const std::vector<std::string> words = {"solar", "wind", "forest", "rail", "bus", "tree", "hydro", "waste",
                                                 "water", "housing", "school", "clinic", "grid", "storage", "coast"};
  bool monotone = true;
  std::size_t iters = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<std::string> docs;
    for (int i = 0; i < 120; ++i) {
      std::string t;
      for (int w = 0; w < 6; ++w) t += r.pick(words) + " ";
      docs.push_back(t);
    }
    TopicConfig c;
    c.k = 8;
    c.seed = seed;
    c.vectorizer.min_df = 2;
    c.vectorizer.ngram_high = 1;
    auto fit = fit_topics(docs, {{"solar"}, {"forest"}}, c);
    for (std::size_t i = 1; i < fit.model.objective.size(); ++i, ++iters)
      monotone &= fit.model.objective[i] <= fit.model.objective[i - 1] + 1e-12;
  }

  // Three disjoint vocabularies, one seed.
  static const std::vector<std::vector<std::string>> vocab = {
      {"solar", "panels", "rooftop", "photovoltaic", "inverter"},
      {"forest", "timber", "saplings", "canopy", "woodland"},
      {"bus", "rail", "transit", "commuter", "tram"}};
  std::vector<std::string> docs;
  std::vector<std::size_t> truth;
  for (std::size_t i = 0; i < 90; ++i) {
    std::string t;
    for (int w = 0; w < 6; ++w) t += (t.empty() ? "" : " ") + r.pick(vocab[i % 3]);
    docs.push_back(t);
    truth.push_back(i % 3);
  }
  TopicConfig c3;
  c3.k = 3;
  c3.vectorizer.min_df = 2;
  c3.vectorizer.ngram_high = 1;
  auto fit = fit_topics(docs, {{"solar"}}, c3);
  std::map<std::size_t, std::size_t> topic_of;
  bool recovered = true;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto [it, fresh] = topic_of.emplace(truth[i], fit.assignments[i]);
    recovered &= it->second == fit.assignments[i];
  }
  std::set<std::size_t> distinct;
  for (auto [cls, t] : topic_of) distinct.insert(t);
  recovered &= distinct.size() == 3 && topic_of.at(0) == 0;

  // Group shares with the shipped 60-topic map.
  auto groups = load_group_map(data_dir() / "topic_groups.toml");
  groups.validate(60);
  std::vector<std::size_t> assignments;
  for (int i = 0; i < 2000; ++i) assignments.push_back(r.below(60));
  auto rep = group_report(assignments, groups);
  double sum = 0;
  for (const auto& [name, p] : rep.percent) sum += p;
  bool shares = std::abs(sum - 100.0) <= 0.1;

  // Two-class c-TF-IDF by hand.
  auto t = ctfidf({{2, 0, 1}, {1, 3, 0}});
  const double A = 3.5, f[3] = {3, 3, 1}, counts[2][3] = {{2, 0, 1}, {1, 3, 0}};
  double worst = 0;
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(t.weight[k][j] - counts[k][j] * std::log(1.0 + A / f[j])));
  bool ctf = worst <= 1e-12 && t.average_words == A;

  std::ostringstream d;
  d << "objective " << (monotone ? "non-increasing" : "increased") << " over " << iters << " iterations; 3-vocabulary "
    << (recovered ? "exact" : "not recovered") << "; group shares sum " << fmt(sum, 6) << "; c-TF-IDF max error "
    << std::scientific << worst;
  return {monotone && recovered && shares && ctf, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  const std::vector<std::function<Outcome()>> criteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                          criterion_5, criterion_6, criterion_7, criterion_8,
                                                          criterion_9, criterion_10};
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
