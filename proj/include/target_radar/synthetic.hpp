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

// Seeded synthetic corpora.
//
// template_corpus: paragraphs assembled from per-label sentence templates.
// Every target sentence carries a quantity and a deadline; the label follows
// from the template family:
//   net_zero   "<country> will reach net zero emissions by 2050."
//   reduction  "<country> will cut greenhouse gas emissions by 35% below 2005
//               levels by 2030."
//   other      "<country> will install 400 MW of solar capacity by 2030."
// Negatives are filler sentences plus distractors that carry a number or a
// year but no target ("Emissions rose by 4% in 2016."). About one net-zero
// paragraph in four also carries a reduction sentence, so labels overlap.
//
// spurious_corpus: label-free filler paragraphs with one label assigned at
// random; every positive gets a planted sentence ("Norway." or "2050.")
// appended. Filler in both classes mentions other countries and a fixed
// non-round year, so the planted token is the only signal.

#pragma once

#include <string>
#include <vector>

#include "target_radar/common.hpp"
#include "target_radar/corpus.hpp"

namespace target_radar::synthetic {

struct SyntheticCorpus {
  Corpus corpus;
  AnnotationStore labels;
  std::vector<SplitAssignment> splits;
};

namespace detail {

inline const std::vector<std::string>& countries() {
  static const std::vector<std::string> k = {"Kenya",   "Chile",  "Viet Nam", "Morocco", "Peru",    "Ghana",
                                             "Finland", "Canada", "Nepal",    "Fiji",    "Germany", "Colombia",
                                             "Tunisia", "Mexico", "Bhutan",   "Ireland"};
  return k;
}

inline const std::vector<std::string>& fillers() {
  static const std::vector<std::string> k = {
      "The ministry coordinates the programme with regional authorities.",
      "Stakeholder consultations informed the drafting of this chapter.",
      "The strategy builds on earlier national development plans.",
      "Implementation is overseen by an inter-ministerial committee.",
      "The government recognises the role of local communities.",
      "This section describes the institutional arrangements in place.",
      "Public awareness campaigns accompany the programme.",
      "The framework promotes cooperation between sectors.",
      "Capacity building remains a priority for the agencies involved.",
      "The policy is aligned with the national constitution.",
      "Monitoring arrangements are described in the annex.",
      "Civil society organisations were invited to comment on the draft.",
  };
  return k;
}

inline std::string year(Rng& r, bool round) {
  static const std::vector<int> kRound = {2025, 2030, 2035, 2040, 2045, 2050};
  static const std::vector<int> kAny = {2025, 2027, 2028, 2030, 2032, 2035, 2040};
  return std::to_string(round ? r.pick(kRound) : r.pick(kAny));
}

inline std::string net_zero(Rng& r, const std::string& who) {
  static const std::vector<std::string> kPhrase = {"net zero emissions", "carbon neutrality", "climate neutrality",
                                                   "net-zero greenhouse gas emissions", "zero net emissions"};
  static const std::vector<std::string> kVerb = {"will reach", "commits to achieving", "aims to achieve", "will attain"};
  static const std::vector<int> kYear = {2040, 2045, 2050, 2060};
  return who + " " + r.pick(kVerb) + " " + r.pick(kPhrase) + " by " + std::to_string(r.pick(kYear)) + ".";
}

inline std::string reduction(Rng& r, const std::string& who) {
  static const std::vector<std::string> kVerb = {"will cut", "will reduce", "commits to reducing", "aims to lower"};
  static const std::vector<std::string> kWhat = {"greenhouse gas emissions", "GHG emissions", "carbon dioxide emissions",
                                                 "emissions"};
  static const std::vector<std::string> kBase = {"below 2005 levels", "below 1990 levels",
                                                 "relative to business as usual", "compared with 2010"};
  return who + " " + r.pick(kVerb) + " " + r.pick(kWhat) + " by " + std::to_string(10 + 5 * r.below(10)) + "% " +
         r.pick(kBase) + " by " + year(r, false) + ".";
}

inline std::string other(Rng& r, const std::string& who) {
  switch (r.below(4)) {
    case 0:
      return who + " will install " + std::to_string(100 * (1 + r.below(20))) + " MW of solar capacity by " +
             year(r, false) + ".";
    case 1:
      return who + " aims to raise the share of renewable electricity to " + std::to_string(20 + 5 * r.below(14)) +
             "% by " + year(r, false) + ".";
    case 2:
      return who + " will plant " + std::to_string(1 + r.below(50)) + " million trees by " + year(r, false) + ".";
    default:
      return who + " commits to restore " + std::to_string(1000 * (1 + r.below(30))) + " hectares of forest by " +
             year(r, false) + ".";
  }
}

inline std::string distractor(Rng& r, const std::string& who) {
  switch (r.below(4)) {
    case 0:
      return "Emissions rose by " + std::to_string(1 + r.below(9)) + "% in " + std::to_string(2010 + r.below(10)) + ".";
    case 1:
      return "In " + std::to_string(2000 + r.below(20)) + ", " + who + " hosted a regional workshop on adaptation.";
    case 2:
      return "The agency employs " + std::to_string(20 + r.below(300)) + " staff across the country.";
    default:
      return "The report was first published in " + std::to_string(1995 + r.below(25)) + ".";
  }
}

inline std::string filler_block(Rng& r, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += r.pick(fillers());
  }
  return out;
}

inline void add(SyntheticCorpus& s, const std::string& id, const std::string& text, LabelSet y, Split split) {
  Paragraph p;
  p.id = id;
  p.doc_id = "synthetic";
  p.text = text;
  s.corpus.add(p);
  s.labels.add({id, "generator", 0, y, "2026-01-01T00:00:00Z"});
  s.splits.push_back({id, split});
}

inline Split split_for(std::size_t i, std::size_t n, double train, double val) {
  double f = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return f < train ? Split::Train : f < train + val ? Split::Val : Split::Test;
}

}  // namespace detail

// n paragraphs; class mix roughly 15% net zero, 25% reduction, 25% other,
// 35% no target. Splits 60/20/20 over a seeded permutation.
inline SyntheticCorpus template_corpus(std::size_t n, std::uint64_t seed) {
  using namespace detail;
  Rng r(seed);
  SyntheticCorpus s;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng(seed ^ 0x5a5a5a5aULL).shuffle(order);
  for (std::size_t i = 0; i < n; ++i) {
    std::string who = r.pick(countries());
    std::vector<std::string> parts = {filler_block(r, 1 + r.below(2))};
    LabelSet y;
    double u = r.uniform();
    if (u < 0.15) {
      parts.push_back(net_zero(r, who));
      y.set(Label::NetZero, true);
      if (r.below(4) == 0) {
        parts.push_back(reduction(r, who));
        y.set(Label::Reduction, true);
      }
    } else if (u < 0.40) {
      parts.push_back(reduction(r, who));
      y.set(Label::Reduction, true);
    } else if (u < 0.65) {
      parts.push_back(other(r, who));
      y.set(Label::Other, true);
    } else {
      parts.push_back(distractor(r, who));
    }
    if (r.below(2)) parts.push_back(filler_block(r, 1));
    if (r.below(3) == 0) parts.push_back(distractor(r, who));
    std::string text;
    for (const auto& p : parts) text += (text.empty() ? "" : " ") + p;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i);
    add(s, id, text, y, split_for(order[i], n, 0.6, 0.2));
  }
  return s;
}

enum class Planted { Country, RoundYear };

struct SpuriousSpec {
  Planted planted = Planted::Country;
  Label label = Label::Other;
  std::size_t n = 400;
  std::uint64_t seed = 7;
};

inline std::string planted_token(Planted p) { return p == Planted::Country ? "Norway" : "2050"; }

// A filler word present in every paragraph of the spurious corpus, used as the
// neutral perturbation baseline.
inline constexpr std::string_view kNeutralToken = "programme";
inline constexpr std::string_view kNeutralReplacement = "plan";

inline SyntheticCorpus spurious_corpus(const SpuriousSpec& spec) {
  using namespace detail;
  Rng r(spec.seed);
  SyntheticCorpus s;
  for (std::size_t i = 0; i < spec.n; ++i) {
    bool positive = r.below(2) == 1;
    std::string text = filler_block(r, 2) + " The programme covers " + r.pick(countries()) + " and " +
                       r.pick(countries()) + " until 2047.";
    if (positive) text += " " + planted_token(spec.planted) + ".";
    LabelSet y;
    y.set(spec.label, positive);
    char id[32];
    std::snprintf(id, sizeof id, "spu-%05zu", i);
    add(s, id, text, y, split_for(i, spec.n, 0.7, 0.1));
  }
  return s;
}

}  // namespace target_radar::synthetic
