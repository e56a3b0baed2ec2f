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

// Target grammar: deterministic recognizers for the three target criteria
// (an aim, a quantity, a deadline) and for scoped net-zero language.
//
// Everything works on a lossless token stream. Word tokens are maximal runs
// of ASCII alphanumerics and non-ASCII bytes; every other non-space byte is a
// one-character punctuation token, except the U+2010..U+2015 dashes which are
// kept whole. Lexicon entries are phrases of space-separated elements, each
// element a '|'-separated set of lowercase alternatives:
//
//   carbon neutral|neutrality       matches "Carbon Neutrality", "carbon-neutral"
//   will be <num>                   <num> matches any numeral or number word
//
// Adjacent phrase elements may be separated by whitespace or by one hyphen.

#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "target_radar/common.hpp"

namespace target_radar::rules {

enum class SpanKind {
  Percent,
  Number,
  NumberWord,
  LexicalQuantifier,
  YearDeadline,
  RelativeDeadline,
  PlanningCycleDeadline,
  NetZeroPhrase,
  AimCue,
  AntiAimCue,
  ConditionalCue,
  GlobalScopeCue,
};

inline constexpr std::string_view span_kind_name(SpanKind k) {
  switch (k) {
    case SpanKind::Percent: return "percent";
    case SpanKind::Number: return "number";
    case SpanKind::NumberWord: return "number_word";
    case SpanKind::LexicalQuantifier: return "lexical_quantifier";
    case SpanKind::YearDeadline: return "year_deadline";
    case SpanKind::RelativeDeadline: return "relative_deadline";
    case SpanKind::PlanningCycleDeadline: return "planning_cycle_deadline";
    case SpanKind::NetZeroPhrase: return "netzero_phrase";
    case SpanKind::AimCue: return "aim_cue";
    case SpanKind::AntiAimCue: return "anti_aim_cue";
    case SpanKind::ConditionalCue: return "conditional_cue";
    case SpanKind::GlobalScopeCue: return "global_scope_cue";
  }
  return "?";
}

inline bool is_quantity_kind(SpanKind k) {
  return k == SpanKind::Percent || k == SpanKind::Number || k == SpanKind::NumberWord ||
         k == SpanKind::LexicalQuantifier;
}

inline bool is_deadline_kind(SpanKind k) {
  return k == SpanKind::YearDeadline || k == SpanKind::RelativeDeadline ||
         k == SpanKind::PlanningCycleDeadline;
}

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  SpanKind kind = SpanKind::Number;
  std::string surface;

  bool operator==(const Span&) const = default;
};

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string lower;
  bool word = false;  // alphanumeric run (as opposed to punctuation)
};

// Concatenating each token with the gap text preceding it reconstructs the
// input exactly; gaps only ever contain whitespace.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  // U+2010..U+2015 (hyphens and dashes) are punctuation, not word bytes.
  auto is_dash = [&](std::size_t k) {
    return k + 2 < n + 0 && byte(k) == 0xE2 && byte(k + 1) == 0x80 && byte(k + 2) >= 0x90 &&
           byte(k + 2) <= 0x95;
  };
  auto is_nbsp = [&](std::size_t k) { return k + 1 < n && byte(k) == 0xC2 && byte(k + 1) == 0xA0; };
  while (i < n) {
    if (is_ascii_space(byte(i))) {
      ++i;
      continue;
    }
    if (is_nbsp(i)) {
      i += 2;
      continue;
    }
    if (is_dash(i)) {
      out.push_back({i, i + 3, "-", false});
      i += 3;
      continue;
    }
    if (is_word_byte(byte(i))) {
      std::size_t j = i;
      while (j < n && is_word_byte(byte(j)) && !is_dash(j) && !is_nbsp(j)) ++j;
      out.push_back({i, j, to_lower_ascii(text.substr(i, j - i)), true});
      i = j;
      continue;
    }
    out.push_back({i, i + 1, std::string(1, static_cast<char>(std::tolower(byte(i)))), false});
    ++i;
  }
  return out;
}

// Closed list of spelled-out numbers recognised as quantities.
inline const std::set<std::string, std::less<>>& number_words() {
  static const std::set<std::string, std::less<>> kWords = {
      "one",     "two",      "three",    "four",     "five",    "six",      "seven",
      "eight",   "nine",     "ten",      "eleven",   "twelve",  "thirteen", "fourteen",
      "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty",  "hundred",
      "thousand", "million", "billion"};
  return kWords;
}

inline constexpr int kMinYear = 1900;
inline constexpr int kMaxYear = 2100;

// ---------------------------------------------------------------------------
// Phrase lexicons.

class PhraseMatcher {
 public:
  struct Match {
    std::size_t first_token = 0;
    std::size_t last_token = 0;  // inclusive
  };

  PhraseMatcher() = default;
  explicit PhraseMatcher(const std::vector<std::string>& entries) {
    for (const auto& e : entries) add(e);
  }

  void add(std::string_view entry) {
    Pattern p;
    for (auto& element : split_string(trim(entry), ' ')) {
      if (element.empty()) continue;
      std::set<std::string, std::less<>> alts;
      for (auto& a : split_string(element, '|'))
        if (!a.empty()) alts.insert(to_lower_ascii(a));
      p.push_back(std::move(alts));
    }
    if (!p.empty()) patterns_.push_back(std::move(p));
    entries_.emplace_back(trim(entry));
  }

  const std::vector<std::string>& entries() const { return entries_; }
  bool empty() const { return patterns_.empty(); }

  // Greedy left-to-right, longest match first, non-overlapping.
  std::vector<Match> find_all(const std::vector<Token>& tokens) const {
    std::vector<Match> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t best_end = SIZE_MAX;
      for (const auto& p : patterns_) {
        std::size_t end = 0;
        if (match_at(p, tokens, i, end) && (best_end == SIZE_MAX || end > best_end)) best_end = end;
      }
      if (best_end != SIZE_MAX) {
        out.push_back({i, best_end});
        i = best_end + 1;
      } else {
        ++i;
      }
    }
    return out;
  }

  bool operator==(const PhraseMatcher& o) const { return patterns_ == o.patterns_; }

 private:
  using Pattern = std::vector<std::set<std::string, std::less<>>>;

  static bool is_numeric_token(const Token& t) {
    return (t.word && !t.lower.empty() && is_ascii_digit(static_cast<unsigned char>(t.lower[0]))) ||
           number_words().count(t.lower);
  }

  static bool element_matches(const std::set<std::string, std::less<>>& alts, const Token& t) {
    if (alts.count(t.lower)) return true;
    return alts.count("<num>") && is_numeric_token(t);
  }

  static bool match_at(const Pattern& p, const std::vector<Token>& tokens, std::size_t start,
                       std::size_t& end) {
    std::size_t i = start;
    for (std::size_t e = 0; e < p.size(); ++e) {
      if (i >= tokens.size()) return false;
      if (!element_matches(p[e], tokens[i])) {
        // One hyphen may join consecutive elements ("net-zero").
        if (e > 0 && tokens[i].lower == "-" && i + 1 < tokens.size() && element_matches(p[e], tokens[i + 1]))
          ++i;
        else
          return false;
      }
      end = i;
      ++i;
    }
    return true;
  }

  std::vector<Pattern> patterns_;
  std::vector<std::string> entries_;
};

namespace builtin {

inline constexpr std::string_view kQuantifierWords = R"(all
every
double|doubled|doubling|doubles
halve|halved|halving|halves
eradicate|eradicated|eradicating|eradication
no
none
independent of
)";

inline constexpr std::string_view kAimCues = R"(aim|aims|aimed|aiming
target|targets|targeted|targeting
commit|commits|committed|committing|commitment|commitments
endeavour|endeavor|endeavours|endeavors
will
shall
pledge|pledges|pledged
plan|plans|planned|planning to
objective|objectives
goal|goals
)";

inline constexpr std::string_view kAntiAimCues = R"(anticipated
expected
projected
estimated
forecast|forecasts|forecasted
can be seen
assume|assumes|assumed|assuming
will be <num>
)";

inline constexpr std::string_view kConditionalCues = R"(if we receive|receives
conditional on|upon
subject to
provided that
)";

inline constexpr std::string_view kNetZeroPhrases = R"(net zero
carbon neutral|neutrality
ghg neutral|neutrality
greenhouse gas|gases neutral|neutrality
carbon negative
net negative
carbon free
zero|0 emission|emissions
zero|0 carbon
fully decarbonise|decarbonize|decarbonised|decarbonized|decarbonising|decarbonizing
climate neutral|neutrality
climate positive
100 %|percent emission|emissions reduction|reductions
100 per cent emission|emissions reduction|reductions
)";

inline constexpr std::string_view kPlanningCycles = R"(planning cycle|cycles
fyp|fyps
five|5 year|years plan|plans
)";

inline constexpr std::string_view kGlobalScopeCues = "";

inline std::vector<std::string> lines(std::string_view text) {
  std::vector<std::string> out;
  for (auto& l : split_string(text, '\n'))
    if (!trim(l).empty() && trim(l).front() != '#') out.emplace_back(trim(l));
  return out;
}

}  // namespace builtin

// The amendable vocabularies. Defaults are compiled in and mirrored by the
// files under data/lexicons/.
struct Lexicons {
  PhraseMatcher quantifier_words;
  PhraseMatcher aim_cues;
  PhraseMatcher anti_aim_cues;
  PhraseMatcher conditional_cues;
  PhraseMatcher netzero_phrases;
  PhraseMatcher planning_cycles;
  // Extension point for "national, not global" scope checks; empty by default.
  PhraseMatcher global_scope_cues;

  static const Lexicons& builtin() {
    static const Lexicons kBuiltin = [] {
      Lexicons l;
      l.quantifier_words = PhraseMatcher(builtin::lines(builtin::kQuantifierWords));
      l.aim_cues = PhraseMatcher(builtin::lines(builtin::kAimCues));
      l.anti_aim_cues = PhraseMatcher(builtin::lines(builtin::kAntiAimCues));
      l.conditional_cues = PhraseMatcher(builtin::lines(builtin::kConditionalCues));
      l.netzero_phrases = PhraseMatcher(builtin::lines(builtin::kNetZeroPhrases));
      l.planning_cycles = PhraseMatcher(builtin::lines(builtin::kPlanningCycles));
      l.global_scope_cues = PhraseMatcher(builtin::lines(builtin::kGlobalScopeCues));
      return l;
    }();
    return kBuiltin;
  }

  // Reads <dir>/{quantifier_words,aim_cues,anti_aim_cues,conditional_cues,
  // netzero_phrases,planning_cycles,global_scope_cues}.txt. A missing file
  // keeps the compiled-in default.
  static Lexicons load(const std::filesystem::path& dir) {
    Lexicons l = builtin();
    auto maybe = [&](const char* name, PhraseMatcher& slot) {
      auto path = dir / name;
      if (std::filesystem::exists(path)) slot = PhraseMatcher(read_lines(path));
    };
    maybe("quantifier_words.txt", l.quantifier_words);
    maybe("aim_cues.txt", l.aim_cues);
    maybe("anti_aim_cues.txt", l.anti_aim_cues);
    maybe("conditional_cues.txt", l.conditional_cues);
    maybe("netzero_phrases.txt", l.netzero_phrases);
    maybe("planning_cycles.txt", l.planning_cycles);
    maybe("global_scope_cues.txt", l.global_scope_cues);
    return l;
  }

  bool operator==(const Lexicons&) const = default;
};

// ---------------------------------------------------------------------------
// Numerals.

struct Numeral {
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // inclusive
  std::size_t start = 0;
  std::size_t end = 0;
  bool plain_integer = false;  // digits only, no separators or decimals
  long long value = 0;         // integer part
};

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return is_ascii_digit(static_cast<unsigned char>(c)); });
}

inline bool adjacent(const std::vector<Token>& t, std::size_t a, std::size_t b) { return t[a].end == t[b].start; }

inline std::size_t digit_prefix(std::string_view s) {
  std::size_t k = 0;
  while (k < s.size() && is_ascii_digit(static_cast<unsigned char>(s[k]))) ++k;
  return k;
}

inline bool is_ordinal_suffix(std::string_view s) { return s == "st" || s == "nd" || s == "rd" || s == "th"; }

}  // namespace detail

// Digit-led word tokens, merged with thousands separators ("25,000") and
// decimals ("4.6"). Ordinals ("12th") and unit-less alphanumerics that do not
// start with a digit ("CO2eq") are not numerals.
inline std::vector<Numeral> find_numerals(std::string_view text, const std::vector<Token>& tokens) {
  (void)text;
  std::vector<Numeral> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (!t.word) continue;
    std::size_t digits = detail::digit_prefix(t.lower);
    if (digits == 0) continue;
    // A numeral directly after "<digits>." or "<digits>," was consumed below.
    Numeral n;
    n.first_token = n.last_token = i;
    n.start = t.start;
    std::string_view suffix = std::string_view(t.lower).substr(digits);
    if (detail::is_ordinal_suffix(suffix)) continue;
    std::string int_part = t.lower.substr(0, digits);
    n.end = t.start + digits;
    n.plain_integer = suffix.empty();
    if (suffix.empty()) {
      std::size_t j = i;
      // Thousands groups: ",ddd" with no spaces.
      while (j + 2 < tokens.size() && tokens[j + 1].lower == "," && detail::adjacent(tokens, j, j + 1) &&
             detail::adjacent(tokens, j + 1, j + 2) && tokens[j + 2].lower.size() == 3 &&
             detail::all_digits(tokens[j + 2].lower) && digits <= 3) {
        int_part += tokens[j + 2].lower;
        j += 2;
        n.plain_integer = false;
      }
      // Decimal part.
      if (j + 2 < tokens.size() && tokens[j + 1].lower == "." && detail::adjacent(tokens, j, j + 1) &&
          detail::adjacent(tokens, j + 1, j + 2) && detail::all_digits(tokens[j + 2].lower)) {
        j += 2;
        n.plain_integer = false;
      }
      n.last_token = j;
      n.end = tokens[j].end;
      i = j;
    }
    n.value = int_part.size() > 15 ? (long long)1e15 : std::stoll(int_part);
    out.push_back(n);
  }
  return out;
}

inline bool is_year(const Numeral& n, std::string_view text) {
  return n.plain_integer && n.end - n.start == 4 && n.value >= kMinYear && n.value <= kMaxYear &&
         n.end == n.start + 4 && detail::all_digits(text.substr(n.start, 4));
}

// All year mentions (1900..2100), including both ends of ranges.
struct YearMention {
  std::size_t start = 0;
  std::size_t end = 0;
  int year = 0;
};

// ---------------------------------------------------------------------------
// Detectors.

namespace detail {

inline Span make_span(std::string_view text, std::size_t start, std::size_t end, SpanKind kind) {
  return Span{start, end, kind, std::string(text.substr(start, end - start))};
}

inline void add_phrase_spans(std::string_view text, const std::vector<Token>& tokens, const PhraseMatcher& m,
                             SpanKind kind, std::vector<Span>& out) {
  for (auto match : m.find_all(tokens))
    out.push_back(make_span(text, tokens[match.first_token].start, tokens[match.last_token].end, kind));
}

// Index of the numeral's percent marker token, or SIZE_MAX.
inline std::size_t percent_marker(const std::vector<Token>& tokens, std::size_t last) {
  std::size_t k = last + 1;
  if (k >= tokens.size()) return SIZE_MAX;
  if (tokens[k].lower == "%" || tokens[k].lower == "percent") return k;
  if (tokens[k].lower == "per" && k + 1 < tokens.size() && tokens[k + 1].lower == "cent") return k + 1;
  return SIZE_MAX;
}

struct QuantityScan {
  std::vector<Span> spans;
  std::vector<Numeral> years;  // plain 4-digit year numerals, not percents
};

inline QuantityScan scan_quantities(std::string_view text, const std::vector<Token>& tokens,
                                    const Lexicons& lex) {
  QuantityScan scan;
  std::vector<bool> used(tokens.size(), false);
  for (const Numeral& n : find_numerals(text, tokens)) {
    std::size_t pm = percent_marker(tokens, n.last_token);
    if (pm != SIZE_MAX) {
      scan.spans.push_back(make_span(text, n.start, tokens[pm].end, SpanKind::Percent));
      for (std::size_t k = n.first_token; k <= pm; ++k) used[k] = true;
      continue;
    }
    for (std::size_t k = n.first_token; k <= n.last_token; ++k) used[k] = true;
    if (is_year(n, text)) {
      scan.years.push_back(n);
      continue;
    }
    scan.spans.push_back(make_span(text, n.start, n.end, SpanKind::Number));
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (used[i] || !tokens[i].word || !number_words().count(tokens[i].lower)) continue;
    std::size_t pm = percent_marker(tokens, i);
    if (pm != SIZE_MAX) {
      scan.spans.push_back(make_span(text, tokens[i].start, tokens[pm].end, SpanKind::Percent));
      for (std::size_t k = i; k <= pm; ++k) used[k] = true;
    } else {
      scan.spans.push_back(make_span(text, tokens[i].start, tokens[i].end, SpanKind::NumberWord));
    }
  }
  add_phrase_spans(text, tokens, lex.quantifier_words, SpanKind::LexicalQuantifier, scan.spans);
  return scan;
}

inline bool is_range_connector(const std::vector<Token>& tokens, std::size_t k) {
  return k < tokens.size() && (tokens[k].lower == "-" || tokens[k].lower == "to" || tokens[k].lower == "/");
}

}  // namespace detail

inline std::vector<Span> detect_quantifiers(std::string_view text, const Lexicons& lex = Lexicons::builtin()) {
  auto tokens = tokenize(text);
  auto spans = detail::scan_quantities(text, tokens, lex).spans;
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  return spans;
}

inline std::vector<Span> detect_deadlines(std::string_view text, const Lexicons& lex = Lexicons::builtin()) {
  auto tokens = tokenize(text);
  auto scan = detail::scan_quantities(text, tokens, lex);
  std::vector<Span> out;

  // (a) Years. A range "2019-2020" yields one span for its end year.
  const auto& years = scan.years;
  for (std::size_t y = 0; y < years.size(); ++y) {
    const Numeral& n = years[y];
    bool is_range_start = y + 1 < years.size() && years[y + 1].first_token == n.last_token + 2 &&
                          detail::is_range_connector(tokens, n.last_token + 1);
    if (is_range_start) continue;
    std::size_t start = n.start;
    bool is_range_end = y > 0 && years[y - 1].last_token + 2 == n.first_token &&
                        detail::is_range_connector(tokens, n.first_token - 1);
    if (!is_range_end && n.first_token > 0) {
      const std::string& prev = tokens[n.first_token - 1].lower;
      if (prev == "by" || prev == "until" || prev == "before") start = tokens[n.first_token - 1].start;
    }
    out.push_back(detail::make_span(text, start, n.end, SpanKind::YearDeadline));
  }

  // (b) Relative deadlines: "in/within/over [the] [next] N years",
  // "by the end of [the] [next] N years".
  auto is_count = [&](std::size_t k) {
    if (k >= tokens.size() || !tokens[k].word) return false;
    return detail::all_digits(tokens[k].lower) || number_words().count(tokens[k].lower) > 0;
  };
  auto is_years = [&](std::size_t k) {
    return k < tokens.size() && (tokens[k].lower == "years" || tokens[k].lower == "year");
  };
  auto match_tail = [&](std::size_t k) -> std::size_t {  // [the] [next] N years
    if (k < tokens.size() && tokens[k].lower == "the") ++k;
    if (k < tokens.size() && (tokens[k].lower == "next" || tokens[k].lower == "coming" || tokens[k].lower == "following")) ++k;
    if (!is_count(k)) return SIZE_MAX;
    ++k;
    if (k < tokens.size() && tokens[k].lower == "-") ++k;
    return is_years(k) ? k : SIZE_MAX;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& w = tokens[i].lower;
    std::size_t last = SIZE_MAX;
    if (w == "in" || w == "within" || w == "over") {
      last = match_tail(i + 1);
    } else if (w == "by" && i + 3 < tokens.size() && tokens[i + 1].lower == "the" && tokens[i + 2].lower == "end" &&
               tokens[i + 3].lower == "of") {
      last = match_tail(i + 4);
    }
    if (last != SIZE_MAX) {
      out.push_back(detail::make_span(text, tokens[i].start, tokens[last].end, SpanKind::RelativeDeadline));
      i = last;
    }
  }

  // (c) Planning cycles.
  detail::add_phrase_spans(text, tokens, lex.planning_cycles, SpanKind::PlanningCycleDeadline, out);
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) { return a.start < b.start; });
  return out;
}

inline std::vector<Span> detect_netzero_phrases(std::string_view text, const Lexicons& lex = Lexicons::builtin()) {
  std::vector<Span> out;
  detail::add_phrase_spans(text, tokenize(text), lex.netzero_phrases, SpanKind::NetZeroPhrase, out);
  return out;
}

inline std::vector<Span> detect_cues(std::string_view text, const Lexicons& lex = Lexicons::builtin()) {
  auto tokens = tokenize(text);
  std::vector<Span> out;
  detail::add_phrase_spans(text, tokens, lex.aim_cues, SpanKind::AimCue, out);
  detail::add_phrase_spans(text, tokens, lex.anti_aim_cues, SpanKind::AntiAimCue, out);
  detail::add_phrase_spans(text, tokens, lex.conditional_cues, SpanKind::ConditionalCue, out);
  detail::add_phrase_spans(text, tokens, lex.global_scope_cues, SpanKind::GlobalScopeCue, out);
  std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) {
    return std::tie(a.start, a.kind) < std::tie(b.start, b.kind);
  });
  return out;
}

// Every year mention in the text, including range starts.
inline std::vector<YearMention> find_years(std::string_view text) {
  auto tokens = tokenize(text);
  std::vector<YearMention> out;
  for (const Numeral& n : find_numerals(text, tokens)) {
    if (!is_year(n, text) || detail::percent_marker(tokens, n.last_token) != SIZE_MAX) continue;
    out.push_back({n.start, n.end, static_cast<int>(n.value)});
  }
  return out;
}

// ---------------------------------------------------------------------------

struct RuleAnalysis {
  std::vector<Span> spans;
  bool quantifiable = false;
  bool has_deadline = false;
  bool has_netzero_phrase = false;
  int aim_score = 0;  // aim cues minus anti-aim cues
  bool conditional = false;
  bool global_scope = false;

  std::size_t count(SpanKind k) const {
    return static_cast<std::size_t>(std::count_if(spans.begin(), spans.end(), [&](const Span& s) { return s.kind == k; }));
  }
  bool has(SpanKind k) const { return count(k) > 0; }
};

inline RuleAnalysis analyze(std::string_view text, const Lexicons& lex = Lexicons::builtin()) {
  RuleAnalysis r;
  auto append = [&](std::vector<Span> v) { r.spans.insert(r.spans.end(), v.begin(), v.end()); };
  append(detect_quantifiers(text, lex));
  append(detect_deadlines(text, lex));
  append(detect_netzero_phrases(text, lex));
  append(detect_cues(text, lex));
  std::sort(r.spans.begin(), r.spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.start, a.end, a.kind) < std::tie(b.start, b.end, b.kind);
  });
  int aims = 0, anti = 0;
  for (const auto& s : r.spans) {
    r.quantifiable |= is_quantity_kind(s.kind);
    r.has_deadline |= is_deadline_kind(s.kind);
    r.has_netzero_phrase |= s.kind == SpanKind::NetZeroPhrase;
    r.conditional |= s.kind == SpanKind::ConditionalCue;
    r.global_scope |= s.kind == SpanKind::GlobalScopeCue;
    aims += s.kind == SpanKind::AimCue;
    anti += s.kind == SpanKind::AntiAimCue;
  }
  r.aim_score = aims - anti;
  return r;
}

}  // namespace target_radar::rules
