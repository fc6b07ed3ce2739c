// ensalign/textgrid.hpp

// Copyright 2026 The ensalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Praat TextGrid model, reader (long and short text formats) and writer
// (long format), plus rendering of ensemble alignments.

#ifndef ENSALIGN_TEXTGRID_HPP
#define ENSALIGN_TEXTGRID_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ensalign/aligner.hpp"
#include "ensalign/common.hpp"
#include "ensalign/ensemble.hpp"

namespace ensalign {

struct Interval {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
  friend bool operator==(const Interval &, const Interval &) = default;
};

struct IntervalTier {
  std::string name;
  double xmin_s = 0.0;
  double xmax_s = 0.0;
  std::vector<Interval> intervals;
  friend bool operator==(const IntervalTier &, const IntervalTier &) = default;
};

struct Point {
  double time_s = 0.0;
  std::string text;
  friend bool operator==(const Point &, const Point &) = default;
};

struct PointTier {
  std::string name;
  double xmin_s = 0.0;
  double xmax_s = 0.0;
  std::vector<Point> points;
  friend bool operator==(const PointTier &, const PointTier &) = default;
};

using Tier = std::variant<IntervalTier, PointTier>;

inline const std::string &TierName(const Tier &t) {
  return std::visit([](const auto &x) -> const std::string & { return x.name; }, t);
}

struct TextGrid {
  double xmin_s = 0.0;
  double xmax_s = 0.0;
  std::vector<Tier> tiers;

  const Tier *Find(std::string_view name) const {
    for (const auto &t : tiers)
      if (TierName(t) == name) return &t;
    return nullptr;
  }
  const IntervalTier *FindIntervalTier(std::string_view name) const {
    const Tier *t = Find(name);
    return t ? std::get_if<IntervalTier>(t) : nullptr;
  }
  const PointTier *FindPointTier(std::string_view name) const {
    const Tier *t = Find(name);
    return t ? std::get_if<PointTier>(t) : nullptr;
  }

  friend bool operator==(const TextGrid &, const TextGrid &) = default;
};

/// Throws kInvalidTextGrid describing the first violated invariant.
inline void Validate(const TextGrid &tg) {
  auto fail = [](const std::string &msg) { throw Error(ErrorCode::kInvalidTextGrid, msg); };
  if (!(tg.xmin_s < tg.xmax_s)) fail("xmin must be < xmax");
  for (std::size_t ti = 0; ti < tg.tiers.size(); ++ti) {
    const std::string where = "tier " + std::to_string(ti + 1);
    std::visit(
        [&](const auto &tier) {
          if (tier.xmin_s < tg.xmin_s || tier.xmax_s > tg.xmax_s ||
              !(tier.xmin_s < tier.xmax_s))
            fail(where + " '" + tier.name + "' range outside the grid");
          using T = std::decay_t<decltype(tier)>;
          if constexpr (std::is_same_v<T, IntervalTier>) {
            if (tier.intervals.empty()) fail(where + " has no intervals");
            double prev = tier.xmin_s;
            for (std::size_t i = 0; i < tier.intervals.size(); ++i) {
              const auto &iv = tier.intervals[i];
              if (iv.start_s != prev)
                fail(where + " interval " + std::to_string(i + 1) +
                     " does not start where the previous one ends");
              if (!(iv.end_s > iv.start_s))
                fail(where + " interval " + std::to_string(i + 1) + " is empty or reversed");
              prev = iv.end_s;
            }
            if (prev != tier.xmax_s) fail(where + " intervals stop before the tier end");
          } else {
            for (std::size_t i = 0; i < tier.points.size(); ++i) {
              const double t = tier.points[i].time_s;
              if (t < tier.xmin_s || t > tier.xmax_s)
                fail(where + " point " + std::to_string(i + 1) + " outside the tier");
              if (i > 0 && !(t > tier.points[i - 1].time_s))
                fail(where + " point " + std::to_string(i + 1) +
                     " is not later than its predecessor");
            }
          }
        },
        tg.tiers[ti]);
  }
}

namespace detail {

inline std::string PraatString(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string PraatNumber(double v) { return FormatDouble(v, 16); }

}  // namespace detail

/// Serializes in Praat's long text format.
inline std::string WriteTextGrid(const TextGrid &tg) {
  Validate(tg);
  using detail::PraatNumber;
  using detail::PraatString;
  std::string o;
  o += "File type = \"ooTextFile\"\n";
  o += "Object class = \"TextGrid\"\n\n";
  o += "xmin = " + PraatNumber(tg.xmin_s) + " \n";
  o += "xmax = " + PraatNumber(tg.xmax_s) + " \n";
  if (tg.tiers.empty()) {
    o += "tiers? <absent> \n";
    return o;
  }
  o += "tiers? <exists> \n";
  o += "size = " + std::to_string(tg.tiers.size()) + " \n";
  o += "item []: \n";
  for (std::size_t ti = 0; ti < tg.tiers.size(); ++ti) {
    o += "    item [" + std::to_string(ti + 1) + "]:\n";
    std::visit(
        [&](const auto &tier) {
          using T = std::decay_t<decltype(tier)>;
          constexpr bool kIntervals = std::is_same_v<T, IntervalTier>;
          o += std::string("        class = ") +
               (kIntervals ? "\"IntervalTier\"" : "\"TextTier\"") + " \n";
          o += "        name = " + PraatString(tier.name) + " \n";
          o += "        xmin = " + PraatNumber(tier.xmin_s) + " \n";
          o += "        xmax = " + PraatNumber(tier.xmax_s) + " \n";
          if constexpr (kIntervals) {
            o += "        intervals: size = " + std::to_string(tier.intervals.size()) + " \n";
            for (std::size_t i = 0; i < tier.intervals.size(); ++i) {
              const auto &iv = tier.intervals[i];
              o += "        intervals [" + std::to_string(i + 1) + "]:\n";
              o += "            xmin = " + PraatNumber(iv.start_s) + " \n";
              o += "            xmax = " + PraatNumber(iv.end_s) + " \n";
              o += "            text = " + PraatString(iv.text) + " \n";
            }
          } else {
            o += "        points: size = " + std::to_string(tier.points.size()) + " \n";
            for (std::size_t i = 0; i < tier.points.size(); ++i) {
              const auto &p = tier.points[i];
              o += "        points [" + std::to_string(i + 1) + "]:\n";
              o += "            number = " + PraatNumber(p.time_s) + " \n";
              o += "            mark = " + PraatString(p.text) + " \n";
            }
          }
        },
        tg.tiers[ti]);
  }
  return o;
}

namespace detail {

// Praat text files are a stream of values (numbers, quoted strings, <flags>)
// interleaved with decorative labels such as "xmin =" or "item [1]:".  The
// tokenizer keeps the values and drops the decoration, which makes the long
// and short formats read identically.
class PraatTokens {
 public:
  enum class Kind { kNumber, kString, kFlag };
  struct Token {
    Kind kind;
    std::string text;
    double number = 0.0;
    std::size_t line = 0;
  };

  explicit PraatTokens(std::string_view text) {
    text = StripBom(text);
    std::size_t line = 1, i = 0;
    const std::size_t n = text.size();
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (i < n) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
        ++i;
      } else if (is_space(c) || c == '=' || c == ':' || c == '?') {
        ++i;
      } else if (c == '!') {
        while (i < n && text[i] != '\n') ++i;
      } else if (c == '"') {
        const std::size_t start_line = line;
        std::string s;
        ++i;
        bool closed = false;
        while (i < n) {
          if (text[i] == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              s += '"';
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (text[i] == '\n') ++line;
          s += text[i++];
        }
        if (!closed)
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(start_line) + ": unterminated string");
        tokens_.push_back({Kind::kString, std::move(s), 0.0, start_line});
      } else if (c == '[') {
        while (i < n && text[i] != ']' && text[i] != '\n') ++i;
        if (i < n && text[i] == ']') ++i;
      } else if (c == '<') {
        std::size_t j = i;
        while (j < n && text[j] != '>' && text[j] != '\n') ++j;
        if (j >= n || text[j] != '>')
          throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": unterminated flag");
        tokens_.push_back({Kind::kFlag, std::string(text.substr(i, j - i + 1)), 0.0, line});
        i = j + 1;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
                 c == '.') {
        std::size_t j = i;
        while (j < n && !is_space(text[j])) ++j;
        std::string word(text.substr(i, j - i));
        char *end = nullptr;
        const double v = std::strtod(word.c_str(), &end);
        if (end != word.c_str() + word.size() || !std::isfinite(v))
          throw Error(ErrorCode::kParse,
                      "line " + std::to_string(line) + ": bad number '" + word + "'");
        tokens_.push_back({Kind::kNumber, std::move(word), v, line});
        i = j;
      } else {
        // Decorative identifier ("xmin", "intervals", "File", ...).
        while (i < n && !is_space(text[i]) && text[i] != '=' && text[i] != '"' &&
               text[i] != '[' && text[i] != '<')
          ++i;
      }
    }
    last_line_ = line;
  }

  const Token &Next(Kind want, const char *what) {
    if (pos_ >= tokens_.size())
      throw Error(ErrorCode::kParse, "line " + std::to_string(last_line_) +
                                         ": file ends while expecting " + what);
    const Token &t = tokens_[pos_];
    if (t.kind != want)
      throw Error(ErrorCode::kParse, "line " + std::to_string(t.line) + ": expected " +
                                         what + ", found '" + t.text + "'");
    ++pos_;
    return t;
  }
  double Number(const char *what) { return Next(Kind::kNumber, what).number; }
  std::string String(const char *what) { return Next(Kind::kString, what).text; }
  std::size_t Count(const char *what) {
    const Token &t = Next(Kind::kNumber, what);
    if (t.number < 0 || t.number != std::floor(t.number))
      throw Error(ErrorCode::kParse, "line " + std::to_string(t.line) + ": " + what +
                                         " must be a non-negative integer");
    return static_cast<std::size_t>(t.number);
  }
  bool AtEnd() const { return pos_ >= tokens_.size(); }
  std::size_t line() const {
    return pos_ < tokens_.size() ? tokens_[pos_].line
                                 : (pos_ > 0 ? tokens_[pos_ - 1].line : last_line_);
  }
  std::size_t previous_line() const { return pos_ > 0 ? tokens_[pos_ - 1].line : 1; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t last_line_ = 1;
};

}  // namespace detail

/// Parses long- or short-format text TextGrids.
inline TextGrid ReadTextGrid(std::string_view content) {
  detail::PraatTokens tok(content);
  auto parse_error = [](std::size_t line, const std::string &msg) {
    return Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
  };
  if (tok.String("file type") != "ooTextFile")
    throw parse_error(tok.previous_line(), "not an ooTextFile");
  if (tok.String("object class") != "TextGrid")
    throw parse_error(tok.previous_line(), "object class is not TextGrid");
  TextGrid tg;
  tg.xmin_s = tok.Number("grid xmin");
  tg.xmax_s = tok.Number("grid xmax");
  if (!(tg.xmin_s < tg.xmax_s)) throw parse_error(tok.previous_line(), "xmin >= xmax");
  const std::string flag = tok.Next(detail::PraatTokens::Kind::kFlag, "<exists>").text;
  if (flag == "<absent>") {
    if (!tok.AtEnd()) throw parse_error(tok.line(), "data after <absent>");
    return tg;
  }
  if (flag != "<exists>") throw parse_error(tok.previous_line(), "unknown flag " + flag);
  const std::size_t size = tok.Count("tier count");
  for (std::size_t ti = 0; ti < size; ++ti) {
    const std::size_t tier_line = tok.line();
    const std::string cls = tok.String("tier class");
    const std::string name = tok.String("tier name");
    const double xmin = tok.Number("tier xmin");
    const double xmax = tok.Number("tier xmax");
    if (xmin < tg.xmin_s || xmax > tg.xmax_s || !(xmin < xmax))
      throw parse_error(tier_line, "tier '" + name + "' range outside the grid");
    const std::size_t count = tok.Count("element count");
    if (cls == "IntervalTier") {
      IntervalTier tier{name, xmin, xmax, {}};
      double prev = xmin;
      for (std::size_t i = 0; i < count; ++i) {
        Interval iv;
        iv.start_s = tok.Number("interval xmin");
        const std::size_t line = tok.previous_line();
        iv.end_s = tok.Number("interval xmax");
        iv.text = tok.String("interval text");
        if (iv.start_s != prev)
          throw parse_error(line, "interval " + std::to_string(i + 1) + " of tier '" +
                                      name + "' does not continue the previous one");
        if (!(iv.end_s > iv.start_s))
          throw parse_error(line, "interval " + std::to_string(i + 1) + " of tier '" +
                                      name + "' has non-increasing times");
        prev = iv.end_s;
        tier.intervals.push_back(std::move(iv));
      }
      if (count == 0 || prev != xmax)
        throw parse_error(tok.previous_line(),
                          "intervals of tier '" + name + "' do not cover the tier");
      tg.tiers.emplace_back(std::move(tier));
    } else if (cls == "TextTier") {
      PointTier tier{name, xmin, xmax, {}};
      for (std::size_t i = 0; i < count; ++i) {
        Point p;
        p.time_s = tok.Number("point time");
        const std::size_t line = tok.previous_line();
        p.text = tok.String("point mark");
        if (p.time_s < xmin || p.time_s > xmax)
          throw parse_error(line, "point outside tier '" + name + "'");
        if (!tier.points.empty() && !(p.time_s > tier.points.back().time_s))
          throw parse_error(line, "point times of tier '" + name + "' not increasing");
        tier.points.push_back(std::move(p));
      }
      tg.tiers.emplace_back(std::move(tier));
    } else {
      throw parse_error(tier_line, "unknown tier class '" + cls + "'");
    }
  }
  if (!tok.AtEnd())
    throw parse_error(tok.line(), "more tiers than the declared " + std::to_string(size));
  return tg;
}

inline constexpr double kPointNudgeS = 1e-6;

namespace detail {

inline IntervalTier TierFromEnds(std::string name, const std::vector<double> &ends,
                                 const std::vector<std::string> &labels, double xmin,
                                 double xmax) {
  IntervalTier tier{std::move(name), xmin, xmax, {}};
  double prev = xmin;
  std::vector<std::size_t> bad;
  for (std::size_t j = 0; j < ends.size(); ++j) {
    if (!(ends[j] > prev) || ends[j] > xmax) bad.push_back(j + 1);
    prev = std::max(prev, ends[j]);
  }
  if (!bad.empty()) {
    std::string msg = "tier '" + tier.name + "': boundaries not increasing inside [" +
                      FormatDouble(xmin, 9) + ", " + FormatDouble(xmax, 9) + "] at";
    for (std::size_t j : bad) msg += " " + std::to_string(j);
    throw Error(ErrorCode::kNonMonotone, msg);
  }
  prev = xmin;
  for (std::size_t j = 0; j < ends.size(); ++j) {
    tier.intervals.push_back({prev, ends[j], std::string(LabelClass(labels[j]))});
    prev = ends[j];
  }
  if (prev < xmax) tier.intervals.push_back({prev, xmax, ""});
  return tier;
}

}  // namespace detail

/// Point tier holding the interval edges: "<label>-lo" and "<label>-hi" for
/// every boundary, in time order.  Points that would coincide are pushed
/// apart by one microsecond.
inline PointTier CiPointTier(const EnsembleAlignment &ea, double xmin, double xmax,
                             std::string name = "ci") {
  struct Edge {
    double t;
    std::string text;
  };
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < ea.size(); ++j) {
    const std::string lab(LabelClass(ea.labels[j]));
    edges.push_back({ea.ci_lo_s[j], lab + "-lo"});
    edges.push_back({ea.ci_hi_s[j], lab + "-hi"});
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge &a, const Edge &b) { return a.t < b.t; });
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i].t > edges[i - 1].t)) edges[i].t = edges[i - 1].t + kPointNudgeS;
  // A collision at the file end cannot move forward; shift earlier points back.
  if (!edges.empty() && edges.back().t > xmax) {
    edges.back().t = xmax;
    for (std::size_t i = edges.size() - 1; i-- > 0;)
      if (!(edges[i].t < edges[i + 1].t)) edges[i].t = edges[i + 1].t - kPointNudgeS;
  }
  PointTier tier{std::move(name), xmin, xmax, {}};
  for (auto &e : edges) tier.points.push_back({e.t, std::move(e.text)});
  return tier;
}

/// Builds the TextGrid for one aligned file: an optional "words" tier, the
/// "phones" tier at the ensemble medians, and the "ci" point tier when the
/// ensemble produced intervals.
inline TextGrid Render(const EnsembleAlignment &ea, const Alignment *words, double xmin,
                       double xmax) {
  if (!ea.monotonicity_violations.empty()) {
    std::string msg = "median boundaries not strictly increasing at";
    for (std::size_t j : ea.monotonicity_violations) msg += " " + std::to_string(j);
    throw Error(ErrorCode::kNonMonotone, msg);
  }
  TextGrid tg{xmin, xmax, {}};
  if (words != nullptr)
    tg.tiers.emplace_back(
        detail::TierFromEnds("words", words->end_times_s, words->labels, xmin, xmax));
  tg.tiers.emplace_back(detail::TierFromEnds("phones", ea.median_s, ea.labels, xmin, xmax));
  if (ea.has_ci) tg.tiers.emplace_back(CiPointTier(ea, xmin, xmax));
  Validate(tg);
  return tg;
}

/// Segment end times and labels of an interval tier, skipping intervals with
/// empty (or whitespace-only) text.
struct TierSegments {
  std::vector<std::string> labels;
  std::vector<double> end_times_s;
};

inline TierSegments SegmentsOf(const IntervalTier &tier) {
  TierSegments s;
  for (const auto &iv : tier.intervals) {
    if (detail::SplitWhitespace(iv.text).empty()) continue;
    s.labels.push_back(iv.text);
    s.end_times_s.push_back(iv.end_s);
  }
  return s;
}

}  // namespace ensalign

#endif  // ENSALIGN_TEXTGRID_HPP
