// ensalign/ensemble.hpp

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

// Ensemble aggregation of boundary estimates.
//
// Each of E ensemble members yields an estimate of every boundary.  The
// reported boundary is the sample median.  The interval [X_(r), X_(E+1-r)]
// between order statistics covers the population median of a continuous
// distribution with probability 1 - 2 P(Bin(E, 1/2) <= r-1), whatever the
// distribution; E = 10, r = 2 gives 0.978515625.

#ifndef ENSALIGN_ENSEMBLE_HPP
#define ENSALIGN_ENSEMBLE_HPP

#include <numeric>
#include <string>
#include <vector>

#include "ensalign/aligner.hpp"
#include "ensalign/common.hpp"

namespace ensalign {

struct BoundarySample {
  std::size_t boundary_index = 0;   // 1-based
  std::vector<double> estimates_s;  // one per member, member order
};

struct EnsembleAlignment {
  std::vector<std::string> labels;
  std::vector<BoundarySample> samples;
  std::vector<double> median_s;
  bool has_ci = false;
  std::vector<double> ci_lo_s;
  std::vector<double> ci_hi_s;
  std::size_t rank = 2;
  double coverage = 0.0;
  std::string source_id;
  /// 1-based j with median_s[j-1] <= median_s[j-2].
  std::vector<std::size_t> monotonicity_violations;
  std::vector<std::string> warnings;

  std::size_t size() const { return labels.size(); }
  std::size_t members() const {
    return samples.empty() ? 0 : samples.front().estimates_s.size();
  }
};

/// Median of an unsorted sample; the mean of the two middle values when the
/// size is even.
inline double Median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyInput, "median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline double Mean(const std::vector<double> &v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyInput, "mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Coverage probability of [X_(r), X_(E+1-r)] for the median.
inline double CoverageOf(std::size_t members, std::size_t rank) {
  if (rank < 1 || 2 * rank > members)
    throw Error(ErrorCode::kRankInfeasible,
                "rank " + std::to_string(rank) + " needs at least " +
                    std::to_string(2 * std::max<std::size_t>(rank, 1)) +
                    " members, have " + std::to_string(members));
  double tail = 0.0;
  for (std::size_t i = 0; i < rank; ++i) tail += detail::Choose(members, i);
  return 1.0 - 2.0 * tail / std::ldexp(1.0, static_cast<int>(members));
}

inline EnsembleAlignment Aggregate(const std::vector<Alignment> &members,
                                   std::size_t rank = 2) {
  if (members.empty())
    throw Error(ErrorCode::kEmptyInput, "ensemble has no member alignments");
  if (rank < 1) throw Error(ErrorCode::kConfig, "rank must be >= 1");
  const Alignment &first = members.front();
  for (std::size_t e = 1; e < members.size(); ++e) {
    if (members[e].labels != first.labels)
      throw Error(ErrorCode::kEnsembleMismatch,
                  "member " + std::to_string(e) + " aligned a different label sequence (" +
                      std::to_string(members[e].size()) + " vs " +
                      std::to_string(first.size()) + " labels)");
    if (members[e].end_times_s.size() != first.labels.size())
      throw Error(ErrorCode::kEnsembleMismatch,
                  "member " + std::to_string(e) + " has a malformed boundary vector");
  }

  const std::size_t E = members.size(), m = first.size();
  EnsembleAlignment out;
  out.labels = first.labels;
  out.source_id = first.source_id;
  out.rank = rank;
  out.has_ci = E >= 2 * rank;
  if (out.has_ci) {
    out.coverage = CoverageOf(E, rank);
  } else {
    out.warnings.push_back("rank " + std::to_string(rank) + " needs >= " +
                           std::to_string(2 * rank) + " members but the ensemble has " +
                           std::to_string(E) + "; confidence intervals suppressed");
  }
  for (std::size_t j = 0; j < m; ++j) {
    BoundarySample s{j + 1, {}};
    s.estimates_s.reserve(E);
    for (const auto &a : members) {
      const double t = a.end_times_s[j];
      if (!std::isfinite(t) || t < 0.0)
        throw Error(ErrorCode::kNonFinite, "boundary " + std::to_string(j + 1) +
                                               " has an invalid estimate");
      s.estimates_s.push_back(t);
    }
    std::vector<double> sorted = s.estimates_s;
    std::sort(sorted.begin(), sorted.end());
    out.median_s.push_back(Median(sorted));
    if (out.has_ci) {
      out.ci_lo_s.push_back(sorted[rank - 1]);
      out.ci_hi_s.push_back(sorted[E - rank]);
    }
    out.samples.push_back(std::move(s));
  }
  for (std::size_t j = 1; j < m; ++j)
    if (!(out.median_s[j] > out.median_s[j - 1]))
      out.monotonicity_violations.push_back(j + 1);
  if (!out.monotonicity_violations.empty()) {
    std::string w = "median boundaries not strictly increasing at";
    for (std::size_t j : out.monotonicity_violations) w += " " + std::to_string(j);
    out.warnings.push_back(w);
  }
  return out;
}

struct RobustnessReport {
  std::size_t corrupted = 0;
  double clean_median = 0.0;
  double corrupted_median = 0.0;
  /// [X_(ceil(E/2)-c), X_(floor(E/2)+1+c)] of the clean sample.
  double bound_lo = 0.0;
  double bound_hi = 0.0;
  /// Sharper bound: the median of the corrupted sample computed from the
  /// clean order statistics shifted c ranks down / up.
  double tight_lo = 0.0;
  double tight_hi = 0.0;
  bool within_bound = false;
  bool within_tight = false;
  double clean_mean = 0.0;
  double corrupted_mean = 0.0;

  double median_shift() const { return std::abs(corrupted_median - clean_median); }
  double mean_shift() const { return std::abs(corrupted_mean - clean_mean); }
};

/// Compares a clean sample against a copy in which some entries were replaced
/// arbitrarily, and checks that the median stayed within the order-statistic
/// envelope that the number of replacements allows.
inline RobustnessReport RobustnessCheck(const std::vector<double> &clean,
                                        const std::vector<double> &corrupted) {
  if (clean.size() != corrupted.size() || clean.empty())
    throw Error(ErrorCode::kShapeMismatch, "samples must be non-empty and equal length");
  const std::size_t E = clean.size();
  RobustnessReport r;
  for (std::size_t i = 0; i < E; ++i) r.corrupted += clean[i] != corrupted[i];
  const std::size_t c = r.corrupted;
  if (c > (E - 1) / 2)
    throw Error(ErrorCode::kRankInfeasible,
                std::to_string(c) + " replacements exceed the median's breakdown point");
  std::vector<double> x = clean;
  std::sort(x.begin(), x.end());
  auto order = [&](std::size_t rank1) { return x[rank1 - 1]; };  // 1-based
  r.clean_median = Median(clean);
  r.corrupted_median = Median(corrupted);
  r.clean_mean = Mean(clean);
  r.corrupted_mean = Mean(corrupted);
  r.bound_lo = order((E + 1) / 2 - c);
  r.bound_hi = order(E / 2 + 1 + c);
  if (E % 2) {
    r.tight_lo = order((E + 1) / 2 - c);
    r.tight_hi = order((E + 1) / 2 + c);
  } else {
    r.tight_lo = 0.5 * (order(E / 2 - c) + order(E / 2 + 1 - c));
    r.tight_hi = 0.5 * (order(E / 2 + c) + order(E / 2 + 1 + c));
  }
  r.within_bound = r.corrupted_median >= r.bound_lo && r.corrupted_median <= r.bound_hi;
  r.within_tight = r.corrupted_median >= r.tight_lo && r.corrupted_median <= r.tight_hi;
  return r;
}

/// One row per boundary: source_id, boundary_index, label, median_s, ci_lo_s,
/// ci_hi_s, width_s.  CI columns are empty when intervals were suppressed.
inline std::string CiTableToCsv(const EnsembleAlignment &ea) {
  std::string out = "source_id,boundary_index,label,median_s,ci_lo_s,ci_hi_s,width_s\n";
  for (std::size_t j = 0; j < ea.size(); ++j) {
    out += detail::CsvField(ea.source_id) + "," + std::to_string(j + 1) + "," +
           detail::CsvField(LabelClass(ea.labels[j])) + "," +
           detail::FormatDouble(ea.median_s[j], 16) + ",";
    if (ea.has_ci) {
      out += detail::FormatDouble(ea.ci_lo_s[j], 16) + "," +
             detail::FormatDouble(ea.ci_hi_s[j], 16) + "," +
             detail::FormatDouble(ea.ci_hi_s[j] - ea.ci_lo_s[j], 16);
    } else {
      out += ",,";
    }
    out += '\n';
  }
  return out;
}

struct CiRow {
  std::string source_id;
  std::size_t boundary_index = 0;
  std::string label;
  double median_s = 0.0;
  std::optional<double> ci_lo_s, ci_hi_s;

  std::optional<double> width_s() const {
    if (!ci_lo_s || !ci_hi_s) return std::nullopt;
    return *ci_hi_s - *ci_lo_s;
  }
};

inline std::vector<CiRow> ReadCiTableCsv(std::string_view text) {
  const auto lines = detail::SplitLines(detail::StripBom(text));
  if (lines.empty() ||
      lines[0] != "source_id,boundary_index,label,median_s,ci_lo_s,ci_hi_s,width_s")
    throw Error(ErrorCode::kParse, "CI table: line 1: unexpected header");
  std::vector<CiRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = "CI table line " + std::to_string(i + 1);
    auto f = detail::ParseCsvRecord(lines[i]);
    if (f.size() != 7) throw Error(ErrorCode::kParse, where + ": expected 7 fields");
    CiRow r;
    r.source_id = f[0];
    r.boundary_index =
        static_cast<std::size_t>(detail::ParseDouble(f[1], ErrorCode::kParse, where));
    r.label = f[2];
    r.median_s = detail::ParseDouble(f[3], ErrorCode::kParse, where);
    if (!f[4].empty()) r.ci_lo_s = detail::ParseDouble(f[4], ErrorCode::kParse, where);
    if (!f[5].empty()) r.ci_hi_s = detail::ParseDouble(f[5], ErrorCode::kParse, where);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ensalign

#endif  // ENSALIGN_ENSEMBLE_HPP
