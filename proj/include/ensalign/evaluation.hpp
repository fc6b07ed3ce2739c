// ensalign/evaluation.hpp

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

// Boundary-error evaluation.
//
// Paired evaluation compares boundary i of the reference with boundary i of
// the hypothesis and requires equal counts.  DTW evaluation warps the two
// end-time sequences onto each other, divides the path cost by the number of
// hypothesis boundaries k, and pools that average k times so that pooled
// statistics stay per-boundary rather than per-file.

#ifndef ENSALIGN_EVALUATION_HPP
#define ENSALIGN_EVALUATION_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ensalign/common.hpp"
#include "ensalign/ensemble.hpp"

namespace ensalign {

struct BoundarySeq {
  std::vector<double> end_times_s;
  std::string source_id;
};

inline void ValidateBoundaries(const BoundarySeq &s) {
  if (s.end_times_s.empty())
    throw Error(ErrorCode::kEmptyInput, "no boundaries in '" + s.source_id + "'");
  for (std::size_t i = 1; i < s.end_times_s.size(); ++i)
    if (!(s.end_times_s[i] > s.end_times_s[i - 1]))
      throw Error(ErrorCode::kNonMonotone, "boundaries of '" + s.source_id +
                                               "' not strictly increasing at " +
                                               std::to_string(i + 1));
}

inline std::vector<double> PairedError(const BoundarySeq &ref, const BoundarySeq &hyp) {
  if (ref.end_times_s.size() != hyp.end_times_s.size())
    throw Error(ErrorCode::kCountMismatch,
                "'" + ref.source_id + "': reference has " +
                    std::to_string(ref.end_times_s.size()) + " boundaries, hypothesis " +
                    std::to_string(hyp.end_times_s.size()) + "; use DTW evaluation");
  std::vector<double> out(ref.end_times_s.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::abs(ref.end_times_s[i] - hyp.end_times_s[i]);
  return out;
}

struct DtwResult {
  double total_cost = 0.0;
  std::size_t k = 0;         // hypothesis boundary count
  double normalized = 0.0;   // total_cost / k
  std::vector<double> pooled;  // `normalized`, k times
};

/// Unweighted symmetric DTW, steps (1,0), (0,1), (1,1), each adding the local
/// cost |ref_i - hyp_j|; D(0,0) = |ref_0 - hyp_0|.
inline double DtwCost(std::span<const double> ref, std::span<const double> hyp) {
  if (ref.empty() || hyp.empty())
    throw Error(ErrorCode::kEmptyInput, "DTW needs non-empty sequences");
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<double> prev(H), cur(H);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < H; ++j) {
      const double local = std::abs(ref[i] - hyp[j]);
      double best;
      if (i == 0 && j == 0) best = 0.0;
      else if (i == 0) best = cur[j - 1];
      else if (j == 0) best = prev[j];
      else best = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = local + best;
    }
    std::swap(prev, cur);
  }
  return prev[H - 1];
}

inline DtwResult DtwError(const BoundarySeq &ref, const BoundarySeq &hyp) {
  ValidateBoundaries(ref);
  ValidateBoundaries(hyp);
  DtwResult r;
  r.total_cost = DtwCost(ref.end_times_s, hyp.end_times_s);
  r.k = hyp.end_times_s.size();
  r.normalized = r.total_cost / static_cast<double>(r.k);
  r.pooled.assign(r.k, r.normalized);
  return r;
}

enum class EvalMethod { kAuto, kPaired, kDtw };

inline EvalMethod ParseEvalMethod(std::string_view s) {
  if (s == "auto") return EvalMethod::kAuto;
  if (s == "paired") return EvalMethod::kPaired;
  if (s == "dtw") return EvalMethod::kDtw;
  throw Error(ErrorCode::kConfig, "unknown evaluation method '" + std::string(s) + "'");
}

/// Per-file absolute errors (seconds).  The adjusted vector drops the final
/// boundary, which sits at the end of the file by construction.
struct FileErrors {
  std::string source_id;
  EvalMethod method = EvalMethod::kPaired;
  std::vector<double> errors;
  std::vector<bool> is_final;
  /// When set, replaces "errors minus final entries" as the adjusted vector
  /// (DTW files re-run the warping without final boundaries).
  std::optional<std::vector<double>> adjusted_override;

  std::vector<double> adjusted() const {
    if (adjusted_override) return *adjusted_override;
    std::vector<double> out;
    for (std::size_t i = 0; i < errors.size(); ++i)
      if (i >= is_final.size() || !is_final[i]) out.push_back(errors[i]);
    return out;
  }
};

/// Builds the per-file error record.  kAuto picks paired evaluation when the
/// boundary counts agree and DTW otherwise.
inline FileErrors EvaluateFile(const BoundarySeq &ref, const BoundarySeq &hyp,
                               EvalMethod method = EvalMethod::kAuto) {
  ValidateBoundaries(ref);
  ValidateBoundaries(hyp);
  if (method == EvalMethod::kAuto)
    method = ref.end_times_s.size() == hyp.end_times_s.size() ? EvalMethod::kPaired
                                                              : EvalMethod::kDtw;
  FileErrors f;
  f.source_id = ref.source_id.empty() ? hyp.source_id : ref.source_id;
  f.method = method;
  if (method == EvalMethod::kPaired) {
    f.errors = PairedError(ref, hyp);
    f.is_final.assign(f.errors.size(), false);
    f.is_final.back() = true;
    return f;
  }
  const auto full = DtwError(ref, hyp);
  f.errors = full.pooled;
  f.is_final.assign(f.errors.size(), false);
  std::vector<double> adj;
  if (ref.end_times_s.size() > 1 && hyp.end_times_s.size() > 1) {
    BoundarySeq r2{{ref.end_times_s.begin(), ref.end_times_s.end() - 1}, ref.source_id};
    BoundarySeq h2{{hyp.end_times_s.begin(), hyp.end_times_s.end() - 1}, hyp.source_id};
    adj = DtwError(r2, h2).pooled;
  }
  f.adjusted_override = std::move(adj);
  return f;
}

struct ErrorReport {
  std::vector<double> pooled_abs_err_s;
  std::vector<double> adj_pooled_abs_err_s;
  std::optional<double> mean_abs_err_s;
  std::optional<double> median_abs_err_s;
  std::optional<double> adj_mean_abs_err_s;
  std::optional<double> adj_median_abs_err_s;
  std::size_t file_count = 0;
  std::size_t boundary_count = 0;
  /// Files that contribute nothing once final boundaries are removed.
  std::vector<std::string> flagged;
};

/// Pools every file's errors into one vector and summarizes it, with and
/// without final boundaries.  Statistics of an empty pool are absent.
inline ErrorReport Adjusted(const std::vector<FileErrors> &files) {
  ErrorReport r;
  r.file_count = files.size();
  for (const auto &f : files) {
    r.pooled_abs_err_s.insert(r.pooled_abs_err_s.end(), f.errors.begin(), f.errors.end());
    const auto adj = f.adjusted();
    if (adj.empty()) r.flagged.push_back(f.source_id);
    r.adj_pooled_abs_err_s.insert(r.adj_pooled_abs_err_s.end(), adj.begin(), adj.end());
  }
  r.boundary_count = r.pooled_abs_err_s.size();
  if (!r.pooled_abs_err_s.empty()) {
    r.mean_abs_err_s = Mean(r.pooled_abs_err_s);
    r.median_abs_err_s = Median(r.pooled_abs_err_s);
  }
  if (!r.adj_pooled_abs_err_s.empty()) {
    r.adj_mean_abs_err_s = Mean(r.adj_pooled_abs_err_s);
    r.adj_median_abs_err_s = Median(r.adj_pooled_abs_err_s);
  }
  return r;
}

/// Drops items whose label sequence has a single segment; their only boundary
/// is the end of the file.  `notice` receives one message per dropped item.
template <class Item, class SizeFn>
std::vector<Item> ExcludeSingleSegment(
    std::vector<Item> items, SizeFn segment_count,
    const std::function<void(const Item &)> &notice = {}) {
  std::vector<Item> kept;
  for (auto &it : items) {
    if (segment_count(it) == 1) {
      if (notice) notice(it);
      continue;
    }
    kept.push_back(std::move(it));
  }
  return kept;
}

struct WidthReport {
  std::optional<double> mean_ms;
  std::optional<double> median_ms;
  std::size_t count = 0;
};

inline WidthReport CiWidthReport(const std::vector<double> &widths_s) {
  WidthReport r;
  r.count = widths_s.size();
  if (widths_s.empty()) return r;
  std::vector<double> ms(widths_s.size());
  for (std::size_t i = 0; i < ms.size(); ++i) ms[i] = widths_s[i] * 1000.0;
  r.mean_ms = Mean(ms);
  r.median_ms = Median(ms);
  return r;
}

inline WidthReport CiWidthReport(const std::vector<EnsembleAlignment> &ensembles) {
  std::vector<double> widths;
  for (const auto &ea : ensembles) {
    if (!ea.has_ci) continue;
    for (std::size_t j = 0; j < ea.size(); ++j)
      widths.push_back(ea.ci_hi_s[j] - ea.ci_lo_s[j]);
  }
  return CiWidthReport(widths);
}

/// One row of the boundary-error table (all values in milliseconds).
struct ErrorTableRow {
  std::string data_split;
  std::string transcription;
  std::string eval_method;
  std::optional<double> mean_ms, median_ms, adj_mean_ms, adj_median_ms;
  std::optional<std::size_t> file_count;  // absent for rows copied from elsewhere
  std::optional<std::size_t> boundary_count;
  std::string dtw_k;  // normalization used by DTW rows
};

inline ErrorTableRow MakeErrorTableRow(const ErrorReport &r, std::string split,
                                       std::string transcription, std::string method) {
  auto ms = [](std::optional<double> s) -> std::optional<double> {
    if (!s) return std::nullopt;
    return *s * 1000.0;
  };
  ErrorTableRow row{std::move(split),      std::move(transcription),  std::move(method),
                    ms(r.mean_abs_err_s),  ms(r.median_abs_err_s),    ms(r.adj_mean_abs_err_s),
                    ms(r.adj_median_abs_err_s), r.file_count, r.boundary_count, ""};
  return row;
}

namespace detail {
inline std::string Ms(const std::optional<double> &v) {
  return v ? FormatFixed(*v, 2) : std::string();
}
inline std::string Count(const std::optional<std::size_t> &v) {
  return v ? std::to_string(*v) : std::string();
}
}  // namespace detail

inline constexpr std::string_view kErrorTableHeader =
    "data,transcription,eval_method,mean_abs_err_ms,median_abs_err_ms,"
    "adj_mean_abs_err_ms,adj_median_abs_err_ms,file_count,boundary_count,dtw_k";

inline std::string ErrorTableToCsv(const std::vector<ErrorTableRow> &rows) {
  std::string out(kErrorTableHeader);
  out += '\n';
  for (const auto &r : rows) {
    out += detail::CsvField(r.data_split) + "," + detail::CsvField(r.transcription) + "," +
           detail::CsvField(r.eval_method) + "," + detail::Ms(r.mean_ms) + "," +
           detail::Ms(r.median_ms) + "," + detail::Ms(r.adj_mean_ms) + "," +
           detail::Ms(r.adj_median_ms) + "," + detail::Count(r.file_count) + "," +
           detail::Count(r.boundary_count) + "," + detail::CsvField(r.dtw_k) + "\n";
  }
  return out;
}

struct WidthTableRow {
  std::string data_split;
  std::string transcription;
  std::optional<double> mean_width_ms, median_width_ms;
  std::optional<std::size_t> boundary_count;
};

inline constexpr std::string_view kWidthTableHeader =
    "data,transcription,mean_width_ms,median_width_ms,boundary_count";

inline std::string WidthTableToCsv(const std::vector<WidthTableRow> &rows) {
  std::string out(kWidthTableHeader);
  out += '\n';
  for (const auto &r : rows)
    out += detail::CsvField(r.data_split) + "," + detail::CsvField(r.transcription) + "," +
           detail::Ms(r.mean_width_ms) + "," + detail::Ms(r.median_width_ms) + "," +
           detail::Count(r.boundary_count) + "\n";
  return out;
}

}  // namespace ensalign

#endif  // ENSALIGN_EVALUATION_HPP
