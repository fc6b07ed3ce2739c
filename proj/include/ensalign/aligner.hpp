// ensalign/aligner.hpp

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

// Forced alignment of a label sequence to a frame posterior matrix.
//
// Among all frame labelings that collapse to the label sequence when runs of
// identical symbols are merged, the aligner returns the one with the largest
// summed log probability.  Each label occupies at least one frame, the first
// label starts at frame 0 and the last one ends at frame n-1.  A boundary is
// the last frame of a label's run.
//
// Ties between equally scoring labelings are resolved towards the latest
// boundaries: walking forward in time, the current label is extended whenever
// doing so is still optimal.  Equivalently, the winner has the
// lexicographically largest end-frame vector among all optimal labelings.

#ifndef ENSALIGN_ALIGNER_HPP
#define ENSALIGN_ALIGNER_HPP

#include <string>
#include <vector>

#include "ensalign/acoustic.hpp"
#include "ensalign/common.hpp"
#include "ensalign/lexicon.hpp"

namespace ensalign {

struct Alignment {
  std::vector<std::string> labels;
  std::vector<std::size_t> end_frames;  // 0-based last frame of each label
  std::vector<double> end_times_s;      // (end_frame + 1) * frame_advance
  double total_log_prob = 0.0;
  double frame_advance_s = 0.010;
  std::string source_id;

  std::size_t size() const { return labels.size(); }
};

/// Maps each label (position markers stripped) to its class column and
/// rejects sequences that cannot be collapsed unambiguously.
inline std::vector<std::size_t> ResolveLabels(const std::vector<std::string> &labels,
                                              const ClassInventory &inventory) {
  if (labels.empty()) throw Error(ErrorCode::kInfeasible, "empty label sequence");
  std::vector<std::size_t> cls(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j > 0 && labels[j] == labels[j - 1])
      throw Error(ErrorCode::kRepeatedLabel,
                  "labels " + std::to_string(j) + " and " + std::to_string(j + 1) +
                      " are both '" + labels[j] +
                      "'; insert a position marker (see DisambiguateRepeats)");
    auto c = inventory.Find(LabelClass(labels[j]));
    if (!c)
      throw Error(ErrorCode::kInventory, "label '" + labels[j] + "' (position " +
                                             std::to_string(j + 1) +
                                             ") not in the class inventory");
    cls[j] = *c;
  }
  return cls;
}

/// Summed log probability of the labeling described by `end_frames`, added
/// in frame order.
inline double PathScore(const LogProbMatrix &p, const std::vector<std::size_t> &cls,
                        const std::vector<std::size_t> &end_frames) {
  double total = 0.0;
  std::size_t j = 0;
  for (std::size_t t = 0; t < p.num_frames(); ++t) {
    while (t > end_frames[j]) ++j;
    total += p.values(t, cls[j]);
  }
  return total;
}

namespace detail {

inline Alignment MakeAlignment(const LogProbMatrix &p,
                               const std::vector<std::string> &labels,
                               const std::vector<std::size_t> &cls,
                               std::vector<std::size_t> end_frames,
                               std::string source_id) {
  Alignment a;
  a.labels = labels;
  a.frame_advance_s = p.frame_advance_s;
  a.end_times_s.reserve(end_frames.size());
  for (std::size_t f : end_frames)
    a.end_times_s.push_back(static_cast<double>(f + 1) * p.frame_advance_s);
  a.total_log_prob = PathScore(p, cls, end_frames);
  a.end_frames = std::move(end_frames);
  a.source_id = std::move(source_id);
  return a;
}

inline void CheckFeasible(std::size_t n, std::size_t m) {
  if (n < m)
    throw Error(ErrorCode::kInfeasible, "more labels than frames (" +
                                            std::to_string(m) + " labels, " +
                                            std::to_string(n) + " frames)");
}

}  // namespace detail

/// Dynamic-programming alignment, O(n m) time and memory.
inline Alignment Align(const LogProbMatrix &p, const std::vector<std::string> &labels,
                       std::string source_id = {}) {
  const auto cls = ResolveLabels(labels, p.inventory);
  const std::size_t n = p.num_frames(), m = labels.size();
  detail::CheckFeasible(n, m);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // best[t][j]: best score of frames t..n-1 given frame t carries label j and
  // the labeling runs through label m-1 at frame n-1.
  Matrix best(n, m, kNegInf);
  best(n - 1, m - 1) = p.values(n - 1, cls[m - 1]);
  for (std::size_t t = n - 1; t-- > 0;) {
    // Label j can occupy frame t only if j <= t and the m-1-j later labels
    // fit into the n-1-t remaining frames.
    const std::size_t lo = (m > n - t) ? m - (n - t) : 0;
    const std::size_t hi = std::min(m - 1, t);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double stay = best(t + 1, j);
      const double advance = j + 1 < m ? best(t + 1, j + 1) : kNegInf;
      best(t, j) = p.values(t, cls[j]) + std::max(stay, advance);
    }
  }

  std::vector<std::size_t> end_frames(m);
  std::size_t j = 0;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const double stay = best(t + 1, j);
    const double advance = j + 1 < m ? best(t + 1, j + 1) : kNegInf;
    if (!(stay >= advance)) end_frames[j++] = t;
  }
  end_frames[m - 1] = n - 1;
  assert(j == m - 1);
  return detail::MakeAlignment(p, labels, cls, std::move(end_frames),
                               std::move(source_id));
}

inline constexpr double kMaxEnumeratedPaths = 1e6;

/// Every labeling of n frames that collapses to m labels, as end-frame
/// vectors in lexicographic order.  There are C(n-1, m-1) of them.
inline std::vector<std::vector<std::size_t>> EnumeratePaths(std::size_t n,
                                                            std::size_t m) {
  if (m < 1 || m > n)
    throw Error(ErrorCode::kInfeasible, "need 1 <= m <= n (m=" + std::to_string(m) +
                                            ", n=" + std::to_string(n) + ")");
  const double count = detail::Choose(n - 1, m - 1);
  if (count > kMaxEnumeratedPaths)
    throw Error(ErrorCode::kTooLarge, detail::FormatDouble(count, 6) +
                                          " paths exceed the enumeration limit");
  std::vector<std::vector<std::size_t>> out;
  out.reserve(static_cast<std::size_t>(count));
  // Choose m-1 interior end frames from {0 .. n-2}.
  std::vector<std::size_t> ends(m);
  for (std::size_t i = 0; i + 1 < m; ++i) ends[i] = i;
  ends[m - 1] = n - 1;
  while (true) {
    out.push_back(ends);
    if (m == 1) break;
    std::size_t i = m - 1;
    bool advanced = false;
    while (i-- > 0) {
      // Position i may go up to n-2 - (m-2-i).
      if (ends[i] < n - m + i) {
        ++ends[i];
        for (std::size_t q = i + 1; q + 1 < m; ++q) ends[q] = ends[q - 1] + 1;
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return out;
}

/// Exhaustive reference implementation of Align with the same tie rule.
inline Alignment AlignOracle(const LogProbMatrix &p,
                             const std::vector<std::string> &labels,
                             std::string source_id = {}) {
  const auto cls = ResolveLabels(labels, p.inventory);
  const std::size_t n = p.num_frames(), m = labels.size();
  detail::CheckFeasible(n, m);
  const auto paths = EnumeratePaths(n, m);
  const std::vector<std::size_t> *winner = nullptr;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto &path : paths) {
    const double s = PathScore(p, cls, path);
    if (winner == nullptr || s > best || (s == best && path > *winner)) {
      best = s;
      winner = &path;
    }
  }
  return detail::MakeAlignment(p, labels, cls, *winner, std::move(source_id));
}

/// Collapsed frame labeling for display, e.g. "llaas".
inline std::vector<std::string> FrameLabels(const Alignment &a) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t t = start; t <= a.end_frames[j]; ++t) out.push_back(a.labels[j]);
    start = a.end_frames[j] + 1;
  }
  return out;
}

inline std::string AlignmentToCsv(const Alignment &a) {
  std::string out = "source_id,index,label,end_time_s,end_frame\n";
  for (std::size_t j = 0; j < a.size(); ++j) {
    out += detail::CsvField(a.source_id) + "," + std::to_string(j + 1) + "," +
           detail::CsvField(a.labels[j]) + "," +
           detail::FormatDouble(a.end_times_s[j], 16) + "," +
           std::to_string(a.end_frames[j]) + "\n";
  }
  out += "# total_log_prob=" + detail::FormatDouble(a.total_log_prob, 17) + "\n";
  return out;
}

/// Reads AlignmentToCsv output back (label, end time, end frame, total).
inline Alignment AlignmentFromCsv(std::string_view text) {
  const auto lines = detail::SplitLines(detail::StripBom(text));
  if (lines.empty() || lines[0] != "source_id,index,label,end_time_s,end_frame")
    throw Error(ErrorCode::kParse, "alignment CSV: line 1: unexpected header");
  Alignment a;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = "alignment CSV line " + std::to_string(i + 1);
    if (lines[i].empty()) continue;
    if (lines[i].starts_with("# total_log_prob=")) {
      a.total_log_prob = detail::ParseDouble(
          std::string(lines[i].substr(17)), ErrorCode::kParse, where);
      continue;
    }
    auto f = detail::ParseCsvRecord(lines[i]);
    if (f.size() != 5) throw Error(ErrorCode::kParse, where + ": expected 5 fields");
    a.source_id = f[0];
    a.labels.push_back(f[2]);
    a.end_times_s.push_back(detail::ParseDouble(f[3], ErrorCode::kParse, where));
    a.end_frames.push_back(
        static_cast<std::size_t>(detail::ParseDouble(f[4], ErrorCode::kParse, where)));
  }
  for (std::size_t j = 1; j < a.end_times_s.size(); ++j)
    if (!(a.end_times_s[j] > a.end_times_s[j - 1]))
      throw Error(ErrorCode::kNonMonotone, "alignment CSV end times not increasing");
  if (!a.end_frames.empty())
    a.frame_advance_s = a.end_times_s[0] / static_cast<double>(a.end_frames[0] + 1);
  return a;
}

}  // namespace ensalign

#endif  // ENSALIGN_ALIGNER_HPP
