// tests/test_aligner.cpp

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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.hpp"

namespace ensalign {
namespace {

using testing::FromProbs;

std::string Collapse(const std::vector<std::size_t> &ends, const std::string &labels) {
  std::string s;
  std::size_t start = 0;
  for (std::size_t j = 0; j < ends.size(); ++j) {
    s.append(ends[j] + 1 - start, labels[j]);
    start = ends[j] + 1;
  }
  return s;
}

TEST(Align, EqualLengthsForceTheOnlyPath) {
  std::mt19937_64 rng(1);
  const LogProbMatrix p = testing::RandomLogProbs(rng, 2, 3);
  const Alignment a = Align(p, {"b", "a"});
  EXPECT_EQ(a.end_frames, std::vector<std::size_t>({0, 1}));
  EXPECT_DOUBLE_EQ(a.total_log_prob, p.values(0, 1) + p.values(1, 0));
  EXPECT_EQ(AlignOracle(p, {"b", "a"}).end_frames, a.end_frames);
}

TEST(Align, ThreeFramesPreferAAB) {
  const LogProbMatrix p = FromProbs({{0.9, 0.1}, {0.6, 0.4}, {0.1, 0.9}}, {"A", "B"});
  const Alignment a = Align(p, {"A", "B"});
  EXPECT_EQ(a.end_frames, std::vector<std::size_t>({1, 2}));
  EXPECT_NEAR(a.total_log_prob, std::log(0.9 * 0.6 * 0.9), 1e-12);
  EXPECT_EQ(FrameLabels(a), std::vector<std::string>({"A", "A", "B"}));
}

TEST(Align, EndTimesFollowFrameAdvance) {
  const LogProbMatrix p = FromProbs({{0.9, 0.1}, {0.6, 0.4}, {0.1, 0.9}}, {"A", "B"}, 0.010);
  const Alignment a = Align(p, {"A", "B"});
  EXPECT_DOUBLE_EQ(a.end_times_s[0], 0.020);
  EXPECT_DOUBLE_EQ(a.end_times_s[1], 0.030);
}

TEST(Align, TieGoesToTheLaterTransition) {
  // AAB and ABB score identically; the boundary is placed as late as possible.
  const LogProbMatrix p = FromProbs({{0.75, 0.25}, {0.5, 0.5}, {0.25, 0.75}}, {"A", "B"});
  EXPECT_EQ(Align(p, {"A", "B"}).end_frames, std::vector<std::size_t>({1, 2}));
  EXPECT_EQ(AlignOracle(p, {"A", "B"}).end_frames, std::vector<std::size_t>({1, 2}));
}

TEST(Align, FlatMatrixPutsEveryBoundaryLate) {
  const LogProbMatrix p = FromProbs(std::vector<std::vector<double>>(6, {0.5, 0.5}), {"a", "b"});
  const Alignment a = Align(p, {"a", "b", "a"});
  EXPECT_EQ(a.end_frames, std::vector<std::size_t>({3, 4, 5}));
  EXPECT_EQ(AlignOracle(p, {"a", "b", "a"}).end_frames, a.end_frames);
}

TEST(Align, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
    const std::size_t m = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, n))(rng);
    const LogProbMatrix p = testing::RandomLogProbs(rng, n, k);
    const auto labels = testing::RandomLabels(rng, m, k);
    const Alignment a = Align(p, labels), o = AlignOracle(p, labels);
    ASSERT_EQ(a.end_frames, o.end_frames) << "trial " << trial;
    ASSERT_NEAR(a.total_log_prob, o.total_log_prob, 1e-9 * std::abs(o.total_log_prob));
  }
}

TEST(Align, BeatsEveryHandBuiltPath) {
  std::mt19937_64 rng(3);
  const LogProbMatrix p = testing::RandomLogProbs(rng, 12, 3);
  const std::vector<std::string> labels = {"a", "c", "b", "a"};
  const auto cls = ResolveLabels(labels, p.inventory);
  const double best = Align(p, labels).total_log_prob;
  for (const auto &path : EnumeratePaths(12, 4))
    EXPECT_GE(best + 1e-12, PathScore(p, cls, path));
}

TEST(Align, RowShiftMovesScoreNotBoundaries) {
  // Values on a 1/8 grid keep every sum exact.
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 9, k = 3;
    LogProbMatrix p{Matrix(n, k), ClassInventory(testing::ClassNames(k)), 0.01};
    for (double &v : p.values.data())
      v = -static_cast<double>(std::uniform_int_distribution<int>(0, 40)(rng)) / 8.0;
    const auto labels = testing::RandomLabels(rng, 4, k);
    const Alignment a = Align(p, labels);
    LogProbMatrix q = p;
    const std::size_t row = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const double shift = static_cast<double>(std::uniform_int_distribution<int>(-16, 16)(rng)) / 4.0;
    for (std::size_t c = 0; c < k; ++c) q.values(row, c) += shift;
    const Alignment b = Align(q, labels);
    EXPECT_EQ(b.end_frames, a.end_frames);
    EXPECT_EQ(b.total_log_prob, a.total_log_prob + shift);
  }
}

TEST(Align, SingleLabelTakesEveryFrame) {
  std::mt19937_64 rng(5);
  const LogProbMatrix p = testing::RandomLogProbs(rng, 4, 2);
  EXPECT_EQ(Align(p, {"b"}).end_frames, std::vector<std::size_t>({3}));
}

TEST(Align, PositionMarkersShareTheirClassColumn) {
  const LogProbMatrix p =
      FromProbs({{0.9, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.9, 0.1}}, {"s", "t"});
  const Alignment a = Align(p, {"s", "s#2", "t", "s"});
  EXPECT_EQ(a.end_frames, std::vector<std::size_t>({0, 1, 2, 3}));
  EXPECT_EQ(a.labels[1], "s#2");
}

TEST(Align, Errors) {
  const LogProbMatrix p = FromProbs({{0.5, 0.5}, {0.5, 0.5}}, {"a", "b"});
  auto code_of = [&](const std::vector<std::string> &labels) {
    try {
      Align(p, labels);
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code_of({"a", "b", "a"}), ErrorCode::kInfeasible);
  EXPECT_EQ(code_of({"a", "a"}), ErrorCode::kRepeatedLabel);
  EXPECT_EQ(code_of({"a", "zz"}), ErrorCode::kInventory);
  EXPECT_EQ(code_of({}), ErrorCode::kInfeasible);
}

TEST(Align, ImpossibleFramesUseLogZero) {
  const LogProbMatrix p = FromProbs({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {"a", "b"});
  const Alignment a = Align(p, {"a", "b"});
  EXPECT_EQ(a.end_frames, std::vector<std::size_t>({1, 2}));
  EXPECT_DOUBLE_EQ(a.total_log_prob, 0.0);
}

TEST(EnumeratePaths, FiveFramesThreeLabels) {
  const auto paths = EnumeratePaths(5, 3);
  ASSERT_EQ(paths.size(), 6u);
  std::set<std::string> words;
  for (const auto &p : paths) words.insert(Collapse(p, "las"));
  EXPECT_EQ(words.size(), 6u);
  EXPECT_TRUE(words.contains("laaas"));
  EXPECT_TRUE(words.contains("llaas"));
  EXPECT_TRUE(words.contains("lasss"));
  EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end()));
}

TEST(EnumeratePaths, CountsAreBinomial) {
  EXPECT_EQ(EnumeratePaths(4, 4).size(), 1u);
  EXPECT_EQ(EnumeratePaths(4, 1).size(), 1u);
  EXPECT_EQ(EnumeratePaths(4, 1)[0], std::vector<std::size_t>({3}));
  for (std::size_t n = 1; n <= 9; ++n)
    for (std::size_t m = 1; m <= n; ++m)
      EXPECT_EQ(static_cast<double>(EnumeratePaths(n, m).size()), detail::Choose(n - 1, m - 1));
}

TEST(EnumeratePaths, GuardAgainstHugeCounts) {
  try {
    EnumeratePaths(60, 20);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
  EXPECT_THROW(EnumeratePaths(2, 3), Error);
}

TEST(AlignmentCsv, RoundTrip) {
  const LogProbMatrix p = FromProbs({{0.9, 0.1}, {0.6, 0.4}, {0.1, 0.9}}, {"A", "B"});
  const Alignment a = Align(p, {"A", "B"}, "file,1");
  const Alignment b = AlignmentFromCsv(AlignmentToCsv(a));
  EXPECT_EQ(b.labels, a.labels);
  EXPECT_EQ(b.end_frames, a.end_frames);
  EXPECT_EQ(b.end_times_s, a.end_times_s);
  EXPECT_EQ(b.total_log_prob, a.total_log_prob);
  EXPECT_EQ(b.source_id, "file,1");
}

}  // namespace
}  // namespace ensalign
