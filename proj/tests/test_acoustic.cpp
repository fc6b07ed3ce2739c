// tests/test_acoustic.cpp

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

#include "test_util.hpp"

namespace ensalign {
namespace {

TEST(LoadProbMatrix, TakesElementwiseLog) {
  const ClassInventory inv({"a", "b"});
  const LogProbMatrix p = LoadProbMatrix("2 2 0.01\na b\n0.9 0.1\n0.2 0.8\n", inv);
  ASSERT_EQ(p.num_frames(), 2u);
  EXPECT_DOUBLE_EQ(p.values(0, 0), std::log(0.9));
  EXPECT_DOUBLE_EQ(p.values(0, 1), std::log(0.1));
  EXPECT_DOUBLE_EQ(p.values(1, 0), std::log(0.2));
  EXPECT_DOUBLE_EQ(p.values(1, 1), std::log(0.8));
  EXPECT_DOUBLE_EQ(p.frame_advance_s, 0.01);
}

TEST(LoadProbMatrix, EvenSplitAccepted) {
  const LogProbMatrix p =
      LoadProbMatrix("3 2 0.01\na b\n0.5 0.5\n0.5 0.5\n0.5 0.5\n", ClassInventory({"a", "b"}));
  for (double v : p.values.data()) EXPECT_DOUBLE_EQ(v, std::log(0.5));
}

TEST(LoadProbMatrix, SmallDeviationRenormalized) {
  const LogProbMatrix p =
      LoadProbMatrix("1 2 0.01\na b\n0.50002 0.5\n", ClassInventory({"a", "b"}));
  EXPECT_NEAR(std::exp(p.values(0, 0)) + std::exp(p.values(0, 1)), 1.0, 1e-12);
}

TEST(LoadProbMatrix, BadRowSumRejected) {
  try {
    LoadProbMatrix("1 2 0.01\na b\n0.7 0.7\n", ClassInventory({"a", "b"}));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kRowSum);
  }
}

TEST(LoadProbMatrix, ShapeClassAndValueErrors) {
  const ClassInventory inv({"a", "b"});
  auto code_of = [&](const std::string &text) {
    try {
      LoadProbMatrix(text, inv);
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::kIo;  // sentinel: no error
  };
  EXPECT_EQ(code_of("2 2 0.01\na b\n0.5 0.5\n"), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of("1 2 0.01\nb a\n0.5 0.5\n"), ErrorCode::kClassMismatch);
  EXPECT_EQ(code_of("1 2 0.01\na b\nnan 0.5\n"), ErrorCode::kNonFinite);
}

TEST(LoadProbMatrix, WriteReadRoundTrip) {
  std::mt19937_64 rng(5);
  const LogProbMatrix p = testing::RandomLogProbs(rng, 7, 3);
  const LogProbMatrix q = LoadProbMatrix(WriteProbMatrix(p), p.inventory);
  for (std::size_t i = 0; i < p.values.data().size(); ++i)
    EXPECT_NEAR(p.values.data()[i], q.values.data()[i], 1e-7);
}

FrameClassifier ZeroModel(std::size_t d, std::size_t k) {
  return FrameClassifier{ClassInventory(testing::ClassNames(k)), Matrix(d + 1, k), {}, {}, 0};
}

TEST(ScoreFrames, ZeroWeightsGiveUniformRows) {
  const FrameClassifier m = ZeroModel(4, 3);
  Matrix x(5, 4);
  for (double &v : x.data()) v = 1.7;
  const LogProbMatrix p = ScoreFrames(m, x, 0.01);
  for (double v : p.values.data()) EXPECT_NEAR(v, std::log(1.0 / 3.0), 1e-15);
}

TEST(ScoreFrames, LargeBiasSaturatesButStaysNormalized) {
  FrameClassifier m = ZeroModel(2, 3);
  m.weights(2, 1) = 50.0;
  const LogProbMatrix p = ScoreFrames(m, Matrix(1, 2), 0.01);
  EXPECT_NEAR(p.values(0, 1), 0.0, 1e-20);
  EXPECT_LT(p.values(0, 0), -49.0);
  EXPECT_NO_THROW(ValidateLogProbs(p));
}

TEST(ScoreFrames, DimensionMismatch) {
  try {
    ScoreFrames(ZeroModel(4, 2), Matrix(3, 5), 0.01);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(ScoreFrames, PermutationEquivariant) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  FrameClassifier m = ZeroModel(3, 4);
  for (double &w : m.weights.data()) w = g(rng);
  Matrix x(6, 3);
  for (double &v : x.data()) v = g(rng);
  std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  Matrix y(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 3; ++c) y(i, c) = x(perm[i], c);
  const auto px = ScoreFrames(m, x, 0.01), py = ScoreFrames(m, y, 0.01);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(py.values(i, c), px.values(perm[i], c));
}

double RelativeError(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

TEST(CrossEntropyGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5, d = 4, k = 3;
    Matrix w(d + 1, k), x(n, d);
    for (double &v : w.data()) v = g(rng);
    for (double &v : x.data()) v = g(rng);
    std::vector<std::size_t> labels(n), rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
      rows[i] = i;
    }
    const double l2 = 0.01;
    const auto analytic = CrossEntropyGradient(w, x, labels, rows, l2);
    const double h = 1e-5;
    for (std::size_t idx = 0; idx < w.data().size(); ++idx) {
      Matrix wp = w, wm = w;
      wp.data()[idx] += h;
      wm.data()[idx] -= h;
      const double numeric = (CrossEntropyGradient(wp, x, labels, rows, l2).loss -
                              CrossEntropyGradient(wm, x, labels, rows, l2).loss) /
                             (2.0 * h);
      EXPECT_LT(RelativeError(analytic.gradient.data()[idx], numeric), 1e-4)
          << "trial " << trial << " weight " << idx;
    }
  }
}

LabeledFrames OneDimensionalClusters() {
  LabeledFrames data{Matrix(40, 1), std::vector<std::size_t>(40)};
  for (std::size_t i = 0; i < 40; ++i) {
    data.labels[i] = i % 2;
    data.features(i, 0) = i % 2 ? 1.0 : -1.0;
  }
  return data;
}

TEST(TrainClassifier, SeparableOneDimensionalProblem) {
  TrainOptions opts;
  opts.epochs = 200;
  const auto data = OneDimensionalClusters();
  const FrameClassifier m = TrainClassifier(data, ClassInventory({"neg", "pos"}), opts, 1);
  EXPECT_DOUBLE_EQ(FrameAccuracy(m, data), 1.0);
}

TEST(TrainClassifier, GaussianClustersGeneralize) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  auto draw = [&](std::size_t n) {
    LabeledFrames d{Matrix(n, 5), std::vector<std::size_t>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      d.labels[i] = i % 2;
      for (std::size_t c = 0; c < 5; ++c)
        d.features(i, c) = g(rng) + (d.labels[i] ? 1.5 : -1.5) * (c < 2 ? 1.0 : 0.0);
    }
    return d;
  };
  const auto train = draw(400), test = draw(400);
  const FrameClassifier m = TrainClassifier(train, ClassInventory({"x", "y"}), {}, 3);
  EXPECT_GE(FrameAccuracy(m, test), 0.95);
}

TEST(TrainClassifier, DeterministicForSeed) {
  const auto data = OneDimensionalClusters();
  const ClassInventory inv({"neg", "pos"});
  EXPECT_EQ(TrainClassifier(data, inv, {}, 42), TrainClassifier(data, inv, {}, 42));
}

TEST(TrainClassifier, SingleClassIsDegenerate) {
  LabeledFrames data{Matrix(3, 1), {0, 0, 0}};
  try {
    TrainClassifier(data, ClassInventory({"only"}), {}, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateInventory);
  }
}

TEST(TrainClassifier, ClassWithoutExamples) {
  LabeledFrames data{Matrix(3, 1), {0, 1, 0}};
  try {
    TrainClassifier(data, ClassInventory({"a", "b", "c"}), {}, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyClass);
    EXPECT_NE(std::string(e.what()).find("c"), std::string::npos);
  }
}

TEST(TrainClassifier, DivergenceReportsEpoch) {
  LabeledFrames data = OneDimensionalClusters();
  TrainOptions opts;
  opts.learning_rate = 1e305;
  opts.standardize = false;
  for (double &v : data.features.data()) v *= 1e10;
  try {
    TrainClassifier(data, ClassInventory({"neg", "pos"}), opts, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

class EnsembleTest : public ::testing::Test {
 protected:
  LabeledFrames data = SyntheticTrainingSet(
      500, 6, {DefaultRecipes()[0], DefaultRecipes()[1], DefaultRecipes()[2]});
  ClassInventory inv{{"a", "s", "m"}};
  TrainOptions opts = [] {
    TrainOptions o;
    o.epochs = 3;
    return o;
  }();
};

TEST_F(EnsembleTest, DistinctSeedsGiveDistinctModels) {
  const auto models = MakeEnsemble(data, inv, opts, EnsembleSeeds(1, 10), 4);
  ASSERT_EQ(models.size(), 10u);
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t j = i + 1; j < models.size(); ++j)
      EXPECT_NE(models[i].weights, models[j].weights) << i << " vs " << j;
}

TEST_F(EnsembleTest, SameSeedGivesIdenticalModels) {
  const auto models = MakeEnsemble(data, inv, opts, std::vector<std::uint64_t>(10, 7), 3);
  for (const auto &m : models) EXPECT_EQ(m, models[0]);
}

TEST_F(EnsembleTest, SingletonEnsemble) {
  EXPECT_EQ(MakeEnsemble(data, inv, opts, {5}).size(), 1u);
  EXPECT_THROW(MakeEnsemble(data, inv, opts, {}), Error);
}

TEST_F(EnsembleTest, WorkerCountDoesNotChangeModels) {
  EXPECT_EQ(MakeEnsemble(data, inv, opts, EnsembleSeeds(3, 4), 1),
            MakeEnsemble(data, inv, opts, EnsembleSeeds(3, 4), 4));
}

TEST_F(EnsembleTest, MemberErrorsNameTheMember) {
  LabeledFrames bad = data;
  std::fill(bad.labels.begin(), bad.labels.end(), 0);
  try {
    MakeEnsemble(bad, inv, opts, EnsembleSeeds(1, 3));
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("member 0"), std::string::npos) << e.what();
  }
}

TEST_F(EnsembleTest, ClassifierFileRoundTripIsExact) {
  TrainOptions o = opts;
  o.bootstrap = true;
  const FrameClassifier m = TrainClassifier(data, inv, o, 99);
  const std::string text = WriteClassifier(m);
  EXPECT_EQ(ReadClassifier(text), m);
  EXPECT_EQ(WriteClassifier(ReadClassifier(text)), text);
  EXPECT_THROW(ReadClassifier("something else\n"), Error);
}

}  // namespace
}  // namespace ensalign
