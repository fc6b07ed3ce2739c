// ensalign/acoustic.hpp

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

// Frame-level class posteriors.  The aligner only ever sees a LogProbMatrix;
// where it comes from (a trained classifier here, a precomputed matrix file,
// or an external network) is interchangeable.

#ifndef ENSALIGN_ACOUSTIC_HPP
#define ENSALIGN_ACOUSTIC_HPP

#include <atomic>
#include <optional>
#include <random>
#include <thread>
#include <unordered_map>
#include <utility>

#include "ensalign/common.hpp"
#include "ensalign/features.hpp"

namespace ensalign {

/// Ordered, duplicate-free list of segment classes.
class ClassInventory {
 public:
  ClassInventory() = default;
  explicit ClassInventory(std::vector<std::string> labels)
      : labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty())
        throw Error(ErrorCode::kInventory, "empty class name");
      if (!index_.emplace(labels_[i], i).second)
        throw Error(ErrorCode::kInventory,
                    "duplicate class name '" + labels_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string> &labels() const noexcept { return labels_; }
  const std::string &label(std::size_t i) const { return labels_.at(i); }

  std::optional<std::size_t> Find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t Index(std::string_view name) const {
    auto i = Find(name);
    if (!i)
      throw Error(ErrorCode::kInventory,
                  "class '" + std::string(name) + "' not in inventory");
    return *i;
  }

  friend bool operator==(const ClassInventory &a, const ClassInventory &b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Log probabilities of zero-probability cells.  Finite so that path sums
/// never mix -inf with finite values.
inline constexpr double kLogZero = -1e30;

struct LogProbMatrix {
  Matrix values;  // n x k natural logs
  ClassInventory inventory;
  double frame_advance_s = 0.010;

  std::size_t num_frames() const { return values.rows(); }
  std::size_t num_classes() const { return values.cols(); }
};

/// Throws unless every row is a log-distribution within `tol`.
inline void ValidateLogProbs(const LogProbMatrix &p, double tol = 1e-6) {
  if (p.values.cols() != p.inventory.size())
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(p.values.cols()) + " columns for " +
                    std::to_string(p.inventory.size()) + " classes");
  for (std::size_t i = 0; i < p.values.rows(); ++i) {
    double sum = 0.0;
    for (double v : p.values.row(i)) {
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw Error(ErrorCode::kNonFinite, "row " + std::to_string(i));
      if (v > tol)
        throw Error(ErrorCode::kRowSum,
                    "positive log probability in row " + std::to_string(i));
      sum += std::exp(v);
    }
    if (std::abs(sum - 1.0) > tol)
      throw Error(ErrorCode::kRowSum, "row " + std::to_string(i) +
                                          " sums to " + detail::FormatDouble(sum, 12));
  }
}

/// Reads the text matrix format:
///   line 1: n k frame_advance_s
///   line 2: k class names, in inventory order
///   n lines of k linear-domain probabilities
/// Rows within 1e-4 of summing to one are renormalized; others are rejected.
inline LogProbMatrix LoadProbMatrix(std::string_view text,
                                    const ClassInventory &inventory) {
  const auto lines = detail::SplitLines(detail::StripBom(text));
  std::size_t li = 0;
  auto next_fields = [&]() -> std::optional<std::vector<std::string>> {
    while (li < lines.size()) {
      auto f = detail::SplitWhitespace(lines[li++]);
      if (!f.empty()) return f;
    }
    return std::nullopt;
  };
  auto header = next_fields();
  if (!header || header->size() != 3)
    throw Error(ErrorCode::kParse, "matrix header must be 'n k frame_advance_s'");
  const double nd = detail::ParseDouble((*header)[0], ErrorCode::kParse, "n");
  const double kd = detail::ParseDouble((*header)[1], ErrorCode::kParse, "k");
  const double adv =
      detail::ParseDouble((*header)[2], ErrorCode::kParse, "frame_advance_s");
  if (nd < 0 || kd < 1 || nd != std::floor(nd) || kd != std::floor(kd) || !(adv > 0))
    throw Error(ErrorCode::kParse, "bad matrix header values");
  const auto n = static_cast<std::size_t>(nd);
  const auto k = static_cast<std::size_t>(kd);

  auto names = next_fields();
  if (!names || *names != inventory.labels())
    throw Error(ErrorCode::kClassMismatch,
                "class names in matrix file differ from the inventory");
  if (k != inventory.size())
    throw Error(ErrorCode::kClassMismatch, "k disagrees with class name count");

  LogProbMatrix out{Matrix(n, k), inventory, adv};
  std::vector<double> row(k);
  for (std::size_t i = 0; i < n; ++i) {
    auto fields = next_fields();
    const std::string where = "matrix row " + std::to_string(i + 1);
    if (!fields)
      throw Error(ErrorCode::kShapeMismatch, "expected " + std::to_string(n) +
                                         " rows, found " + std::to_string(i));
    if (fields->size() != k)
      throw Error(ErrorCode::kShapeMismatch,
                  where + " has " + std::to_string(fields->size()) + " values");
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double v;
      try {
        v = detail::ParseDouble((*fields)[c], ErrorCode::kNonFinite, where);
      } catch (const Error &) {
        throw Error(ErrorCode::kNonFinite, where + ": bad value '" + (*fields)[c] + "'");
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, where);
      if (v < 0.0) throw Error(ErrorCode::kRowSum, where + ": negative probability");
      row[c] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4)
      throw Error(ErrorCode::kRowSum,
                  where + " sums to " + detail::FormatDouble(sum, 9));
    for (std::size_t c = 0; c < k; ++c) {
      const double p = row[c] / sum;
      out.values(i, c) = p > 0.0 ? std::log(p) : kLogZero;
    }
  }
  if (next_fields())
    throw Error(ErrorCode::kParse, "trailing data after " + std::to_string(n) + " rows");
  return out;
}

/// Linear-domain export with 9 significant digits.
inline std::string WriteProbMatrix(const LogProbMatrix &p) {
  std::string out = std::to_string(p.num_frames()) + " " +
                    std::to_string(p.num_classes()) + " " +
                    detail::FormatDouble(p.frame_advance_s, 9) + "\n";
  for (std::size_t c = 0; c < p.inventory.size(); ++c) {
    if (c) out += ' ';
    out += p.inventory.label(c);
  }
  out += '\n';
  for (std::size_t i = 0; i < p.num_frames(); ++i) {
    for (std::size_t c = 0; c < p.num_classes(); ++c) {
      if (c) out += ' ';
      const double v = p.values(i, c);
      out += detail::FormatDouble(v <= kLogZero ? 0.0 : std::exp(v), 9);
    }
    out += '\n';
  }
  return out;
}

namespace detail {

/// In-place log-softmax of one row.
inline void LogSoftmax(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  for (double &v : z) v -= lse;
}

/// Portable uniform draws from a fixed engine; distribution objects in the
/// standard library are not reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double Uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  std::size_t Below(std::size_t n) {
    return static_cast<std::size_t>(Uniform() * static_cast<double>(n));
  }
  double Normal() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <class T>
  void Shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[Below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detail

/// Multinomial log-linear frame classifier over standardized feature rows.
/// `weights` is (dim + 1) x k; the last row holds the class biases.
struct FrameClassifier {
  ClassInventory inventory;
  Matrix weights;
  std::vector<double> feature_mean;   // empty: no standardization
  std::vector<double> feature_scale;
  std::uint64_t seed = 0;

  std::size_t dim() const { return weights.rows() - 1; }
  std::size_t num_classes() const { return weights.cols(); }

  /// Log posterior for one raw feature row, written into `out`.
  void ScoreRow(std::span<const double> x, std::span<double> out) const {
    const std::size_t d = dim(), k = num_classes();
    for (std::size_t c = 0; c < k; ++c) out[c] = weights(d, c);
    for (std::size_t j = 0; j < d; ++j) {
      double v = x[j];
      if (!feature_mean.empty()) v = (v - feature_mean[j]) / feature_scale[j];
      const auto w = weights.row(j);
      for (std::size_t c = 0; c < k; ++c) out[c] += v * w[c];
    }
    detail::LogSoftmax(out);
  }

  friend bool operator==(const FrameClassifier &, const FrameClassifier &) = default;
};

inline LogProbMatrix ScoreFrames(const FrameClassifier &model,
                                 const Matrix &features, double frame_advance_s) {
  if (features.cols() != model.dim())
    throw Error(ErrorCode::kShapeMismatch,
                "features have " + std::to_string(features.cols()) +
                    " columns, model expects " + std::to_string(model.dim()));
  LogProbMatrix out{Matrix(features.rows(), model.num_classes()), model.inventory,
                    frame_advance_s};
  for (std::size_t i = 0; i < features.rows(); ++i)
    model.ScoreRow(features.row(i), out.values.row(i));
  return out;
}

inline LogProbMatrix ScoreFrames(const FrameClassifier &model,
                                 const FeatureMatrix &f) {
  return ScoreFrames(model, f.frames, f.frame_advance_s);
}

struct LabeledFrames {
  Matrix features;              // N x d
  std::vector<std::size_t> labels;  // N class indices
};

struct TrainOptions {
  int epochs = 30;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  double l2 = 1e-4;
  bool standardize = true;
  /// Each member sees a bootstrap resample of the data when set.
  bool bootstrap = false;
};

struct LossAndGradient {
  double loss = 0.0;
  Matrix gradient;  // same shape as weights
};

/// Mean cross-entropy (+ l2/2 |W|^2 over non-bias rows) on the given rows of
/// already-standardized features, and its analytic gradient.
inline LossAndGradient CrossEntropyGradient(const Matrix &weights,
                                            const Matrix &x,
                                            std::span<const std::size_t> labels,
                                            std::span<const std::size_t> rows,
                                            double l2) {
  const std::size_t d = weights.rows() - 1, k = weights.cols();
  LossAndGradient out{0.0, Matrix(d + 1, k)};
  std::vector<double> z(k);
  for (std::size_t r : rows) {
    const auto xr = x.row(r);
    for (std::size_t c = 0; c < k; ++c) z[c] = weights(d, c);
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t c = 0; c < k; ++c) z[c] += xr[j] * weights(j, c);
    detail::LogSoftmax(z);
    out.loss -= z[labels[r]];
    for (std::size_t c = 0; c < k; ++c) {
      const double err = std::exp(z[c]) - (c == labels[r] ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) out.gradient(j, c) += err * xr[j];
      out.gradient(d, c) += err;
    }
  }
  const double inv = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  for (double &g : out.gradient.data()) g *= inv;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t c = 0; c < k; ++c) {
      out.loss += 0.5 * l2 * weights(j, c) * weights(j, c);
      out.gradient(j, c) += l2 * weights(j, c);
    }
  return out;
}

/// Mini-batch gradient descent on cross-entropy.  The seed drives weight
/// initialization, batch order and (optionally) the bootstrap resample, so a
/// fixed seed reproduces the weights bit for bit.
inline FrameClassifier TrainClassifier(const LabeledFrames &data,
                                       const ClassInventory &inventory,
                                       const TrainOptions &opts,
                                       std::uint64_t seed) {
  const std::size_t k = inventory.size();
  if (k < 2)
    throw Error(ErrorCode::kDegenerateInventory,
                "need at least 2 classes, got " + std::to_string(k));
  const std::size_t n = data.features.rows(), d = data.features.cols();
  if (data.labels.size() != n)
    throw Error(ErrorCode::kShapeMismatch, "label count differs from frame count");
  std::vector<std::size_t> per_class(k, 0);
  for (std::size_t y : data.labels) {
    if (y >= k)
      throw Error(ErrorCode::kInventory,
                  "label index " + std::to_string(y) + " >= class count");
    ++per_class[y];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (per_class[c] == 0)
      throw Error(ErrorCode::kEmptyClass,
                  "class '" + inventory.label(c) + "' has no training frames");

  FrameClassifier model;
  model.inventory = inventory;
  model.seed = seed;
  Matrix x = data.features;
  if (opts.standardize) {
    model.feature_mean.assign(d, 0.0);
    model.feature_scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) model.feature_mean[j] += x(i, j);
    for (double &m : model.feature_mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double dv = x(i, j) - model.feature_mean[j];
        model.feature_scale[j] += dv * dv;
      }
    for (double &s : model.feature_scale) {
      s = std::sqrt(s / static_cast<double>(n));
      if (!(s > 1e-12)) s = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        x(i, j) = (x(i, j) - model.feature_mean[j]) / model.feature_scale[j];
  }

  detail::Rng rng(seed);
  model.weights = Matrix(d + 1, k);
  for (double &w : model.weights.data()) w = 0.01 * (2.0 * rng.Uniform() - 1.0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (opts.bootstrap)
    for (std::size_t i = 0; i < n; ++i) order[i] = rng.Below(n);

  const std::size_t batch = std::max<std::size_t>(1, opts.batch_size);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < n; b += batch) {
      const std::size_t e = std::min(n, b + batch);
      auto lg = CrossEntropyGradient(
          model.weights, x, data.labels,
          std::span<const std::size_t>(order).subspan(b, e - b), opts.l2);
      if (!std::isfinite(lg.loss))
        throw Error(ErrorCode::kNonFinite,
                    "loss became non-finite in epoch " + std::to_string(epoch + 1));
      epoch_loss += lg.loss * static_cast<double>(e - b);
      auto &w = model.weights.data();
      const auto &g = lg.gradient.data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= opts.learning_rate * g[i];
    }
    if (!std::isfinite(epoch_loss))
      throw Error(ErrorCode::kNonFinite,
                  "loss became non-finite in epoch " + std::to_string(epoch + 1));
  }
  return model;
}

inline double FrameAccuracy(const FrameClassifier &model, const LabeledFrames &data) {
  if (data.labels.empty()) return 0.0;
  std::vector<double> out(model.num_classes());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < data.features.rows(); ++i) {
    model.ScoreRow(data.features.row(i), out);
    const auto best = static_cast<std::size_t>(
        std::max_element(out.begin(), out.end()) - out.begin());
    hit += best == data.labels[i];
  }
  return static_cast<double>(hit) / static_cast<double>(data.labels.size());
}

/// Trains one classifier per seed.  Members are independent and are spread
/// over `workers` threads; the result order always follows `seeds`.
inline std::vector<FrameClassifier> MakeEnsemble(
    const LabeledFrames &data, const ClassInventory &inventory,
    const TrainOptions &opts, const std::vector<std::uint64_t> &seeds,
    unsigned workers = 1) {
  if (seeds.empty()) throw Error(ErrorCode::kConfig, "ensemble needs >= 1 member");
  std::vector<std::optional<FrameClassifier>> slots(seeds.size());
  std::vector<std::optional<Error>> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        slots[i] = TrainClassifier(data, inventory, opts, seeds[i]);
      } catch (const Error &e) {
        errors[i] = Error(e.code(), "ensemble member " + std::to_string(i) + ": " +
                                        e.what());
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(seeds.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  std::vector<FrameClassifier> out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (errors[i]) throw *errors[i];
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

/// Consecutive seeds base, base+1, ... for an E-member ensemble.
inline std::vector<std::uint64_t> EnsembleSeeds(std::uint64_t base, std::size_t members) {
  std::vector<std::uint64_t> s(members);
  for (std::size_t i = 0; i < members; ++i) s[i] = base + i;
  return s;
}

inline constexpr std::string_view kClassifierMagic = "ensalign-classifier";
inline constexpr int kClassifierVersion = 1;

/// Text serialization with 17 significant digits, so reading back gives the
/// identical doubles.
inline std::string WriteClassifier(const FrameClassifier &m) {
  std::string out = std::string(kClassifierMagic) + " " +
                    std::to_string(kClassifierVersion) + "\n";
  out += "seed " + std::to_string(m.seed) + "\n";
  out += "classes " + std::to_string(m.num_classes());
  for (const auto &l : m.inventory.labels()) out += " " + l;
  out += "\ndim " + std::to_string(m.dim()) + "\n";
  auto vec = [&](const char *name, const std::vector<double> &v) {
    out += name;
    out += " " + std::to_string(v.size());
    for (double x : v) out += " " + detail::FormatDouble(x, 17);
    out += '\n';
  };
  vec("mean", m.feature_mean);
  vec("scale", m.feature_scale);
  out += "weights\n";
  for (std::size_t r = 0; r < m.weights.rows(); ++r) {
    for (std::size_t c = 0; c < m.weights.cols(); ++c) {
      if (c) out += ' ';
      out += detail::FormatDouble(m.weights(r, c), 17);
    }
    out += '\n';
  }
  return out;
}

inline FrameClassifier ReadClassifier(std::string_view text) {
  const auto lines = detail::SplitLines(detail::StripBom(text));
  std::size_t li = 0;
  auto fields = [&](const char *expect) {
    if (li >= lines.size())
      throw Error(ErrorCode::kParse, std::string("classifier file ends before '") +
                                         expect + "'");
    auto f = detail::SplitWhitespace(lines[li++]);
    if (f.empty() || f[0] != expect)
      throw Error(ErrorCode::kParse, "classifier line " + std::to_string(li) +
                                         ": expected '" + expect + "'");
    return f;
  };
  auto count = [](const std::string &s) {
    return static_cast<std::size_t>(detail::ParseDouble(s, ErrorCode::kParse, "count"));
  };
  auto head = fields(kClassifierMagic.data());
  if (head.size() != 2 || head[1] != std::to_string(kClassifierVersion))
    throw Error(ErrorCode::kParse, "unsupported classifier version");
  FrameClassifier m;
  auto s = fields("seed");
  if (s.size() != 2) throw Error(ErrorCode::kParse, "bad seed line");
  m.seed = std::stoull(s[1]);
  auto cl = fields("classes");
  if (cl.size() < 2 || count(cl[1]) != cl.size() - 2)
    throw Error(ErrorCode::kParse, "bad classes line");
  m.inventory = ClassInventory(std::vector<std::string>(cl.begin() + 2, cl.end()));
  auto dl = fields("dim");
  if (dl.size() != 2) throw Error(ErrorCode::kParse, "bad dim line");
  const std::size_t d = count(dl[1]), k = m.inventory.size();
  auto vec = [&](const char *name) {
    auto f = fields(name);
    if (f.size() < 2 || count(f[1]) != f.size() - 2)
      throw Error(ErrorCode::kParse, std::string("bad ") + name + " line");
    std::vector<double> v;
    for (std::size_t i = 2; i < f.size(); ++i)
      v.push_back(detail::ParseDouble(f[i], ErrorCode::kParse, name));
    if (!v.empty() && v.size() != d)
      throw Error(ErrorCode::kParse, std::string(name) + " has wrong length");
    return v;
  };
  m.feature_mean = vec("mean");
  m.feature_scale = vec("scale");
  if (m.feature_mean.size() != m.feature_scale.size())
    throw Error(ErrorCode::kParse, "mean/scale length mismatch");
  fields("weights");
  m.weights = Matrix(d + 1, k);
  for (std::size_t r = 0; r <= d; ++r) {
    if (li >= lines.size()) throw Error(ErrorCode::kParse, "missing weight rows");
    auto f = detail::SplitWhitespace(lines[li++]);
    if (f.size() != k)
      throw Error(ErrorCode::kParse, "weight row " + std::to_string(r + 1) +
                                         " has " + std::to_string(f.size()) + " values");
    for (std::size_t c = 0; c < k; ++c)
      m.weights(r, c) = detail::ParseDouble(f[c], ErrorCode::kParse, "weight");
  }
  return m;
}

}  // namespace ensalign

#endif  // ENSALIGN_ACOUSTIC_HPP
