// ensalign/features.hpp

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

#ifndef ENSALIGN_FEATURES_HPP
#define ENSALIGN_FEATURES_HPP

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "ensalign/common.hpp"
#include "ensalign/wav.hpp"

namespace ensalign {

/// Front-end parameters.  Only the cepstral layout (13 coefficients with c0
/// replaced by log energy, plus deltas) and the 10 ms hop are fixed by the
/// model; the rest are conventional HTK-style values.
struct MfccOptions {
  double frame_length_s = 0.025;
  double frame_advance_s = 0.010;
  double preemphasis = 0.97;
  int num_mel_filters = 26;
  int num_ceps = 13;  // including the log-energy slot
  double energy_floor = 1e-10;
  int delta_window = 2;
  /// Centre each analysis window on its hop slot [i*advance, (i+1)*advance]
  /// by reflect-padding the signal edges.  Frame i then describes the time
  /// span that the aligner attributes to it, and the frame count is
  /// floor(duration / advance).  When false, frame i starts at sample
  /// round(i * advance * rate) and trailing partial frames are dropped.
  bool center_frames = true;
  /// Rejects audio at any other rate; 0 accepts every rate.
  int expected_sample_rate = 16000;
};

inline constexpr int kFeatureDim = 39;

struct FeatureMatrix {
  Matrix frames;  // n x 39: [logE c1..c12 | deltas | delta-deltas]
  double frame_advance_s = 0.010;
  double frame_length_s = 0.025;
  bool centered = true;

  std::size_t num_frames() const { return frames.rows(); }
  /// Time at the middle of frame i's analysis window.
  double frame_centre_time(std::size_t i) const {
    return static_cast<double>(i) * frame_advance_s +
           0.5 * (centered ? frame_advance_s : frame_length_s);
  }
  /// End time of 0-based frame i on the alignment time axis.
  double frame_end_time(std::size_t i) const {
    return static_cast<double>(i + 1) * frame_advance_s;
  }
};

namespace detail {

inline std::size_t SamplesFor(double seconds, int rate) {
  return static_cast<std::size_t>(std::lround(seconds * rate));
}

inline std::size_t FrameStart(std::size_t i, double advance_s, int rate) {
  return static_cast<std::size_t>(
      std::lround(static_cast<double>(i) * advance_s * rate));
}

inline std::vector<double> HammingWindow(std::size_t len) {
  std::vector<double> w(len, 1.0);
  if (len < 2) return w;
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(len - 1));
  return w;
}

inline std::size_t NextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Real-to-complex FFTW plans, created once per size.  Planning is not
/// thread-safe in FFTW, execution on caller-owned buffers is.
class RealFft {
 public:
  explicit RealFft(std::size_t size) : size_(size) {
    static std::mutex planner_mutex;
    std::lock_guard lock(planner_mutex);
    std::vector<double> in(size);
    std::vector<fftw_complex> out(size / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(size), in.data(), out.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_ == nullptr) throw Error(ErrorCode::kIo, "FFTW planning failed");
  }
  ~RealFft() {
    static std::mutex destroy_mutex;
    std::lock_guard lock(destroy_mutex);
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  static const RealFft &ForSize(std::size_t size) {
    static std::mutex cache_mutex;
    static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    std::lock_guard lock(cache_mutex);
    auto &slot = cache[size];
    if (!slot) slot = std::make_unique<RealFft>(size);
    return *slot;
  }

  /// Magnitudes of bins 0..size/2.  `input` is copied; it may be shorter
  /// than the transform size and is zero-padded.
  std::vector<double> Magnitude(std::span<const double> input) const {
    std::vector<double> in(size_, 0.0);
    std::copy_n(input.begin(), std::min(input.size(), size_), in.begin());
    std::vector<fftw_complex> out(size_ / 2 + 1);
    fftw_execute_dft_r2c(plan_, in.data(), out.data());
    std::vector<double> mag(out.size());
    for (std::size_t k = 0; k < out.size(); ++k)
      mag[k] = std::hypot(out[k][0], out[k][1]);
    return mag;
  }

  std::size_t size() const { return size_; }

 private:
  std::size_t size_;
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Where analysis frames sit on the sample axis.
struct FrameLayout {
  std::size_t count = 0;
  std::size_t length = 0;    // samples per frame
  std::ptrdiff_t offset = 0;  // sample index of frame 0's first sample
  double advance_s = 0.010;
  int sample_rate = 16000;

  std::ptrdiff_t start(std::size_t i) const {
    return offset + static_cast<std::ptrdiff_t>(detail::FrameStart(i, advance_s, sample_rate));
  }
};

inline std::size_t CountFrames(std::size_t num_samples, int sample_rate,
                               double frame_length_s, double frame_advance_s) {
  const std::size_t len = detail::SamplesFor(frame_length_s, sample_rate);
  std::size_t n = 0;
  while (detail::FrameStart(n, frame_advance_s, sample_rate) + len <= num_samples)
    ++n;
  return n;
}

inline FrameLayout MakeFrameLayout(std::size_t num_samples, int sample_rate,
                                   double frame_length_s, double frame_advance_s,
                                   bool center) {
  if (!(frame_advance_s > 0.0) || frame_length_s < frame_advance_s)
    throw Error(ErrorCode::kConfig, "need frame_length >= frame_advance > 0");
  if (sample_rate <= 0)
    throw Error(ErrorCode::kUnsupportedAudio, "sample rate must be positive");
  FrameLayout l;
  l.length = detail::SamplesFor(frame_length_s, sample_rate);
  l.advance_s = frame_advance_s;
  l.sample_rate = sample_rate;
  if (center) {
    // Hop slots lying entirely inside the audio.
    std::size_t n = 0;
    while (detail::FrameStart(n + 1, frame_advance_s, sample_rate) <= num_samples) ++n;
    l.count = n;
    const double hop = frame_advance_s * sample_rate;
    l.offset = -static_cast<std::ptrdiff_t>(
        std::lround((static_cast<double>(l.length) - hop) / 2.0));
  } else {
    l.count = CountFrames(num_samples, sample_rate, frame_length_s, frame_advance_s);
  }
  if (l.count == 0 || l.length == 0)
    throw Error(ErrorCode::kTooShort,
                "audio of " + std::to_string(num_samples) +
                    " samples is shorter than one " + std::to_string(l.length) +
                    "-sample frame");
  return l;
}

namespace detail {

/// Sample k of the signal, mirrored at both ends when k falls outside.
inline double ReflectedSample(std::span<const double> x, std::ptrdiff_t k) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (n == 1) return x[0];
  while (k < 0 || k >= n) {
    if (k < 0) k = -k;
    if (k >= n) k = 2 * (n - 1) - k;
  }
  return x[static_cast<std::size_t>(k)];
}

inline void CopyFrame(std::span<const double> x, const FrameLayout &l, std::size_t i,
                      std::span<double> out) {
  const std::ptrdiff_t s = l.start(i);
  if (s >= 0 && s + static_cast<std::ptrdiff_t>(l.length) <= static_cast<std::ptrdiff_t>(x.size())) {
    std::copy_n(x.begin() + s, l.length, out.begin());
    return;
  }
  for (std::size_t j = 0; j < l.length; ++j)
    out[j] = ReflectedSample(x, s + static_cast<std::ptrdiff_t>(j));
}

}  // namespace detail

/// Cuts the signal into Hamming-windowed frames.  Without centring, frame i
/// starts at sample round(i * advance * rate) and a trailing partial frame
/// is dropped.
inline Matrix FrameSignal(const AudioBuffer &audio, double frame_length_s,
                          double frame_advance_s, bool center = false) {
  const auto layout = MakeFrameLayout(audio.samples.size(), audio.sample_rate,
                                      frame_length_s, frame_advance_s, center);
  const auto window = detail::HammingWindow(layout.length);
  Matrix frames(layout.count, layout.length);
  for (std::size_t i = 0; i < layout.count; ++i) {
    auto row = frames.row(i);
    detail::CopyFrame(audio.samples, layout, i, row);
    for (std::size_t j = 0; j < layout.length; ++j) row[j] *= window[j];
  }
  return frames;
}

inline double HzToMel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
inline double MelToHz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

/// Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist.
/// Rows are filters, columns FFT bins 0..fft_size/2.
inline Matrix MelFilterbank(int num_filters, std::size_t fft_size,
                            int sample_rate) {
  const std::size_t bins = fft_size / 2 + 1;
  const double top = HzToMel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(num_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = MelToHz(top * static_cast<double>(i) /
                       static_cast<double>(num_filters + 1));
  Matrix fb(static_cast<std::size_t>(num_filters), bins);
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate /
                       static_cast<double>(fft_size);
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      fb(static_cast<std::size_t>(m), k) = w;
    }
  }
  return fb;
}

/// Regression deltas over +/-window frames with edge clamping:
///   d_i = sum_w w (x_{i+w} - x_{i-w}) / (2 sum_w w^2)
inline Matrix Delta(const Matrix &x, int window) {
  if (window < 1) throw Error(ErrorCode::kConfig, "delta window must be >= 1");
  const std::size_t n = x.rows();
  Matrix d(n, x.cols());
  if (n == 0) return d;
  double denom = 0.0;
  for (int w = 1; w <= window; ++w) denom += static_cast<double>(w * w);
  denom *= 2.0;
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double acc = 0.0;
      for (int w = 1; w <= window; ++w) {
        const auto ahead = static_cast<std::size_t>(std::min(ii + w, last));
        const auto behind = static_cast<std::size_t>(std::max<std::ptrdiff_t>(ii - w, 0));
        acc += w * (x(ahead, c) - x(behind, c));
      }
      d(i, c) = acc / denom;
    }
  }
  return d;
}

/// Computes static cepstra and filterbank outputs frame by frame.
class MfccExtractor {
 public:
  explicit MfccExtractor(MfccOptions opts = {}, int sample_rate = 16000)
      : opts_(opts), sample_rate_(sample_rate) {
    if (opts_.num_ceps < 2 || opts_.num_ceps > opts_.num_mel_filters)
      throw Error(ErrorCode::kConfig, "num_ceps must be in [2, num_mel_filters]");
    frame_len_ = detail::SamplesFor(opts_.frame_length_s, sample_rate_);
    fft_size_ = detail::NextPow2(std::max<std::size_t>(frame_len_, 2));
    window_ = detail::HammingWindow(frame_len_);
    filterbank_ = MelFilterbank(opts_.num_mel_filters, fft_size_, sample_rate_);
  }

  const MfccOptions &options() const { return opts_; }
  std::size_t frame_length() const { return frame_len_; }
  std::size_t fft_size() const { return fft_size_; }
  const Matrix &filterbank() const { return filterbank_; }

  /// Raw (linear) mel filterbank outputs for one unwindowed frame.
  std::vector<double> FilterbankEnergies(std::span<const double> raw) const {
    std::vector<double> buf(raw.begin(), raw.end());
    for (std::size_t j = buf.size(); j-- > 1;)
      buf[j] -= opts_.preemphasis * buf[j - 1];
    if (!buf.empty()) buf[0] -= opts_.preemphasis * buf[0];
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] *= window_[j];
    const auto mag = detail::RealFft::ForSize(fft_size_).Magnitude(buf);
    std::vector<double> out(filterbank_.rows(), 0.0);
    for (std::size_t m = 0; m < filterbank_.rows(); ++m) {
      const auto w = filterbank_.row(m);
      double acc = 0.0;
      for (std::size_t k = 0; k < mag.size(); ++k) acc += w[k] * mag[k];
      out[m] = acc;
    }
    return out;
  }

  /// [log energy, c1 .. c_{num_ceps-1}] for one unwindowed frame.
  std::vector<double> StaticCoefficients(std::span<const double> raw) const {
    const auto fbank = FilterbankEnergies(raw);
    const std::size_t M = fbank.size();
    std::vector<double> logmel(M);
    for (std::size_t m = 0; m < M; ++m)
      logmel[m] = std::log(std::max(fbank[m], opts_.energy_floor));
    std::vector<double> out(static_cast<std::size_t>(opts_.num_ceps));
    double energy = 0.0;
    for (double s : raw) energy += s * s;
    out[0] = std::log(std::max(energy, opts_.energy_floor));
    const double scale = std::sqrt(2.0 / static_cast<double>(M));
    for (std::size_t k = 1; k < out.size(); ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < M; ++m)
        acc += logmel[m] * std::cos(std::numbers::pi * static_cast<double>(k) *
                                    (static_cast<double>(m) + 0.5) /
                                    static_cast<double>(M));
      out[k] = scale * acc;
    }
    return out;
  }

  FeatureMatrix Compute(const AudioBuffer &audio) const {
    if (audio.sample_rate != sample_rate_)
      throw Error(ErrorCode::kUnsupportedAudio,
                  "sample rate " + std::to_string(audio.sample_rate) +
                      " Hz; extractor configured for " +
                      std::to_string(sample_rate_) + " Hz");
    const auto layout =
        MakeFrameLayout(audio.samples.size(), sample_rate_, opts_.frame_length_s,
                        opts_.frame_advance_s, opts_.center_frames);
    const std::size_t n = layout.count;
    const auto nc = static_cast<std::size_t>(opts_.num_ceps);
    Matrix statics(n, nc);
    std::vector<double> raw(layout.length);
    for (std::size_t i = 0; i < n; ++i) {
      detail::CopyFrame(audio.samples, layout, i, raw);
      const auto c = StaticCoefficients(raw);
      std::copy(c.begin(), c.end(), statics.row(i).begin());
    }
    const Matrix d1 = Delta(statics, opts_.delta_window);
    const Matrix d2 = Delta(d1, opts_.delta_window);
    FeatureMatrix f;
    f.frame_advance_s = opts_.frame_advance_s;
    f.frame_length_s = opts_.frame_length_s;
    f.centered = opts_.center_frames;
    f.frames = Matrix(n, 3 * nc);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < nc; ++c) {
        f.frames(i, c) = statics(i, c);
        f.frames(i, nc + c) = d1(i, c);
        f.frames(i, 2 * nc + c) = d2(i, c);
      }
    return f;
  }

 private:
  MfccOptions opts_;
  int sample_rate_;
  std::size_t frame_len_ = 0;
  std::size_t fft_size_ = 0;
  std::vector<double> window_;
  Matrix filterbank_;
};

/// 39-dimensional features for one file.
inline FeatureMatrix Mfcc(const AudioBuffer &audio, const MfccOptions &opts = {}) {
  if (opts.expected_sample_rate != 0 && audio.sample_rate != opts.expected_sample_rate)
    throw Error(ErrorCode::kUnsupportedAudio,
                "sample rate " + std::to_string(audio.sample_rate) +
                    " Hz; expected " + std::to_string(opts.expected_sample_rate) +
                    " Hz (resample upstream)");
  return MfccExtractor(opts, audio.sample_rate).Compute(audio);
}

inline std::vector<std::string> FeatureColumnNames(int num_ceps = 13) {
  std::vector<std::string> base{"log_energy"};
  for (int c = 1; c < num_ceps; ++c) base.push_back("c" + std::to_string(c));
  std::vector<std::string> names = base;
  for (const auto &b : base) names.push_back("d_" + b);
  for (const auto &b : base) names.push_back("dd_" + b);
  return names;
}

/// Debug export: header row, then one frame per row.
inline std::string FeaturesToCsv(const FeatureMatrix &f) {
  const auto names = FeatureColumnNames(static_cast<int>(f.frames.cols() / 3));
  std::string out = "frame,end_time_s";
  for (const auto &n : names) out += "," + n;
  out += '\n';
  for (std::size_t i = 0; i < f.num_frames(); ++i) {
    out += std::to_string(i) + "," + detail::FormatDouble(f.frame_end_time(i), 9);
    for (double v : f.frames.row(i)) out += "," + detail::FormatDouble(v, 9);
    out += '\n';
  }
  return out;
}

}  // namespace ensalign

#endif  // ENSALIGN_FEATURES_HPP
