// ensalign/synthetic.hpp

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

// Synthetic "speech": utterances made of segments whose classes differ in
// spectral shape (tone clusters and band-limited noise), with exactly known
// boundaries.  Used to train toy ensembles and to test alignment end to end.

#ifndef ENSALIGN_SYNTHETIC_HPP
#define ENSALIGN_SYNTHETIC_HPP

#include <string>
#include <vector>

#include "ensalign/acoustic.hpp"
#include "ensalign/features.hpp"
#include "ensalign/lexicon.hpp"
#include "ensalign/wav.hpp"

namespace ensalign {

struct SegmentRecipe {
  std::string label;
  std::vector<double> tones_hz;
  double band_lo_hz = 0.0;  // band-limited noise; lo == hi means none
  double band_hi_hz = 0.0;
};

inline std::vector<SegmentRecipe> DefaultRecipes() {
  return {
      {"a", {300.0, 1100.0}, 0.0, 0.0},
      {"s", {}, 3500.0, 6500.0},
      {"m", {220.0}, 600.0, 1000.0},
      {"i", {280.0, 2300.0}, 0.0, 0.0},
      {"f", {}, 1600.0, 2800.0},
  };
}

inline ClassInventory RecipeInventory(const std::vector<SegmentRecipe> &recipes) {
  std::vector<std::string> names;
  for (const auto &r : recipes) names.push_back(r.label);
  return ClassInventory(std::move(names));
}

struct SyntheticOptions {
  int sample_rate = 16000;
  std::size_t min_segments = 3;
  std::size_t max_segments = 6;
  double min_duration_s = 0.2;
  double max_duration_s = 0.5;
  double noise_floor = 0.005;
  int band_components = 24;
};

struct SyntheticUtterance {
  AudioBuffer audio;
  std::vector<std::string> labels;
  std::vector<double> end_times_s;
  std::string source_id;
};

/// One utterance; adjacent segments always have different classes.
inline SyntheticUtterance GenerateUtterance(std::uint64_t seed,
                                            const std::vector<SegmentRecipe> &recipes,
                                            const SyntheticOptions &opts = {}) {
  detail::Rng rng(seed);
  SyntheticUtterance u;
  u.audio.sample_rate = opts.sample_rate;
  const double rate = opts.sample_rate;
  const std::size_t count =
      opts.min_segments + rng.Below(opts.max_segments - opts.min_segments + 1);
  std::size_t prev = recipes.size();
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < count; ++s) {
    std::size_t c = rng.Below(recipes.size());
    while (c == prev) c = rng.Below(recipes.size());
    prev = c;
    const auto &recipe = recipes[c];
    const double dur = opts.min_duration_s +
                       (opts.max_duration_s - opts.min_duration_s) * rng.Uniform();
    const auto len = static_cast<std::size_t>(std::lround(dur * rate));
    const double gain = 0.3 + 0.4 * rng.Uniform();

    struct Partial {
      double freq, phase, amp;
    };
    std::vector<Partial> partials;
    for (double f : recipe.tones_hz)
      partials.push_back({f * (0.97 + 0.06 * rng.Uniform()),
                          2.0 * std::numbers::pi * rng.Uniform(), 1.0});
    if (recipe.band_hi_hz > recipe.band_lo_hz)
      for (int k = 0; k < opts.band_components; ++k)
        partials.push_back(
            {recipe.band_lo_hz + (recipe.band_hi_hz - recipe.band_lo_hz) * rng.Uniform(),
             2.0 * std::numbers::pi * rng.Uniform(),
             1.0 / std::sqrt(static_cast<double>(opts.band_components) / 2.0)});
    double norm = 0.0;
    for (const auto &p : partials) norm += p.amp;
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(cursor + i) / rate;
      double v = 0.0;
      for (const auto &p : partials)
        v += p.amp * std::sin(2.0 * std::numbers::pi * p.freq * t + p.phase);
      v = gain * v / norm + opts.noise_floor * (2.0 * rng.Uniform() - 1.0);
      u.audio.samples.push_back(v);
    }
    cursor += len;
    u.labels.push_back(recipe.label);
    u.end_times_s.push_back(static_cast<double>(cursor) / rate);
  }
  return u;
}

/// Labels every feature frame with the class of the segment containing the
/// frame's centre.
inline LabeledFrames LabelFrames(const FeatureMatrix &f, const std::vector<std::string> &labels,
                                 const std::vector<double> &end_times_s,
                                 const ClassInventory &inventory) {
  LabeledFrames out;
  out.features = f.frames;
  out.labels.resize(f.num_frames());
  std::size_t seg = 0;
  for (std::size_t i = 0; i < f.num_frames(); ++i) {
    const double centre = f.frame_centre_time(i);
    while (seg + 1 < end_times_s.size() && centre >= end_times_s[seg]) ++seg;
    out.labels[i] = inventory.Index(LabelClass(labels[seg]));
  }
  return out;
}

inline void AppendFrames(LabeledFrames &dst, const LabeledFrames &src) {
  if (dst.features.empty()) {
    dst = src;
    return;
  }
  Matrix merged(dst.features.rows() + src.features.rows(), dst.features.cols());
  std::copy(dst.features.data().begin(), dst.features.data().end(), merged.data().begin());
  std::copy(src.features.data().begin(), src.features.data().end(),
            merged.data().begin() + static_cast<std::ptrdiff_t>(dst.features.data().size()));
  dst.features = std::move(merged);
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
}

/// Features and frame labels of `count` utterances drawn from seeds
/// base_seed, base_seed + 1, ...
inline LabeledFrames SyntheticTrainingSet(std::uint64_t base_seed, std::size_t count,
                                          const std::vector<SegmentRecipe> &recipes,
                                          const MfccOptions &mfcc = {},
                                          const SyntheticOptions &opts = {}) {
  const auto inventory = RecipeInventory(recipes);
  LabeledFrames all;
  for (std::size_t i = 0; i < count; ++i) {
    const auto u = GenerateUtterance(base_seed + i, recipes, opts);
    const auto f = Mfcc(u.audio, mfcc);
    AppendFrames(all, LabelFrames(f, u.labels, u.end_times_s, inventory));
  }
  return all;
}

}  // namespace ensalign

#endif  // ENSALIGN_SYNTHETIC_HPP
