// ensalign/wav.hpp

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

#ifndef ENSALIGN_WAV_HPP
#define ENSALIGN_WAV_HPP

#include <string>
#include <vector>

#include "ensalign/common.hpp"

namespace ensalign {

struct AudioBuffer {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

namespace detail {

inline std::uint32_t ReadLe32(std::string_view b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

inline std::uint16_t ReadLe16(std::string_view b, std::size_t off) {
  return static_cast<std::uint16_t>(
      static_cast<unsigned char>(b[off]) |
      static_cast<unsigned char>(b[off + 1]) << 8);
}

inline void AppendLe32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

inline void AppendLe16(std::string &out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
}

}  // namespace detail

/// Decodes a RIFF/WAVE file.  Only mono 16-bit PCM is accepted; anything
/// else is reported as unsupported rather than converted.
inline AudioBuffer DecodeWav(std::string_view bytes) {
  using detail::ReadLe16;
  using detail::ReadLe32;
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE")
    throw Error(ErrorCode::kUnsupportedAudio, "not a RIFF/WAVE file");

  bool have_fmt = false;
  AudioBuffer audio;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string_view id = bytes.substr(pos, 4);
    std::uint32_t size = ReadLe32(bytes, pos + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave the data size at 0 or 0xFFFFFFFF when streaming.
      if (id != "data")
        throw Error(ErrorCode::kUnsupportedAudio, "truncated chunk");
      size = static_cast<std::uint32_t>(bytes.size() - body);
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::kUnsupportedAudio, "short fmt chunk");
      std::uint16_t format = ReadLe16(bytes, body);
      std::uint16_t channels = ReadLe16(bytes, body + 2);
      std::uint32_t rate = ReadLe32(bytes, body + 4);
      std::uint16_t bits = ReadLe16(bytes, body + 14);
      if (format == 0xFFFE && size >= 26)
        format = ReadLe16(bytes, body + 24);  // WAVE_FORMAT_EXTENSIBLE subformat
      if (format != 1)
        throw Error(ErrorCode::kUnsupportedAudio,
                    "encoding " + std::to_string(format) + " is not PCM");
      if (channels != 1)
        throw Error(ErrorCode::kUnsupportedAudio,
                    std::to_string(channels) + " channels; mono required");
      if (bits != 16)
        throw Error(ErrorCode::kUnsupportedAudio,
                    std::to_string(bits) + "-bit samples; 16-bit required");
      if (rate == 0) throw Error(ErrorCode::kUnsupportedAudio, "zero sample rate");
      audio.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt)
        throw Error(ErrorCode::kUnsupportedAudio, "data chunk before fmt chunk");
      std::size_t count = size / 2;
      audio.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        auto raw = static_cast<std::int16_t>(ReadLe16(bytes, body + 2 * i));
        audio.samples[i] = raw / 32768.0;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorCode::kUnsupportedAudio, "no data chunk");
}

inline AudioBuffer ReadWav(const std::filesystem::path &path) {
  try {
    return DecodeWav(ReadFile(path));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

/// Mono 16-bit PCM encoding; samples are clipped to [-1, 1].
inline std::string EncodeWav(const AudioBuffer &audio) {
  const auto n = static_cast<std::uint32_t>(audio.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  detail::AppendLe32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  detail::AppendLe32(out, 16);
  detail::AppendLe16(out, 1);
  detail::AppendLe16(out, 1);
  detail::AppendLe32(out, static_cast<std::uint32_t>(audio.sample_rate));
  detail::AppendLe32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  detail::AppendLe16(out, 2);
  detail::AppendLe16(out, 16);
  out += "data";
  detail::AppendLe32(out, 2 * n);
  for (double s : audio.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    auto v = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)));
    detail::AppendLe16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

}  // namespace ensalign

#endif  // ENSALIGN_WAV_HPP
