// ensalign/common.hpp

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

#ifndef ENSALIGN_COMMON_HPP
#define ENSALIGN_COMMON_HPP

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ensalign {

/// Every failure raised by the library carries one of these codes so callers
/// (and the CLI summary) can tell error classes apart without string matching.
enum class ErrorCode {
  kMalformedEntry,
  kConflict,
  kOutOfVocabulary,
  kRepeatedLabel,
  kTooShort,
  kUnsupportedAudio,
  kShapeMismatch,
  kClassMismatch,
  kNonFinite,
  kRowSum,
  kDegenerateInventory,
  kEmptyClass,
  kInfeasible,
  kInventory,
  kTooLarge,
  kEnsembleMismatch,
  kRankInfeasible,
  kNonMonotone,
  kInvalidTextGrid,
  kParse,
  kCountMismatch,
  kEmptyInput,
  kConfig,
  kIo,
};

inline const char *ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedEntry: return "malformed-entry";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kOutOfVocabulary: return "out-of-vocabulary";
    case ErrorCode::kRepeatedLabel: return "repeated-label";
    case ErrorCode::kTooShort: return "too-short";
    case ErrorCode::kUnsupportedAudio: return "unsupported-audio";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kClassMismatch: return "class-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kRowSum: return "row-sum";
    case ErrorCode::kDegenerateInventory: return "degenerate-inventory";
    case ErrorCode::kEmptyClass: return "empty-class";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kInventory: return "inventory";
    case ErrorCode::kTooLarge: return "too-large";
    case ErrorCode::kEnsembleMismatch: return "ensemble-mismatch";
    case ErrorCode::kRankInfeasible: return "rank-infeasible";
    case ErrorCode::kNonMonotone: return "non-monotone";
    case ErrorCode::kInvalidTextGrid: return "invalid-textgrid";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kCountMismatch: return "count-mismatch";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Dense row-major matrix of doubles.  Only what the pipeline needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double> &data() const noexcept { return data_; }
  std::vector<double> &data() noexcept { return data_; }

  friend bool operator==(const Matrix &, const Matrix &) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline std::string FormatDouble(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

inline std::string FormatFixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::vector<std::string> SplitWhitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

/// Splits on '\n', dropping a trailing '\r' from each line.
inline std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::string_view StripBom(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  return text;
}

inline double ParseDouble(const std::string &s, ErrorCode code,
                          const std::string &context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    throw Error(code, context + ": not a number: '" + s + "'");
  }
  if (used != s.size())
    throw Error(code, context + ": not a number: '" + s + "'");
  return v;
}

/// Quotes a CSV field when it holds a separator, quote or newline.
inline std::string CsvField(std::string_view v) {
  if (v.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> ParseCsvRecord(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

/// Binomial coefficient as a double; exact for the small arguments used here.
inline double Choose(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

}  // namespace detail

inline std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes via a sibling temporary and renames it into place, so readers never
/// observe a half-written file.
inline void WriteFileAtomic(const std::filesystem::path &path,
                            std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string() + ": " +
                                    ec.message());
}

}  // namespace ensalign

#endif  // ENSALIGN_COMMON_HPP
