// ensalign/lexicon.hpp

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

#ifndef ENSALIGN_LEXICON_HPP
#define ENSALIGN_LEXICON_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ensalign/common.hpp"

namespace ensalign {

using Pronunciation = std::vector<std::string>;

/// Headwords are folded to upper case (ASCII only; other bytes pass through).
inline std::string NormalizeHeadword(std::string_view word) {
  std::string out(word);
  for (char &c : out)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

/// Pronunciation dictionary in CMU layout.  Immutable once built, so it may be
/// shared between alignment workers without locking.
class Lexicon {
 public:
  /// Appends a variant; pronunciations must be non-empty.
  void Add(std::string_view headword, Pronunciation pron) {
    if (pron.empty())
      throw Error(ErrorCode::kMalformedEntry,
                  "empty pronunciation for " + std::string(headword));
    entries_[NormalizeHeadword(headword)].push_back(std::move(pron));
  }

  /// All variants in file order, or nullptr when the word is unknown.
  const std::vector<Pronunciation> *Lookup(std::string_view word) const {
    auto it = entries_.find(NormalizeHeadword(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool Contains(std::string_view word) const { return Lookup(word) != nullptr; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const std::map<std::string, std::vector<Pronunciation>> &entries() const {
    return entries_;
  }

  friend bool operator==(const Lexicon &, const Lexicon &) = default;

 private:
  std::map<std::string, std::vector<Pronunciation>> entries_;
};

namespace detail {

// "WORD(2)" -> "WORD"; anything else is returned untouched.
inline std::string_view StripVariantIndex(std::string_view headword) {
  if (headword.size() < 4 || headword.back() != ')') return headword;
  std::size_t open = headword.rfind('(');
  if (open == std::string_view::npos || open == 0) return headword;
  std::string_view digits = headword.substr(open + 1, headword.size() - open - 2);
  if (digits.empty()) return headword;
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c))) return headword;
  return headword.substr(0, open);
}

}  // namespace detail

/// Parses CMU-dictionary text.  Lines starting with ";;;" are comments and
/// blank lines are ignored.  A headword with no segments is an error.
inline Lexicon ParseDictionary(std::string_view text) {
  Lexicon lex;
  text = detail::StripBom(text);
  const auto lines = detail::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (line.starts_with(";;;")) continue;
    auto fields = detail::SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() == 1)
      throw Error(ErrorCode::kMalformedEntry,
                  "line " + std::to_string(i + 1) + ": headword '" + fields[0] +
                      "' has no pronunciation");
    std::string_view head = detail::StripVariantIndex(fields[0]);
    lex.Add(head, Pronunciation(fields.begin() + 1, fields.end()));
  }
  return lex;
}

/// Canonical text form: one line per variant, "WORD(n)" for n >= 2, two
/// spaces between headword and pronunciation as in the CMU distribution.
inline std::string SerializeDictionary(const Lexicon &lex) {
  std::string out;
  for (const auto &[word, prons] : lex.entries()) {
    for (std::size_t v = 0; v < prons.size(); ++v) {
      out += word;
      if (v > 0) out += "(" + std::to_string(v + 1) + ")";
      out += ' ';
      for (const auto &seg : prons[v]) {
        out += ' ';
        out += seg;
      }
      out += '\n';
    }
  }
  return out;
}

/// Builds a lexicon whose headwords are file identifiers and whose single
/// pronunciation is that file's segment string.  Used for corpora annotated
/// phonetically rather than orthographically.
inline Lexicon BuildPseudoLexicon(
    const std::vector<std::pair<std::string, Pronunciation>> &files) {
  std::map<std::string, Pronunciation> seen;
  Lexicon lex;
  for (const auto &[id, segments] : files) {
    if (segments.empty())
      throw Error(ErrorCode::kMalformedEntry,
                  "file '" + id + "' has an empty segment sequence");
    const std::string key = NormalizeHeadword(id);
    auto it = seen.find(key);
    if (it != seen.end()) {
      if (it->second != segments)
        throw Error(ErrorCode::kConflict,
                    "file id '" + id + "' given twice with different segments");
      continue;
    }
    seen.emplace(key, segments);
    lex.Add(id, segments);
  }
  return lex;
}

struct Transcript {
  std::vector<std::string> tokens;
  std::string source_id;
};

inline Transcript ParseTranscript(std::string_view text, std::string source_id) {
  return {detail::SplitWhitespace(detail::StripBom(text)), std::move(source_id)};
}

/// The transcript that pairs with a pseudo-lexicon entry: the file id itself.
inline Transcript PseudoTranscript(const std::string &file_id) {
  return {{file_id}, file_id};
}

struct VariantPolicy {
  enum class Kind { kFirst, kIndexSelected };
  Kind kind = Kind::kFirst;
  /// For kIndexSelected: 0-based variant index per token.
  std::vector<std::size_t> indices;

  static VariantPolicy First() { return {}; }
  static VariantPolicy Select(std::vector<std::size_t> idx) {
    return {Kind::kIndexSelected, std::move(idx)};
  }
};

/// Segment labels plus, per token, the index one past its last segment.
struct Expansion {
  std::vector<std::string> labels;
  std::vector<std::size_t> word_ends;
};

inline Expansion ExpandTranscriptWithWords(const Transcript &t,
                                           const Lexicon &lex,
                                           const VariantPolicy &policy) {
  std::vector<std::string> missing;
  for (const auto &tok : t.tokens)
    if (!lex.Contains(tok) &&
        std::find(missing.begin(), missing.end(), tok) == missing.end())
      missing.push_back(tok);
  if (!missing.empty()) {
    std::string msg = "tokens not in lexicon";
    if (!t.source_id.empty()) msg += " (" + t.source_id + ")";
    msg += ":";
    for (const auto &m : missing) msg += " " + m;
    throw Error(ErrorCode::kOutOfVocabulary, msg);
  }
  if (policy.kind == VariantPolicy::Kind::kIndexSelected &&
      policy.indices.size() != t.tokens.size())
    throw Error(ErrorCode::kConfig,
                "variant selection has " + std::to_string(policy.indices.size()) +
                    " indices for " + std::to_string(t.tokens.size()) + " tokens");

  Expansion out;
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    const auto &variants = *lex.Lookup(t.tokens[i]);
    std::size_t v = 0;
    if (policy.kind == VariantPolicy::Kind::kIndexSelected) {
      v = policy.indices[i];
      if (v >= variants.size())
        throw Error(ErrorCode::kConfig,
                    "variant " + std::to_string(v) + " requested for '" +
                        t.tokens[i] + "' which has " +
                        std::to_string(variants.size()));
    }
    out.labels.insert(out.labels.end(), variants[v].begin(), variants[v].end());
    out.word_ends.push_back(out.labels.size());
  }
  return out;
}

inline std::vector<std::string> ExpandTranscript(
    const Transcript &t, const Lexicon &lex,
    const VariantPolicy &policy = VariantPolicy::First()) {
  return ExpandTranscriptWithWords(t, lex, policy).labels;
}

// Position markers.  A label "a#2" is class "a" at a distinct position, which
// keeps adjacent repeats distinguishable under duplicate-removal collapse.

inline std::string_view LabelClass(std::string_view label) {
  std::size_t hash = label.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == label.size())
    return label;
  for (std::size_t i = hash + 1; i < label.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(label[i]))) return label;
  return label.substr(0, hash);
}

/// Marks the 2nd, 3rd, ... element of each run of identical adjacent labels.
inline std::vector<std::string> DisambiguateRepeats(
    const std::vector<std::string> &labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  std::size_t run = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0 && labels[i] == labels[i - 1]) {
      ++run;
      out.push_back(labels[i] + "#" + std::to_string(run));
    } else {
      run = 1;
      out.push_back(labels[i]);
    }
  }
  return out;
}

}  // namespace ensalign

#endif  // ENSALIGN_LEXICON_HPP
