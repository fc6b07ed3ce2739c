// tests/test_lexicon.cpp

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

TEST(ParseDictionary, TwoVariantsOfOneHeadword) {
  const Lexicon lex = ParseDictionary("A  AH0\nA(2)  EY1");
  ASSERT_EQ(lex.size(), 1u);
  const auto *v = lex.Lookup("A");
  ASSERT_NE(v, nullptr);
  ASSERT_EQ(v->size(), 2u);
  EXPECT_EQ((*v)[0], Pronunciation({"AH0"}));
  EXPECT_EQ((*v)[1], Pronunciation({"EY1"}));
}

TEST(ParseDictionary, SkipsComments) {
  const Lexicon lex = ParseDictionary(";;; comment\nCAT  K AE1 T");
  ASSERT_EQ(lex.size(), 1u);
  const auto *v = lex.Lookup("cat");
  ASSERT_NE(v, nullptr);
  ASSERT_EQ(v->size(), 1u);
  EXPECT_EQ((*v)[0].size(), 3u);
}

TEST(ParseDictionary, HeadwordWithoutPronunciationNamesLine) {
  try {
    ParseDictionary("BAD\n");
    FAIL() << "expected an error";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedEntry);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(ParseDictionary, ToleratesCrlfBomAndBlankLines) {
  const Lexicon lex = ParseDictionary("\xEF\xBB\xBF" "CAT  K AE1 T\r\n\r\nDOG  D AO1 G\r\n");
  EXPECT_EQ(lex.size(), 2u);
  EXPECT_EQ((*lex.Lookup("DOG"))[0], Pronunciation({"D", "AO1", "G"}));
}

TEST(ParseDictionary, MalformedLineNumberCountsComments) {
  try {
    ParseDictionary(";;; a\n;;; b\nOK  O K\nLONELY\n");
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(ParseDictionary, RoundTripsThroughCanonicalForm) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> segs = {"AA1", "B", "K", "T", "IY0", "S", "Z"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    const int words = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int w = 0; w < words; ++w) {
      const int variants = std::uniform_int_distribution<int>(1, 3)(rng);
      for (int v = 0; v < variants; ++v) {
        text += "W" + std::to_string(w);
        if (v > 0) text += "(" + std::to_string(v + 1) + ")";
        text += " ";
        const int len = std::uniform_int_distribution<int>(1, 5)(rng);
        for (int s = 0; s < len; ++s)
          text += " " + segs[std::uniform_int_distribution<std::size_t>(0, segs.size() - 1)(rng)];
        text += "\n";
      }
    }
    const Lexicon a = ParseDictionary(text);
    const Lexicon b = ParseDictionary(SerializeDictionary(a));
    EXPECT_EQ(a, b);
  }
}

TEST(BuildPseudoLexicon, SingleFile) {
  const Lexicon lex = BuildPseudoLexicon({{"f1", {"l", "a", "s"}}});
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ((*lex.Lookup("f1"))[0], Pronunciation({"l", "a", "s"}));
}

TEST(BuildPseudoLexicon, TwoFiles) {
  EXPECT_EQ(BuildPseudoLexicon({{"f1", {"a"}}, {"f2", {"a", "b"}}}).size(), 2u);
}

TEST(BuildPseudoLexicon, ConflictingDuplicate) {
  try {
    BuildPseudoLexicon({{"f1", {"a"}}, {"f1", {"b"}}});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kConflict);
  }
}

TEST(BuildPseudoLexicon, EmptySequenceRejected) {
  EXPECT_THROW(BuildPseudoLexicon({{"f1", {}}}), Error);
}

TEST(BuildPseudoLexicon, ExpansionReproducesSegments) {
  const std::vector<std::pair<std::string, Pronunciation>> files = {
      {"s01_a", {"dh", "ah", "k", "ae", "t"}}, {"s01_b", {"s", "s", "t"}}, {"x", {"a"}}};
  const Lexicon lex = BuildPseudoLexicon(files);
  for (const auto &[id, segs] : files) {
    const Transcript t = PseudoTranscript(id);
    ASSERT_EQ(t.tokens, std::vector<std::string>({id}));
    EXPECT_EQ(ExpandTranscript(t, lex), segs);
  }
}

class ExpandTest : public ::testing::Test {
 protected:
  Lexicon lex = ParseDictionary("CAT  K AE1 T\nA  AH0\nA(2)  EY1\n");
};

TEST_F(ExpandTest, SingleToken) {
  EXPECT_EQ(ExpandTranscript({{"CAT"}, ""}, lex), std::vector<std::string>({"K", "AE1", "T"}));
}

TEST_F(ExpandTest, FirstVariantPolicy) {
  EXPECT_EQ(ExpandTranscript({{"A", "CAT"}, ""}, lex),
            std::vector<std::string>({"AH0", "K", "AE1", "T"}));
}

TEST_F(ExpandTest, IndexSelectedPolicy) {
  EXPECT_EQ(ExpandTranscript({{"A", "CAT"}, ""}, lex, VariantPolicy::Select({1, 0})),
            std::vector<std::string>({"EY1", "K", "AE1", "T"}));
  EXPECT_THROW(ExpandTranscript({{"A"}, ""}, lex, VariantPolicy::Select({5})), Error);
  EXPECT_THROW(ExpandTranscript({{"A"}, ""}, lex, VariantPolicy::Select({})), Error);
}

TEST_F(ExpandTest, OutOfVocabularyListsEveryMissingToken) {
  try {
    ExpandTranscript({{"DOG", "CAT", "EMU"}, "f"}, lex);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfVocabulary);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("DOG"), std::string::npos);
    EXPECT_NE(msg.find("EMU"), std::string::npos);
  }
}

TEST(Expand, EmptyLexiconNamesToken) {
  try {
    ExpandTranscript({{"DOG"}, ""}, Lexicon{});
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("DOG"), std::string::npos);
  }
}

TEST_F(ExpandTest, LengthIsSumOfPronunciationLengthsAndWordEndsTrackIt) {
  const auto ex = ExpandTranscriptWithWords({{"CAT", "A", "CAT"}, ""}, lex, VariantPolicy::First());
  EXPECT_EQ(ex.labels.size(), 7u);
  EXPECT_EQ(ex.word_ends, std::vector<std::size_t>({3, 4, 7}));
}

TEST_F(ExpandTest, TranscriptCaseIsFolded) {
  EXPECT_EQ(ExpandTranscript(ParseTranscript("cat\n", "x"), lex).size(), 3u);
}

TEST(LabelClass, StripsOnlyNumericPositionMarkers) {
  EXPECT_EQ(LabelClass("a#2"), "a");
  EXPECT_EQ(LabelClass("a"), "a");
  EXPECT_EQ(LabelClass("#"), "#");
  EXPECT_EQ(LabelClass("a#"), "a#");
  EXPECT_EQ(LabelClass("a#b"), "a#b");
}

TEST(DisambiguateRepeats, MarksRuns) {
  EXPECT_EQ(DisambiguateRepeats({"s", "s", "s", "t", "s"}),
            std::vector<std::string>({"s", "s#2", "s#3", "t", "s"}));
}

}  // namespace
}  // namespace ensalign
