#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "symwsi/lemmatizer.hpp"

using namespace symwsi;

namespace {

const RuleLemmatizer& lem() {
  static const RuleLemmatizer l;
  return l;
}

// Random pronounceable stem plus a random inflectional suffix.
std::string random_inflection(std::mt19937_64& rng) {
  static const std::string consonants = "bcdfghjklmnprstvwz";
  static const std::string vowels = "aeiou";
  static const std::vector<std::string> suffixes = {"", "s", "es", "ies", "ed", "ied", "ing", "d", "ses", "ches", "ly"};
  std::string w;
  const int syllables = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < syllables; ++i) {
    w += consonants[rng() % consonants.size()];
    w += vowels[rng() % vowels.size()];
    if (rng() % 2) w += consonants[rng() % consonants.size()];
  }
  if (rng() % 4 == 0) w += w.back();  // doubled final letter
  w += suffixes[rng() % suffixes.size()];
  if (rng() % 10 == 0) w[0] = static_cast<char>(std::toupper(w[0]));
  return w;
}

}  // namespace

TEST(RuleLemmatizer, IrregularAndRegularExamples) {
  EXPECT_EQ(lem().lemmatize("booked"), "book");
  EXPECT_EQ(lem().lemmatize("booking"), "book");
  EXPECT_EQ(lem().lemmatize("sound"), "sound");
  EXPECT_EQ(lem().lemmatize("became"), "become");
  EXPECT_EQ(lem().lemmatize("was"), "be");
}

TEST(RuleLemmatizer, SuffixRules) {
  EXPECT_EQ(lem().lemmatize("sounds"), "sound");
  EXPECT_EQ(lem().lemmatize("sounded"), "sound");
  EXPECT_EQ(lem().lemmatize("studies"), "study");
  EXPECT_EQ(lem().lemmatize("tried"), "try");
  EXPECT_EQ(lem().lemmatize("boxes"), "box");
  EXPECT_EQ(lem().lemmatize("watches"), "watch");
  EXPECT_EQ(lem().lemmatize("glasses"), "glass");
  EXPECT_EQ(lem().lemmatize("cases"), "case");
  EXPECT_EQ(lem().lemmatize("stopped"), "stop");
  EXPECT_EQ(lem().lemmatize("running"), "run");
  EXPECT_EQ(lem().lemmatize("making"), "make");
  EXPECT_EQ(lem().lemmatize("liked"), "like");
  EXPECT_EQ(lem().lemmatize("smiling"), "smile");
  EXPECT_EQ(lem().lemmatize("loved"), "love");
  EXPECT_EQ(lem().lemmatize("played"), "play");
  EXPECT_EQ(lem().lemmatize("opened"), "open");
  EXPECT_EQ(lem().lemmatize("falling"), "fall");
  EXPECT_EQ(lem().lemmatize("felt"), "feel");
  EXPECT_EQ(lem().lemmatize("Thought"), "think");
}

TEST(RuleLemmatizer, LeavesUnknownPatternsLowercased) {
  EXPECT_EQ(lem().lemmatize("Harpsichord"), "harpsichord");
  EXPECT_EQ(lem().lemmatize("'d"), "'d");
  EXPECT_EQ(lem().lemmatize("1990s"), "1990s");
  EXPECT_EQ(lem().lemmatize("bus"), "bus");
  EXPECT_EQ(lem().lemmatize("need"), "need");
  EXPECT_EQ(lem().lemmatize("this"), "this");
}

TEST(RuleLemmatizer, PosHintRestrictsRules) {
  EXPECT_EQ(lem().lemmatize("building", Pos::noun), "building");
  EXPECT_EQ(lem().lemmatize("buildings", Pos::noun), "building");
  EXPECT_EQ(lem().lemmatize("building", Pos::verb), "build");
  EXPECT_EQ(lem().lemmatize("interesting", Pos::adjective), "interesting");
}

TEST(RuleLemmatizer, BundledTableRoundTrips) {
  const auto& table = bundled_exception_table();
  ASSERT_GT(table.size(), 300u);
  for (const auto& [form, lemma] : table) {
    EXPECT_EQ(lem().lemmatize(form), lemma) << form;
    EXPECT_EQ(lem().lemmatize(lemma), lemma) << lemma;
  }
}

TEST(RuleLemmatizer, IdempotentOnRandomInflections) {
  std::mt19937_64 rng(2018);
  for (int i = 0; i < 10000; ++i) {
    const std::string w = random_inflection(rng);
    const std::string once = lem().lemmatize(w);
    EXPECT_EQ(lem().lemmatize(once), once) << w;
  }
}

TEST(RuleLemmatizer, CustomTable) {
  std::istringstream in("# comment\nmice\tmouse\nmouse\tmouse\n");
  RuleLemmatizer custom(load_exception_table(in));
  EXPECT_EQ(custom.lemmatize("mice"), "mouse");
  // the bundled irregular forms are not present in a custom table
  EXPECT_EQ(custom.lemmatize("became"), "became");
}

TEST(RuleLemmatizer, MalformedTable) {
  std::istringstream in("mice mouse\n");
  EXPECT_THROW(load_exception_table(in), ParseError);
}

TEST(NullLemmatizer, Identity) {
  NullLemmatizer n;
  EXPECT_EQ(n.lemmatize("Booked"), "Booked");
}
