#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "support.hpp"

namespace memebot {
namespace {

using testing::desk_catalog;
using testing::full_catalog;
using testing::TempDir;

std::vector<MemeSample> numbered(std::size_t n) {
  std::vector<MemeSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({i % 2, "caption " + std::to_string(i)});
  return out;
}

TEST(Catalog, LoadsDeskAndFullCatalogs) {
  const auto desk = desk_catalog();
  EXPECT_EQ(desk.size(), 8u);
  const auto full = full_catalog();
  EXPECT_EQ(full.size(), 24u);
  for (const auto& e : full.entries()) {
    EXPECT_FALSE(e.image_paths.empty());
    for (const auto& p : e.image_paths) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  }
}

TEST(Catalog, NameLookupIgnoresCaseAndSpacing) {
  const auto c = desk_catalog();
  const auto id = c.find("Success Kid");
  ASSERT_TRUE(id);
  EXPECT_EQ(c.find("  success   KID "), id);
  EXPECT_FALSE(c.find("Nonexistent"));
  EXPECT_EQ(c[*id].token, "<success_kid>");
  try {
    c.require("Nonexistent");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownTemplate);
  }
}

TEST(Catalog, RejectsDuplicatesAndImagelessEntries) {
  const auto img = data_dir() / "templates" / "success_kid_0.png";
  EXPECT_THROW(TemplateCatalog({{"A", "", {img}, {}, {}}, {"a", "", {img}, {}, {}}}), Error);
  EXPECT_THROW(TemplateCatalog({{"A", "", {img}, {}, {}}, {"B", "", {}, {}, {}}}), Error);
  EXPECT_THROW(TemplateCatalog({{"A", "", {img}, {}, {}}}), Error);
}

TEST(LoadCorpus, ParsesTheTableOneCaption) {
  const auto c = desk_catalog();
  const auto s = parse_corpus(R"({"template":"Success Kid","caption":"when you win your first fortnite game"})", c);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].template_id, *c.find("Success Kid"));
  EXPECT_EQ(s[0].caption, "when you win your first fortnite game");
}

TEST(LoadCorpus, NormalizesCaptions) {
  const auto c = desk_catalog();
  const auto s = parse_corpus("{\"template\":\"grumpy cat\",\"caption\":\"  I   HATE\\tMondays \"}\n", c);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].caption, "i hate mondays");
}

TEST(LoadCorpus, EmptyFileGivesEmptyList) {
  TempDir dir;
  write_file(dir / "empty.jsonl", "");
  EXPECT_TRUE(load_corpus(dir / "empty.jsonl", desk_catalog()).empty());
}

TEST(LoadCorpus, UnknownTemplateNamesLine) {
  try {
    parse_corpus(R"({"template":"Nonexistent","caption":"x"})", desk_catalog());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownTemplate);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(LoadCorpus, MalformedLinesReportLineNumber) {
  const auto c = desk_catalog();
  const std::string good = R"({"template":"Success Kid","caption":"ok"})";
  for (const std::string bad : {"not json", R"({"template":"Success Kid"})", R"({"template":1,"caption":"x"})",
                                R"({"template":"Success Kid","caption":"   "})", "[1,2]"}) {
    try {
      parse_corpus(good + "\n\n" + bad + "\n", c);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedLine) << bad;
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
  }
}

TEST(LoadCorpus, MissingFileIsIoError) {
  try {
    load_corpus("/nonexistent/corpus.jsonl", desk_catalog());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

TEST(LoadCorpus, ShippedCorpusRoundTripsThroughJsonl) {
  const auto c = desk_catalog();
  const auto samples = load_corpus(data_dir() / "corpus.jsonl", c);
  EXPECT_GE(samples.size(), 500u);
  EXPECT_EQ(parse_corpus(corpus_to_jsonl(samples, c), c), samples);
}

TEST(SplitCorpus, TenSamplesEightOneOne) {
  const auto s = split_corpus(numbered(10), {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.seed, 7u);
}

TEST(SplitCorpus, DeterministicUnderSeed) {
  const auto a = split_corpus(numbered(50), {0.8, 0.1, 0.1}, 7);
  const auto b = split_corpus(numbered(50), {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  const auto c = split_corpus(numbered(50), {0.8, 0.1, 0.1}, 8);
  EXPECT_NE(a.train, c.train);
}

TEST(SplitCorpus, ThreeSamplesOneEach) {
  // 3 x (0.34, 0.33, 0.33) = (1.02, 0.99, 0.99): floors (1, 0, 0), the two
  // 0.99 remainders take the two leftover items.
  const auto sizes = split_sizes(3, {0.34, 0.33, 0.33});
  EXPECT_EQ(sizes, (std::array<std::size_t, 3>{1, 1, 1}));
}

TEST(SplitCorpus, FullScaleSizesWithinOne) {
  const auto sizes = split_sizes(177942, {0.8, 0.1, 0.1});
  EXPECT_NEAR(static_cast<double>(sizes[0]), 142354.0, 1.0);
  EXPECT_NEAR(static_cast<double>(sizes[1]), 17794.0, 1.0);
  EXPECT_NEAR(static_cast<double>(sizes[2]), 17794.0, 1.0);
  EXPECT_EQ(sizes[0] + sizes[1] + sizes[2], 177942u);
}

TEST(SplitCorpus, PartitionIsDisjointAndComplete) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(300);
    const double a = rng.uniform(0.1, 0.8);
    const double b = rng.uniform(0.05, 1.0 - a - 0.05);
    const SplitRatios r{a, b, 1.0 - a - b};
    const auto s = split_corpus(numbered(n), r, trial);
    std::multiset<std::string> seen;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      for (const auto& m : *part) seen.insert(m.caption);
    }
    std::multiset<std::string> expected;
    for (const auto& m : numbered(n)) expected.insert(m.caption);
    EXPECT_EQ(seen, expected);
    EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - r.train * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s.validation.size()) - r.validation * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(s.test.size()) - r.test * n), 1.0);
  }
}

TEST(SplitCorpus, BadRatiosRejected) {
  for (const SplitRatios r : {SplitRatios{0.8, 0.1, 0.2}, SplitRatios{1.0, 0.0, 0.0}, SplitRatios{0.9, 0.2, -0.1}}) {
    try {
      split_corpus(numbered(5), r, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BadRatios);
    }
  }
}

TEST(CorpusStats, CountsEveryTemplate) {
  const auto c = testing::toy_catalog(4);
  const auto counts = corpus_stats({{0, "a"}, {0, "b"}, {0, "c"}, {1, "d"}}, c);
  EXPECT_EQ(counts, (std::vector<std::size_t>{3, 1, 0, 0}));
  EXPECT_EQ(corpus_stats({}, c), (std::vector<std::size_t>(4, 0)));
}

TEST(CorpusStats, SumsToCorpusSize) {
  const auto c = desk_catalog();
  const auto samples = load_corpus(data_dir() / "corpus.jsonl", c);
  const auto counts = corpus_stats(samples, c);
  std::size_t total = 0;
  for (auto n : counts) total += n;
  EXPECT_EQ(total, samples.size());
}

TEST(Sentiment, NoLexiconHitsScoresZero) {
  const SentimentLexicon lex({{"good", 1.9}});
  EXPECT_EQ(sentiment_score("the cat sat", lex), 0.0);
}

TEST(Sentiment, HandEvaluatedNormalization) {
  const SentimentLexicon lex({{"nice", 1.5}, {"bad", -2.0}});
  EXPECT_NEAR(sentiment_score("nice", lex), 1.5 / std::sqrt(1.5 * 1.5 + 15.0), 1e-12);
  EXPECT_NEAR(sentiment_score("nice", lex), 0.3612, 5e-5);
  EXPECT_NEAR(sentiment_score("bad", lex), -0.4588, 5e-5);
}

TEST(Sentiment, LookupIsCaseInsensitive) {
  const SentimentLexicon lex({{"Good", 1.9}});
  EXPECT_EQ(lex.valence("GOOD"), 1.9);
  EXPECT_EQ(lex.valence("unknown"), 0.0);
}

TEST(Sentiment, FilterKeepsNonNegativeInOrder) {
  const SentimentLexicon lex({{"good", 1.9}, {"terrible", -2.1}});
  EXPECT_EQ(filter_non_negative({"good day", "terrible loss"}, lex), std::vector<std::string>{"good day"});
  const std::vector<std::string> neutral = {"a b", "c d"};
  EXPECT_EQ(filter_non_negative(neutral, lex), neutral);
  EXPECT_TRUE(filter_non_negative({}, lex).empty());
}

TEST(Sentiment, FilterIsIdempotentSubsequence) {
  const auto lex = SentimentLexicon::load(data_dir() / "lexicon" / "sentiment.tsv");
  EXPECT_GE(lex.size(), 150u);
  const auto tweets = read_lines(data_dir() / "samples" / "tweets.txt");
  const auto once = filter_non_negative(tweets, lex);
  EXPECT_EQ(filter_non_negative(once, lex), once);
  EXPECT_LT(once.size(), tweets.size());
  auto it = tweets.begin();
  for (const auto& s : once) {
    it = std::find(it, tweets.end(), s);
    ASSERT_NE(it, tweets.end());
    ++it;
  }
}

TEST(Sentiment, MonotoneInPositiveWords) {
  const auto lex = SentimentLexicon::load(data_dir() / "lexicon" / "sentiment.tsv");
  std::string s = "terrible awful day";
  double prev = sentiment_score(s, lex);
  for (int i = 0; i < 6; ++i) {
    s += " amazing";
    const double next = sentiment_score(s, lex);
    EXPECT_GE(next, prev);
    prev = next;
  }
}

TEST(Sentiment, MalformedLexiconLine) {
  EXPECT_THROW(SentimentLexicon::parse("good\tnotanumber\n"), Error);
  EXPECT_THROW(SentimentLexicon::parse("good 1.0\n"), Error);
}

}  // namespace
}  // namespace memebot
