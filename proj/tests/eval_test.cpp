#include <gtest/gtest.h>

#include <cmath>

#include "criteria.hpp"
#include "support.hpp"

namespace memebot {
namespace {

using testing::error_code;

TEST(Bleu, IdenticalCorporaScoreHundred) {
  const std::vector<Sentence> c = {{"a", "b", "c", "d", "e"}, {"x", "y", "z", "w"}};
  const auto r = bleu(c, c);
  for (double b : r.bleu) EXPECT_NEAR(b, 100.0, 1e-9);
  EXPECT_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, ClippedUnigramExample) {
  const auto r = bleu({{"the", "the", "the"}}, {{"the", "cat"}}, {1, true});
  EXPECT_EQ(r.matches[0], 1u);
  EXPECT_EQ(r.totals[0], 3u);
  EXPECT_EQ(r.brevity_penalty, 1.0);
  EXPECT_NEAR(r.bleu[0], 100.0 / 3.0, 1e-9);
}

TEST(Bleu, BrevityPenaltyExample) {
  const auto r = bleu({{"the", "cat"}}, {{"the", "cat", "sat", "on"}}, {1, true});
  EXPECT_NEAR(r.brevity_penalty, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(r.bleu[0], 36.79, 5e-3);
}

TEST(Bleu, CorpusLevelSumsCounts) {
  // Sentence 1: 2/2 unigrams; sentence 2: 0/2. Corpus p1 = 2/4, not the
  // mean of sentence scores.
  const auto r = bleu({{"a", "b"}, {"c", "d"}}, {{"a", "b"}, {"e", "f"}}, {1, true});
  EXPECT_NEAR(r.bleu[0], 50.0, 1e-9);
}

TEST(Bleu, SmoothingOnlyTouchesZeroOrders) {
  const std::vector<Sentence> hyp = {{"a", "b", "x", "y"}};
  const std::vector<Sentence> ref = {{"a", "b", "c", "d"}};
  const auto smooth = bleu(hyp, ref);
  const auto strict = bleu(hyp, ref, {4, false});
  EXPECT_NEAR(smooth.precision[0], 0.5, 1e-12);
  EXPECT_NEAR(smooth.precision[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(smooth.precision[2], 1.0 / 8.0, 1e-12);
  EXPECT_GT(smooth.bleu[3], 0.0);
  EXPECT_EQ(strict.bleu[2], 0.0);
  EXPECT_EQ(strict.bleu[3], 0.0);
  EXPECT_NEAR(strict.bleu[1], smooth.bleu[1], 1e-12);
}

TEST(Bleu, MonotoneInCorrectTokens) {
  const Sentence ref = {"one", "does", "not", "simply", "walk", "into", "mordor"};
  Sentence hyp = {"x1", "x2", "x3", "x4", "x5", "x6", "x7"};
  double prev = bleu({hyp}, {ref}).bleu[3];
  for (std::size_t i = 0; i < ref.size(); ++i) {
    hyp[i] = ref[i];
    const double next = bleu({hyp}, {ref}).bleu[3];
    EXPECT_GE(next, prev);
    prev = next;
  }
  EXPECT_NEAR(prev, 100.0, 1e-9);
}

TEST(Bleu, Errors) {
  EXPECT_EQ(error_code([] { bleu({}, {}); }), Errc::EmptyCorpus);
  EXPECT_EQ(error_code([] { bleu({{"a"}}, {}); }), Errc::LengthMismatch);
  EXPECT_EQ(error_code([] { bleu({{"a"}}, {{"a"}}, {5, true}); }), Errc::ConfigError);
}

TEST(Kappa, ContingencyExample) {
  const auto k = cohen_kappa(criteria::contingency(20, 5, 10, 15));
  EXPECT_NEAR(k.p_o, 0.7, 1e-12);
  EXPECT_NEAR(k.p_e, 0.5, 1e-12);
  EXPECT_NEAR(k.kappa, 0.4, 1e-12);
  EXPECT_EQ(k.n, 50u);
}

TEST(Kappa, PerfectAndChanceAgreement) {
  EXPECT_EQ(cohen_kappa(criteria::contingency(7, 0, 0, 5)).kappa, 1.0);
  EXPECT_NEAR(cohen_kappa(criteria::contingency(1, 1, 1, 1)).kappa, 0.0, 1e-12);
  EXPECT_LT(cohen_kappa(criteria::contingency(0, 5, 5, 0)).kappa, 0.0);
}

TEST(Kappa, ConstantRatersAreDegenerate) {
  const auto k = cohen_kappa(criteria::contingency(6, 0, 0, 0));
  EXPECT_TRUE(k.degenerate);
  EXPECT_EQ(k.kappa, 1.0);
  EXPECT_EQ(error_code([] { cohen_kappa(std::vector<std::pair<int, int>>{}); }), Errc::EmptyInput);
}

TEST(Kappa, MultiLabel) {
  // Labels 1..4; diagonal of 2 each plus two off-diagonal pairs.
  std::vector<std::pair<int, int>> p = {{1, 1}, {1, 1}, {2, 2}, {2, 2}, {3, 3}, {3, 3}, {4, 4}, {4, 4}, {1, 2}, {3, 4}};
  const auto k = cohen_kappa(p);
  EXPECT_NEAR(k.p_o, 0.8, 1e-12);
  // Marginals a: 3,2,3,2; b: 2,3,2,3 -> p_e = (6+6+6+6)/100.
  EXPECT_NEAR(k.p_e, 0.24, 1e-12);
  EXPECT_NEAR(k.kappa, (0.8 - 0.24) / 0.76, 1e-12);
}

TEST(Ratings, AveragesTwoRaters) {
  const std::vector<RatingRecord> recs = {{"m1", "r1", 3, 2, true}, {"m1", "r2", 4, 3, false},
                                          {"m2", "r1", 1, 1, false}, {"m2", "r2", 2, 4, false}};
  const auto s = aggregate_ratings(recs);
  ASSERT_EQ(s.per_meme.size(), 2u);
  EXPECT_EQ(s.per_meme[0].coherence, 3.5);
  EXPECT_EQ(s.per_meme[0].relevance, 2.5);
  EXPECT_EQ(s.coherence, (3.5 + 1.5) / 2.0);
  EXPECT_EQ(s.relevance, (2.5 + 2.5) / 2.0);
  EXPECT_EQ(s.user_likes, 0.25);
  EXPECT_EQ(s.memes, 2u);
}

TEST(Ratings, SingleRaterIsIncomplete) {
  const std::vector<RatingRecord> recs = {{"m1", "r1", 3, 2, true}, {"m1", "r2", 4, 3, false},
                                          {"m7", "r1", 1, 1, false}};
  try {
    aggregate_ratings(recs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IncompleteRatings);
    EXPECT_NE(std::string(e.what()).find("m7"), std::string::npos);
  }
  EXPECT_EQ(error_code([&] { rating_pairs(recs, RatingMetric::Likes); }), Errc::IncompleteRatings);
}

TEST(Ratings, ParsesCsv) {
  const auto recs = parse_ratings_csv("meme_id,rater_id,coherence,relevance,likes\nm1,a,3,4,1\r\nm1,b,2,1,0\n\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].coherence, 3);
  EXPECT_TRUE(recs[0].likes);
  EXPECT_EQ(recs[1].rater_id, "b");
}

TEST(Ratings, RejectsMalformedRows) {
  const std::string header = "meme_id,rater_id,coherence,relevance,likes\n";
  for (const std::string bad : {"m1,a,5,1,0", "m1,a,0,1,0", "m1,a,1,1,2", "m1,a,1,1", ",a,1,1,0", "m1,a,x,1,0"}) {
    try {
      parse_ratings_csv(header + bad + "\n");
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedLine) << bad;
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
  EXPECT_EQ(error_code([] { parse_ratings_csv("m1,a,1,1,0\n"); }), Errc::MalformedLine);
  EXPECT_EQ(error_code([] { parse_ratings_csv(""); }), Errc::MalformedLine);
}

TEST(Ratings, ShippedSampleLikesKappa) {
  const auto recs = load_ratings(data_dir() / "samples" / "ratings.csv");
  const auto k = cohen_kappa(rating_pairs(recs, RatingMetric::Likes));
  EXPECT_NEAR(k.kappa, 0.4, 1e-12);
}

TEST(Ratings, Histogram) {
  const std::vector<RatingRecord> recs = {{"m1", "a", 3, 2, true}, {"m1", "b", 4, 2, false},
                                          {"m2", "a", 1, 4, false}, {"m2", "b", 1, 4, false},
                                          {"m3", "a", 2, 1, false}, {"m3", "b", 1, 2, false}};
  const auto h = score_distribution(recs);
  EXPECT_EQ(h.coherence, (std::map<double, std::size_t>{{1.0, 1}, {1.5, 1}, {3.5, 1}}));
  EXPECT_EQ(h.relevance, (std::map<double, std::size_t>{{1.5, 1}, {2.0, 1}, {4.0, 1}}));
}

TEST(Ratings, MetricNames) {
  EXPECT_EQ(parse_rating_metric("Likes"), RatingMetric::Likes);
  EXPECT_EQ(parse_rating_metric("coherence"), RatingMetric::Coherence);
  EXPECT_EQ(error_code([] { parse_rating_metric("fun"); }), Errc::ConfigError);
}

TEST(MetricOracles, AllHold) {
  const auto r = criteria::metric_oracles();
  EXPECT_TRUE(r.pass) << r.detail;
}

}  // namespace
}  // namespace memebot
