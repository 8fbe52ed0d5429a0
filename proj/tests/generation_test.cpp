#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "criteria.hpp"
#include "support.hpp"

namespace memebot {
namespace {

using testing::error_code;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr TokenId kBos = Vocabulary::kBos, kEos = Vocabulary::kEos;
constexpr TokenId kA = 5, kB = 6;

/// Fixed next-token distributions keyed by prefix (over ids 0..6).
StepScorer table_scorer(std::map<TokenSequence, std::map<TokenId, double>> table) {
  return [table = std::move(table)](std::span<const TokenId> prefix) {
    std::vector<double> lp(7, kNegInf);
    const auto it = table.find(TokenSequence(prefix.begin(), prefix.end()));
    if (it == table.end()) {
      lp[kEos] = 0.0;
      return lp;
    }
    for (const auto& [t, p] : it->second) lp[static_cast<std::size_t>(t)] = std::log(p);
    return lp;
  };
}

StepScorer garden_path() {
  // Greedy takes a (0.6) and then never finishes as well as b -> EOS (0.36).
  return table_scorer({{{kBos}, {{kA, 0.6}, {kB, 0.4}}},
                       {{kBos, kA}, {{kA, 0.35}, {kB, 0.35}, {kEos, 0.3}}},
                       {{kBos, kB}, {{kA, 0.05}, {kB, 0.05}, {kEos, 0.9}}}});
}

TEST(LengthPenalty, WorkedExample) {
  EXPECT_NEAR(length_penalty(27, 0.7), 3.2278, 1e-4);
  EXPECT_EQ(length_penalty(27, 0.0), 1.0);
  EXPECT_EQ(length_penalty(1, 1.0), 1.0);
}

TEST(Beam, FindsHigherProbabilityThanGreedy) {
  const auto greedy = greedy_decode(garden_path(), kBos, kEos, 2);
  EXPECT_EQ(greedy.tokens, (TokenSequence{kA, kA}));
  EXPECT_FALSE(greedy.finished);
  DecodeParams p;
  p.beam_size = 2;
  p.alpha = 0.0;
  p.max_len = 2;
  const auto beam = beam_search(garden_path(), kBos, kEos, p);
  EXPECT_EQ(beam.tokens, (TokenSequence{kB, kEos}));
  EXPECT_TRUE(beam.finished);
  EXPECT_NEAR(beam.log_prob, std::log(0.36), 1e-12);
  EXPECT_GT(beam.log_prob, greedy.log_prob);
}

TEST(Beam, SizeOneMatchesGreedy) {
  for (std::size_t max_len : {1, 2, 3}) {
    DecodeParams p;
    p.beam_size = 1;
    p.alpha = 0.7;
    p.max_len = max_len;
    const auto beam = beam_search(garden_path(), kBos, kEos, p);
    const auto greedy = greedy_decode(garden_path(), kBos, kEos, max_len);
    EXPECT_EQ(beam.tokens, greedy.tokens);
    EXPECT_EQ(beam.log_prob, greedy.log_prob);
  }
}

TEST(Beam, TiesPreferSmallerTokenIds) {
  const auto uniform = [](std::span<const TokenId>) { return std::vector<double>(7, std::log(1.0 / 7.0)); };
  DecodeParams p;
  p.beam_size = 3;
  p.alpha = 0.0;
  p.max_len = 3;
  // Every hypothesis ties on log-probability, so ids 0 and 1 stay live while
  // the one-token EOS finishes first and wins on length.
  const auto r = beam_search(uniform, kBos, kEos, p);
  EXPECT_EQ(r.tokens, TokenSequence{kEos});
  EXPECT_EQ(greedy_decode(uniform, kBos, kEos, 3).tokens, (TokenSequence{0, 0, 0}));
}

TEST(Beam, AlphaFavorsLongerFinishedHypotheses) {
  // One-token EOS at p 0.5 vs three-token finish at p 0.4. Beam 3 keeps
  // [a, a] alive until it finishes.
  const auto scorer = table_scorer({{{kBos}, {{kEos, 0.5}, {kA, 0.5}}},
                                    {{kBos, kA}, {{kA, 0.8}, {kEos, 0.2}}},
                                    {{kBos, kA, kA}, {{kEos, 1.0}}}});
  DecodeParams p;
  p.beam_size = 3;
  p.max_len = 5;
  p.alpha = 0.0;
  EXPECT_EQ(beam_search(scorer, kBos, kEos, p).tokens, TokenSequence{kEos});
  p.alpha = 3.0;
  EXPECT_EQ(beam_search(scorer, kBos, kEos, p).tokens, (TokenSequence{kA, kA, kEos}));
}

TEST(Beam, ScoreIsLengthNormalized) {
  DecodeParams p;
  p.beam_size = 2;
  p.alpha = 0.7;
  p.max_len = 2;
  const auto r = beam_search(garden_path(), kBos, kEos, p);
  EXPECT_NEAR(r.score, r.log_prob / length_penalty(r.tokens.size(), 0.7), 1e-12);
}

TEST(Beam, ValidatesParams) {
  DecodeParams p;
  p.beam_size = 0;
  EXPECT_EQ(error_code([&] { beam_search(garden_path(), kBos, kEos, p); }), Errc::ConfigError);
  p.beam_size = 2;
  p.alpha = -1.0;
  EXPECT_EQ(error_code([&] { p.validate(); }), Errc::ConfigError);
  p.alpha = 0.5;
  p.max_len = 0;
  EXPECT_EQ(error_code([&] { p.validate(); }), Errc::ConfigError);
}

TEST(Beam, MatchesExhaustiveSearch) {
  const auto r = criteria::decode_oracle();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Beam, LengthContractOnRandomGenerators) {
  const auto r = criteria::decoding_contract();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(GeneratorScorer, BansReservedAndTemplateTokens) {
  const auto catalog = testing::desk_catalog();
  const auto vocab = build_vocab(load_corpus(data_dir() / "corpus.jsonl", catalog), catalog, 1);
  const CaptionGenerator gen(Variant::SMT2MC, criteria::tiny_model(vocab.size(), 16), 3);
  const auto meme = encode_meme(1, vocab.encode_tokens({"game"}), gen, vocab);
  const auto scorer = generator_scorer(meme, gen, vocab);
  const TokenSequence prefix = {kBos};
  const auto lp = scorer(prefix);
  for (TokenId id : {Vocabulary::kPad, Vocabulary::kBos, Vocabulary::kUnk, Vocabulary::kMask}) {
    EXPECT_EQ(lp[static_cast<std::size_t>(id)], kNegInf);
  }
  for (std::size_t t = 0; t < catalog.size(); ++t) EXPECT_EQ(lp[static_cast<std::size_t>(vocab.template_token(t))], kNegInf);
  EXPECT_GT(lp[kEos], kNegInf);
  double mass = 0.0;
  for (double v : lp) mass += std::exp(v);
  EXPECT_NEAR(mass, 1.0, 1e-9);
}

struct PipelineFixture {
  TemplateCatalog catalog = testing::desk_catalog();
  TagLexicon tags = testing::desk_tags();
  BitmapFont font = BitmapFont::load_default();
  Vocabulary vocab = build_vocab(load_corpus(data_dir() / "corpus.jsonl", catalog), catalog, 1);
  LoadedGenerator generator = decode_generator(encode_generator(
      CaptionGenerator(Variant::SMT2MC, criteria::tiny_model(vocab.size(), 16), 5), vocab, template_names(catalog), {}));
  LoadedSelector selector = decode_selector(encode_selector(
      TemplateSelector(criteria::tiny_model(vocab.size(), 16), catalog.size(), 6), vocab, template_names(catalog), {}));

  MemePipeline pipe(bool with_selector = true) const {
    return {catalog, with_selector ? &selector : nullptr, generator, tags, font};
  }
};

const PipelineFixture& pipeline() {
  static const PipelineFixture f;
  return f;
}

TEST(Pipeline, SelectorChoosesTopRankedTemplate) {
  const auto& f = pipeline();
  DecodeParams p;
  p.beam_size = 2;
  const auto m = generate_meme("please save the world from corona", f.pipe(), p, 0);
  ASSERT_EQ(m.ranking.size(), f.catalog.size());
  EXPECT_EQ(m.template_id, m.ranking.front().template_id);
  EXPECT_EQ(m.probability, m.ranking.front().probability);
  EXPECT_EQ(m.template_name, f.catalog[m.template_id].name);
  EXPECT_LE(m.caption_tokens.size(), 16u);
  EXPECT_GT(m.image.width, 0);
}

TEST(Pipeline, ForcedTemplateOverridesSelector) {
  const auto& f = pipeline();
  DecodeParams p;
  p.beam_size = 2;
  p.forced_template = f.catalog.require("Grumpy Cat");
  const auto m = generate_meme("i love mondays", f.pipe(), p, 0);
  EXPECT_EQ(m.template_name, "Grumpy Cat");
  const auto no_sel = generate_meme("i love mondays", f.pipe(false), p, 0);
  EXPECT_EQ(no_sel.caption, m.caption);
  EXPECT_TRUE(no_sel.ranking.empty());
}

TEST(Pipeline, DeterministicUnderSeed) {
  const auto& f = pipeline();
  DecodeParams p;
  p.beam_size = 3;
  const auto a = generate_meme("my code finally compiles", f.pipe(), p, 42);
  const auto b = generate_meme("my code finally compiles", f.pipe(), p, 42);
  EXPECT_EQ(a.caption, b.caption);
  EXPECT_EQ(a.image_index, b.image_index);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.image_index, Rng(42).below(f.catalog[a.template_id].image_paths.size()));
}

TEST(Pipeline, Errors) {
  const auto& f = pipeline();
  DecodeParams p;
  EXPECT_EQ(error_code([&] { generate_meme("   ", f.pipe(), p, 0); }), Errc::EmptyInput);
  EXPECT_EQ(error_code([&] { generate_meme("hi", f.pipe(false), p, 0); }), Errc::ConfigError);
  p.forced_template = f.catalog.size();
  EXPECT_EQ(error_code([&] { generate_meme("hi", f.pipe(), p, 0); }), Errc::UnknownTemplate);
}

TEST(Pipeline, Mt2mcIgnoresSentenceContent) {
  const auto& f = pipeline();
  const auto gen = decode_generator(encode_generator(
      CaptionGenerator(Variant::MT2MC, criteria::tiny_model(f.vocab.size(), 16), 8), f.vocab,
      template_names(f.catalog), {}));
  EXPECT_TRUE(sentence_content("please save the world", gen, f.tags).empty());
  DecodeParams p;
  p.beam_size = 2;
  const auto a = generate_caption("please save the world", 2, gen, f.tags, p);
  const auto b = generate_caption("my code finally compiles", 2, gen, f.tags, p);
  EXPECT_EQ(a.tokens, b.tokens);
}

}  // namespace
}  // namespace memebot
