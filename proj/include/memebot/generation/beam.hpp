#ifndef MEMEBOT_GENERATION_BEAM_HPP
#define MEMEBOT_GENERATION_BEAM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memebot/catalog.hpp"
#include "memebot/error.hpp"
#include "memebot/models/generator.hpp"
#include "memebot/neural/tensor.hpp"
#include "memebot/text.hpp"

namespace memebot {

struct DecodeParams {
  std::size_t beam_size = 6;
  double alpha = 0.7;
  std::size_t max_len = 32;
  std::optional<TemplateId> forced_template;

  void validate() const {
    if (beam_size < 1) throw Error(Errc::ConfigError, "beam_size must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(Errc::ConfigError, "alpha must be a finite value >= 0");
    if (max_len < 1) throw Error(Errc::ConfigError, "max_len must be >= 1");
  }
};

struct BeamHypothesis {
  TokenSequence tokens;  // starts with BOS
  double log_prob = 0.0;
  bool finished = false;

  /// Generated tokens, EOS included, BOS excluded.
  std::size_t length() const { return tokens.empty() ? 0 : tokens.size() - 1; }
};

/// Outcome of a decode. `tokens` excludes BOS and ends with EOS when the
/// hypothesis finished before max_len.
struct DecodeResult {
  TokenSequence tokens;
  double log_prob = 0.0;
  double score = 0.0;  // log_prob / length_penalty
  bool finished = false;
};

/// ((5 + length) / 6)^alpha
inline double length_penalty(std::size_t length, double alpha) {
  return std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

/// Next-token log-probabilities after a BOS-led prefix. Entries equal to
/// -inf are never expanded.
using StepScorer = std::function<std::vector<double>(std::span<const TokenId>)>;

namespace detail {

inline DecodeResult to_result(const BeamHypothesis& h, double alpha) {
  DecodeResult r;
  r.tokens.assign(h.tokens.begin() + 1, h.tokens.end());
  r.log_prob = h.log_prob;
  r.score = h.log_prob / length_penalty(std::max<std::size_t>(h.length(), 1), alpha);
  r.finished = h.finished;
  return r;
}

/// Final ranking: score desc, then shorter, then lexicographically smaller.
inline bool better(const DecodeResult& a, const DecodeResult& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

}  // namespace detail

/// Beam search with a finished pool. Each step expands every live
/// hypothesis and scans candidates best-first (ties: smaller token id, then
/// earlier parent). EOS candidates met during the scan retire to the pool;
/// the scan stops once `beam_size` unfinished candidates are kept. Search
/// ends when the pool holds `beam_size` hypotheses, the beam empties, or
/// `max_len` tokens have been generated. Only in the last case do live
/// hypotheses join the pool unfinished, so every result either ends with EOS
/// or has exactly max_len tokens.
inline DecodeResult beam_search(const StepScorer& scorer, TokenId bos, TokenId eos, const DecodeParams& params) {
  params.validate();
  struct Candidate {
    double log_prob;
    TokenId token;
    std::size_t parent;
  };
  std::vector<BeamHypothesis> live{{{bos}, 0.0, false}};
  std::vector<BeamHypothesis> pool;
  std::vector<Candidate> cands;
  std::size_t step = 0;
  for (; step < params.max_len && !live.empty() && pool.size() < params.beam_size; ++step) {
    cands.clear();
    for (std::size_t p = 0; p < live.size(); ++p) {
      const auto lp = scorer(live[p].tokens);
      for (std::size_t t = 0; t < lp.size(); ++t) {
        if (lp[t] == -std::numeric_limits<double>::infinity() || std::isnan(lp[t])) continue;
        cands.push_back({live[p].log_prob + lp[t], static_cast<TokenId>(t), p});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (a.token != b.token) return a.token < b.token;
      return a.parent < b.parent;
    });
    std::vector<BeamHypothesis> next;
    for (const auto& c : cands) {
      if (next.size() >= params.beam_size) break;
      BeamHypothesis h{live[c.parent].tokens, c.log_prob, c.token == eos};
      h.tokens.push_back(c.token);
      if (h.finished) {
        pool.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  if (step == params.max_len) {
    for (auto& h : live) pool.push_back(std::move(h));
  }
  if (pool.empty()) return {};
  auto best = detail::to_result(pool.front(), params.alpha);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    auto r = detail::to_result(pool[i], params.alpha);
    if (detail::better(r, best)) best = std::move(r);
  }
  return best;
}

/// Argmax at each step (ties: smaller token id); stops on EOS or max_len.
inline DecodeResult greedy_decode(const StepScorer& scorer, TokenId bos, TokenId eos, std::size_t max_len) {
  BeamHypothesis h{{bos}, 0.0, false};
  while (h.length() < max_len) {
    const auto lp = scorer(h.tokens);
    std::size_t arg = lp.size();
    for (std::size_t t = 0; t < lp.size(); ++t) {
      if (std::isnan(lp[t]) || lp[t] == -std::numeric_limits<double>::infinity()) continue;
      if (arg == lp.size() || lp[t] > lp[arg]) arg = t;
    }
    if (arg == lp.size()) break;
    h.tokens.push_back(static_cast<TokenId>(arg));
    h.log_prob += lp[arg];
    if (static_cast<TokenId>(arg) == eos) {
      h.finished = true;
      break;
    }
  }
  return detail::to_result(h, 0.0);
}

/// Scorer over a trained generator. Reserved tokens other than EOS, and
/// template tokens, are never produced in captions.
inline StepScorer generator_scorer(const MemeEmbedding& meme, const CaptionGenerator& generator,
                                   const Vocabulary& vocab) {
  std::vector<TokenId> banned{Vocabulary::kPad, Vocabulary::kBos, Vocabulary::kUnk, Vocabulary::kMask};
  for (std::size_t i = 0; i < vocab.num_templates(); ++i) banned.push_back(vocab.template_token(i));
  return [&meme, &generator, banned](std::span<const TokenId> prefix) {
    auto logits = decoder_logits(prefix, meme, generator);
    for (TokenId id : banned) {
      if (static_cast<std::size_t>(id) < logits.size()) logits[static_cast<std::size_t>(id)] = -std::numeric_limits<float>::infinity();
    }
    return nn::log_softmax(logits);
  };
}

inline DecodeResult beam_search(const MemeEmbedding& meme, const CaptionGenerator& generator, const Vocabulary& vocab,
                                const DecodeParams& params) {
  return beam_search(generator_scorer(meme, generator, vocab), Vocabulary::kBos, Vocabulary::kEos, params);
}

inline DecodeResult greedy_decode(const MemeEmbedding& meme, const CaptionGenerator& generator,
                                  const Vocabulary& vocab, std::size_t max_len) {
  return greedy_decode(generator_scorer(meme, generator, vocab), Vocabulary::kBos, Vocabulary::kEos, max_len);
}

}  // namespace memebot

#endif  // MEMEBOT_GENERATION_BEAM_HPP
