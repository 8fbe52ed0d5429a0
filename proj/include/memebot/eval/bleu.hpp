#ifndef MEMEBOT_EVAL_BLEU_HPP
#define MEMEBOT_EVAL_BLEU_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "memebot/error.hpp"

namespace memebot {

using Sentence = std::vector<std::string>;

struct BleuReport {
  std::array<double, 4> bleu{};       // bleu[n-1] is BLEU-n, percent
  std::array<double, 4> precision{};  // modified n-gram precision per order, after smoothing
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double brevity_penalty = 1.0;
  std::size_t hyp_length = 0;  // c
  std::size_t ref_length = 0;  // r
  std::size_t sentences = 0;
};

struct BleuOptions {
  std::size_t max_n = 4;
  bool smoothing = true;  // floor zero precisions at 1 / (2c); off gives BLEU = 0 on any miss
};

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const Sentence& s, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[std::vector<std::string>(s.begin() + i, s.begin() + i + n)];
  return counts;
}

}  // namespace detail

/// Corpus BLEU with one reference per hypothesis. Per order, clipped matches
/// and hypothesis n-gram totals are summed over the corpus. BLEU-n is the
/// geometric mean of orders 1..n times BP = exp(1 - r/c) when c < r.
/// An order with no n-grams on either side (short corpora) counts as 1.
inline BleuReport bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
                       const BleuOptions& opt = {}) {
  if (hypotheses.size() != references.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(hypotheses.size()) + " hypotheses vs " +
                                          std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw Error(Errc::EmptyCorpus, "BLEU needs at least one sentence pair");
  if (opt.max_n < 1 || opt.max_n > 4) throw Error(Errc::ConfigError, "max_n must be in 1..4");

  BleuReport rep;
  rep.sentences = hypotheses.size();
  std::array<std::size_t, 4> ref_totals{};
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    rep.hyp_length += hypotheses[i].size();
    rep.ref_length += references[i].size();
    for (std::size_t n = 1; n <= opt.max_n; ++n) {
      const auto h = detail::ngram_counts(hypotheses[i], n);
      const auto r = detail::ngram_counts(references[i], n);
      for (const auto& [gram, count] : h) {
        rep.totals[n - 1] += count;
        if (auto it = r.find(gram); it != r.end()) rep.matches[n - 1] += std::min(count, it->second);
      }
      for (const auto& [gram, count] : r) ref_totals[n - 1] += count;
    }
  }

  const double c = static_cast<double>(rep.hyp_length);
  const double r = static_cast<double>(rep.ref_length);
  if (c == 0.0) {
    rep.brevity_penalty = r == 0.0 ? 1.0 : 0.0;
  } else if (c < r) {
    rep.brevity_penalty = std::exp(1.0 - r / c);
  }

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= opt.max_n; ++n) {
    double p;
    if (rep.totals[n - 1] == 0 && ref_totals[n - 1] == 0) {
      p = 1.0;
    } else if (rep.matches[n - 1] > 0) {
      p = static_cast<double>(rep.matches[n - 1]) / static_cast<double>(rep.totals[n - 1]);
    } else if (opt.smoothing && c > 0.0) {
      p = 1.0 / (2.0 * c);
    } else {
      p = 0.0;
    }
    rep.precision[n - 1] = p;
    if (p == 0.0) zero = true;
    if (!zero) log_sum += std::log(p);
    rep.bleu[n - 1] = zero ? 0.0 : 100.0 * rep.brevity_penalty * std::exp(log_sum / static_cast<double>(n));
  }
  return rep;
}

}  // namespace memebot

#endif  // MEMEBOT_EVAL_BLEU_HPP
