#ifndef MEMEBOT_MODELS_SELECTOR_HPP
#define MEMEBOT_MODELS_SELECTOR_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "memebot/catalog.hpp"
#include "memebot/error.hpp"
#include "memebot/models/transformer.hpp"
#include "memebot/neural/autograd.hpp"
#include "memebot/neural/layers.hpp"
#include "memebot/text.hpp"

namespace memebot {

/// Template classifier P(T | S): transformer encoder over the sentence,
/// mean-pooled, then a single linear layer to one logit per template.
class TemplateSelector {
 public:
  TemplateSelector(const ModelConfig& config, std::size_t num_templates, std::uint64_t seed)
      : config_(config), num_templates_(num_templates) {
    config_.validate();
    if (num_templates_ == 0) throw Error(Errc::ConfigError, "selector needs at least one template");
    Rng rng(seed);
    embedding_ = nn::parameter(
        nn::normal_tensor({config_.vocab_size, config_.d_model}, 1.0 / std::sqrt(static_cast<double>(config_.d_model)), rng));
    for (std::size_t i = 0; i < config_.layers; ++i) layers_.emplace_back(config_, rng);
    head_ = nn::Linear(config_.d_model, num_templates_, rng);
    positions_ = nn::sinusoidal_encoding(config_.max_len, config_.d_model);
  }

  TemplateSelector(const TemplateSelector&) = delete;
  TemplateSelector& operator=(const TemplateSelector&) = delete;
  TemplateSelector(TemplateSelector&&) = default;
  TemplateSelector& operator=(TemplateSelector&&) = default;

  const ModelConfig& config() const { return config_; }
  std::size_t num_templates() const { return num_templates_; }

  /// Sentence ids clipped to max_len; an empty sentence is rejected.
  std::vector<TokenId> prepare(std::span<const TokenId> ids) const {
    if (ids.empty()) throw Error(Errc::EmptyInput, "sentence has no tokens");
    const std::size_t n = std::min(ids.size(), config_.max_len);
    return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n)};
  }

  /// (1, num_templates) logits.
  nn::Var logits(std::span<const TokenId> ids, const nn::ForwardContext& ctx) const {
    const auto input = prepare(ids);
    auto x = embed_tokens(embedding_, input, positions_, ctx);
    for (const auto& layer : layers_) x = layer(x, ctx);
    return head_(nn::mean_rows(x));
  }

  std::vector<double> probabilities(std::span<const TokenId> ids) const {
    nn::NoGradGuard no_grad;
    auto out = logits(ids, nn::ForwardContext{});
    auto ls = nn::log_softmax(out->value.span());
    std::vector<double> p(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) p[i] = std::exp(ls[i]);
    return p;
  }

  nn::NamedParameters parameters() const {
    nn::NamedParameters out;
    out.emplace_back("embedding", embedding_);
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect("encoder." + std::to_string(i), out);
    head_.collect("head", out);
    return out;
  }

 private:
  ModelConfig config_;
  std::size_t num_templates_;
  nn::Var embedding_;
  std::vector<EncoderLayer> layers_;
  nn::Linear head_;
  nn::Tensor positions_;
};

struct TemplateScore {
  TemplateId template_id;
  double probability;
};

/// Full distribution over the catalog, most probable first; ties go to the
/// lower template id.
inline std::vector<TemplateScore> select_template(std::string_view sentence, const TemplateSelector& selector,
                                                  const Vocabulary& vocab, const TemplateCatalog& catalog) {
  if (selector.num_templates() != catalog.size()) {
    throw Error(Errc::ConfigError, "selector has " + std::to_string(selector.num_templates()) +
                                       " outputs but the catalog has " + std::to_string(catalog.size()));
  }
  const auto ids = vocab.encode(sentence);
  if (ids.empty()) throw Error(Errc::EmptyInput, "sentence has no tokens");
  const auto probs = selector.probabilities(ids);
  std::vector<TemplateScore> ranked;
  for (std::size_t i = 0; i < probs.size(); ++i) ranked.push_back({i, probs[i]});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const TemplateScore& a, const TemplateScore& b) { return a.probability > b.probability; });
  return ranked;
}

}  // namespace memebot

#endif  // MEMEBOT_MODELS_SELECTOR_HPP
