#ifndef MEMEBOT_MODELS_GENERATOR_HPP
#define MEMEBOT_MODELS_GENERATOR_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memebot/catalog.hpp"
#include "memebot/error.hpp"
#include "memebot/models/transformer.hpp"
#include "memebot/neural/autograd.hpp"
#include "memebot/neural/layers.hpp"
#include "memebot/text.hpp"

namespace memebot {

/// MT2MC conditions on the template alone; SMT2MC also sees the content
/// words of the input sentence.
enum class Variant { MT2MC, SMT2MC };

inline std::string_view variant_name(Variant v) { return v == Variant::MT2MC ? "MT2MC" : "SMT2MC"; }

inline Variant parse_variant(std::string_view name) {
  const auto key = to_upper(name);
  if (key == "MT2MC") return Variant::MT2MC;
  if (key == "SMT2MC") return Variant::SMT2MC;
  throw Error(Errc::ConfigError, "unknown variant '" + std::string(name) + "'");
}

/// Transformer encoder-decoder caption model. With tied embeddings the one
/// token table serves the encoder input, the decoder input and the output
/// projection.
class CaptionGenerator {
 public:
  CaptionGenerator(Variant variant, const ModelConfig& config, std::uint64_t seed)
      : variant_(variant), config_(config) {
    config_.validate();
    Rng rng(seed);
    embedding_ = nn::parameter(
        nn::normal_tensor({config_.vocab_size, config_.d_model}, 1.0 / std::sqrt(static_cast<double>(config_.d_model)), rng));
    for (std::size_t i = 0; i < config_.layers; ++i) encoder_.emplace_back(config_, rng);
    for (std::size_t i = 0; i < config_.layers; ++i) decoder_.emplace_back(config_, rng);
    if (!config_.tie_embeddings) output_ = nn::Linear(config_.d_model, config_.vocab_size, rng);
    positions_ = nn::sinusoidal_encoding(config_.max_len, config_.d_model);
  }

  CaptionGenerator(const CaptionGenerator&) = delete;
  CaptionGenerator& operator=(const CaptionGenerator&) = delete;
  CaptionGenerator(CaptionGenerator&&) = default;
  CaptionGenerator& operator=(CaptionGenerator&&) = default;

  Variant variant() const { return variant_; }
  const ModelConfig& config() const { return config_; }
  const std::vector<EncoderLayer>& encoder_layers() const { return encoder_; }
  const std::vector<DecoderLayer>& decoder_layers() const { return decoder_; }

  /// Scaled token embeddings plus positions, the input to either stack.
  nn::Var embed(std::span<const TokenId> ids, const nn::ForwardContext& ctx) const {
    return embed_tokens(embedding_, ids, positions_, ctx);
  }

  /// Encoder output M over the source ids, shape (source_len, d_model).
  nn::Var encode(std::span<const TokenId> source, const nn::ForwardContext& ctx) const {
    if (source.empty()) throw Error(Errc::EmptyInput, "encoder source is empty");
    if (source.size() > config_.max_len) {
      throw Error(Errc::PrefixTooLong, "source of " + std::to_string(source.size()) + " tokens exceeds max_len");
    }
    auto x = embed(source, ctx);
    for (const auto& layer : encoder_) x = layer(x, ctx);
    return x;
  }

  /// Decoder hidden states for every prefix position, shape (len, d_model).
  nn::Var decode(std::span<const TokenId> prefix, const nn::Var& memory, const nn::ForwardContext& ctx) const {
    if (prefix.empty()) throw Error(Errc::EmptyInput, "decoder prefix is empty");
    if (prefix.size() > config_.max_len) {
      throw Error(Errc::PrefixTooLong, "prefix of " + std::to_string(prefix.size()) + " tokens exceeds max_len " +
                                           std::to_string(config_.max_len));
    }
    const auto causal = nn::AttentionMask::causal(prefix.size());
    auto x = embed(prefix, ctx);
    for (const auto& layer : decoder_) x = layer(x, memory, causal, ctx);
    return x;
  }

  /// Vocabulary logits for each row of `hidden`.
  nn::Var project(const nn::Var& hidden) const {
    if (config_.tie_embeddings) return nn::matmul_nt(hidden, embedding_);
    return output_(hidden);
  }

  nn::NamedParameters parameters() const {
    nn::NamedParameters out;
    out.emplace_back("embedding", embedding_);
    for (std::size_t i = 0; i < encoder_.size(); ++i) encoder_[i].collect("encoder." + std::to_string(i), out);
    for (std::size_t i = 0; i < decoder_.size(); ++i) decoder_[i].collect("decoder." + std::to_string(i), out);
    if (!config_.tie_embeddings) output_.collect("output", out);
    return out;
  }

 private:
  Variant variant_;
  ModelConfig config_;
  nn::Var embedding_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  nn::Linear output_;
  nn::Tensor positions_;
};

/// Encoder input: the template token, then (SMT2MC only) the content words,
/// clipped to max_len.
inline TokenSequence generator_source(TemplateId template_id, std::span<const TokenId> content, Variant variant,
                                      const Vocabulary& vocab, std::size_t max_len) {
  if (variant == Variant::MT2MC && !content.empty()) {
    throw Error(Errc::VariantMismatch, "MT2MC takes no sentence tokens");
  }
  TokenSequence src{vocab.template_token(template_id)};
  for (TokenId id : content) {
    if (src.size() >= max_len) break;
    src.push_back(id);
  }
  return src;
}

/// The encoder output M for one (template, content words) input.
struct MemeEmbedding {
  nn::Tensor matrix;  // (source_len, d_model)

  std::size_t source_len() const { return matrix.rows(); }
};

inline MemeEmbedding encode_meme(TemplateId template_id, std::span<const TokenId> content,
                                 const CaptionGenerator& generator, const Vocabulary& vocab) {
  const auto src = generator_source(template_id, content, generator.variant(), vocab, generator.config().max_len);
  nn::NoGradGuard no_grad;
  return {generator.encode(src, nn::ForwardContext{})->value};
}

/// Next-token logits after `prefix` (which starts with BOS).
inline std::vector<float> decoder_logits(std::span<const TokenId> prefix, const MemeEmbedding& meme,
                                         const CaptionGenerator& generator) {
  if (prefix.empty() || prefix.front() != Vocabulary::kBos) {
    throw Error(Errc::EmptyInput, "decoder prefix must start with BOS");
  }
  nn::NoGradGuard no_grad;
  const nn::ForwardContext ctx{};
  auto hidden = generator.decode(prefix, nn::constant(meme.matrix), ctx);
  auto last = generator.project(nn::select_row(hidden, prefix.size() - 1));
  return last->value.vec();
}

/// Logits for every prefix position at once, shape (len, vocab).
inline nn::Tensor decoder_logits_all(std::span<const TokenId> prefix, const MemeEmbedding& meme,
                                     const CaptionGenerator& generator) {
  nn::NoGradGuard no_grad;
  const nn::ForwardContext ctx{};
  return generator.project(generator.decode(prefix, nn::constant(meme.matrix), ctx))->value;
}

}  // namespace memebot

#endif  // MEMEBOT_MODELS_GENERATOR_HPP
