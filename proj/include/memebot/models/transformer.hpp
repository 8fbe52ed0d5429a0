#ifndef MEMEBOT_MODELS_TRANSFORMER_HPP
#define MEMEBOT_MODELS_TRANSFORMER_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "memebot/error.hpp"
#include "memebot/neural/autograd.hpp"
#include "memebot/neural/layers.hpp"
#include "memebot/text.hpp"

namespace memebot {

/// Transformer sizes. `layers` is N (per stack), `heads` is h.
struct ModelConfig {
  std::size_t layers = 2;
  std::size_t d_model = 128;
  std::size_t d_ff = 512;
  std::size_t heads = 4;
  double p_drop = 0.1;
  std::size_t vocab_size = 0;
  std::size_t max_len = 32;
  bool tie_embeddings = true;

  void validate() const {
    if (layers == 0 || d_model == 0 || d_ff == 0 || heads == 0 || vocab_size == 0 || max_len == 0) {
      throw Error(Errc::ConfigError, "model sizes must be positive");
    }
    if (d_model % heads != 0) throw Error(Errc::ConfigError, "d_model must be divisible by h");
    if (!(p_drop >= 0.0 && p_drop < 1.0)) throw Error(Errc::ConfigError, "P_drop must be in [0, 1)");
  }

  nlohmann::json to_json() const {
    return {{"N", layers},         {"d_model", d_model},         {"d_ff", d_ff},
            {"h", heads},          {"P_drop", p_drop},           {"vocab_size", vocab_size},
            {"max_len", max_len},  {"tie_embeddings", tie_embeddings}};
  }

  static ModelConfig from_json(const nlohmann::json& j) {
    ModelConfig c;
    try {
      c.layers = j.at("N").get<std::size_t>();
      c.d_model = j.at("d_model").get<std::size_t>();
      c.d_ff = j.at("d_ff").get<std::size_t>();
      c.heads = j.at("h").get<std::size_t>();
      c.p_drop = j.at("P_drop").get<double>();
      c.vocab_size = j.at("vocab_size").get<std::size_t>();
      c.max_len = j.value("max_len", std::size_t{32});
      c.tie_embeddings = j.value("tie_embeddings", true);
    } catch (const nlohmann::json::exception& ex) {
      throw Error(Errc::ConfigError, std::string("model config: ") + ex.what());
    }
    c.validate();
    return c;
  }

  bool operator==(const ModelConfig&) const = default;
};

/// Post-norm encoder block: LN(x + drop(SelfAttn(x))), LN(x + drop(FFN(x))).
struct EncoderLayer {
  nn::MultiHeadAttention self_attn;
  nn::FeedForward ff;
  nn::LayerNorm norm1, norm2;

  EncoderLayer() = default;
  EncoderLayer(const ModelConfig& c, Rng& rng)
      : self_attn(c.d_model, c.heads, rng), ff(c.d_model, c.d_ff, rng), norm1(c.d_model), norm2(c.d_model) {}

  nn::Var operator()(const nn::Var& x, const nn::ForwardContext& ctx) const {
    auto h = norm1(nn::add(x, ctx.drop(self_attn(x, x))));
    return norm2(nn::add(h, ctx.drop(ff(h))));
  }

  void collect(const std::string& prefix, nn::NamedParameters& out) const {
    self_attn.collect(prefix + ".self_attn", out);
    ff.collect(prefix, out);
    norm1.collect(prefix + ".norm1", out);
    norm2.collect(prefix + ".norm2", out);
  }
};

/// Post-norm decoder block with causal self-attention and cross-attention
/// over the encoder output.
struct DecoderLayer {
  nn::MultiHeadAttention self_attn, cross_attn;
  nn::FeedForward ff;
  nn::LayerNorm norm1, norm2, norm3;

  DecoderLayer() = default;
  DecoderLayer(const ModelConfig& c, Rng& rng)
      : self_attn(c.d_model, c.heads, rng),
        cross_attn(c.d_model, c.heads, rng),
        ff(c.d_model, c.d_ff, rng),
        norm1(c.d_model),
        norm2(c.d_model),
        norm3(c.d_model) {}

  nn::Var operator()(const nn::Var& x, const nn::Var& memory, const nn::AttentionMask& causal,
                     const nn::ForwardContext& ctx) const {
    auto h = norm1(nn::add(x, ctx.drop(self_attn(x, x, &causal))));
    h = norm2(nn::add(h, ctx.drop(cross_attn(h, memory))));
    return norm3(nn::add(h, ctx.drop(ff(h))));
  }

  void collect(const std::string& prefix, nn::NamedParameters& out) const {
    self_attn.collect(prefix + ".self_attn", out);
    cross_attn.collect(prefix + ".cross_attn", out);
    ff.collect(prefix, out);
    norm1.collect(prefix + ".norm1", out);
    norm2.collect(prefix + ".norm2", out);
    norm3.collect(prefix + ".norm3", out);
  }
};

/// Token embedding scaled by sqrt(d_model) plus sinusoidal positions, then
/// dropout.
inline nn::Var embed_tokens(const nn::Var& table, std::span<const TokenId> ids, const nn::Tensor& positions,
                            const nn::ForwardContext& ctx) {
  const std::size_t d = table->value.cols();
  auto x = nn::scale(nn::embedding(table, ids), std::sqrt(static_cast<float>(d)));
  nn::Tensor pe({ids.size(), d});
  std::copy_n(positions.data(), ids.size() * d, pe.data());
  return ctx.drop(nn::add(x, nn::constant(std::move(pe))));
}

}  // namespace memebot

#endif  // MEMEBOT_MODELS_TRANSFORMER_HPP
