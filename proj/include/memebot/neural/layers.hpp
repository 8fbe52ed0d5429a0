#ifndef MEMEBOT_NEURAL_LAYERS_HPP
#define MEMEBOT_NEURAL_LAYERS_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "memebot/neural/autograd.hpp"
#include "memebot/neural/tensor.hpp"
#include "memebot/util.hpp"

namespace memebot::nn {

using NamedParameters = std::vector<std::pair<std::string, Var>>;

/// Per-call forward state. Dropout is only active when `training` is set,
/// so a frozen model can be shared by concurrent inference calls.
struct ForwardContext {
  bool training = false;
  float p_drop = 0.0f;
  Rng* rng = nullptr;

  Var drop(const Var& x) const {
    if (!training || p_drop <= 0.0f || rng == nullptr) return x;
    return dropout(x, p_drop, *rng);
  }
};

inline Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (float& v : t.vec()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

inline Tensor normal_tensor(Shape shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (float& v : t.vec()) v = static_cast<float>(rng.normal(0.0, stddev));
  return t;
}

/// y = x W + b with W stored (in, out); init U(-1/sqrt(in), 1/sqrt(in)).
struct Linear {
  Var weight;
  Var bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    weight = parameter(uniform_tensor({in, out}, bound, rng));
    bias = parameter(uniform_tensor({out}, bound, rng));
  }

  Var operator()(const Var& x) const { return linear(x, weight, bias); }

  void collect(const std::string& prefix, NamedParameters& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

struct LayerNorm {
  Var gamma;
  Var beta;
  float eps = 1e-5f;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t d) : gamma(parameter(Tensor({d}, 1.0f))), beta(parameter(Tensor({d}, 0.0f))) {}

  Var operator()(const Var& x) const { return layer_norm(x, gamma, beta, eps); }

  void collect(const std::string& prefix, NamedParameters& out) const {
    out.emplace_back(prefix + ".gamma", gamma);
    out.emplace_back(prefix + ".beta", beta);
  }
};

struct MultiHeadAttention {
  Linear q_proj, k_proj, v_proj, out_proj;
  std::size_t heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(std::size_t d_model, std::size_t num_heads, Rng& rng)
      : q_proj(d_model, d_model, rng),
        k_proj(d_model, d_model, rng),
        v_proj(d_model, d_model, rng),
        out_proj(d_model, d_model, rng),
        heads(num_heads) {}

  Var operator()(const Var& query, const Var& memory, const AttentionMask* mask = nullptr) const {
    return out_proj(attention(q_proj(query), k_proj(memory), v_proj(memory), heads, mask));
  }

  void collect(const std::string& prefix, NamedParameters& out) const {
    q_proj.collect(prefix + ".q", out);
    k_proj.collect(prefix + ".k", out);
    v_proj.collect(prefix + ".v", out);
    out_proj.collect(prefix + ".o", out);
  }
};

struct FeedForward {
  Linear inner, outer;

  FeedForward() = default;
  FeedForward(std::size_t d_model, std::size_t d_ff, Rng& rng) : inner(d_model, d_ff, rng), outer(d_ff, d_model, rng) {}

  Var operator()(const Var& x) const { return outer(relu(inner(x))); }

  void collect(const std::string& prefix, NamedParameters& out) const {
    inner.collect(prefix + ".ff1", out);
    outer.collect(prefix + ".ff2", out);
  }
};

/// Fixed sinusoidal position table (len, d).
inline Tensor sinusoidal_encoding(std::size_t len, std::size_t d) {
  Tensor pe({len, d});
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) * freq;
      pe.at(pos, i) = static_cast<float>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pe;
}

}  // namespace memebot::nn

#endif  // MEMEBOT_NEURAL_LAYERS_HPP
