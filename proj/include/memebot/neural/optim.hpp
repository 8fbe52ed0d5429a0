#ifndef MEMEBOT_NEURAL_OPTIM_HPP
#define MEMEBOT_NEURAL_OPTIM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "memebot/error.hpp"
#include "memebot/neural/layers.hpp"
#include "memebot/neural/tensor.hpp"

namespace memebot::nn {

/// Cosine annealing with warm restarts. Periods are counted in optimizer
/// steps: T_0, T_0*T_mult, T_0*T_mult^2, ...
struct LrSchedule {
  double eta_max = 1e-3;
  double eta_min = 0.0;
  std::uint64_t t0 = 1000;
  double t_mult = 1.0;

  void validate() const {
    if (!(eta_max >= eta_min) || eta_min < 0.0) throw Error(Errc::ConfigError, "need eta_max >= eta_min >= 0");
    if (t0 < 1) throw Error(Errc::ConfigError, "T_0 must be >= 1");
    if (!(t_mult >= 1.0)) throw Error(Errc::ConfigError, "T_mult must be >= 1");
  }
};

/// One cosine half-period: eta_max at t_cur = 0, eta_min at t_cur = period.
inline double cosine_annealing(double t_cur, double period, double eta_max, double eta_min) {
  return eta_min + 0.5 * (eta_max - eta_min) * (1.0 + std::cos(std::numbers::pi * t_cur / period));
}

/// Learning rate at `step`. The restart fires when T_cur reaches T_i, so
/// step T_0 is back at eta_max.
inline double lr_at(std::uint64_t step, const LrSchedule& s) {
  double period = static_cast<double>(s.t0);
  double t_cur = static_cast<double>(step);
  if (s.t_mult == 1.0) t_cur = std::fmod(t_cur, period);
  while (t_cur >= period) {
    t_cur -= period;
    period = std::floor(period * s.t_mult);
  }
  return cosine_annealing(t_cur, period, s.eta_max, s.eta_min);
}

/// Bias-corrected Adam. Moments are created lazily, shaped like their
/// parameters, in the order the parameters were registered.
class Adam {
 public:
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;

  Adam() = default;
  Adam(double b1, double b2, double e) : beta1(b1), beta2(b2), eps(e) {}

  std::uint64_t steps() const { return t_; }

  /// One update over parallel parameter/gradient tensors.
  void step(std::vector<Tensor*> params, const std::vector<const Tensor*>& grads, double lr) {
    if (params.size() != grads.size()) throw Error(Errc::ShapeMismatch, "params/grads count mismatch");
    if (lr < 0.0) throw Error(Errc::ConfigError, "learning rate must be >= 0");
    if (m_.empty()) {
      for (auto* p : params) {
        m_.emplace_back(p->shape());
        v_.emplace_back(p->shape());
      }
    }
    if (m_.size() != params.size()) throw Error(Errc::ShapeMismatch, "parameter count changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != m_[i].shape()) {
        throw Error(Errc::ShapeMismatch, "adam: parameter " + std::to_string(i) + " shape " +
                                             shape_str(params[i]->shape()) + " vs grad " + shape_str(grads[i]->shape()));
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      const auto& g = *grads[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < p.numel(); ++j) {
        const double gj = g[j];
        const double mj = beta1 * m[j] + (1.0 - beta1) * gj;
        const double vj = beta2 * v[j] + (1.0 - beta2) * gj * gj;
        m[j] = static_cast<float>(mj);
        v[j] = static_cast<float>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        p[j] = static_cast<float>(p[j] - lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }

  /// Convenience overload over registered parameters; missing gradients
  /// count as zero.
  void step(const NamedParameters& params, double lr) {
    std::vector<Tensor*> ps;
    std::vector<Tensor> zeros;
    zeros.reserve(params.size());
    std::vector<const Tensor*> gs;
    for (auto& [name, var] : params) {
      ps.push_back(&var->value);
      if (var->has_grad()) {
        gs.push_back(&var->grad);
      } else {
        zeros.push_back(Tensor::zeros_like(var->value));
        gs.push_back(&zeros.back());
      }
    }
    step(std::move(ps), gs, lr);
  }

 private:
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

inline double global_grad_norm(const NamedParameters& params) {
  double sq = 0.0;
  for (auto& [name, var] : params) {
    if (!var->has_grad()) continue;
    for (float g : var->grad.vec()) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_grad_norm(const NamedParameters& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (!std::isfinite(norm)) throw Error(Errc::NonFinite, "gradient norm is not finite");
  if (norm > max_norm && norm > 0.0) {
    const float s = static_cast<float>(max_norm / norm);
    for (auto& [name, var] : params) {
      if (!var->has_grad()) continue;
      for (float& g : var->grad.vec()) g *= s;
    }
  }
  return norm;
}

inline void zero_grad(const NamedParameters& params) {
  for (auto& [name, var] : params) {
    if (var->has_grad()) var->grad.fill(0.0f);
  }
}

}  // namespace memebot::nn

#endif  // MEMEBOT_NEURAL_OPTIM_HPP
