#ifndef MEMEBOT_NEURAL_GRAD_CHECK_HPP
#define MEMEBOT_NEURAL_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "memebot/neural/autograd.hpp"

namespace memebot::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;      // worst per-input ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double max_abs_error = 0.0;      // worst single element |analytic - numeric|
  double max_elem_rel_error = 0.0; // worst single element, denominator floored at `floor`
  double global_rel_error = 0.0;   // same ratio over all inputs concatenated into one vector
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients against central differences.
///
/// `loss_fn` rebuilds a scalar Var from the current values of `inputs` each
/// time it is called. Every element of every input is perturbed by +/-step
/// (float32 forward passes); the quotient uses the step actually realized in
/// float32. The headline error is the L2 relative error of each input's whole
/// gradient, which stays meaningful when single entries are near zero and
/// float32 round-off dominates them.
template <typename LossFn>
GradCheckResult grad_check(LossFn&& loss_fn, const std::vector<Var>& inputs, double step = 1e-3,
                           double floor = 1e-2) {
  for (const auto& in : inputs) {
    in->requires_grad = true;
    if (in->has_grad()) in->grad.fill(0.0f);
  }
  {
    Var loss = loss_fn();
    backward(loss);
  }
  GradCheckResult result;
  double total_diff_sq = 0.0, total_a_sq = 0.0, total_n_sq = 0.0;
  NoGradGuard no_grad;
  for (const auto& in : inputs) {
    Tensor analytic = in->has_grad() ? in->grad : Tensor::zeros_like(in->value);
    double diff_sq = 0.0;
    double a_sq = 0.0;
    double n_sq = 0.0;
    for (std::size_t i = 0; i < in->value.numel(); ++i) {
      const float original = in->value[i];
      const float hi = static_cast<float>(original + step);
      const float lo = static_cast<float>(original - step);
      in->value[i] = hi;
      const double up = loss_fn()->value[0];
      in->value[i] = lo;
      const double down = loss_fn()->value[0];
      in->value[i] = original;
      const double numeric = (up - down) / (static_cast<double>(hi) - static_cast<double>(lo));
      const double a = analytic[i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      result.max_elem_rel_error = std::max(result.max_elem_rel_error, abs_err / denom);
      diff_sq += abs_err * abs_err;
      a_sq += a * a;
      n_sq += numeric * numeric;
      ++result.checked;
    }
    const double scale = std::sqrt(std::max(a_sq, n_sq));
    if (scale > 0.0) result.max_rel_error = std::max(result.max_rel_error, std::sqrt(diff_sq) / scale);
    total_diff_sq += diff_sq;
    total_a_sq += a_sq;
    total_n_sq += n_sq;
  }
  const double total_scale = std::sqrt(std::max(total_a_sq, total_n_sq));
  if (total_scale > 0.0) result.global_rel_error = std::sqrt(total_diff_sq) / total_scale;
  return result;
}

}  // namespace memebot::nn

#endif  // MEMEBOT_NEURAL_GRAD_CHECK_HPP
