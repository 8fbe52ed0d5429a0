#ifndef MEMEBOT_NEURAL_AUTOGRAD_HPP
#define MEMEBOT_NEURAL_AUTOGRAD_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "memebot/error.hpp"
#include "memebot/neural/tensor.hpp"
#include "memebot/util.hpp"

namespace memebot::nn {

// Tape-based reverse mode. Each op result holds its parents and a closure
// that pushes its gradient into them; backward() walks the graph in reverse
// topological order. Parameters are leaf nodes whose gradients accumulate
// across backward() calls until zeroed by the optimizer.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer() {
    if (grad.numel() != value.numel() || grad.shape() != value.shape()) grad = Tensor::zeros_like(value);
    return grad;
  }
  bool has_grad() const { return grad.numel() == value.numel() && !grad.empty(); }
};

namespace detail {
inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_enabled_flag()) { detail::grad_enabled_flag() = false; }
  ~NoGradGuard() { detail::grad_enabled_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

inline Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

namespace detail {
inline Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (!grad_enabled()) return n;
  bool any = false;
  for (const auto& p : parents) any = any || p->requires_grad;
  if (!any) return n;
  n->requires_grad = true;
  n->parents = std::move(parents);
  n->backward_fn = std::move(backward_fn);
  return n;
}
}  // namespace detail

/// Seeds d(root)/d(root) = 1 for a single-element root and propagates.
inline void backward(const Var& root) {
  if (root->value.numel() != 1) throw Error(Errc::ShapeMismatch, "backward() needs a scalar root");
  if (!root->requires_grad) return;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->has_grad()) n->backward_fn(*n);
  }
}

// ---------------------------------------------------------------------------
// Ops

inline Var add(const Var& a, const Var& b) {
  require_shape(a->value.shape() == b->value.shape(),
                "add: " + shape_str(a->value.shape()) + " vs " + shape_str(b->value.shape()));
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b->value[i];
  return detail::make_result(std::move(out), {a, b}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

inline Var scale(const Var& a, float s) {
  Tensor out = a->value;
  for (float& x : out.vec()) x *= s;
  return detail::make_result(std::move(out), {a}, [s](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += s * self.grad[i];
  });
}

inline Var relu(const Var& a) {
  Tensor out = a->value;
  for (float& x : out.vec()) x = x > 0.0f ? x : 0.0f;
  return detail::make_result(std::move(out), {a}, [](Node& self) {
    auto& in = self.parents[0];
    auto& g = in->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (in->value[i] > 0.0f) g[i] += self.grad[i];
    }
  });
}

/// a(m,k) @ b(k,n)
inline Var matmul(const Var& a, const Var& b) {
  const auto& A = a->value;
  const auto& B = b->value;
  require_shape(A.rank() == 2 && B.rank() == 2 && A.cols() == B.rows(),
                "matmul: " + shape_str(A.shape()) + " @ " + shape_str(B.shape()));
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out({m, n});
  gemm_nn_acc(A.data(), B.data(), out.data(), m, k, n);
  return detail::make_result(std::move(out), {a, b}, [m, k, n](Node& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (pa->requires_grad) gemm_nt_acc(self.grad.data(), pb->value.data(), pa->grad_buffer().data(), m, n, k);
    if (pb->requires_grad) gemm_tn_acc(pa->value.data(), self.grad.data(), pb->grad_buffer().data(), m, k, n);
  });
}

/// a(m,k) @ b(n,k)^T
inline Var matmul_nt(const Var& a, const Var& b) {
  const auto& A = a->value;
  const auto& B = b->value;
  require_shape(A.rank() == 2 && B.rank() == 2 && A.cols() == B.cols(),
                "matmul_nt: " + shape_str(A.shape()) + " @ " + shape_str(B.shape()) + "^T");
  const std::size_t m = A.rows(), k = A.cols(), n = B.rows();
  Tensor out({m, n});
  gemm_nt_acc(A.data(), B.data(), out.data(), m, k, n);
  return detail::make_result(std::move(out), {a, b}, [m, k, n](Node& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    // dA = dC B ; dB = dC^T A
    if (pa->requires_grad) gemm_nn_acc(self.grad.data(), pb->value.data(), pa->grad_buffer().data(), m, n, k);
    if (pb->requires_grad) gemm_tn_acc(self.grad.data(), pa->value.data(), pb->grad_buffer().data(), m, n, k);
  });
}

/// x(m,in) @ w(in,out) + b(out)
inline Var linear(const Var& x, const Var& w, const Var& b) {
  const auto& X = x->value;
  const auto& W = w->value;
  require_shape(X.rank() == 2 && W.rank() == 2 && X.cols() == W.rows() && b->value.numel() == W.cols(),
                "linear: " + shape_str(X.shape()) + " @ " + shape_str(W.shape()));
  const std::size_t m = X.rows(), in = X.cols(), out_dim = W.cols();
  Tensor out({m, out_dim});
  for (std::size_t i = 0; i < m; ++i) std::copy(b->value.data(), b->value.data() + out_dim, out.data() + i * out_dim);
  gemm_nn_acc(X.data(), W.data(), out.data(), m, in, out_dim);
  return detail::make_result(std::move(out), {x, w, b}, [m, in, out_dim](Node& self) {
    auto& px = self.parents[0];
    auto& pw = self.parents[1];
    auto& pb = self.parents[2];
    if (px->requires_grad) gemm_nt_acc(self.grad.data(), pw->value.data(), px->grad_buffer().data(), m, out_dim, in);
    if (pw->requires_grad) gemm_tn_acc(px->value.data(), self.grad.data(), pw->grad_buffer().data(), m, in, out_dim);
    if (pb->requires_grad) {
      auto& gb = pb->grad_buffer();
      for (std::size_t i = 0; i < m; ++i) axpy(1.0f, self.grad.data() + i * out_dim, gb.data(), out_dim);
    }
  });
}

/// Row-wise layer normalization with affine gamma/beta.
inline Var layer_norm(const Var& x, const Var& gamma, const Var& beta, float eps = 1e-5f) {
  const auto& X = x->value;
  const std::size_t m = X.rows(), d = X.cols();
  require_shape(gamma->value.numel() == d && beta->value.numel() == d, "layer_norm: affine width mismatch");
  Tensor out({m, d});
  auto xhat = std::make_shared<std::vector<float>>(m * d);
  auto inv_std = std::make_shared<std::vector<float>>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const float* xi = X.data() + i * d;
    float mean = 0.0f;
    for (std::size_t j = 0; j < d; ++j) mean += xi[j];
    mean /= static_cast<float>(d);
    float var = 0.0f;
    for (std::size_t j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<float>(d);
    const float is = 1.0f / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const float h = (xi[j] - mean) * is;
      (*xhat)[i * d + j] = h;
      out[i * d + j] = gamma->value[j] * h + beta->value[j];
    }
  }
  return detail::make_result(std::move(out), {x, gamma, beta}, [m, d, xhat, inv_std](Node& self) {
    auto& px = self.parents[0];
    auto& pg = self.parents[1];
    auto& pbeta = self.parents[2];
    const auto& G = self.grad;
    if (pg->requires_grad || pbeta->requires_grad) {
      auto& gg = pg->grad_buffer();
      auto& gb = pbeta->grad_buffer();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          gg[j] += G[i * d + j] * (*xhat)[i * d + j];
          gb[j] += G[i * d + j];
        }
      }
    }
    if (!px->requires_grad) return;
    auto& gx = px->grad_buffer();
    std::vector<float> dxhat(d);
    for (std::size_t i = 0; i < m; ++i) {
      float mean_d = 0.0f, mean_dx = 0.0f;
      for (std::size_t j = 0; j < d; ++j) {
        dxhat[j] = G[i * d + j] * pg->value[j];
        mean_d += dxhat[j];
        mean_dx += dxhat[j] * (*xhat)[i * d + j];
      }
      mean_d /= static_cast<float>(d);
      mean_dx /= static_cast<float>(d);
      for (std::size_t j = 0; j < d; ++j) {
        gx[i * d + j] += (*inv_std)[i] * (dxhat[j] - mean_d - (*xhat)[i * d + j] * mean_dx);
      }
    }
  });
}

/// Gathers rows of `table` (V,d) for `ids`.
inline Var embedding(const Var& table, std::span<const std::int32_t> ids) {
  const auto& T = table->value;
  const std::size_t d = T.cols();
  Tensor out({ids.size(), d});
  std::vector<std::int32_t> saved(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= T.rows()) {
      throw Error(Errc::InvalidId, "embedding id " + std::to_string(ids[i]) + " out of range");
    }
    std::copy_n(T.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  return detail::make_result(std::move(out), {table}, [saved = std::move(saved), d](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < saved.size(); ++i) {
      axpy(1.0f, self.grad.data() + i * d, g.data() + static_cast<std::size_t>(saved[i]) * d, d);
    }
  });
}

/// Inverted dropout: survivors are scaled by 1/(1-p). Identity when p == 0.
inline Var dropout(const Var& x, float p, Rng& rng) {
  if (p <= 0.0f) return x;
  auto keep = std::make_shared<std::vector<std::uint8_t>>(x->value.numel());
  const float s = 1.0f / (1.0f - p);
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.numel(); ++i) {
    (*keep)[i] = rng.uniform() >= static_cast<double>(p) ? 1 : 0;
    out[i] = (*keep)[i] ? out[i] * s : 0.0f;
  }
  return detail::make_result(std::move(out), {x}, [keep, s](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if ((*keep)[i]) g[i] += s * self.grad[i];
    }
  });
}

/// Mean over rows: (m,d) -> (1,d).
inline Var mean_rows(const Var& x) {
  const std::size_t m = x->value.rows(), d = x->value.cols();
  require_shape(m > 0, "mean_rows of an empty tensor");
  Tensor out({1, d});
  for (std::size_t i = 0; i < m; ++i) axpy(1.0f, x->value.data() + i * d, out.data(), d);
  const float inv = 1.0f / static_cast<float>(m);
  for (float& v : out.vec()) v *= inv;
  return detail::make_result(std::move(out), {x}, [m, d, inv](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < m; ++i) axpy(inv, self.grad.data(), g.data() + i * d, d);
  });
}

/// Row r of a matrix as a (1,d) tensor.
inline Var select_row(const Var& x, std::size_t r) {
  const std::size_t d = x->value.cols();
  require_shape(r < x->value.rows(), "select_row out of range");
  Tensor out({1, d});
  std::copy_n(x->value.data() + r * d, d, out.data());
  return detail::make_result(std::move(out), {x}, [r, d](Node& self) {
    axpy(1.0f, self.grad.data(), self.parents[0]->grad_buffer().data() + r * d, d);
  });
}

/// sum(x * w) for a fixed weight tensor; used to scalarize outputs.
inline Var dot_const(const Var& x, const Tensor& w) {
  require_shape(x->value.numel() == w.numel(), "dot_const size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < w.numel(); ++i) acc += static_cast<double>(x->value[i]) * w[i];
  return detail::make_result(Tensor({1}, std::vector<float>{static_cast<float>(acc)}), {x}, [w](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const float up = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += up * w[i];
  });
}

/// Multi-head scaled dot-product attention. q:(m,d), k,v:(n,d); head h uses
/// columns [h*d/heads, (h+1)*d/heads). Fully masked rows output zeros.
inline Var attention(const Var& q, const Var& k, const Var& v, std::size_t heads,
                     const AttentionMask* mask = nullptr) {
  const auto& Q = q->value;
  const auto& K = k->value;
  const auto& V = v->value;
  require_shape(Q.rank() == 2 && K.rank() == 2 && V.rank() == 2, "attention expects rank-2 inputs");
  const std::size_t m = Q.rows(), n = K.rows(), d = Q.cols();
  require_shape(K.cols() == d && V.cols() == d && V.rows() == n,
                "attention: Q" + shape_str(Q.shape()) + " K" + shape_str(K.shape()) + " V" + shape_str(V.shape()));
  require_shape(heads > 0 && d % heads == 0, "attention: width not divisible by heads");
  if (mask) require_shape(mask->rows == m && mask->cols == n, "attention: mask shape mismatch");
  const std::size_t dk = d / heads;
  const float sc = 1.0f / std::sqrt(static_cast<float>(dk));

  auto slice = [](const Tensor& t, std::size_t c0, std::size_t w) {
    Tensor s({t.rows(), w});
    for (std::size_t r = 0; r < t.rows(); ++r) std::copy_n(t.data() + r * t.cols() + c0, w, s.data() + r * w);
    return s;
  };

  Tensor out({m, d});
  auto probs = std::make_shared<std::vector<Tensor>>(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor qh = slice(Q, h * dk, dk), kh = slice(K, h * dk, dk), vh = slice(V, h * dk, dk);
    Tensor p({m, n});
    gemm_nt_acc(qh.data(), kh.data(), p.data(), m, dk, n);
    for (std::size_t r = 0; r < m; ++r) {
      auto row = p.row(r);
      for (std::size_t c = 0; c < n; ++c) {
        row[c] = (mask && !(*mask)(r, c)) ? -std::numeric_limits<float>::infinity() : row[c] * sc;
      }
      softmax_inplace(row);
    }
    Tensor oh({m, dk});
    gemm_nn_acc(p.data(), vh.data(), oh.data(), m, n, dk);
    for (std::size_t r = 0; r < m; ++r) std::copy_n(oh.data() + r * dk, dk, out.data() + r * d + h * dk);
    (*probs)[h] = std::move(p);
  }

  return detail::make_result(std::move(out), {q, k, v}, [=](Node& self) {
    auto& pq = self.parents[0];
    auto& pk = self.parents[1];
    auto& pv = self.parents[2];
    for (std::size_t h = 0; h < heads; ++h) {
      const Tensor& p = (*probs)[h];
      Tensor dout = slice(self.grad, h * dk, dk);
      Tensor qh = slice(pq->value, h * dk, dk), kh = slice(pk->value, h * dk, dk), vh = slice(pv->value, h * dk, dk);
      if (pv->requires_grad) {
        Tensor dv({n, dk});
        gemm_tn_acc(p.data(), dout.data(), dv.data(), m, n, dk);
        auto& g = pv->grad_buffer();
        for (std::size_t r = 0; r < n; ++r) axpy(1.0f, dv.data() + r * dk, g.data() + r * d + h * dk, dk);
      }
      if (!pq->requires_grad && !pk->requires_grad) continue;
      Tensor ds({m, n});
      gemm_nt_acc(dout.data(), vh.data(), ds.data(), m, dk, n);
      for (std::size_t r = 0; r < m; ++r) {
        float s = 0.0f;
        for (std::size_t c = 0; c < n; ++c) s += ds.at(r, c) * p.at(r, c);
        for (std::size_t c = 0; c < n; ++c) ds.at(r, c) = p.at(r, c) * (ds.at(r, c) - s) * sc;
      }
      if (pq->requires_grad) {
        Tensor dq({m, dk});
        gemm_nn_acc(ds.data(), kh.data(), dq.data(), m, n, dk);
        auto& g = pq->grad_buffer();
        for (std::size_t r = 0; r < m; ++r) axpy(1.0f, dq.data() + r * dk, g.data() + r * d + h * dk, dk);
      }
      if (pk->requires_grad) {
        Tensor dkm({n, dk});
        gemm_tn_acc(ds.data(), qh.data(), dkm.data(), m, n, dk);
        auto& g = pk->grad_buffer();
        for (std::size_t r = 0; r < n; ++r) axpy(1.0f, dkm.data() + r * dk, g.data() + r * d + h * dk, dk);
      }
    }
  });
}

struct LossValue {
  Var loss;          // scalar node: sum of token NLL / normalizer
  double nll_sum;    // unnormalized total NLL
  std::size_t count; // non-ignored positions
  std::size_t correct;  // argmax == target among counted positions
};

/// Sum of -log softmax(logits)[target] over non-ignored rows, divided by
/// `normalizer` (0 means: divide by the counted rows, i.e. the mean).
inline LossValue cross_entropy(const Var& logits, std::span<const std::int32_t> targets, std::int32_t ignore_id,
                               double normalizer = 0.0) {
  const auto& L = logits->value;
  const std::size_t n = L.rows(), vsz = L.cols();
  require_shape(targets.size() == n, "cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                                         std::to_string(n) + " rows");
  auto probs = std::make_shared<Tensor>(Shape{n, vsz});
  std::vector<std::int32_t> tg(targets.begin(), targets.end());
  double nll = 0.0;
  std::size_t count = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tg[i] == ignore_id) continue;
    if (tg[i] < 0 || static_cast<std::size_t>(tg[i]) >= vsz) {
      throw Error(Errc::InvalidId, "target " + std::to_string(tg[i]) + " out of range");
    }
    auto row = L.row(i);
    for (float x : row) {
      if (!std::isfinite(x)) throw Error(Errc::NonFinite, "non-finite logit");
    }
    const auto ls = log_softmax(row);
    nll -= ls[static_cast<std::size_t>(tg[i])];
    for (std::size_t j = 0; j < vsz; ++j) probs->at(i, j) = static_cast<float>(std::exp(ls[j]));
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == static_cast<std::size_t>(tg[i])) ++correct;
    ++count;
  }
  if (count == 0) throw Error(Errc::EmptyBatch, "every target position is ignored");
  const double norm = normalizer > 0.0 ? normalizer : static_cast<double>(count);
  Tensor value({1}, std::vector<float>{static_cast<float>(nll / norm)});
  const float inv = static_cast<float>(1.0 / norm);
  Var node = detail::make_result(std::move(value), {logits}, [probs, tg, ignore_id, inv, vsz](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const float up = self.grad[0] * inv;
    for (std::size_t i = 0; i < tg.size(); ++i) {
      if (tg[i] == ignore_id) continue;
      for (std::size_t j = 0; j < vsz; ++j) g.at(i, j) += up * probs->at(i, j);
      g.at(i, static_cast<std::size_t>(tg[i])) -= up;
    }
  });
  return {node, nll, count, correct};
}

}  // namespace memebot::nn

#endif  // MEMEBOT_NEURAL_AUTOGRAD_HPP
