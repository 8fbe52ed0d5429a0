#ifndef MEMEBOT_NEURAL_TENSOR_HPP
#define MEMEBOT_NEURAL_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memebot/error.hpp"

namespace memebot::nn {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

inline std::size_t shape_numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

/// Dense row-major float32 tensor. Layers only use rank 1 and 2.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, float fill = 0.0f) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

  Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
      throw Error(Errc::ShapeMismatch, "data length " + std::to_string(data_.size()) + " for shape " +
                                           shape_str(shape_));
    }
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<float> data) {
    return Tensor({rows, cols}, std::move(data));
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty() && shape_.empty(); }

  /// Rank-1 tensors behave as a single row.
  std::size_t rows() const { return shape_.size() >= 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> span() { return data_; }
  std::span<const float> span() const { return data_; }
  std::vector<float>& vec() { return data_; }
  const std::vector<float>& vec() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
  }

  void fill(float v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ShapeMismatch, what);
}

// ---------------------------------------------------------------------------
// Raw kernels. Fixed loop orders keep results bit-reproducible.

inline float dot(const float* a, const float* b, std::size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  float tail = 0.0f;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

inline void axpy(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

/// C(m,n) += A(m,k) B(k,n)
inline void gemm_nn_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    float* ci = c + i * n;
    const float* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) axpy(ai[p], b + p * n, ci, n);
  }
}

/// C(m,n) += A(m,k) B(n,k)^T
inline void gemm_nt_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(a + i * k, b + j * k, k);
  }
}

/// C(k,n) += A(m,k)^T B(m,n)
inline void gemm_tn_acc(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < m; ++p) {
    for (std::size_t i = 0; i < k; ++i) axpy(a[p * k + i], b + p * n, c + i * n, n);
  }
}

/// In-place numerically stable softmax over one row. Entries equal to -inf
/// get weight 0; an all -inf row becomes all zeros.
inline void softmax_inplace(std::span<float> x) {
  float mx = -std::numeric_limits<float>::infinity();
  for (float v : x) mx = std::max(mx, v);
  if (mx == -std::numeric_limits<float>::infinity()) {
    std::fill(x.begin(), x.end(), 0.0f);
    return;
  }
  float sum = 0.0f;
  for (float& v : x) {
    v = std::exp(v - mx);
    sum += v;
  }
  const float inv = 1.0f / sum;
  for (float& v : x) v *= inv;
}

inline std::vector<float> softmax(std::span<const float> x) {
  for (float v : x) {
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "softmax input is not finite");
  }
  std::vector<float> out(x.begin(), x.end());
  softmax_inplace(out);
  return out;
}

/// log-softmax computed in double; -inf inputs stay -inf.
inline std::vector<double> log_softmax(std::span<const float> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (float v : x) mx = std::max(mx, static_cast<double>(v));
  std::vector<double> out(x.size(), -std::numeric_limits<double>::infinity());
  if (mx == -std::numeric_limits<double>::infinity()) return out;
  double sum = 0.0;
  for (float v : x) sum += std::exp(static_cast<double>(v) - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(x[i]) - lse;
  return out;
}

/// Row-major (rows, cols) boolean mask; true means "may attend".
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  bool operator()(std::size_t r, std::size_t c) const { return allowed[r * cols + c] != 0; }

  static AttentionMask causal(std::size_t n) {
    AttentionMask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c <= r; ++c) m.allowed[r * n + c] = 1;
    }
    return m;
  }
};

/// Single-head softmax(Q K^T / sqrt(d_k) + mask) V on plain tensors. Rows
/// with no allowed key produce zeros. Returns (output, attention weights).
inline std::pair<Tensor, Tensor> scaled_dot_product_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                                                              const AttentionMask* mask = nullptr) {
  require_shape(q.rank() == 2 && k.rank() == 2 && v.rank() == 2, "attention expects rank-2 Q, K, V");
  const std::size_t m = q.rows(), n = k.rows(), dk = q.cols(), dv = v.cols();
  require_shape(k.cols() == dk, "Q/K width mismatch: " + shape_str(q.shape()) + " vs " + shape_str(k.shape()));
  require_shape(v.rows() == n, "K/V length mismatch: " + shape_str(k.shape()) + " vs " + shape_str(v.shape()));
  if (mask) require_shape(mask->rows == m && mask->cols == n, "mask shape mismatch");
  const float scale = 1.0f / std::sqrt(static_cast<float>(dk));
  Tensor weights({m, n});
  gemm_nt_acc(q.data(), k.data(), weights.data(), m, dk, n);
  for (std::size_t r = 0; r < m; ++r) {
    auto row = weights.row(r);
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = (mask && !(*mask)(r, c)) ? -std::numeric_limits<float>::infinity() : row[c] * scale;
    }
    softmax_inplace(row);
  }
  Tensor out({m, dv});
  gemm_nn_acc(weights.data(), v.data(), out.data(), m, n, dv);
  return {std::move(out), std::move(weights)};
}

}  // namespace memebot::nn

#endif  // MEMEBOT_NEURAL_TENSOR_HPP
