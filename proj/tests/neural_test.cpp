#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "criteria.hpp"
#include "support.hpp"

namespace memebot::nn {
namespace {

TEST(Softmax, UniformRow) {
  const std::vector<float> x = {0, 0, 0, 0};
  for (float p : softmax(x)) EXPECT_FLOAT_EQ(p, 0.25f);
}

TEST(Softmax, LargeEqualLogitsStayFinite) {
  const std::vector<float> x = {1000, 1000};
  const auto p = softmax(x);
  EXPECT_FLOAT_EQ(p[0], 0.5f);
  EXPECT_FLOAT_EQ(p[1], 0.5f);
}

TEST(Softmax, TwoLogitExample) {
  const std::vector<float> x = {2, 0};
  const auto p = softmax(x);
  EXPECT_NEAR(p[0], 0.8808, 1e-4);
  EXPECT_NEAR(p[1], 0.1192, 1e-4);
  const auto lp = log_softmax(x);
  EXPECT_NEAR(std::exp(lp[0]) + std::exp(lp[1]), 1.0, 1e-12);
}

TEST(Softmax, RejectsNonFinite) {
  const std::vector<float> x = {1.0f, std::numeric_limits<float>::quiet_NaN()};
  EXPECT_THROW(softmax(x), Error);
}

TEST(Attention, SingleKeyReturnsItsValue) {
  const auto q = Tensor::matrix(1, 2, {1, 0});
  const auto k = Tensor::matrix(1, 2, {3, 4});
  const auto v = Tensor::matrix(1, 1, {7});
  const auto [out, w] = scaled_dot_product_attention(q, k, v);
  EXPECT_FLOAT_EQ(out.at(0, 0), 7.0f);
  EXPECT_FLOAT_EQ(w.at(0, 0), 1.0f);
}

TEST(Attention, OrthogonalQueryAveragesValues) {
  const auto q = Tensor::matrix(1, 2, {0, 1});
  const auto k = Tensor::matrix(2, 2, {1, 0, 2, 0});
  const auto v = Tensor::matrix(2, 2, {1, 2, 3, 6});
  const auto [out, w] = scaled_dot_product_attention(q, k, v);
  EXPECT_FLOAT_EQ(out.at(0, 0), 2.0f);
  EXPECT_FLOAT_EQ(out.at(0, 1), 4.0f);
}

TEST(Attention, CausalFirstRowSeesOnlyItself) {
  Rng rng(1);
  const auto q = normal_tensor({3, 4}, 1.0, rng);
  const auto k = normal_tensor({3, 4}, 1.0, rng);
  const auto v = normal_tensor({3, 4}, 1.0, rng);
  const auto mask = AttentionMask::causal(3);
  const auto [out, w] = scaled_dot_product_attention(q, k, v, &mask);
  EXPECT_FLOAT_EQ(w.at(0, 0), 1.0f);
  EXPECT_FLOAT_EQ(w.at(0, 1), 0.0f);
  EXPECT_FLOAT_EQ(w.at(0, 2), 0.0f);
  EXPECT_FLOAT_EQ(w.at(1, 2), 0.0f);
  for (std::size_t r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += w.at(r, c);
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Attention, ShapeMismatchThrows) {
  const Tensor q({2, 3}), k({2, 4}), v({2, 4});
  try {
    scaled_dot_product_attention(q, k, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
}

TEST(CrossEntropy, UniformLogitsGiveLnV) {
  auto logits = constant(Tensor({1, 4}, 0.0f));
  const std::vector<std::int32_t> t = {2};
  EXPECT_NEAR(cross_entropy(logits, t, -1).loss->value[0], std::log(4.0), 1e-6);
  EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);
}

TEST(CrossEntropy, TwoLogitExample) {
  auto logits = constant(Tensor::matrix(1, 2, {2, 0}));
  const std::vector<std::int32_t> t = {0};
  EXPECT_NEAR(cross_entropy(logits, t, -1).loss->value[0], 0.1269, 1e-4);
}

TEST(CrossEntropy, IgnoredRowsDoNotCount) {
  auto logits = constant(Tensor::matrix(2, 2, {2, 0, -50, 50}));
  const std::vector<std::int32_t> t = {0, 0};
  const std::vector<std::int32_t> masked = {0, -1};
  const auto r = cross_entropy(logits, masked, -1);
  EXPECT_EQ(r.count, 1u);
  EXPECT_NEAR(r.loss->value[0], 0.1269, 1e-4);
  EXPECT_GT(cross_entropy(logits, t, -1).loss->value[0], 10.0f);
}

TEST(CrossEntropy, AllIgnoredIsEmptyBatch) {
  auto logits = constant(Tensor({2, 3}, 0.0f));
  const std::vector<std::int32_t> t = {-1, -1};
  try {
    cross_entropy(logits, t, -1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyBatch);
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Tensor p = Tensor::matrix(1, 3, {1, -2, 3});
  const Tensor g({1, 3}, 0.0f);
  Adam opt;
  for (int i = 0; i < 3; ++i) opt.step({&p}, {&g}, 0.1);
  EXPECT_EQ(p.vec(), (std::vector<float>{1, -2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor p = Tensor::matrix(1, 3, {0, 0, 0});
  const Tensor g = Tensor::matrix(1, 3, {0.5f, -3.0f, 1e-3f});
  Adam opt;
  opt.step({&p}, {&g}, 0.01);
  EXPECT_NEAR(p[0], -0.01, 1e-6);
  EXPECT_NEAR(p[1], 0.01, 1e-6);
  EXPECT_NEAR(p[2], -0.01, 1e-5);
}

TEST(Adam, TwoStepHandReference) {
  // Plain double recurrence for beta1 0.9, beta2 0.98, eps 1e-9.
  double x = 1.0, m = 0.0, v = 0.0;
  const double lr = 0.05;
  const std::vector<double> grads = {0.3, -0.2};
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const double g = grads[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.98 * v + 0.02 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.98, t));
    x -= lr * mh / (std::sqrt(vh) + 1e-9);
  }
  Tensor p({1}, 1.0f);
  Adam opt;
  for (double g : grads) {
    const Tensor gt({1}, static_cast<float>(g));
    opt.step({&p}, {&gt}, lr);
  }
  EXPECT_NEAR(p[0], x, 1e-7);
  EXPECT_EQ(opt.steps(), 2u);
}

TEST(Adam, ShapeMismatchThrows) {
  Tensor p({2}, 0.0f);
  const Tensor g({3}, 0.0f);
  Adam opt;
  EXPECT_THROW(opt.step({&p}, {&g}, 0.1), Error);
}

TEST(LrSchedule, StartsAtEtaMax) {
  const LrSchedule s{1e-3, 1e-5, 100, 2.0};
  EXPECT_DOUBLE_EQ(lr_at(0, s), 1e-3);
}

TEST(LrSchedule, CosineEndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(cosine_annealing(100, 100, 1e-3, 1e-5), 1e-5);
  EXPECT_NEAR(cosine_annealing(50, 100, 1e-3, 1e-5), 0.5 * (1e-3 + 1e-5), 1e-15);
  const LrSchedule s{1e-3, 1e-5, 100, 1.0};
  EXPECT_NEAR(lr_at(50, s), 0.5 * (1e-3 + 1e-5), 1e-15);
  EXPECT_NEAR(lr_at(99, s), cosine_annealing(99, 100, 1e-3, 1e-5), 1e-15);
}

TEST(LrSchedule, WarmRestarts) {
  const LrSchedule flat{1e-3, 0.0, 10, 1.0};
  EXPECT_DOUBLE_EQ(lr_at(10, flat), 1e-3);
  EXPECT_DOUBLE_EQ(lr_at(25, flat), lr_at(5, flat));
  const LrSchedule grow{1e-3, 0.0, 10, 2.0};
  // Periods 10, 20, 40: restarts at steps 10 and 30.
  EXPECT_DOUBLE_EQ(lr_at(10, grow), 1e-3);
  EXPECT_DOUBLE_EQ(lr_at(30, grow), 1e-3);
  EXPECT_NEAR(lr_at(20, grow), cosine_annealing(10, 20, 1e-3, 0.0), 1e-15);
  for (std::uint64_t t = 0; t < 100; ++t) {
    const double lr = lr_at(t, grow);
    EXPECT_GE(lr, 0.0);
    EXPECT_LE(lr, 1e-3);
  }
}

TEST(LrSchedule, Validates) {
  EXPECT_THROW((LrSchedule{1e-5, 1e-3, 10, 1.0}).validate(), Error);
  EXPECT_THROW((LrSchedule{1e-3, 0, 0, 1.0}).validate(), Error);
  EXPECT_THROW((LrSchedule{1e-3, 0, 10, 0.5}).validate(), Error);
}

TEST(ClipGradNorm, RescalesToMaxNorm) {
  auto a = parameter(Tensor({2}, 0.0f));
  a->grad = Tensor({2}, std::vector<float>{3, 4});
  const NamedParameters ps = {{"a", a}};
  EXPECT_NEAR(clip_grad_norm(ps, 1.0), 5.0, 1e-9);
  EXPECT_NEAR(global_grad_norm(ps), 1.0, 1e-6);
  EXPECT_NEAR(clip_grad_norm(ps, 10.0), 1.0, 1e-6);
  EXPECT_NEAR(global_grad_norm(ps), 1.0, 1e-6);
}

TEST(Dropout, ScalesKeptUnitsAndIsIdentityInEval) {
  Rng rng(3);
  auto x = constant(Tensor({10000}, 1.0f));
  const auto y = dropout(x, 0.25f, rng)->value;
  std::size_t kept = 0;
  for (float v : y.vec()) {
    if (v != 0.0f) {
      EXPECT_NEAR(v, 1.0f / 0.75f, 1e-6);
      ++kept;
    }
  }
  EXPECT_NEAR(static_cast<double>(kept) / 10000.0, 0.75, 0.02);
  ForwardContext eval;
  eval.p_drop = 0.5f;
  eval.rng = &rng;
  EXPECT_EQ(eval.drop(x).get(), x.get());
}

TEST(Autograd, NoGradGuardSkipsTape) {
  auto w = parameter(Tensor({2}, 1.0f));
  {
    NoGradGuard g;
    auto y = scale(w, 2.0f);
    EXPECT_TRUE(y->parents.empty());
  }
  auto y = scale(w, 2.0f);
  EXPECT_FALSE(y->parents.empty());
}

TEST(Autograd, SharedInputAccumulates) {
  auto w = parameter(Tensor({1}, 3.0f));
  backward(dot_const(add(w, w), Tensor({1}, 1.0f)));
  EXPECT_FLOAT_EQ(w->grad[0], 2.0f);
}

TEST(GradCheck, EveryCaseWithinTolerance) {
  for (const auto& c : criteria::gradient_cases()) {
    EXPECT_GT(c.checked, 0u) << c.name;
    EXPECT_LE(c.error, c.tolerance) << c.name;
  }
}

TEST(GradCheck, DetectsWrongGradient) {
  // A deliberately broken backward must fail.
  auto x = parameter(Tensor({3}, std::vector<float>{2.0f, -1.0f, 0.5f}));
  const auto broken = [&] {
    Tensor v = x->value;
    return detail::make_result(Tensor({1}, v[0] * v[0]), {x}, [](Node& self) {
      self.parents[0]->grad_buffer()[0] += self.grad[0];  // should be 2 * x0 = 4
    });
  };
  EXPECT_GT(grad_check(broken, {x}).max_rel_error, 0.1);
}

TEST(Initialization, DeterministicUnderSeed) {
  Rng a(9), b(9);
  Linear la(4, 3, a), lb(4, 3, b);
  EXPECT_EQ(la.weight->value.vec(), lb.weight->value.vec());
  for (float w : la.weight->value.vec()) EXPECT_LE(std::abs(w), 0.5f);
}

}  // namespace
}  // namespace memebot::nn
