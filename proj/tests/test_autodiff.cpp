#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "grad_cases.hpp"
#include "support.hpp"
#include "vgvae/autodiff.hpp"
#include "vgvae/errors.hpp"

using namespace vgvae;
using namespace vgvae::testing;

namespace {

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST_CASE("matmul values") {
  Tape t;
  Tensor eye = t.constant({2, 2}, {1, 0, 0, 1});
  Tensor v = t.constant({2, 1}, {3, 4});
  CHECK(values(matmul(eye, v)) == std::vector<double>{3, 4});
  Tensor a = t.constant({1, 2}, {1, 2});
  CHECK(matmul(a, v).item() == 11.0);
  CHECK(matmul(a, v).shape() == Shape{1, 1});
}

TEST_CASE("matmul gradient of sum(A B) is B^T") {
  Parameter a("a", {1, 2});
  a.value = {1, 2};
  Tape t;
  Tensor b = t.constant({2, 1}, {3, 4});
  t.backward(sum(matmul(t.param(a), b)));
  CHECK(a.grad == std::vector<double>{3, 4});

  // same through central differences with h = 1e-6
  auto f = [&](Tape& tt) { return sum(matmul(tt.param(a), tt.constant({2, 1}, {3, 4}))); };
  const GradReport rep = check_gradients({&a}, f, 1e-6);
  CHECK(rep.max_rel < 1e-8);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape t;
  Tensor a = t.zeros({2, 3});
  Tensor b = t.zeros({2, 3});
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("elementwise values") {
  Tape t;
  Tensor z = t.constant({0.0});
  CHECK(tanh(z).item() == 0.0);
  CHECK(sigmoid(z).item() == 0.5);
  CHECK(elementwise(OpKind::tanh, z).item() == 0.0);
  CHECK(elementwise(OpKind::sigmoid, z).item() == 0.5);
  CHECK(relu(t.constant({-2.0, 3.0}))[0] == 0.0);
  CHECK(elementwise(OpKind::neg, t.constant({2.0})).item() == -2.0);
  CHECK(elementwise(OpKind::add, t.constant({1.0, 2.0}), t.constant({3.0, 4.0}))[1] == 6.0);
  CHECK(softplus(t.constant({50.0})).item() == doctest::Approx(50.0));
  CHECK(softplus(t.constant({-800.0})).item() >= 0.0);
}

TEST_CASE("tanh derivative at 0.3 matches central differences") {
  Parameter x("x", {1});
  x.value = {0.3};
  const double exact = 1.0 - std::tanh(0.3) * std::tanh(0.3);
  Tape t;
  t.backward(sum(tanh(t.param(x))));
  CHECK(std::abs(x.grad[0] - exact) / exact < 1e-12);
  const double h = 1e-5;
  const double fd = (std::tanh(0.3 + h) - std::tanh(0.3 - h)) / (2 * h);
  CHECK(std::abs(x.grad[0] - fd) / exact < 1e-6);
}

TEST_CASE("log rejects non-positive input; binary ops reject mismatched shapes") {
  Tape t;
  CHECK_THROWS_AS(log(t.constant({1.0, 0.0})), DomainError);
  CHECK_THROWS_AS(log(t.constant({-1.0})), DomainError);
  CHECK_THROWS_AS(add(t.zeros({2, 3}), t.zeros({3, 2})), DimensionError);
  CHECK_THROWS_AS(elementwise(OpKind::mul, t.zeros({2}), t.zeros({3})), DimensionError);
  // single-element operands broadcast
  Tensor s = mul(t.constant({2.0}), t.constant({2, 2}, {1, 2, 3, 4}));
  CHECK(values(s) == std::vector<double>{2, 4, 6, 8});
  CHECK_THROWS_AS(elementwise(OpKind::tanh, t.zeros({2}), t.zeros({2})), ContractError);
}

TEST_CASE("log_softmax") {
  Tape t;
  Tensor u = log_softmax(t.constant({0.0, 0.0}));
  CHECK(u[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));

  Tensor big = log_softmax(t.constant({1000.0, 0.0}));
  CHECK(std::isfinite(big[0]));
  CHECK(std::abs(big[0]) < 1e-300);
  CHECK(big[1] == doctest::Approx(-1000.0));

  // [1,2,3] against a long double oracle
  Tensor v = log_softmax(t.constant({1.0, 2.0, 3.0}));
  const long double lse = std::log(std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(v[static_cast<std::size_t>(i)] - static_cast<double>(i + 1 - lse)) < 1e-15);

  // rows of a matrix normalize independently
  Tensor m = log_softmax(t.constant({2, 3}, {1, 2, 3, -5, 0, 7}));
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 3; ++c) s += std::exp(m[r * 3 + c]);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(log_softmax(t.constant({1.0, std::numeric_limits<double>::quiet_NaN()})), NumericError);
}

TEST_CASE("concat") {
  Tape t;
  CHECK(values(concat(t.constant({1.0}), t.constant({2.0}), 0)) == std::vector<double>{1, 2});
  Tensor y = t.zeros({1, 50}), z = t.zeros({1, 50});
  CHECK(concat(y, z, 1).shape() == Shape{1, 100});
  CHECK(concat(t.zeros({2, 3}), t.zeros({4, 3}), 0).shape() == Shape{6, 3});
  CHECK_THROWS_AS(concat(t.zeros({2, 3}), t.zeros({2, 4}), 0), DimensionError);
  CHECK_THROWS_AS(concat(t.zeros({2, 3}), t.zeros({2, 3}), 2), DimensionError);

  Parameter a("a", {1, 2}), b("b", {1, 3});
  Tape g;
  g.backward(sum(concat(g.param(a), g.param(b), 1)));
  CHECK(a.grad == std::vector<double>{1, 1});
  CHECK(b.grad == std::vector<double>{1, 1, 1});
}

TEST_CASE("backward basics") {
  Parameter w("w", {2, 3});
  Tape t;
  t.backward(sum(t.param(w)));
  CHECK(w.grad == std::vector<double>(6, 1.0));

  Parameter v("v", {2});
  v.value = {1, -2};
  Tape t2;
  t2.backward(sum(mul(t2.param(v), t2.param(v))));
  CHECK(v.grad == std::vector<double>{2, -4});

  // repeated backward without zeroing accumulates
  Tape t3;
  Tensor l = sum(mul(t3.param(v), t3.param(v)));
  t3.backward(l);
  CHECK(v.grad == std::vector<double>{4, -8});
  v.zero_grad();
  CHECK(v.grad == std::vector<double>{0, 0});

  Tape t4;
  CHECK_THROWS_AS(t4.backward(t4.param(w)), ContractError);
}

TEST_CASE("backward of a sum of losses equals the sum of separate passes") {
  Rng rng(3);
  Parameter a = random_param("a", {3, 4}, rng);
  Parameter b = random_param("b", {4, 2}, rng);
  auto l1 = [&](Tape& t) { return sum(tanh(matmul(t.param(a), t.param(b)))); };
  auto l2 = [&](Tape& t) { return sum(square(t.param(a))); };

  Tape joint;
  joint.backward(add(l1(joint), l2(joint)));
  const auto ga = a.grad, gb = b.grad;
  a.zero_grad();
  b.zero_grad();
  Tape s1;
  s1.backward(l1(s1));
  Tape s2;
  s2.backward(l2(s2));
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(a.grad[i] == doctest::Approx(ga[i]).epsilon(1e-14));
  for (std::size_t i = 0; i < gb.size(); ++i) CHECK(b.grad[i] == doctest::Approx(gb[i]).epsilon(1e-14));
}

TEST_CASE("re-running forward and backward reproduces identical gradients") {
  Rng rng(5);
  Parameter a = random_param("a", {3, 3}, rng);
  auto run = [&] {
    a.zero_grad();
    Tape t;
    t.backward(sum(log_softmax(matmul(t.param(a), t.param(a)))));
    return a.grad;
  };
  CHECK(run() == run());
}

TEST_CASE("frozen tapes leave parameter gradients alone") {
  Parameter w("w", {2});
  w.value = {1, 2};
  Tape t(GradMode::frozen);
  Tensor pw = t.param(w);
  t.backward(sum(square(pw)));
  CHECK(w.grad == std::vector<double>{0, 0});
  CHECK(pw.grad() == std::vector<double>{2, 4});
}

TEST_CASE("operands from different tapes are rejected") {
  Tape a, b;
  CHECK_THROWS_AS(add(a.scalar(1), b.scalar(2)), ContractError);
  CHECK_THROWS_AS(a.backward(b.scalar(1)), ContractError);
}

TEST_CASE("shape helpers") {
  Tape t;
  Tensor x = t.constant({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(values(slice_cols(x, 1, 3)) == std::vector<double>{2, 3, 5, 6});
  CHECK(values(row(x, 1)) == std::vector<double>{4, 5, 6});
  CHECK(values(mean_rows(x)) == std::vector<double>{2.5, 3.5, 4.5});
  const std::vector<int> ids = {1, 1, 0};
  CHECK(values(gather_rows(x, ids)) == std::vector<double>{4, 5, 6, 4, 5, 6, 1, 2, 3});
  const std::vector<int> rs = {0, 1, 1}, cs = {2, 0, 0};
  CHECK(select_sum(x, rs, cs).item() == 11.0);
  Tensor n = normalize_rows(t.constant({1, 2}, {3, 4}));
  CHECK(values(n) == std::vector<double>{0.6, 0.8});
  CHECK(dot(t.constant({1.0, 2.0}), t.constant({3.0, 4.0})).item() == 11.0);
  CHECK(values(add_rowwise(x, t.constant({1, 3}, {1, 1, 1}))) == std::vector<double>{2, 3, 4, 5, 6, 7});
  CHECK_THROWS_AS(slice_cols(x, 2, 4), DimensionError);
  CHECK_THROWS_AS(row(x, 2), DimensionError);
  const std::vector<int> bad = {2};
  CHECK_THROWS_AS(gather_rows(x, bad), DimensionError);
}

TEST_CASE("every primitive matches central differences") {
  for (const auto& c : primitive_grad_cases()) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const GradReport rep = c.run(seed);
      INFO(c.name << " seed " << seed << " worst " << rep.worst);
      CHECK(rep.max_rel < 1e-4);
    }
  }
}

TEST_CASE("random 3-layer MLP gradients match central differences") {
  for (const auto& c : loss_grad_cases()) {
    if (c.name != "mlp3") continue;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(c.run(seed).max_rel < 1e-4);
  }
}
