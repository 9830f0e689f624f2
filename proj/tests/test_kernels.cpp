#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vgvae/kernels.hpp"

using namespace vgvae;
using namespace vgvae::kernels;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("matmul serial and parallel agree bitwise") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t r = 1 + rng.below(40), k = 1 + rng.below(40), c = 1 + rng.below(40);
    const Matrix a = random_matrix(r, k, rng), b = random_matrix(k, c, rng);
    std::vector<double> s(r * c), p(r * c);
    matmul(a.data, b.data, s, r, k, c, Exec::serial);
    matmul(a.data, b.data, p, r, k, c, Exec::parallel);
    CHECK(s == p);
    // naive triple loop
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double acc = 0.0;
        for (std::size_t q = 0; q < k; ++q) acc += a.data[i * k + q] * b.data[q * c + j];
        CHECK(s[i * c + j] == doctest::Approx(acc).epsilon(1e-13));
      }
  }
}

TEST_CASE("matmul gradients") {
  const std::vector<double> a = {1, 2, 3, 4, 5, 6};  // 2x3
  const std::vector<double> b = {1, 0, 0, 1, 1, 1};  // 3x2
  const std::vector<double> g = {1, 2, 3, 4};        // 2x2
  std::vector<double> ga(6, 0.0), gb(6, 0.0);
  matmul_grad_a(g, b, ga, 2, 3, 2);
  matmul_grad_b(a, g, gb, 2, 3, 2);
  CHECK(ga == std::vector<double>{1, 2, 3, 3, 4, 7});
  CHECK(gb == std::vector<double>{13, 18, 17, 24, 21, 30});
}

TEST_CASE("argmax_dot") {
  Matrix cands(3, 2);
  cands.data = {1, 0, 0, 1, 1, 0};
  const std::vector<double> q = {1, 0};
  CHECK(argmax_dot(q, cands) == 0);  // tie goes to the lower index
  const std::vector<std::size_t> subset = {1, 2};
  CHECK(argmax_dot(q, cands, subset) == 2);
  const std::vector<std::size_t> none;
  Matrix empty(0, 2);
  CHECK(argmax_dot(q, empty) == 0);

  Rng rng(2);
  const Matrix qs = random_matrix(50, 8, rng), cs = random_matrix(300, 8, rng);
  std::vector<std::vector<std::size_t>> subsets(50);
  for (auto& s : subsets)
    for (std::size_t i = 0; i < 300; ++i)
      if (rng.uniform() < 0.3) s.push_back(i);
  const auto serial = argmax_dot_batch(qs, cs, subsets, Exec::serial);
  const auto parallel = argmax_dot_batch(qs, cs, subsets, Exec::parallel);
  CHECK(serial == parallel);
  for (std::size_t i = 0; i < 50; ++i) CHECK(serial[i] == argmax_dot(qs.row(i), cs, subsets[i]));
  const auto all = argmax_dot_batch(qs, cs, {}, Exec::parallel);
  for (std::size_t i = 0; i < 50; ++i) CHECK(all[i] == argmax_dot(qs.row(i), cs));
}

TEST_CASE("normalized_rows and map_indices") {
  Matrix m(2, 2);
  m.data = {3, 4, 0, 0};
  const Matrix n = normalized_rows(m);
  CHECK(n.data == std::vector<double>{0.6, 0.8, 0, 0});
  const auto sq = map_indices<std::size_t>(100, [](std::size_t i) { return i * i; }, Exec::parallel);
  const auto sq2 = map_indices<std::size_t>(100, [](std::size_t i) { return i * i; }, Exec::serial);
  CHECK(sq == sq2);
  CHECK(sq[9] == 81);
}
