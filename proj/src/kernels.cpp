#include "vgvae/kernels.hpp"

#include <cmath>

namespace vgvae::kernels {

namespace {

void matmul_rows(std::span<const double> a, std::span<const double> b, std::span<double> out,
                 std::size_t i, std::size_t k, std::size_t c) {
  double* o = out.data() + i * c;
  for (std::size_t j = 0; j < c; ++j) o[j] = 0.0;
  const double* ai = a.data() + i * k;
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double av = ai[kk];
    if (av == 0.0) continue;
    const double* bk = b.data() + kk * c;
    for (std::size_t j = 0; j < c; ++j) o[j] += av * bk[j];
  }
}

}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t r, std::size_t k, std::size_t c, Exec exec) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(r); ++i)
      matmul_rows(a, b, out, static_cast<std::size_t>(i), k, c);
  } else {
    for (std::size_t i = 0; i < r; ++i) matmul_rows(a, b, out, i, k, c);
  }
}

void matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> ga,
                   std::size_t r, std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* gi = g.data() + i * c;
    double* gai = ga.data() + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double* bk = b.data() + kk * c;
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += gi[j] * bk[j];
      gai[kk] += s;
    }
  }
}

void matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> gb,
                   std::size_t r, std::size_t k, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* ai = a.data() + i * k;
    const double* gi = g.data() + i * c;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = ai[kk];
      if (av == 0.0) continue;
      double* gbk = gb.data() + kk * c;
      for (std::size_t j = 0; j < c; ++j) gbk[j] += av * gi[j];
    }
  }
}

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows; ++r) {
    auto row = out.row(r);
    double n = 0.0;
    for (double v : row) n += v * v;
    n = std::sqrt(n);
    if (n > 0.0)
      for (double& v : row) v /= n;
  }
  return out;
}

std::size_t argmax_dot(std::span<const double> query, const Matrix& candidates,
                       std::span<const std::size_t> subset) {
  std::size_t best = candidates.rows;
  double best_score = -INFINITY;
  auto consider = [&](std::size_t idx) {
    const auto row = candidates.row(idx);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += query[j] * row[j];
    if (s > best_score || (s == best_score && idx < best)) {
      best_score = s;
      best = idx;
    }
  };
  if (subset.empty()) {
    for (std::size_t i = 0; i < candidates.rows; ++i) consider(i);
  } else {
    for (std::size_t idx : subset) consider(idx);
  }
  return best;
}

std::vector<std::size_t> argmax_dot_batch(const Matrix& queries, const Matrix& candidates,
                                          std::span<const std::vector<std::size_t>> subsets,
                                          Exec exec) {
  return map_indices<std::size_t>(
      queries.rows,
      [&](std::size_t q) {
        if (subsets.empty()) return argmax_dot(queries.row(q), candidates);
        // an empty subset for a query means no eligible candidate
        if (subsets[q].empty()) return candidates.rows;
        return argmax_dot(queries.row(q), candidates, subsets[q]);
      },
      exec);
}

}  // namespace vgvae::kernels
