#pragma once

// Dense numeric kernels, each with a serial reference path and an OpenMP
// path. The parallel path partitions independent output rows (or queries)
// across threads and writes each result to its own slot, so both paths
// produce bit-identical output.

#include <cstddef>
#include <span>
#include <vector>

namespace vgvae::kernels {

enum class Exec { serial, parallel };

/// Row-major matrix of doubles.
struct Matrix {
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows(rows), cols(cols), data(rows * cols, 0.0) {}

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};

/// out[r x c] = a[r x k] * b[k x c]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> out,
            std::size_t r, std::size_t k, std::size_t c, Exec exec = Exec::serial);
/// ga[r x k] += g[r x c] * b^T
void matmul_grad_a(std::span<const double> g, std::span<const double> b, std::span<double> ga,
                   std::size_t r, std::size_t k, std::size_t c);
/// gb[k x c] += a^T * g
void matmul_grad_b(std::span<const double> a, std::span<const double> g, std::span<double> gb,
                   std::size_t r, std::size_t k, std::size_t c);

/// Copy of m with every row scaled to unit norm (zero rows stay zero).
Matrix normalized_rows(const Matrix& m);

/// Index of the candidate row with the highest dot product against `query`,
/// restricted to `subset` when non-empty. Ties go to the lowest index.
/// Returns candidates.rows when nothing is eligible.
std::size_t argmax_dot(std::span<const double> query, const Matrix& candidates,
                       std::span<const std::size_t> subset = {});

/// argmax_dot for each query row. `subsets`, when non-empty, gives one
/// candidate subset per query.
std::vector<std::size_t> argmax_dot_batch(const Matrix& queries, const Matrix& candidates,
                                          std::span<const std::vector<std::size_t>> subsets,
                                          Exec exec = Exec::parallel);

/// out[i] = fn(i) for i in [0, n). fn must be safe to call concurrently.
template <class T, class Fn>
std::vector<T> map_indices(std::size_t n, Fn&& fn, Exec exec = Exec::parallel) {
  std::vector<T> out(n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = fn(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  }
  return out;
}

}  // namespace vgvae::kernels
