// Serial reference vs OpenMP path for the hot kernels.

#include <benchmark/benchmark.h>

#include "vgvae/evaluation.hpp"
#include "vgvae/kernels.hpp"
#include "vgvae/random.hpp"
#include "vgvae/synthetic.hpp"

using namespace vgvae;
using kernels::Exec;
using kernels::Matrix;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal();
  return m;
}

Exec exec_of(const benchmark::State& state, int arg = 1) { return state.range(arg) ? Exec::parallel : Exec::serial; }

void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  Matrix out(n, n);
  for (auto _ : state) {
    kernels::matmul(a.data, b.data, out.data, n, n, n, exec_of(state));
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_matmul)->ArgsProduct({{64, 256}, {0, 1}})->ArgNames({"n", "parallel"})->Unit(benchmark::kMicrosecond);

void BM_argmax_dot_batch(benchmark::State& state) {
  const auto candidates = static_cast<std::size_t>(state.range(0));
  const Matrix c = kernels::normalized_rows(random_matrix(candidates, 50, 3));
  const Matrix q = kernels::normalized_rows(random_matrix(500, 50, 4));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::argmax_dot_batch(q, c, {}, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(500 * candidates));
}
BENCHMARK(BM_argmax_dot_batch)
    ->ArgsProduct({{2000, 20000}, {0, 1}})
    ->ArgNames({"candidates", "parallel"})
    ->Unit(benchmark::kMillisecond);

struct TreeData {
  NnIndex index, queries;
};

const TreeData& tree_data() {
  static const TreeData data = [] {
    SyntheticConfig cfg;
    cfg.pairs = 1000;
    cfg.sts_items = 10;
    cfg.test_sentences = 200;
    const SyntheticCorpus corpus = make_synthetic(cfg);
    std::vector<ParseTree> cand, query;
    for (const auto& s : corpus.pair_sentences) cand.push_back(s.tree);
    for (const auto& s : corpus.test) query.push_back(s.tree);
    return TreeData{NnIndex(kernels::normalized_rows(random_matrix(cand.size(), 50, 5)), cand),
                    NnIndex(kernels::normalized_rows(random_matrix(query.size(), 50, 6)), query)};
  }();
  return data;
}

void BM_nn_parse_ted(benchmark::State& state) {
  const TreeData& d = tree_data();
  for (auto _ : state) benchmark::DoNotOptimize(nn_parse_ted(d.index, d.queries, exec_of(state, 0)).aggregate);
}
BENCHMARK(BM_nn_parse_ted)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

// every sampled query against all 2000 candidates
void BM_upper_bound_ted(benchmark::State& state) {
  const TreeData& d = tree_data();
  for (auto _ : state) {
    Rng rng(7);
    benchmark::DoNotOptimize(upper_bound_ted(d.index, d.queries, rng, 20, exec_of(state, 0)).value);
  }
}
BENCHMARK(BM_upper_bound_ted)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
