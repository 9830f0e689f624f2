#include "vgvae/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "vgvae/errors.hpp"

namespace vgvae {

using kernels::Exec;
using kernels::Matrix;

double pearson(std::span<const double> scores, std::span<const double> gold) {
  if (scores.size() != gold.size())
    throw DimensionError("pearson: " + std::to_string(scores.size()) + " scores vs " + std::to_string(gold.size()) +
                         " gold values");
  if (scores.empty()) throw DimensionError("pearson of empty series");
  const double n = static_cast<double>(scores.size());
  const double ms = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  const double mg = std::accumulate(gold.begin(), gold.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double a = scores[i] - ms, b = gold[i] - mg;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson of a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine of vectors with different dimensions");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

Matrix embed_all(const Model& model, std::span<const Sentence> sentences, Variable v, Exec exec) {
  auto rows = kernels::map_indices<std::vector<double>>(
      sentences.size(), [&](std::size_t i) { return model.embed(sentences[i], v); }, exec);
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return kernels::normalized_rows(m);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string EvalReport::table() const {
  std::ostringstream os;
  auto line = [&](const std::string& name, double v) {
    os << name;
    for (std::size_t i = name.size(); i < 16; ++i) os << ' ';
    os << fixed(v, 4);
    os << "  (" << fixed(percent ? 100.0 * v : v, 1) << (percent ? "%" : "") << ")\n";
  };
  line(metric, aggregate);
  if (random_baseline) line("random", *random_baseline);
  if (upper_bound) line("upper_bound", *upper_bound);
  os << "items           " << items.size() << "\n";
  if (skipped) os << "skipped         " << skipped << "\n";
  return os.str();
}

std::string EvalReport::csv() const {
  std::ostringstream os;
  os << "metric,item_id,value\n";
  for (const auto& it : items) {
    os << metric << ',' << it.id << ',' << fixed(it.value, 17) << '\n';
    if (it.length) os << "length," << it.id << ',' << it.length << '\n';
  }
  return os.str();
}

double recompute_aggregate(const EvalReport& r) {
  if (r.items.empty()) return 0.0;
  if (r.metric == "sts_pearson") {
    std::vector<double> s, g;
    for (const auto& it : r.items) {
      s.push_back(it.value);
      g.push_back(it.detail.at(0));
    }
    return pearson(s, g);
  }
  if (r.metric == "labeled_f1") {
    BracketCounts c;
    for (const auto& it : r.items) {
      c.matched += static_cast<std::size_t>(it.detail.at(0));
      c.predicted += static_cast<std::size_t>(it.detail.at(1));
      c.gold += static_cast<std::size_t>(it.detail.at(2));
    }
    return f1_score(c);
  }
  if (r.metric == "pos_accuracy") {
    double correct = 0.0, total = 0.0;
    for (const auto& it : r.items) {
      correct += it.detail.at(0);
      total += it.detail.at(1);
    }
    return total > 0.0 ? correct / total : 0.0;
  }
  double s = 0.0;
  for (const auto& it : r.items) s += it.value;
  return s / static_cast<double>(r.items.size());
}

// ---------------------------------------------------------------------------
// Semantic similarity

EvalReport sts_eval(const Model& model, const Vocab& vocab, std::span<const StsItem> data, Variable v) {
  EvalReport r;
  r.metric = "sts_pearson";
  r.percent = true;
  auto cosines = kernels::map_indices<double>(data.size(), [&](std::size_t i) {
    return cosine(model.embed(vocab.encode(data[i].sent1), v), model.embed(vocab.encode(data[i].sent2), v));
  });
  std::vector<double> gold;
  for (std::size_t i = 0; i < data.size(); ++i) {
    r.items.push_back({i, cosines[i], 0, {data[i].score}});
    gold.push_back(data[i].score);
  }
  r.aggregate = pearson(cosines, gold);
  return r;
}

// ---------------------------------------------------------------------------
// Brackets

std::vector<Bracket> brackets(const ParseTree& tree) {
  std::vector<Bracket> out;
  auto walk = [&](auto&& self, const ParseTree& t, std::size_t start) -> std::size_t {
    if (t.is_word()) return start;  // only reachable for a bare word
    if (t.is_preterminal() || t.is_leaf()) return start + 1;
    std::size_t end = start;
    for (const auto& c : t.children) end = self(self, c, end);
    out.emplace_back(t.label, start, end);
    return end;
  };
  walk(walk, tree, 0);
  return out;
}

BracketCounts bracket_match(const ParseTree& predicted, const ParseTree& gold) {
  const auto pv = brackets(predicted);
  const auto gv = brackets(gold);
  const std::set<Bracket> ps(pv.begin(), pv.end()), gs(gv.begin(), gv.end());
  BracketCounts c;
  c.predicted = ps.size();
  c.gold = gs.size();
  for (const auto& b : ps) c.matched += gs.count(b);
  return c;
}

double f1_score(const BracketCounts& c) {
  if (c.predicted == 0 && c.gold == 0) return 1.0;
  if (c.matched == 0) return 0.0;
  const double p = static_cast<double>(c.matched) / static_cast<double>(c.predicted);
  const double r = static_cast<double>(c.matched) / static_cast<double>(c.gold);
  return 2.0 * p * r / (p + r);
}

// ---------------------------------------------------------------------------
// Index

NnIndex::NnIndex(Matrix vectors, std::span<const ParseTree> trees) : vectors_(kernels::normalized_rows(vectors)) {
  if (vectors_.rows != trees.size())
    throw DimensionError("index has " + std::to_string(vectors_.rows) + " vectors for " +
                         std::to_string(trees.size()) + " trees");
  for (std::size_t i = 0; i < trees.size(); ++i) {
    words_.push_back(trees[i].words());
    trees_.push_back(strip_tokens(trees[i]));
    tags_.push_back(trees_.back().tags());
    ted_trees_.emplace_back(trees_.back());
    buckets_[tags_.back().size()].push_back(i);
  }
}

NnIndex NnIndex::build(const Model& model, const Vocab& vocab, std::span<const ParseTree> trees, Variable v) {
  std::vector<Sentence> sentences;
  sentences.reserve(trees.size());
  for (const auto& t : trees) {
    auto w = t.words();
    if (w.empty()) throw InputError("tree without words: " + serialize(t));
    sentences.push_back(vocab.encode(w));
  }
  return NnIndex(embed_all(model, sentences, v), trees);
}

std::span<const std::size_t> NnIndex::bucket(std::size_t length) const {
  auto it = buckets_.find(length);
  if (it == buckets_.end()) return {};
  return it->second;
}

namespace {

void require_nonempty(const NnIndex& index) {
  if (index.empty()) throw InputError("empty candidate index");
}

void require_same_dim(const NnIndex& index, const NnIndex& queries) {
  if (!queries.empty() && index.vectors().cols != queries.vectors().cols)
    throw DimensionError("query and candidate embeddings differ in dimension");
}

// Nearest same-length candidate per query, or index.size() when none.
std::vector<std::size_t> nearest_same_length(const NnIndex& index, const NnIndex& queries, Exec exec) {
  return kernels::map_indices<std::size_t>(
      queries.size(),
      [&](std::size_t q) {
        const auto b = index.bucket(queries.length(q));
        if (b.empty()) return index.size();
        return kernels::argmax_dot(queries.vectors().row(q), index.vectors(), b);
      },
      exec);
}

}  // namespace

EvalReport nn_parse_ted(const NnIndex& index, const NnIndex& queries, Exec exec) {
  require_nonempty(index);
  require_same_dim(index, queries);
  EvalReport r;
  r.metric = "ted";
  const auto nn = kernels::argmax_dot_batch(queries.vectors(), index.vectors(), {}, exec);
  const auto d = kernels::map_indices<std::size_t>(
      queries.size(), [&](std::size_t q) { return ted(index.ted_tree(nn[q]), queries.ted_tree(q)); }, exec);
  double s = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    r.items.push_back({q, static_cast<double>(d[q]), queries.length(q), {}});
    s += static_cast<double>(d[q]);
  }
  r.aggregate = queries.empty() ? 0.0 : s / static_cast<double>(queries.size());
  return r;
}

double random_baseline_ted(const NnIndex& index, const NnIndex& queries, Rng& rng, std::size_t runs) {
  require_nonempty(index);
  if (runs == 0 || queries.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t run = 0; run < runs; ++run) {
    double s = 0.0;
    for (std::size_t q = 0; q < queries.size(); ++q)
      s += static_cast<double>(ted(index.ted_tree(rng.below(index.size())), queries.ted_tree(q)));
    total += s / static_cast<double>(queries.size());
  }
  return total / static_cast<double>(runs);
}

UpperBound upper_bound_ted(const NnIndex& index, const NnIndex& queries, Rng& rng, std::size_t sample, Exec exec) {
  require_nonempty(index);
  UpperBound ub;
  std::vector<std::size_t> order(queries.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n = std::min(sample, order.size());
  // partial Fisher-Yates
  for (std::size_t i = 0; i < n; ++i) std::swap(order[i], order[i + rng.below(order.size() - i)]);
  ub.sample.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(ub.sample.begin(), ub.sample.end());
  ub.minima = kernels::map_indices<std::size_t>(
      n,
      [&](std::size_t k) {
        const TedTree& q = queries.ted_tree(ub.sample[k]);
        std::size_t best = static_cast<std::size_t>(-1);
        for (std::size_t c = 0; c < index.size() && best > 0; ++c) best = std::min(best, ted(index.ted_tree(c), q));
        return best;
      },
      exec);
  double s = 0.0;
  for (auto m : ub.minima) s += static_cast<double>(m);
  ub.value = n ? s / static_cast<double>(n) : 0.0;
  return ub;
}

EvalReport nn_labeled_f1(const NnIndex& index, const NnIndex& queries, Exec exec) {
  require_nonempty(index);
  require_same_dim(index, queries);
  EvalReport r;
  r.metric = "labeled_f1";
  r.percent = true;
  const auto nn = nearest_same_length(index, queries, exec);
  BracketCounts total;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (nn[q] == index.size()) {
      ++r.skipped;
      continue;
    }
    const auto c = bracket_match(index.tree(nn[q]), queries.tree(q));
    total.matched += c.matched;
    total.predicted += c.predicted;
    total.gold += c.gold;
    r.items.push_back({q, f1_score(c), queries.length(q),
                       {static_cast<double>(c.matched), static_cast<double>(c.predicted),
                        static_cast<double>(c.gold)}});
  }
  r.aggregate = r.items.empty() ? 0.0 : f1_score(total);
  return r;
}

EvalReport nn_pos_accuracy(const NnIndex& index, const NnIndex& queries, Exec exec) {
  require_nonempty(index);
  require_same_dim(index, queries);
  EvalReport r;
  r.metric = "pos_accuracy";
  r.percent = true;
  const auto nn = nearest_same_length(index, queries, exec);
  std::size_t correct = 0, total = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (nn[q] == index.size()) {
      ++r.skipped;
      continue;
    }
    const Tokens& pred = index.tags(nn[q]);
    const Tokens& gold = queries.tags(q);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) ok += pred[i] == gold[i];
    correct += ok;
    total += gold.size();
    r.items.push_back({q, static_cast<double>(ok) / static_cast<double>(gold.size()), gold.size(),
                       {static_cast<double>(ok), static_cast<double>(gold.size())}});
  }
  r.aggregate = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return r;
}

double nn_label_accuracy(const Matrix& candidates, std::span<const int> candidate_labels, const Matrix& queries,
                         std::span<const int> query_labels, Exec exec) {
  if (candidates.rows != candidate_labels.size() || queries.rows != query_labels.size())
    throw DimensionError("label count does not match embedding rows");
  if (candidates.rows == 0) throw InputError("empty candidate set");
  if (queries.rows == 0) return 0.0;
  const auto nn = kernels::argmax_dot_batch(queries, candidates, {}, exec);
  std::size_t ok = 0;
  for (std::size_t q = 0; q < queries.rows; ++q) ok += candidate_labels[nn[q]] == query_labels[q];
  return static_cast<double>(ok) / static_cast<double>(queries.rows);
}

std::vector<Neighbor> nearest_sentences(const Matrix& candidates, std::span<const double> query, std::size_t top_n) {
  if (query.size() != candidates.cols) throw DimensionError("query dimension does not match candidates");
  std::vector<Neighbor> all(candidates.rows);
  for (std::size_t i = 0; i < candidates.rows; ++i) all[i] = {i, cosine(candidates.row(i), query)};
  const std::size_t n = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.cosine != b.cosine ? a.cosine > b.cosine : a.index < b.index;
                    });
  all.resize(n);
  return all;
}

}  // namespace vgvae
