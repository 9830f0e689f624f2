#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "vgvae/data_io.hpp"
#include "vgvae/kernels.hpp"
#include "vgvae/model.hpp"
#include "vgvae/random.hpp"
#include "vgvae/tree_edit.hpp"

namespace vgvae {

/// Pearson correlation. Throws DimensionError on length mismatch or fewer
/// than two items, UndefinedCorrelation if either series is constant.
double pearson(std::span<const double> scores, std::span<const double> gold);

/// Cosine similarity; 0 when either vector is zero.
double cosine(std::span<const double> a, std::span<const double> b);

/// Unit-normalized embeddings (one row per sentence) of the chosen variable.
kernels::Matrix embed_all(const Model& model, std::span<const Sentence> sentences, Variable v,
                          kernels::Exec exec = kernels::Exec::parallel);

struct ItemResult {
  std::size_t id = 0;
  double value = 0.0;
  /// Token length of the item when meaningful (0 otherwise).
  std::size_t length = 0;
  /// Raw quantities behind `value`: gold score (sts); matched, predicted,
  /// gold bracket counts (f1); correct, total tags (pos).
  std::vector<double> detail;
};

struct EvalReport {
  std::string metric;
  std::vector<ItemResult> items;
  double aggregate = 0.0;
  /// Aggregate is a proportion shown as a percentage in the table.
  bool percent = false;
  std::optional<double> random_baseline;
  std::optional<double> upper_bound;
  /// Queries that could not be scored (no same-length candidate).
  std::size_t skipped = 0;

  /// Human-readable table: metric values with 4 decimals, plus the
  /// percentage (one decimal) for proportions.
  std::string table() const;
  /// "metric,item_id,value" rows; items with a length add a "length" row.
  std::string csv() const;
};

/// Recompute a report's aggregate from its items (mean value, or the
/// pooled ratio for f1 / pos / sts).
double recompute_aggregate(const EvalReport& report);

/// Cosine of the chosen variable's mean vectors per pair; aggregate is the
/// Pearson correlation with the gold scores.
EvalReport sts_eval(const Model& model, const Vocab& vocab, std::span<const StsItem> data, Variable v);

/// Labeled constituent (label, start, end) over token positions, for every
/// node except preterminals (and the word leaves below them).
using Bracket = std::tuple<std::string, std::size_t, std::size_t>;
std::vector<Bracket> brackets(const ParseTree& tree);

struct BracketCounts {
  std::size_t matched = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};
/// Distinct-bracket overlap of a predicted and a gold tree.
BracketCounts bracket_match(const ParseTree& predicted, const ParseTree& gold);
double f1_score(const BracketCounts& c);

/// Candidates (or queries) for the syntactic evaluations: unit embeddings
/// with the stripped gold tree, POS tags and words of each sentence.
class NnIndex {
 public:
  NnIndex() = default;
  NnIndex(kernels::Matrix vectors, std::span<const ParseTree> trees);
  /// Embed the words of each tree with `model`.
  static NnIndex build(const Model& model, const Vocab& vocab, std::span<const ParseTree> trees, Variable v);

  std::size_t size() const { return trees_.size(); }
  bool empty() const { return trees_.empty(); }
  const kernels::Matrix& vectors() const { return vectors_; }
  const ParseTree& tree(std::size_t i) const { return trees_[i]; }
  const TedTree& ted_tree(std::size_t i) const { return ted_trees_[i]; }
  const Tokens& tags(std::size_t i) const { return tags_[i]; }
  const Tokens& words(std::size_t i) const { return words_[i]; }
  std::size_t length(std::size_t i) const { return tags_[i].size(); }
  const std::map<std::size_t, std::vector<std::size_t>>& length_buckets() const { return buckets_; }
  /// Candidates with the given length (empty when none).
  std::span<const std::size_t> bucket(std::size_t length) const;

 private:
  kernels::Matrix vectors_;
  std::vector<ParseTree> trees_;
  std::vector<TedTree> ted_trees_;
  std::vector<Tokens> tags_;
  std::vector<Tokens> words_;
  std::map<std::size_t, std::vector<std::size_t>> buckets_;
};

/// Nearest candidate (any length) per query; aggregate is the mean TED of
/// the predicted tree against the query's tree. Throws InputError on an
/// empty index.
EvalReport nn_parse_ted(const NnIndex& index, const NnIndex& queries,
                        kernels::Exec exec = kernels::Exec::parallel);

/// Mean TED when the prediction is a uniformly random candidate, averaged
/// over `runs` runs.
double random_baseline_ted(const NnIndex& index, const NnIndex& queries, Rng& rng, std::size_t runs = 10);

struct UpperBound {
  double value = 0.0;
  /// Sampled query positions (sorted) and their minimum TED over all candidates.
  std::vector<std::size_t> sample;
  std::vector<std::size_t> minima;
};
/// Oracle retrieval: mean over `sample` queries drawn without replacement
/// (all queries when fewer) of the minimum TED over all candidates.
UpperBound upper_bound_ted(const NnIndex& index, const NnIndex& queries, Rng& rng, std::size_t sample = 100,
                           kernels::Exec exec = kernels::Exec::parallel);

/// Nearest candidate of the same length; corpus-level labeled F1.
EvalReport nn_labeled_f1(const NnIndex& index, const NnIndex& queries,
                         kernels::Exec exec = kernels::Exec::parallel);
/// Nearest candidate of the same length; positional tag accuracy.
EvalReport nn_pos_accuracy(const NnIndex& index, const NnIndex& queries,
                           kernels::Exec exec = kernels::Exec::parallel);

/// Fraction of queries whose nearest candidate carries the same label.
double nn_label_accuracy(const kernels::Matrix& candidates, std::span<const int> candidate_labels,
                         const kernels::Matrix& queries, std::span<const int> query_labels,
                         kernels::Exec exec = kernels::Exec::parallel);

struct Neighbor {
  std::size_t index = 0;
  double cosine = 0.0;
};
/// The top_n candidates by cosine with `query`, best first; ties go to the
/// lower index.
std::vector<Neighbor> nearest_sentences(const kernels::Matrix& candidates, std::span<const double> query,
                                        std::size_t top_n);

}  // namespace vgvae
