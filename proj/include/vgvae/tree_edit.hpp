#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vgvae/data_io.hpp"

namespace vgvae {

/// A tree flattened into postorder for repeated edit-distance queries.
/// Word leaves take their token as label.
class TedTree {
 public:
  TedTree() = default;
  explicit TedTree(const ParseTree& tree);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Postorder index of the leftmost leaf below each node.
  const std::vector<std::size_t>& leftmost() const { return leftmost_; }
  /// The highest node for each distinct leftmost leaf, in increasing order.
  const std::vector<std::size_t>& keyroots() const { return keyroots_; }

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> leftmost_;
  std::vector<std::size_t> keyroots_;
};

/// Ordered tree edit distance with unit insert, delete and relabel costs
/// (Zhang-Shasha keyroot dynamic program).
std::size_t ted(const TedTree& a, const TedTree& b);
std::size_t ted(const ParseTree& a, const ParseTree& b);

}  // namespace vgvae
