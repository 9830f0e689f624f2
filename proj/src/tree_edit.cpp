#include "vgvae/tree_edit.hpp"

#include <algorithm>

namespace vgvae {

TedTree::TedTree(const ParseTree& tree) {
  auto walk = [&](auto&& self, const ParseTree& t) -> std::size_t {
    std::size_t first = static_cast<std::size_t>(-1);
    for (const auto& c : t.children) {
      const std::size_t lm = self(self, c);
      if (first == static_cast<std::size_t>(-1)) first = lm;
    }
    const std::size_t id = labels_.size();
    labels_.push_back(t.is_word() ? t.token : t.label);
    leftmost_.push_back(t.children.empty() ? id : first);
    return leftmost_.back();
  };
  walk(walk, tree);
  // a keyroot is the highest node with a given leftmost leaf
  std::vector<bool> seen(labels_.size(), false);
  for (std::size_t i = labels_.size(); i-- > 0;) {
    if (!seen[leftmost_[i]]) {
      seen[leftmost_[i]] = true;
      keyroots_.push_back(i);
    }
  }
  std::sort(keyroots_.begin(), keyroots_.end());
}

std::size_t ted(const TedTree& a, const TedTree& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  const auto& la = a.leftmost();
  const auto& lb = b.leftmost();
  std::vector<std::size_t> td(n * m, 0);
  std::vector<std::size_t> fd((n + 1) * (m + 1), 0);
  for (std::size_t i : a.keyroots()) {
    for (std::size_t j : b.keyroots()) {
      // forest distance over postorder ranges [la[i], i] x [lb[j], j]
      const std::size_t li = la[i], lj = lb[j];
      const std::size_t rows = i - li + 2, cols = j - lj + 2;
      auto f = [&](std::size_t x, std::size_t y) -> std::size_t& { return fd[x * cols + y]; };
      f(0, 0) = 0;
      for (std::size_t x = 1; x < rows; ++x) f(x, 0) = x;
      for (std::size_t y = 1; y < cols; ++y) f(0, y) = y;
      for (std::size_t x = 1; x < rows; ++x) {
        const std::size_t ai = li + x - 1;
        for (std::size_t y = 1; y < cols; ++y) {
          const std::size_t bj = lj + y - 1;
          const std::size_t del = f(x - 1, y) + 1;
          const std::size_t ins = f(x, y - 1) + 1;
          if (la[ai] == li && lb[bj] == lj) {
            const std::size_t rel = f(x - 1, y - 1) + (a.labels()[ai] == b.labels()[bj] ? 0 : 1);
            f(x, y) = std::min({del, ins, rel});
            td[ai * m + bj] = f(x, y);
          } else {
            const std::size_t px = la[ai] - li, py = lb[bj] - lj;
            f(x, y) = std::min({del, ins, f(px, py) + td[ai * m + bj]});
          }
        }
      }
    }
  }
  return td[(n - 1) * m + (m - 1)];
}

std::size_t ted(const ParseTree& a, const ParseTree& b) { return ted(TedTree(a), TedTree(b)); }

}  // namespace vgvae
