#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vgvae {

using Sentence = std::vector<int>;
using Tokens = std::vector<std::string>;

/// Token <-> ID mapping. IDs 0..2 are reserved for UNK, BOS and EOS.
class Vocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kFirstWord = 3;

  Vocab();
  /// Rebuild from a full ID-ordered token list (as stored in checkpoints).
  explicit Vocab(std::vector<std::string> id_to_token);

  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  Sentence encode(const Tokens& tokens) const;
  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// IDs by descending count, ties broken lexicographically; tokens seen
/// fewer than min_count times are left out (they map to UNK).
Vocab build_vocab(std::span<const Tokens> corpus, std::size_t min_count = 1);

struct SentencePair {
  Sentence x1, x2;
  Tokens raw1, raw2;
};

struct StsItem {
  Tokens sent1, sent2;
  double score = 0.0;
};

struct LineIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <class T>
struct Loaded {
  std::vector<T> items;
  std::vector<LineIssue> skipped;
};

/// Whitespace tokenization (corpora are pre-tokenized and lowercased).
Tokens tokenize(std::string_view text);
std::string join(const Tokens& tokens);

/// One "sentence<TAB>sentence" pair per line. Malformed lines are skipped
/// and reported; more than 10% skipped raises FormatError.
Loaded<SentencePair> load_paraphrases(const std::filesystem::path& path);
/// "sentence<TAB>sentence<TAB>score" with score in [0, 5].
Loaded<StsItem> load_sts(const std::filesystem::path& path);

/// Fill x1/x2 from raw tokens.
void index_pairs(std::span<SentencePair> pairs, const Vocab& vocab);

/// Rooted ordered labeled tree. Three kinds of node: interior nodes
/// (label + children), word leaves (token only), and label-only leaves that
/// stand for preterminals once words have been stripped.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;
  std::string token;

  bool is_word() const { return children.empty() && label.empty(); }
  bool is_preterminal() const { return children.size() == 1 && children[0].is_word(); }
  bool is_leaf() const { return children.empty(); }

  std::size_t node_count() const;
  /// Words in order (empty for stripped trees).
  Tokens words() const;
  /// Preterminal labels in order; for stripped trees, the leaf labels.
  Tokens tags() const;
  /// Number of token positions (preterminals or stripped leaves).
  std::size_t length() const { return tags().size(); }

  bool operator==(const ParseTree& other) const = default;
};

/// Parse one-line bracketed notation, e.g. "(S (NP (DT the) (NN dog)) (VP (VBD ran)))".
/// An outer wrapper with an empty label, "( ... )", is removed. Throws
/// ParseError with the character offset of the problem.
ParseTree parse_bracketed(std::string_view text);
/// Canonical one-line form: single spaces, no wrapper; stripped
/// preterminals print as "(DT)".
std::string serialize(const ParseTree& tree);
/// Same shape and labels with word tokens removed.
ParseTree strip_tokens(const ParseTree& tree);

/// One tree per line; blank lines are ignored.
std::vector<ParseTree> load_trees(const std::filesystem::path& path);

}  // namespace vgvae
