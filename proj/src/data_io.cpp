#include "vgvae/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "vgvae/errors.hpp"

namespace vgvae {

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() : Vocab(std::vector<std::string>{"<unk>", "<s>", "</s>"}) {}

Vocab::Vocab(std::vector<std::string> id_to_token) : tokens_(std::move(id_to_token)) {
  if (tokens_.size() < static_cast<std::size_t>(kFirstWord))
    throw FormatError("vocabulary is missing reserved entries");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw FormatError("duplicate vocabulary entry '" + tokens_[i] + "'");
  }
}

int Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end() || it->second < kFirstWord) return kUnk;
  return it->second;
}

Sentence Vocab::encode(const Tokens& tokens) const {
  Sentence s;
  s.reserve(tokens.size());
  for (const auto& t : tokens) s.push_back(id(t));
  return s;
}

Vocab build_vocab(std::span<const Tokens> corpus, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus)
    for (const auto& t : sentence) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [tok, n] : counts)
    if (n >= min_count) entries.emplace_back(tok, n);
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{"<unk>", "<s>", "</s>"};
  for (auto& [tok, n] : entries) {
    // a corpus word spelled like a reserved symbol keeps the reserved ID
    if (tok == "<unk>" || tok == "<s>" || tok == "</s>") continue;
    tokens.push_back(tok);
  }
  return Vocab(std::move(tokens));
}

// ---------------------------------------------------------------------------
// Text loaders

namespace {
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }
}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(const Tokens& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class T, class F>
Loaded<T> load_lines(const std::filesystem::path& path, F parse_line) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Loaded<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string message;
    T item;
    if (parse_line(line, item, message)) {
      out.items.push_back(std::move(item));
    } else {
      out.skipped.push_back({lineno, message});
    }
  }
  if (in.bad()) throw IoError("error while reading " + path.string());
  if (lineno > 0 && out.skipped.size() * 10 > lineno)
    throw FormatError(path.string() + ": " + std::to_string(out.skipped.size()) + " of " + std::to_string(lineno) +
                      " lines malformed (first at line " + std::to_string(out.skipped.front().line) + ": " +
                      out.skipped.front().message + ")");
  return out;
}

}  // namespace

Loaded<SentencePair> load_paraphrases(const std::filesystem::path& path) {
  return load_lines<SentencePair>(path, [](const std::string& line, SentencePair& p, std::string& why) {
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      why = "expected 2 tab-separated fields, found " + std::to_string(fields.size());
      return false;
    }
    p.raw1 = tokenize(fields[0]);
    p.raw2 = tokenize(fields[1]);
    if (p.raw1.empty() || p.raw2.empty()) {
      why = "empty sentence";
      return false;
    }
    return true;
  });
}

Loaded<StsItem> load_sts(const std::filesystem::path& path) {
  return load_lines<StsItem>(path, [](const std::string& line, StsItem& item, std::string& why) {
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      why = "expected 3 tab-separated fields, found " + std::to_string(fields.size());
      return false;
    }
    item.sent1 = tokenize(fields[0]);
    item.sent2 = tokenize(fields[1]);
    if (item.sent1.empty() || item.sent2.empty()) {
      why = "empty sentence";
      return false;
    }
    const std::string_view s = fields[2];
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      why = "score '" + std::string(s) + "' is not a number";
      return false;
    }
    if (v < 0.0 || v > 5.0) {
      why = "score " + std::string(s) + " outside [0, 5]";
      return false;
    }
    item.score = v;
    return true;
  });
}

void index_pairs(std::span<SentencePair> pairs, const Vocab& vocab) {
  for (auto& p : pairs) {
    p.x1 = vocab.encode(p.raw1);
    p.x2 = vocab.encode(p.raw2);
  }
}

// ---------------------------------------------------------------------------
// Trees

std::size_t ParseTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

Tokens ParseTree::words() const {
  Tokens out;
  auto walk = [&](auto&& self, const ParseTree& t) -> void {
    if (t.is_word()) {
      out.push_back(t.token);
      return;
    }
    for (const auto& c : t.children) self(self, c);
  };
  walk(walk, *this);
  return out;
}

Tokens ParseTree::tags() const {
  Tokens out;
  auto walk = [&](auto&& self, const ParseTree& t) -> void {
    if (t.is_preterminal() || (t.is_leaf() && !t.is_word())) {
      out.push_back(t.label);
      return;
    }
    for (const auto& c : t.children) self(self, c);
  };
  walk(walk, *this);
  return out;
}

namespace {


class BracketParser {
 public:
  explicit BracketParser(std::string_view s) : s_(s) {}

  ParseTree parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("empty tree", pos_);
    if (s_[pos_] != '(') throw ParseError("expected '('", pos_);
    ParseTree t = node();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("trailing characters after tree", pos_);
    if (t.label.empty()) {
      if (t.children.size() != 1 || t.children[0].is_word())
        throw ParseError("unlabeled node must wrap exactly one tree", 0);
      ParseTree inner = std::move(t.children[0]);
      return inner;
    }
    return t;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  std::string atom() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != ')') ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  ParseTree node() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    ParseTree t;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != ')') t.label = atom();
    bool has_word = false, has_tree = false;
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) throw ParseError("unbalanced parentheses", pos_);
      const char c = s_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        if (has_word) throw ParseError("word followed by a subtree", pos_);
        has_tree = true;
        t.children.push_back(node());
      } else {
        const std::size_t at = pos_;
        if (has_word || has_tree) throw ParseError("preterminal must have exactly one word", at);
        if (t.label.empty()) throw ParseError("word without a label", at);
        ParseTree w;
        w.token = atom();
        t.children.push_back(std::move(w));
        has_word = true;
      }
    }
    if (t.label.empty() && t.children.empty()) throw ParseError("empty node", open);
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void write_tree(const ParseTree& t, std::string& out) {
  if (t.is_word()) {
    out += t.token;
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write_tree(c, out);
  }
  out += ')';
}

}  // namespace

ParseTree parse_bracketed(std::string_view text) { return BracketParser(text).parse(); }

std::string serialize(const ParseTree& tree) {
  std::string out;
  write_tree(tree, out);
  return out;
}

ParseTree strip_tokens(const ParseTree& tree) {
  ParseTree out;
  out.label = tree.label;
  if (tree.is_preterminal()) return out;
  for (const auto& c : tree.children)
    if (!c.is_word()) out.children.push_back(strip_tokens(c));
  return out;
}

std::vector<ParseTree> load_trees(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<ParseTree> trees;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    try {
      trees.push_back(parse_bracketed(line));
    } catch (const ParseError& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trees;
}

}  // namespace vgvae
