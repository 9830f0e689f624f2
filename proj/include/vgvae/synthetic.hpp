#pragma once

// Template-generated paraphrase corpus with known structure. Every
// sentence fills the five content slots of one syntactic template
// (adjective, noun, verb, adjective, noun); a paraphrase pair shares its
// content words and uses two different templates. Similarity items are
// scored by the number of content slots two sentences share, so content
// and syntax are independent by construction.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vgvae/data_io.hpp"
#include "vgvae/random.hpp"

namespace vgvae {

/// Bracketed templates; the words A1 N1 V A2 N2 mark content slots.
const std::vector<std::string>& synthetic_templates();

using Content = std::array<int, 5>;  // lexicon indices for A1 N1 V A2 N2

struct SyntheticSentence {
  Tokens tokens;
  ParseTree tree;
  int template_id = 0;
  Content content{};
};

struct SyntheticConfig {
  std::size_t pairs = 5000;
  std::size_t sts_items = 1000;
  std::size_t test_sentences = 500;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  std::vector<SentencePair> pairs;
  /// Sentences of `pairs` (x1 then x2 for pair i at 2i, 2i+1).
  std::vector<SyntheticSentence> pair_sentences;
  std::vector<StsItem> sts;
  /// Held-out sentences with fresh content for the syntactic evaluations.
  std::vector<SyntheticSentence> test;
};

/// Render a template with the given content.
SyntheticSentence render_template(int template_id, const Content& content);

SyntheticCorpus make_synthetic(const SyntheticConfig& cfg);

/// Writes pairs.tsv, sts.tsv, train_trees.txt (one tree per pair
/// sentence) and test_trees.txt into `dir`.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace vgvae
