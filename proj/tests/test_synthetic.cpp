#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "doctest.h"
#include "vgvae/errors.hpp"
#include "vgvae/synthetic.hpp"

using namespace vgvae;

namespace {

std::multiset<std::string> slot_words(const ParseTree& t) {
  std::multiset<std::string> out;
  for (const auto& w : t.words())
    if (w == "A1" || w == "N1" || w == "V" || w == "A2" || w == "N2") out.insert(w);
  return out;
}

}  // namespace

TEST_CASE("templates") {
  const auto& ts = synthetic_templates();
  CHECK(ts.size() == 20);
  std::set<std::string> shapes;
  for (const auto& s : ts) {
    const ParseTree t = parse_bracketed(s);
    CHECK(slot_words(t) == std::multiset<std::string>{"A1", "A2", "N1", "N2", "V"});
    shapes.insert(serialize(strip_tokens(t)));
  }
  CHECK(shapes.size() == 20);  // syntactically distinct
  const SyntheticSentence s = render_template(0, {1, 2, 3, 4, 5});
  CHECK(slot_words(s.tree).empty());
  CHECK(s.tokens == s.tree.words());
  CHECK_THROWS_AS(render_template(20, {0, 0, 0, 0, 0}), InputError);
}

TEST_CASE("generated corpus") {
  SyntheticConfig cfg;
  cfg.pairs = 300;
  cfg.sts_items = 200;
  cfg.test_sentences = 50;
  cfg.seed = 4;
  const SyntheticCorpus c = make_synthetic(cfg);
  REQUIRE(c.pairs.size() == 300);
  REQUIRE(c.pair_sentences.size() == 600);
  std::set<Content> contents;
  for (std::size_t i = 0; i < 300; ++i) {
    const auto& a = c.pair_sentences[2 * i];
    const auto& b = c.pair_sentences[2 * i + 1];
    CHECK(a.content == b.content);
    CHECK(a.template_id != b.template_id);
    CHECK(c.pairs[i].raw1 == a.tokens);
    CHECK(c.pairs[i].raw2 == b.tokens);
    contents.insert(a.content);
  }
  for (const auto& s : c.sts) {
    CHECK(s.score >= 0.0);
    CHECK(s.score <= 5.0);
    CHECK(s.score == std::floor(s.score));
  }
  REQUIRE(c.test.size() == 50);
  for (const auto& t : c.test) CHECK(contents.count(t.content) == 0);

  const SyntheticCorpus again = make_synthetic(cfg);
  CHECK(again.pairs.size() == c.pairs.size());
  for (std::size_t i = 0; i < c.pairs.size(); ++i) CHECK(again.pairs[i].raw1 == c.pairs[i].raw1);
}

TEST_CASE("written corpus reloads") {
  SyntheticConfig cfg;
  cfg.pairs = 50;
  cfg.sts_items = 30;
  cfg.test_sentences = 10;
  const SyntheticCorpus c = make_synthetic(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "vgvae_tests" / "synth";
  write_synthetic(c, dir);
  const auto pairs = load_paraphrases(dir / "pairs.tsv");
  CHECK(pairs.items.size() == 50);
  CHECK(pairs.skipped.empty());
  CHECK(pairs.items[7].raw2 == c.pairs[7].raw2);
  const auto sts = load_sts(dir / "sts.tsv");
  REQUIRE(sts.items.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) CHECK(sts.items[i].score == c.sts[i].score);
  const auto train = load_trees(dir / "train_trees.txt");
  REQUIRE(train.size() == 100);
  CHECK(train[5] == c.pair_sentences[5].tree);
  CHECK(load_trees(dir / "test_trees.txt").size() == 10);
}
