#include "vgvae/synthetic.hpp"

#include <fstream>
#include <set>

#include "vgvae/errors.hpp"

namespace vgvae {

namespace {

const std::vector<std::string> kAdjectives = {
    "old",   "young", "tall",  "small", "happy", "angry", "quiet", "brave", "clever", "lazy",  "proud",  "gentle",
    "shy",   "loud",  "calm",  "eager", "kind",  "rude",  "polite", "silly", "wise",   "nervous", "busy", "tired"};
const std::vector<std::string> kNouns = {
    "dog",     "cat",    "farmer", "teacher", "doctor", "pilot",  "sailor", "artist", "lawyer",  "student",
    "soldier", "baker",  "singer", "writer",  "nurse",  "driver", "hunter", "king",   "queen",   "child",
    "monkey",  "horse",  "rabbit", "tiger",   "wolf",   "fox",    "bear",   "chef",   "captain", "judge"};
const std::vector<std::string> kVerbs = {"chased",  "helped",   "watched", "pushed",  "visited", "called", "followed",
                                         "thanked", "painted",  "kicked",  "greeted", "rescued", "blamed", "hugged",
                                         "trusted", "admired",  "ignored", "warned",  "carried", "praised"};

const std::vector<std::string> kTemplates = {
    "(S (NP (DT the) (JJ A1) (NN N1)) (VP (VBD V) (NP (DT the) (JJ A2) (NN N2))) (. .))",
    "(S (NP (DT the) (JJ A2) (NN N2)) (VP (VBD was) (VP (VBN V) (PP (IN by) (NP (DT the) (JJ A1) (NN N1))))) (. .))",
    "(S (NP (PRP it)) (VP (VBD was) (NP (NP (DT the) (JJ A1) (NN N1)) (SBAR (WHNP (WDT that)) (S (VP (VBD V) (NP "
    "(DT the) (JJ A2) (NN N2))))))) (. .))",
    "(S (NP (NP (DT the) (NN N1)) (, ,) (SBAR (WHNP (WDT which)) (S (VP (VBD was) (ADJP (JJ A1))))) (, ,)) (VP (VBD "
    "V) (NP (DT the) (JJ A2) (NN N2))) (. .))",
    "(S (NP (DT the) (JJ A2) (NN N2)) (VP (VBD was) (VP (VBN V) (PP (IN by) (NP (NP (DT the) (NN N1)) (SBAR (WHNP "
    "(WDT that)) (S (VP (VBD was) (ADJP (JJ A1))))))))) (. .))",
    "(S (NP (EX there)) (VP (VBD was) (NP (NP (DT a) (JJ A1) (NN N1)) (SBAR (WHNP (WP who)) (S (VP (VBD V) (NP (DT "
    "the) (JJ A2) (NN N2))))))) (. .))",
    "(S (ADVP (RB yesterday)) (, ,) (NP (DT the) (JJ A1) (NN N1)) (VP (VBD V) (NP (DT the) (JJ A2) (NN N2))) (. .))",
    "(S (NP (DT the) (JJ A1) (NN N1)) (VP (ADVP (RB quickly)) (VBD V) (NP (NP (DT the) (NN N2)) (SBAR (WHNP (WDT "
    "that)) (S (VP (VBD was) (ADJP (JJ A2))))))) (. .))",
    "(S (PP (VBG according) (PP (TO to) (NP (NNS reports)))) (, ,) (NP (DT the) (JJ A1) (NN N1)) (VP (VBD V) (NP "
    "(DT the) (JJ A2) (NN N2))) (. .))",
    "(S (NP (DT the) (NN N1)) (VP (VP (VBD was) (ADJP (JJ A1))) (CC and) (VP (VBD V) (NP (DT the) (JJ A2) (NN "
    "N2)))) (. .))",
    "(S (NP (DT the) (NN N2)) (VP (VP (VBD was) (ADJP (JJ A2))) (CC and) (VP (VBD was) (VP (VBN V) (PP (IN by) (NP "
    "(DT the) (JJ A1) (NN N1)))))) (. .))",
    "(S (NP (DT the) (JJ A1) (NN N1)) (VP (VBD V) (NP (DT the) (JJ A2) (NN N2)) (ADVP (RB again))) (. !))",
    "(S (SBAR (IN after) (S (NP (DT the) (NN N1)) (VP (VBD became) (ADJP (JJ A1))))) (, ,) (NP (PRP it)) (VP (VBD "
    "V) (NP (DT the) (JJ A2) (NN N2))) (. .))",
    "(S (NP (DT the) (JJ A2) (NN N2)) (VP (VBD got) (VP (VBN V) (PP (IN by) (NP (DT a) (JJ A1) (NN N1))) (ADVP (RB "
    "today)))) (. .))",
    "(S (NP (PRP we)) (VP (VBD saw) (SBAR (IN that) (S (NP (DT the) (JJ A1) (NN N1)) (VP (VBD V) (NP (DT the) (JJ "
    "A2) (NN N2)))))) (. .))",
    "(S (NP (DT the) (JJ A1) (NN N1)) (VP (VBD V) (NP (NP (DT the) (NN N2)) (PP (IN with) (NP (DT the) (JJ A2) (NN "
    "look))))) (. .))",
    "(S (NP (NP (DT the) (NN N1)) (PP (IN of) (NP (JJ A1) (NN character)))) (VP (VBD V) (NP (DT the) (JJ A2) (NN "
    "N2))) (. .))",
    "(FRAG (NP (NP (DT the) (JJ A1) (NN N1)) (SBAR (WHNP (WDT that)) (S (VP (VBD V) (NP (DT the) (JJ A2) (NN "
    "N2)))))) (. .))",
    "(S (NP (DT the) (JJ A1) (NN N1)) (VP (MD would) (VP (VB have) (VP (VBN V) (NP (DT the) (JJ A2) (NN N2))))) (. "
    ".))",
    "(S (NP (DT the) (NN N2)) (, ,) (ADJP (RB so) (JJ A2)) (, ,) (VP (VBD was) (VP (VBN V) (PP (IN by) (NP (DT the) "
    "(JJ A1) (NN N1))))) (. .))",
};

const std::vector<std::string>& slot_lexicon(int slot) {
  switch (slot) {
    case 0:
    case 3: return kAdjectives;
    case 1:
    case 4: return kNouns;
    default: return kVerbs;
  }
}

int slot_of(const std::string& marker) {
  static const std::array<std::string, 5> names = {"A1", "N1", "V", "A2", "N2"};
  for (int i = 0; i < 5; ++i)
    if (names[static_cast<std::size_t>(i)] == marker) return i;
  return -1;
}

void fill(ParseTree& t, const Content& c) {
  if (t.is_word()) {
    const int slot = slot_of(t.token);
    if (slot >= 0) t.token = slot_lexicon(slot)[static_cast<std::size_t>(c[static_cast<std::size_t>(slot)])];
    return;
  }
  for (auto& ch : t.children) fill(ch, c);
}

Content random_content(Rng& rng) {
  Content c{};
  for (int s = 0; s < 5; ++s) c[static_cast<std::size_t>(s)] = static_cast<int>(rng.below(slot_lexicon(s).size()));
  return c;
}

int random_template(Rng& rng) { return static_cast<int>(rng.below(kTemplates.size())); }

}  // namespace

const std::vector<std::string>& synthetic_templates() { return kTemplates; }

SyntheticSentence render_template(int template_id, const Content& content) {
  if (template_id < 0 || static_cast<std::size_t>(template_id) >= kTemplates.size())
    throw InputError("template id " + std::to_string(template_id) + " out of range");
  SyntheticSentence s;
  s.tree = parse_bracketed(kTemplates[static_cast<std::size_t>(template_id)]);
  fill(s.tree, content);
  s.tokens = s.tree.words();
  s.template_id = template_id;
  s.content = content;
  return s;
}

SyntheticCorpus make_synthetic(const SyntheticConfig& cfg) {
  Rng rng(cfg.seed);
  SyntheticCorpus out;
  std::set<Content> seen;
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    const Content c = random_content(rng);
    seen.insert(c);
    const int t1 = random_template(rng);
    int t2 = random_template(rng);
    while (t2 == t1) t2 = random_template(rng);
    auto s1 = render_template(t1, c);
    auto s2 = render_template(t2, c);
    SentencePair p;
    p.raw1 = s1.tokens;
    p.raw2 = s2.tokens;
    out.pairs.push_back(std::move(p));
    out.pair_sentences.push_back(std::move(s1));
    out.pair_sentences.push_back(std::move(s2));
  }
  for (std::size_t i = 0; i < cfg.sts_items; ++i) {
    const Content c1 = random_content(rng);
    Content c2 = c1;
    const std::size_t changed = rng.below(6);
    // choose `changed` distinct slots and give each a different word
    std::array<int, 5> slots = {0, 1, 2, 3, 4};
    for (std::size_t k = 0; k < changed; ++k) {
      std::swap(slots[k], slots[k + rng.below(5 - k)]);
      const int s = slots[k];
      const auto n = slot_lexicon(s).size();
      c2[static_cast<std::size_t>(s)] =
          static_cast<int>((static_cast<std::size_t>(c1[static_cast<std::size_t>(s)]) + 1 + rng.below(n - 1)) % n);
    }
    StsItem item;
    item.sent1 = render_template(random_template(rng), c1).tokens;
    item.sent2 = render_template(random_template(rng), c2).tokens;
    item.score = static_cast<double>(5 - changed);
    out.sts.push_back(std::move(item));
  }
  while (out.test.size() < cfg.test_sentences) {
    const Content c = random_content(rng);
    const int t = random_template(rng);
    if (seen.count(c)) continue;
    out.test.push_back(render_template(t, c));
  }
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("pairs.tsv");
    for (const auto& p : corpus.pairs) f << join(p.raw1) << '\t' << join(p.raw2) << '\n';
  }
  {
    auto f = open("sts.tsv");
    for (const auto& s : corpus.sts) f << join(s.sent1) << '\t' << join(s.sent2) << '\t' << s.score << '\n';
  }
  {
    auto f = open("train_trees.txt");
    for (const auto& s : corpus.pair_sentences) f << serialize(s.tree) << '\n';
  }
  {
    auto f = open("test_trees.txt");
    for (const auto& s : corpus.test) f << serialize(s.tree) << '\n';
  }
}

}  // namespace vgvae
