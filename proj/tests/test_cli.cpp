#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "vgvae/checkpoint.hpp"
#include "vgvae/data_io.hpp"

using namespace vgvae;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "vgvae_tests" / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(VGVAE_CLI_PATH) + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string p(const std::string& name) { return "'" + (workdir() / name).string() + "'"; }

// Corpus and a one-epoch checkpoint shared by the cases below.
void prepare() {
  static bool done = false;
  if (done) return;
  REQUIRE(run("synth --out " + p("data") + " --pairs 120 --sts 40 --test 15 --seed 2").code == 0);
  REQUIRE(run("train --pairs " + p("data/pairs.tsv") + " --out " + p("m.ckpt") +
              " --epochs 1 --losses prl,dpl,wpl --set latent_dim_m=8 --set latent_dim_d=8 --set embed_dim=8")
              .code == 0);
  done = true;
}

}  // namespace

TEST_CASE("train") {
  prepare();
  const std::string base = "train --pairs " + p("data/pairs.tsv") + " --epochs 1 --set embed_dim=6 --set latent_dim_m=6 --set latent_dim_d=6";
  const Run a = run(base + " --out " + p("a.ckpt"));
  const Run b = run(base + " --out " + p("a.ckpt"));
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("losses     (none)") != std::string::npos);
  const std::string log = slurp(workdir() / "a.ckpt.log");
  CHECK(log.rfind("step\tepoch\tloss_total\telbo\tprl\tdpl\twpl\n", 0) == 0);

  const Run all = run(base + " --out " + p("all.ckpt") + " --losses prl,dpl,wpl --encoder bilstm --decoder lstm");
  CHECK(all.code == 0);
  const Checkpoint c = load_checkpoint(workdir() / "all.ckpt");
  CHECK(c.config.loss.losses() == "prl,dpl,wpl");
  CHECK(c.config.model.encoder == EncoderKind::bilstm);
  CHECK(c.config.model.decoder == DecoderKind::lstm);

  const Run wa = run(base + " --out " + p("wa.ckpt") + " --model wordavg");
  CHECK(wa.code == 0);
  CHECK(load_checkpoint(workdir() / "wa.ckpt").config.model.kind == ModelKind::wordavg);
}

TEST_CASE("settings precedence: defaults, environment, file, command line") {
  prepare();
  std::ofstream(workdir() / "run.cfg") << "# test\nepochs=1\nseed=5\nembed_dim=6\nlatent_dim_m=6\nlatent_dim_d=6\n";
  std::ofstream(workdir() / "noseed.cfg") << "epochs=1\nembed_dim=6\nlatent_dim_m=6\nlatent_dim_d=6\n";
  const std::string base = "train --pairs " + p("data/pairs.tsv") + " --out " + p("s.ckpt");
  auto seed_of = [&](const std::string& extra, const std::string& env) {
    REQUIRE(run(base + " " + extra, env).code == 0);
    return load_checkpoint(workdir() / "s.ckpt").config.train.seed;
  };
  CHECK(seed_of("--config " + p("noseed.cfg"), "env -u VGVAE_SEED") == 1);
  CHECK(seed_of("--config " + p("noseed.cfg"), "VGVAE_SEED=7") == 7);
  CHECK(seed_of("--config " + p("run.cfg"), "VGVAE_SEED=7") == 5);
  CHECK(seed_of("--config " + p("run.cfg") + " --seed 9", "VGVAE_SEED=7") == 9);
  CHECK(seed_of("--config " + p("run.cfg") + " --set seed=11", "") == 11);
}

TEST_CASE("exit codes") {
  prepare();
  const Run unknown = run("train --pairs x --out y --bogus");
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("--pairs") != std::string::npos);  // usage text
  CHECK(run("").code == 2);
  CHECK(run("train --pairs " + p("data/pairs.tsv") + " --out " + p("z.ckpt") + " --set colour=blue").code == 2);
  CHECK(run("train --pairs " + p("data/pairs.tsv") + " --out " + p("z.ckpt") + " --losses xyz").code == 2);
  CHECK(run("train --pairs " + p("missing.tsv") + " --out " + p("z.ckpt")).code == 3);
  CHECK(run("eval-sts --ckpt " + p("missing.ckpt") + " --data " + p("data/sts.tsv")).code == 3);
  std::ofstream(workdir() / "junk.ckpt") << "not a checkpoint";
  CHECK(run("eval-sts --ckpt " + p("junk.ckpt") + " --data " + p("data/sts.tsv")).code == 3);
  const Run diverged = run("train --pairs " + p("data/pairs.tsv") + " --out " + p("z.ckpt") +
                           " --epochs 2 --set lr=1e300 --set clip_norm=1e300 --set embed_dim=6");
  CHECK(diverged.code == 4);
  CHECK(diverged.err.find("batch:") != std::string::npos);
}

TEST_CASE("evaluation commands") {
  prepare();
  const std::string ck = " --ckpt " + p("m.ckpt");
  const Run sts = run("eval-sts" + ck + " --data " + p("data/sts.tsv") + " --csv " + p("sts.csv"));
  CHECK(sts.code == 0);
  CHECK(sts.out.rfind("variable        semantic\nsts_pearson     ", 0) == 0);
  CHECK(slurp(workdir() / "sts.csv").rfind("metric,item_id,value\nsts_pearson,0,", 0) == 0);
  CHECK(run("eval-sts" + ck + " --data " + p("data/sts.tsv") + " --csv " + p("sts.csv")).out == sts.out);

  const std::string trees = " --data " + p("data/train_trees.txt") + " --queries " + p("data/test_trees.txt");
  const Run ted = run("eval-syntax" + ck + trees + " --task ted --variable syntactic --baselines");
  CHECK(ted.code == 0);
  CHECK(ted.out.find("\nted             ") != std::string::npos);
  CHECK(ted.out.find("\nrandom          ") != std::string::npos);
  CHECK(ted.out.find("\nupper_bound     ") != std::string::npos);
  CHECK(run("eval-syntax" + ck + trees + " --task ted --variable syntactic --baselines").out == ted.out);

  std::ofstream(workdir() / "odd.txt") << "(S (NP (NN dog)) (VP (VBD ran)))\n(S (NN x))\n";
  const Run f1 = run("eval-syntax" + ck + " --data " + p("data/train_trees.txt") + " --queries " + p("odd.txt") +
                     " --task f1");
  CHECK(f1.code == 0);
  CHECK(f1.out.find("skipped         2") != std::string::npos);
  CHECK(run("eval-syntax" + ck + trees + " --task pos").code == 0);
  CHECK(run("eval-syntax" + ck + trees + " --task sts").code == 2);
}

TEST_CASE("nearest sentences command") {
  prepare();
  const std::string ck = " --ckpt " + p("m.ckpt");
  const std::string cands = " --candidates " + p("data/train_trees.txt");
  std::ifstream in(workdir() / "data" / "train_trees.txt");
  std::string first;
  std::getline(in, first);
  const std::string sentence = join(parse_bracketed(first).words());

  const Run nn = run("nn" + ck + cands + " --query '" + sentence + "' --top 3");
  CHECK(nn.code == 0);
  CHECK(nn.out.rfind("1.0000\t" + sentence + "\n", 0) == 0);
  CHECK(std::count(nn.out.begin(), nn.out.end(), '\n') == 3);
  CHECK(run("nn" + ck + cands + " --query '" + sentence + "' --top 3").out == nn.out);
  const Run syn = run("nn" + ck + cands + " --query '" + sentence + "' --top 3 --variable syntactic");
  CHECK(syn.code == 0);

  const Run none = run("nn" + ck + cands + " --query '" + sentence + "' --top 0");
  CHECK(none.code == 0);
  CHECK(none.out.empty());

  // single words as sentences
  std::ofstream(workdir() / "words.txt") << "dog\ncat\nchased\nold\n";
  const Run words = run("nn" + ck + " --candidates " + p("words.txt") + " --query dog --top 4");
  CHECK(words.code == 0);
  CHECK(words.out.rfind("1.0000\tdog\n", 0) == 0);

  std::ofstream(workdir() / "empty.txt") << "\n";
  CHECK(run("nn" + ck + " --candidates " + p("empty.txt") + " --query dog").code == 3);
}
