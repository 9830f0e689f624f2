#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vgvae/config.hpp"
#include "vgvae/errors.hpp"

using namespace vgvae;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.train.batch_size == 32);
  CHECK(c.train.lr == 1e-3);
  CHECK(c.train.beta1 == 0.9);
  CHECK(c.train.beta2 == 0.999);
  CHECK(c.train.epsilon == 1e-8);
  CHECK(c.train.clip_norm == 5.0);
  CHECK(c.loss.dpl_margin == 0.4);
  CHECK(c.loss.megabatch_k == 20);
  CHECK(c.model.latent_dim_m == 50);
}

TEST_CASE("key=value text") {
  RunConfig c;
  apply_text(c,
             "# comment\n"
             "losses = prl,wpl   # trailing comment\n"
             "\n"
             "encoder=bilstm\n"
             "lr=0.01\n"
             "seed=42\n"
             "scramble=true\n");
  CHECK(c.loss.prl);
  CHECK(c.loss.wpl);
  CHECK_FALSE(c.loss.dpl);
  CHECK(c.model.encoder == EncoderKind::bilstm);
  CHECK(c.train.lr == 0.01);
  CHECK(c.train.seed == 42);
  CHECK(c.train.scramble);

  CHECK_THROWS_AS(apply_text(c, "colour=blue\n"), ConfigError);
  CHECK_THROWS_AS(apply_text(c, "lr=fast\n"), ConfigError);
  CHECK_THROWS_AS(apply_text(c, "batch_size=-3\n"), ConfigError);
  CHECK_THROWS_AS(apply_text(c, "just words\n"), ConfigError);
  try {
    apply_text(c, "lr=1\n\nnope=1\n", "run.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.cfg:3") != std::string::npos);
  }
  // max_position is shared by the model and the loss
  apply_setting(c, "max_position", "30");
  CHECK(c.model.max_position == 30);
  CHECK(c.loss.max_position == 30);
}

TEST_CASE("validation") {
  RunConfig c;
  c.model.vocab_size = 10;
  CHECK_NOTHROW(c.validate());
  c.train.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.train.batch_size = 1;
  c.train.lr = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.train.lr = 0.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("text round trip") {
  RunConfig c;
  c.loss.set_losses("all");
  c.model.decoder = DecoderKind::lstm;
  c.model.kind = ModelKind::blstmavg;
  c.train.lr = 0.1 + 0.2;  // not exactly representable in few digits
  c.loss.kl_weight_z = 1.0 / 3.0;
  c.train.dev_path = "dev.tsv";
  c.train.seed = 18446744073709551615ULL;
  const std::string text = to_text(c);
  const RunConfig back = from_text(text);
  CHECK(back == c);
  CHECK(to_text(back) == text);
  // every key appears once
  for (const auto& k : config_keys()) CHECK(text.find(k + "=") != std::string::npos);
}

TEST_CASE("files and the environment") {
  const auto dir = std::filesystem::temp_directory_path() / "vgvae_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.cfg";
  std::ofstream(path) << "epochs=7\nseed=5\n";
  RunConfig c;
  apply_file(c, path);
  CHECK(c.train.epochs == 7);
  CHECK(c.train.seed == 5);
  CHECK_THROWS_AS(apply_file(c, dir / "missing.cfg"), ConfigError);

  ::setenv("VGVAE_SEED", "99", 1);
  CHECK(seed_from_env() == 99u);
  ::setenv("VGVAE_SEED", "x9", 1);
  CHECK_THROWS_AS(seed_from_env(), ConfigError);
  ::unsetenv("VGVAE_SEED");
  CHECK_FALSE(seed_from_env().has_value());
}
