// vgvae command-line driver: train, evaluate, and query trained models.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vgvae/checkpoint.hpp"
#include "vgvae/config.hpp"
#include "vgvae/errors.hpp"
#include "vgvae/evaluation.hpp"
#include "vgvae/synthetic.hpp"
#include "vgvae/trainer.hpp"

namespace {

using namespace vgvae;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

struct TrainArgs {
  std::string pairs, out, config, dev, log, model;
  std::optional<std::string> losses, encoder, decoder;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::vector<std::string> set;
  bool no_scramble = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg;
  if (auto s = seed_from_env()) cfg.train.seed = *s;
  if (!a.config.empty()) apply_file(cfg, a.config);
  if (!a.model.empty()) apply_setting(cfg, "model", a.model);
  if (a.losses) cfg.loss.set_losses(*a.losses);
  if (a.encoder) apply_setting(cfg, "encoder", *a.encoder);
  if (a.decoder) apply_setting(cfg, "decoder", *a.decoder);
  if (!a.dev.empty()) cfg.train.dev_path = a.dev;
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();

  auto loaded = load_paraphrases(a.pairs);
  if (!loaded.skipped.empty())
    std::cerr << "warning: skipped " << loaded.skipped.size() << " malformed line(s) in " << a.pairs << "\n";
  if (loaded.items.empty()) throw InputError("no paraphrase pairs in " + a.pairs);

  const std::string log_path = a.log.empty() ? a.out + ".log" : a.log;
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot write " + log_path);
  Checkpoint c = cfg.model.kind == ModelKind::vgvae
                     ? train(std::move(loaded.items), cfg, &log)
                     : train_baseline(cfg.model.kind, std::move(loaded.items), cfg, !a.no_scramble, &log);
  save_checkpoint(a.out, c);
  std::cout << "model      " << to_string(c.config.model.kind) << "\n"
            << "losses     " << (c.config.loss.losses().empty() ? "(none)" : c.config.loss.losses()) << "\n"
            << "vocabulary " << c.vocab.size() << "\n"
            << "steps      " << c.state.step << "\n";
  if (c.state.best_epoch > 0)
    std::cout << "best dev   " << fixed4(c.state.best_dev) << " (epoch " << c.state.best_epoch << ")\n";
  std::cout << "checkpoint " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string ckpt, data, queries, variable = "semantic", task, csv;
  bool baselines = false;
  std::uint64_t seed = 1;
};

int cmd_eval(const EvalArgs& a, bool syntax) {
  const Variable v = parse_variable(a.variable);
  const std::string task = a.task.empty() ? (syntax ? "ted" : "sts") : a.task;
  if (syntax ? task == "sts" : task != "sts")
    throw ConfigError("task '" + task + "' belongs to " + (syntax ? "eval-sts" : "eval-syntax"));
  const Checkpoint c = load_checkpoint(a.ckpt);
  const Model model = restore_model(c);
  EvalReport report;
  if (task == "sts") {
    auto loaded = load_sts(a.data);
    if (!loaded.skipped.empty())
      std::cerr << "warning: skipped " << loaded.skipped.size() << " malformed line(s) in " << a.data << "\n";
    report = sts_eval(model, c.vocab, loaded.items, v);
  } else if (task == "ted" || task == "f1" || task == "pos") {
    if (a.queries.empty()) throw ConfigError("--queries is required for task " + task);
    const auto cand_trees = load_trees(a.data);
    const auto query_trees = load_trees(a.queries);
    const NnIndex index = NnIndex::build(model, c.vocab, cand_trees, v);
    const NnIndex queries = NnIndex::build(model, c.vocab, query_trees, v);
    if (task == "ted") {
      report = nn_parse_ted(index, queries);
      if (a.baselines) {
        Rng rng(a.seed);
        report.random_baseline = random_baseline_ted(index, queries, rng);
        report.upper_bound = upper_bound_ted(index, queries, rng).value;
      }
    } else if (task == "f1") {
      report = nn_labeled_f1(index, queries);
    } else {
      report = nn_pos_accuracy(index, queries);
    }
  } else {
    throw ConfigError("unknown task '" + task + "' (expected sts, ted, f1 or pos)");
  }
  std::cout << "variable        " << to_string(v) << "\n" << report.table();
  const std::string csv = a.csv.empty() ? a.ckpt + "." + task + "." + to_string(v) + ".csv" : a.csv;
  write_text(csv, report.csv());
  return 0;
}

struct NnArgs {
  std::string ckpt, candidates, query, variable = "semantic";
  std::size_t top = 10;
};

int cmd_nn(const NnArgs& a) {
  const Variable v = parse_variable(a.variable);
  const Checkpoint c = load_checkpoint(a.ckpt);
  const Model model = restore_model(c);
  std::ifstream in(a.candidates, std::ios::binary);
  if (!in) throw IoError("cannot read " + a.candidates);
  std::vector<Tokens> cands;
  std::string line;
  while (std::getline(in, line)) {
    // tree lines contribute their words
    Tokens t = !line.empty() && line[0] == '(' ? parse_bracketed(line).words() : tokenize(line);
    if (!t.empty()) cands.push_back(std::move(t));
  }
  if (cands.empty()) throw InputError("no candidate sentences in " + a.candidates);
  const Tokens q = tokenize(a.query);
  if (q.empty()) throw InputError("empty query");
  std::vector<Sentence> ids;
  for (const auto& t : cands) ids.push_back(c.vocab.encode(t));
  const auto matrix = embed_all(model, ids, v);
  const auto qv = model.embed(c.vocab.encode(q), v);
  for (const auto& n : nearest_sentences(matrix, qv, a.top))
    std::cout << fixed4(n.cosine) << "\t" << join(cands[n.index]) << "\n";
  return 0;
}

struct SynthArgs {
  std::string out;
  std::size_t pairs = 5000, sts = 1000, test = 500;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  SyntheticConfig cfg;
  cfg.pairs = a.pairs;
  cfg.sts_items = a.sts;
  cfg.test_sentences = a.test;
  cfg.seed = a.seed;
  write_synthetic(make_synthetic(cfg), a.out);
  std::cout << "wrote " << a.pairs << " pairs, " << a.sts << " similarity items and " << a.test
            << " test trees to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vMF-Gaussian sentence VAE: train, evaluate, retrieve"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a model on paraphrase pairs");
  train_cmd->add_option("--pairs", ta.pairs, "paraphrase TSV")->required();
  train_cmd->add_option("--out", ta.out, "checkpoint path")->required();
  train_cmd->add_option("--config", ta.config, "key=value config file");
  train_cmd->add_option("--losses", ta.losses, "comma-separated subset of prl,dpl,wpl (\"\" for none)");
  train_cmd->add_option("--encoder", ta.encoder, "word_avg or bilstm");
  train_cmd->add_option("--decoder", ta.decoder, "bow or lstm");
  train_cmd->add_option("--model", ta.model, "vgvae, wordavg or blstmavg");
  train_cmd->add_option("--dev", ta.dev, "STS file for model selection");
  train_cmd->add_option("--seed", ta.seed, "random seed");
  train_cmd->add_option("--epochs", ta.epochs, "number of epochs");
  train_cmd->add_option("--set", ta.set, "extra key=value settings");
  train_cmd->add_option("--log", ta.log, "training log path (default: <out>.log)");
  train_cmd->add_flag("--no-scramble", ta.no_scramble, "keep word order for the blstmavg baseline");

  EvalArgs sa, ya;
  ya.variable = "syntactic";
  auto* sts_cmd = app.add_subcommand("eval-sts", "Pearson correlation on an STS file");
  sts_cmd->add_option("--ckpt", sa.ckpt)->required();
  sts_cmd->add_option("--data", sa.data, "STS TSV")->required();
  sts_cmd->add_option("--variable", sa.variable, "semantic or syntactic");
  sts_cmd->add_option("--task", sa.task, "sts");
  sts_cmd->add_option("--csv", sa.csv, "per-item CSV path");

  auto* syn_cmd = app.add_subcommand("eval-syntax", "nearest-neighbor syntactic evaluation");
  syn_cmd->add_option("--ckpt", ya.ckpt)->required();
  syn_cmd->add_option("--data", ya.data, "candidate tree file")->required();
  syn_cmd->add_option("--queries", ya.queries, "query tree file")->required();
  syn_cmd->add_option("--variable", ya.variable, "semantic or syntactic");
  syn_cmd->add_option("--task", ya.task, "ted, f1 or pos");
  syn_cmd->add_flag("--baselines", ya.baselines, "also report random and upper-bound TED");
  syn_cmd->add_option("--seed", ya.seed, "seed for the baselines");
  syn_cmd->add_option("--csv", ya.csv, "per-item CSV path");

  NnArgs na;
  auto* nn_cmd = app.add_subcommand("nn", "nearest sentences to a query");
  nn_cmd->add_option("--ckpt", na.ckpt)->required();
  nn_cmd->add_option("--candidates", na.candidates, "one sentence (or tree) per line")->required();
  nn_cmd->add_option("--query", na.query)->required();
  nn_cmd->add_option("--variable", na.variable, "semantic or syntactic");
  nn_cmd->add_option("--top", na.top, "number of neighbors");

  SynthArgs ga;
  auto* synth_cmd = app.add_subcommand("synth", "write a template-generated corpus");
  synth_cmd->add_option("--out", ga.out, "output directory")->required();
  synth_cmd->add_option("--pairs", ga.pairs);
  synth_cmd->add_option("--sts", ga.sts);
  synth_cmd->add_option("--test", ga.test);
  synth_cmd->add_option("--seed", ga.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*sts_cmd) return cmd_eval(sa, false);
    if (*syn_cmd) return cmd_eval(ya, true);
    if (*nn_cmd) return cmd_nn(na);
    if (*synth_cmd) return cmd_synth(ga);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const UndefinedCorrelation& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InputError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
