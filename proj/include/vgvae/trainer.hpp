#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "vgvae/checkpoint.hpp"
#include "vgvae/config.hpp"
#include "vgvae/data_io.hpp"
#include "vgvae/model.hpp"
#include "vgvae/objectives.hpp"
#include "vgvae/random.hpp"

namespace vgvae {

/// Adam with bias-corrected moments.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double epsilon) : lr_(lr), b1_(beta1), b2_(beta2), eps_(epsilon) {}

  void step(std::vector<Parameter>& params);
  std::uint64_t t() const { return t_; }

  void save(TrainState& s, const std::vector<Parameter>& params) const;
  void load(const TrainState& s, const std::vector<Parameter>& params);

 private:
  double lr_, b1_, b2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Rescale all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(std::vector<Parameter>& params, double max_norm);

/// Uniformly random permutation of the tokens.
Sentence scramble(const Sentence& x, Rng& rng);

struct StepLog {
  std::uint64_t step = 0;
  int epoch = 0;
  double total = 0.0;  // batch means
  double elbo = 0.0;
  double prl = 0.0;
  double dpl = 0.0;
  double wpl = 0.0;
  std::size_t dpl_skipped = 0;
};

/// "step<TAB>epoch<TAB>loss_total<TAB>elbo<TAB>prl<TAB>dpl<TAB>wpl"
void write_log_header(std::ostream& os);
void write_log_line(std::ostream& os, const StepLog& s);

/// Stepwise training loop. Data are not part of the checkpoint: resuming
/// requires the same pairs in the same order.
class Trainer {
 public:
  Trainer(Model model, Vocab vocab, std::vector<SentencePair> pairs, RunConfig cfg);
  /// Continue a run from a checkpoint taken with checkpoint().
  static Trainer resume(const Checkpoint& c, std::vector<SentencePair> pairs);

  bool done() const { return state_.epoch > cfg_.train.epochs; }
  /// One mini-batch: loss, backward, clipping, optimizer update. Throws
  /// DivergenceError (with the offending batch) on a non-finite loss.
  StepLog step();
  /// Train to completion; logs every step to `log` when given and writes
  /// periodic checkpoints to `checkpoint_path` when checkpoint_every > 0.
  void run(std::ostream* log = nullptr, const std::filesystem::path& checkpoint_path = {});

  Checkpoint checkpoint() const;
  /// Checkpoint with the best development score, if one was scored.
  const std::optional<Checkpoint>& best() const { return best_; }
  /// Development Pearson after each completed epoch.
  const std::vector<double>& dev_history() const { return dev_history_; }
  const std::vector<StepLog>& history() const { return history_; }

  const Model& model() const { return model_; }
  Model& model() { return model_; }
  const Vocab& vocab() const { return vocab_; }
  const RunConfig& config() const { return cfg_; }
  const TrainState& state() const { return state_; }
  std::size_t batches_per_epoch() const;

 private:
  void start_epoch();
  void end_epoch();
  void push_megabatch(const std::vector<std::size_t>& batch, const std::vector<SentencePair>& inputs);
  bool dpl_used() const;

  Model model_;
  Vocab vocab_;
  std::vector<SentencePair> pairs_;
  RunConfig cfg_;
  Rng rng_;
  Adam adam_;
  MegaBatch mb_;
  TrainState state_;
  std::vector<StsItem> dev_;
  std::optional<Checkpoint> best_;
  std::vector<double> dev_history_;
  std::vector<StepLog> history_;
};

/// Build a vocabulary from the pairs, index them, and train a fresh model
/// seeded from cfg.train.seed. Returns the best-dev checkpoint when a dev
/// set is configured, else the final one.
Checkpoint train(std::vector<SentencePair> pairs, const RunConfig& cfg, std::ostream* log = nullptr);

/// Single-encoder paraphrase baseline trained with the discriminative loss
/// only, from the first epoch. blstmavg scrambles its training inputs
/// unless `scrambled` is false.
Checkpoint train_baseline(ModelKind kind, std::vector<SentencePair> pairs, RunConfig cfg, bool scrambled = true,
                          std::ostream* log = nullptr);

}  // namespace vgvae
