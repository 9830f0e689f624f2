#include "vgvae/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "vgvae/errors.hpp"
#include "vgvae/evaluation.hpp"

namespace vgvae {

// ---------------------------------------------------------------------------
// Optimizer

void Adam::step(std::vector<Parameter>& params) {
  if (m_.size() != params.size()) {
    m_.assign(params.size(), {});
    v_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].size(), 0.0);
      v_[i].assign(params[i].size(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = p.grad[j];
      m[j] = b1_ * m[j] + (1.0 - b1_) * g;
      v[j] = b2_ * v[j] + (1.0 - b2_) * g * g;
      p.value[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

void Adam::save(TrainState& s, const std::vector<Parameter>& params) const {
  s.adam_t = t_;
  s.adam_m.clear();
  s.adam_v.clear();
  if (m_.empty()) return;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.adam_m.push_back({params[i].name, params[i].shape, m_[i]});
    s.adam_v.push_back({params[i].name, params[i].shape, v_[i]});
  }
}

void Adam::load(const TrainState& s, const std::vector<Parameter>& params) {
  t_ = s.adam_t;
  m_.clear();
  v_.clear();
  if (s.adam_m.empty()) return;
  if (s.adam_m.size() != params.size() || s.adam_v.size() != params.size())
    throw CheckpointError("optimizer state does not match the model", 0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (s.adam_m[i].name != params[i].name || s.adam_m[i].data.size() != params[i].size() ||
        s.adam_v[i].data.size() != params[i].size())
      throw CheckpointError("optimizer state for " + params[i].name + " does not match the model", 0);
    m_.push_back(s.adam_m[i].data);
    v_.push_back(s.adam_v[i].data);
  }
}

double clip_grad_norm(std::vector<Parameter>& params, double max_norm) {
  double s = 0.0;
  for (const auto& p : params)
    for (double g : p.grad) s += g * g;
  const double norm = std::sqrt(s);
  if (norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& p : params)
      for (double& g : p.grad) g *= k;
  }
  return norm;
}

Sentence scramble(const Sentence& x, Rng& rng) {
  Sentence out = x;
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  return out;
}

// ---------------------------------------------------------------------------
// Log

void write_log_header(std::ostream& os) { os << "step\tepoch\tloss_total\telbo\tprl\tdpl\twpl\n"; }

void write_log_line(std::ostream& os, const StepLog& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%llu\t%d\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n", static_cast<unsigned long long>(s.step),
                s.epoch, s.total, s.elbo, s.prl, s.dpl, s.wpl);
  os << buf;
}

// ---------------------------------------------------------------------------
// Trainer

namespace {
constexpr std::uint64_t kStreamOffset = 0x9E3779B97F4A7C15ULL;  // decorrelates loop noise from initialization
}

Trainer::Trainer(Model model, Vocab vocab, std::vector<SentencePair> pairs, RunConfig cfg)
    : model_(std::move(model)),
      vocab_(std::move(vocab)),
      pairs_(std::move(pairs)),
      cfg_(std::move(cfg)),
      rng_(cfg_.train.seed + kStreamOffset),
      adam_(cfg_.train.lr, cfg_.train.beta1, cfg_.train.beta2, cfg_.train.epsilon),
      mb_(cfg_.loss.megabatch_k) {
  cfg_.model = model_.config();
  cfg_.validate();
  if (pairs_.empty()) throw InputError("no training pairs");
  for (const auto& p : pairs_)
    if (p.x1.empty() || p.x2.empty()) throw InputError("training pair with an empty side (pairs must be indexed)");
  if (!cfg_.train.dev_path.empty()) {
    auto loaded = load_sts(cfg_.train.dev_path);
    dev_ = std::move(loaded.items);
  }
}

Trainer Trainer::resume(const Checkpoint& c, std::vector<SentencePair> pairs) {
  Trainer t(restore_model(c), c.vocab, std::move(pairs), c.config);
  t.state_ = c.state;
  t.rng_.deserialize(c.state.rng);
  t.adam_.load(c.state, t.model_.parameters());
  t.mb_.clear();
  for (const auto& batch : c.state.megabatch) t.mb_.push_batch(batch);
  if (!t.state_.order.empty() && t.state_.order.size() != t.pairs_.size())
    throw CheckpointError("checkpoint was taken on " + std::to_string(t.state_.order.size()) + " pairs, given " +
                              std::to_string(t.pairs_.size()),
                          0);
  t.state_.rng.clear();
  t.state_.megabatch.clear();
  t.state_.adam_m.clear();
  t.state_.adam_v.clear();
  return t;
}

std::size_t Trainer::batches_per_epoch() const {
  return (pairs_.size() + cfg_.train.batch_size - 1) / cfg_.train.batch_size;
}

bool Trainer::dpl_used() const { return cfg_.loss.dpl || model_.config().kind != ModelKind::vgvae; }

void Trainer::start_epoch() {
  state_.order.resize(pairs_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) state_.order[i] = i;
  for (std::size_t i = pairs_.size(); i > 1; --i) std::swap(state_.order[i - 1], state_.order[rng_.below(i)]);
}

void Trainer::push_megabatch(const std::vector<std::size_t>& batch, const std::vector<SentencePair>& inputs) {
  std::vector<MegaBatch::Entry> entries;
  entries.reserve(2 * batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const std::size_t id = batch[k];
    for (int side = 0; side < 2; ++side) {
      const Sentence& x = side == 0 ? inputs[k].x1 : inputs[k].x2;
      MegaBatch::Entry e;
      e.key = sentence_key(id, side);
      e.partner = sentence_key(id, 1 - side);
      e.sentence = x;
      Tape t(GradMode::frozen);
      const Tensor u = model_.semantic_direction(t, x);
      e.direction.assign(u.data().begin(), u.data().end());
      entries.push_back(std::move(e));
    }
  }
  mb_.push_batch(std::move(entries));
}

StepLog Trainer::step() {
  if (done()) throw ContractError("training already finished");
  if (state_.order.empty()) start_epoch();
  const std::size_t bs = cfg_.train.batch_size;
  const std::size_t begin = state_.batch_in_epoch * bs;
  const std::size_t end = std::min(begin + bs, pairs_.size());
  std::vector<std::size_t> batch(state_.order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 state_.order.begin() + static_cast<std::ptrdiff_t>(end));
  std::vector<SentencePair> inputs;
  inputs.reserve(batch.size());
  for (std::size_t id : batch) {
    SentencePair p;
    p.x1 = pairs_[id].x1;
    p.x2 = pairs_[id].x2;
    if (cfg_.train.scramble) {
      p.x1 = scramble(p.x1, rng_);
      p.x2 = scramble(p.x2, rng_);
    }
    inputs.push_back(std::move(p));
  }
  const bool dpl_now = dpl_used() && state_.epoch >= cfg_.loss.dpl_start_epoch;
  if (dpl_now) push_megabatch(batch, inputs);

  StepLog log;
  log.epoch = state_.epoch;
  model_.zero_grad();
  const double inv = 1.0 / static_cast<double>(batch.size());
  auto diverged = [&](std::size_t pair, const std::string& why) {
    std::ostringstream os;
    os << why << " at step " << state_.step + 1 << " (epoch " << state_.epoch << ", pair " << pair << "); batch:";
    for (std::size_t id : batch) os << "\n  " << id << "\t" << join(pairs_[id].raw1) << "\t" << join(pairs_[id].raw2);
    return DivergenceError(os.str());
  };
  for (std::size_t k = 0; k < batch.size(); ++k) {
    Tape t;
    LatentNoise noise(rng_);
    std::optional<LossTerms> result;
    try {
      result = total_loss(model_, t, inputs[k], batch[k], dpl_now ? &mb_ : nullptr, state_.epoch, cfg_.loss, noise);
    } catch (const NumericError& e) {
      throw diverged(batch[k], std::string("non-finite value (") + e.what() + ")");
    } catch (const DomainError& e) {
      throw diverged(batch[k], std::string("invalid value (") + e.what() + ")");
    }
    const LossTerms& terms = *result;
    const double total = terms.total.item();
    if (!std::isfinite(total)) throw diverged(batch[k], "non-finite loss");
    t.backward(scale(terms.total, inv));
    log.total += total * inv;
    log.elbo += terms.elbo * inv;
    log.prl += terms.prl * inv;
    log.dpl += terms.dpl * inv;
    log.wpl += terms.wpl * inv;
    log.dpl_skipped += terms.dpl_skipped;
  }
  const double norm = clip_grad_norm(model_.parameters(), cfg_.train.clip_norm);
  if (!std::isfinite(norm))
    throw DivergenceError("non-finite gradient norm at step " + std::to_string(state_.step + 1));
  adam_.step(model_.parameters());

  log.step = ++state_.step;
  if (++state_.batch_in_epoch == batches_per_epoch()) end_epoch();
  history_.push_back(log);
  return log;
}

void Trainer::end_epoch() {
  const int finished = state_.epoch;
  ++state_.epoch;
  state_.batch_in_epoch = 0;
  state_.order.clear();
  if (dev_.empty()) return;
  double r = std::numeric_limits<double>::quiet_NaN();
  try {
    r = sts_eval(model_, vocab_, dev_, Variable::semantic).aggregate;
  } catch (const UndefinedCorrelation&) {
  }
  dev_history_.push_back(r);
  if (std::isfinite(r) && (state_.best_epoch == 0 || r > state_.best_dev)) {
    state_.best_dev = r;
    state_.best_epoch = finished;
    best_ = checkpoint();
  }
}

void Trainer::run(std::ostream* log, const std::filesystem::path& checkpoint_path) {
  if (log) write_log_header(*log);
  while (!done()) {
    const StepLog s = step();
    if (log) write_log_line(*log, s);
    if (cfg_.train.checkpoint_every && !checkpoint_path.empty() && s.step % cfg_.train.checkpoint_every == 0)
      save_checkpoint(checkpoint_path, checkpoint());
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config = cfg_;
  c.vocab = vocab_;
  c.params = snapshot(model_.parameters());
  c.state = state_;
  c.state.rng = rng_.serialize();
  adam_.save(c.state, model_.parameters());
  c.state.megabatch.assign(mb_.batch_list().begin(), mb_.batch_list().end());
  return c;
}

// ---------------------------------------------------------------------------

namespace {

Trainer make_trainer(std::vector<SentencePair> pairs, RunConfig cfg) {
  std::vector<Tokens> corpus;
  corpus.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    corpus.push_back(p.raw1);
    corpus.push_back(p.raw2);
  }
  Vocab vocab = build_vocab(corpus, cfg.train.min_count);
  index_pairs(pairs, vocab);
  cfg.model.vocab_size = vocab.size();
  Model model(cfg.model, cfg.train.seed);
  return Trainer(std::move(model), std::move(vocab), std::move(pairs), std::move(cfg));
}

}  // namespace

Checkpoint train(std::vector<SentencePair> pairs, const RunConfig& cfg, std::ostream* log) {
  Trainer t = make_trainer(std::move(pairs), cfg);
  t.run(log);
  if (t.best()) return *t.best();
  return t.checkpoint();
}

Checkpoint train_baseline(ModelKind kind, std::vector<SentencePair> pairs, RunConfig cfg, bool scrambled,
                          std::ostream* log) {
  if (kind == ModelKind::vgvae) throw ConfigError("train_baseline needs wordavg or blstmavg");
  cfg.model.kind = kind;
  cfg.loss.set_losses("dpl");
  cfg.loss.dpl_start_epoch = 1;
  cfg.train.scramble = kind == ModelKind::blstmavg && scrambled;
  return train(std::move(pairs), cfg, log);
}

}  // namespace vgvae
