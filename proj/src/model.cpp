#include "vgvae/model.hpp"

#include <algorithm>
#include <cmath>

#include "vgvae/errors.hpp"
#include "vgvae/random.hpp"

namespace vgvae {

std::string to_string(EncoderKind k) { return k == EncoderKind::word_avg ? "word_avg" : "bilstm"; }
std::string to_string(DecoderKind k) { return k == DecoderKind::bow ? "bow" : "lstm"; }
std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::vgvae: return "vgvae";
    case ModelKind::wordavg: return "wordavg";
    case ModelKind::blstmavg: return "blstmavg";
  }
  return "?";
}
std::string to_string(Variable v) { return v == Variable::semantic ? "semantic" : "syntactic"; }

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "word_avg") return EncoderKind::word_avg;
  if (s == "bilstm") return EncoderKind::bilstm;
  throw ConfigError("unknown encoder '" + s + "' (expected word_avg or bilstm)");
}
DecoderKind parse_decoder_kind(const std::string& s) {
  if (s == "bow") return DecoderKind::bow;
  if (s == "lstm") return DecoderKind::lstm;
  throw ConfigError("unknown decoder '" + s + "' (expected bow or lstm)");
}
ModelKind parse_model_kind(const std::string& s) {
  if (s == "vgvae") return ModelKind::vgvae;
  if (s == "wordavg") return ModelKind::wordavg;
  if (s == "blstmavg") return ModelKind::blstmavg;
  throw ConfigError("unknown model '" + s + "' (expected vgvae, wordavg or blstmavg)");
}
Variable parse_variable(const std::string& s) {
  if (s == "semantic") return Variable::semantic;
  if (s == "syntactic") return Variable::syntactic;
  throw ConfigError("unknown variable '" + s + "' (expected semantic or syntactic)");
}

void ModelConfig::validate() const {
  if (vocab_size <= static_cast<std::size_t>(Vocab::kFirstWord - 1)) throw ConfigError("vocab_size too small");
  if (latent_dim_m < 2) throw ConfigError("latent_dim_m must be at least 2");
  if (latent_dim_d == 0 || embed_dim == 0 || lstm_hidden == 0 || decoder_hidden == 0 || encoder_hidden == 0 ||
      wpl_hidden == 0 || max_position == 0)
    throw ConfigError("model dimensions must be positive");
}

// ---------------------------------------------------------------------------

Model::Model(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const auto& c = config_;
  const std::size_t V = c.vocab_size, E = c.embed_dim, H = c.lstm_hidden;
  params_.reserve(48);  // indices are stable; references into params_ are not held

  sem_embed_ = add_param("sem_embed", {V, E});
  if (c.kind == ModelKind::blstmavg) {
    enc_fwd_ = add_lstm("enc_fwd", E, H);
    enc_bwd_ = add_lstm("enc_bwd", E, H);
  }
  if (c.kind == ModelKind::vgvae) {
    const std::size_t m = c.latent_dim_m, d = c.latent_dim_d;
    sem_mu_w_ = add_param("sem_mu_w", {E, m});
    sem_mu_b_ = add_param("sem_mu_b", {1, m});
    sem_kappa_w_ = add_param("sem_kappa_w", {E, 1});
    sem_kappa_b_ = add_param("sem_kappa_b", {1, 1});

    syn_embed_ = add_param("syn_embed", {V, E});
    std::size_t head_in = E;
    if (c.encoder == EncoderKind::bilstm) {
      enc_fwd_ = add_lstm("enc_fwd", E, H);
      enc_bwd_ = add_lstm("enc_bwd", E, H);
      syn_hidden_w_ = add_param("syn_hidden_w", {2 * H, c.encoder_hidden});
      syn_hidden_b_ = add_param("syn_hidden_b", {1, c.encoder_hidden});
      head_in = c.encoder_hidden;
    }
    syn_mu_w_ = add_param("syn_mu_w", {head_in, d});
    syn_mu_b_ = add_param("syn_mu_b", {1, d});
    syn_lv_w_ = add_param("syn_logvar_w", {head_in, d});
    syn_lv_b_ = add_param("syn_logvar_b", {1, d});

    if (c.decoder == DecoderKind::bow) {
      dec_hidden_w_ = add_param("dec_hidden_w", {m + d, c.decoder_hidden});
      dec_hidden_b_ = add_param("dec_hidden_b", {1, c.decoder_hidden});
      dec_out_w_ = add_param("dec_out_w", {c.decoder_hidden, V});
      dec_out_b_ = add_param("dec_out_b", {1, V});
    } else {
      dec_embed_ = add_param("dec_embed", {V, E});
      dec_lstm_ = add_lstm("dec_lstm", E + m + d, H);
      dec_h0_w_ = add_param("dec_h0_w", {m + d, H});
      dec_h0_b_ = add_param("dec_h0_b", {1, H});
      dec_c0_w_ = add_param("dec_c0_w", {m + d, H});
      dec_c0_b_ = add_param("dec_c0_b", {1, H});
      dec_out_w_ = add_param("dec_out_w", {H, V});
      dec_out_b_ = add_param("dec_out_b", {1, V});
    }

    wpl_w1_ = add_param("wpl_w1", {E + d, c.wpl_hidden});
    wpl_b1_ = add_param("wpl_b1", {1, c.wpl_hidden});
    wpl_w2_ = add_param("wpl_w2", {c.wpl_hidden, c.wpl_hidden});
    wpl_b2_ = add_param("wpl_b2", {1, c.wpl_hidden});
    wpl_w3_ = add_param("wpl_w3", {c.wpl_hidden, c.max_position});
    wpl_b3_ = add_param("wpl_b3", {1, c.max_position});
  }

  Rng rng(seed);
  for (auto& p : params_)
    for (double& v : p.value) v = rng.uniform(-0.1, 0.1);
  for (const Lstm* l : {&enc_fwd_, &enc_bwd_, &dec_lstm_}) {
    if (l->b == 0) continue;  // cell not built for this configuration
    auto& b = params_[l->b].value;
    for (std::size_t j = H; j < 2 * H; ++j) b[j] = 1.0;
  }
}

std::size_t Model::add_param(const std::string& name, Shape shape) {
  params_.emplace_back(name, std::move(shape));
  return params_.size() - 1;
}

Model::Lstm Model::add_lstm(const std::string& prefix, std::size_t input, std::size_t hidden) {
  Lstm l;
  l.wx = add_param(prefix + "_wx", {input, 4 * hidden});
  l.wh = add_param(prefix + "_wh", {hidden, 4 * hidden});
  l.b = add_param(prefix + "_b", {1, 4 * hidden});
  return l;
}

Parameter* Model::find(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

const Parameter* Model::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

void Model::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Model::check_sentence(const Sentence& x) const {
  if (x.empty()) throw InputError("empty sentence");
  for (int id : x)
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size)
      throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(config_.vocab_size));
}

Tensor Model::linear(Tape& t, const Tensor& x, std::size_t w, std::size_t b) const {
  return add_rowwise(matmul(x, p(t, w)), p(t, b));
}

std::vector<Tensor> Model::run_lstm(Tape& t, const Lstm& cell, const Tensor& inputs, bool reverse, Tensor h,
                                    Tensor c) const {
  // gates laid out as [input | forget | output | candidate]
  const std::size_t H = params_[cell.wh].shape[0];
  const std::size_t steps = inputs.rows();
  const Tensor proj = add_rowwise(matmul(inputs, p(t, cell.wx)), p(t, cell.b));
  const Tensor wh = p(t, cell.wh);
  std::vector<Tensor> hs;
  hs.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t step = reverse ? steps - 1 - k : k;
    const Tensor gates = add(row(proj, step), matmul(h, wh));
    const Tensor i = sigmoid(slice_cols(gates, 0, H));
    const Tensor f = sigmoid(slice_cols(gates, H, 2 * H));
    const Tensor o = sigmoid(slice_cols(gates, 2 * H, 3 * H));
    const Tensor g = tanh(slice_cols(gates, 3 * H, 4 * H));
    c = add(mul(f, c), mul(i, g));
    h = mul(o, tanh(c));
    hs.push_back(h);
  }
  return hs;
}

namespace {

// Order-free sums run over sorted IDs so permuted sentences give identical bits.
Sentence sorted_ids(const Sentence& x) {
  Sentence s = x;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

Tensor Model::bilstm_average(Tape& t, std::size_t embed, const Sentence& x) const {
  const std::size_t H = config_.lstm_hidden;
  const Tensor e = gather_rows(p(t, embed), x);
  const auto fwd = run_lstm(t, enc_fwd_, e, false, t.zeros({1, H}), t.zeros({1, H}));
  const auto bwd = run_lstm(t, enc_bwd_, e, true, t.zeros({1, H}), t.zeros({1, H}));
  // the mean of per-step [h_fwd; h_bwd] equals [mean h_fwd; mean h_bwd]
  return concat(mean_rows(stack_rows(fwd)), mean_rows(stack_rows(bwd)), 1);
}

SemanticPosterior Model::encode_semantic(Tape& t, const Sentence& x) const {
  if (config_.kind != ModelKind::vgvae) throw ContractError("baseline models have no latent posterior");
  check_sentence(x);
  const Tensor avg = mean_rows(gather_rows(p(t, sem_embed_), sorted_ids(x)));
  return {normalize_rows(linear(t, avg, sem_mu_w_, sem_mu_b_)), softplus(linear(t, avg, sem_kappa_w_, sem_kappa_b_))};
}

SyntacticPosterior Model::encode_syntactic(Tape& t, const Sentence& x) const {
  if (config_.kind != ModelKind::vgvae) throw ContractError("baseline models have no latent posterior");
  check_sentence(x);
  Tensor h;
  if (config_.encoder == EncoderKind::word_avg) {
    h = mean_rows(gather_rows(p(t, syn_embed_), sorted_ids(x)));
  } else {
    h = tanh(linear(t, bilstm_average(t, syn_embed_, x), syn_hidden_w_, syn_hidden_b_));
  }
  return {linear(t, h, syn_mu_w_, syn_mu_b_), linear(t, h, syn_lv_w_, syn_lv_b_)};
}

Tensor Model::decode_logprob(Tape& t, const Tensor& y, const Tensor& z, const Sentence& x) const {
  return config_.decoder == DecoderKind::bow ? decode_bow_logprob(t, y, z, x) : decode_lstm_logprob(t, y, z, x);
}

Tensor Model::decode_bow_logprob(Tape& t, const Tensor& y, const Tensor& z, const Sentence& x) const {
  if (config_.decoder != DecoderKind::bow || config_.kind != ModelKind::vgvae)
    throw ContractError("model has no bag-of-words decoder");
  check_sentence(x);
  const Tensor h = tanh(linear(t, concat(y, z, 1), dec_hidden_w_, dec_hidden_b_));
  const Tensor logp = log_softmax(linear(t, h, dec_out_w_, dec_out_b_));
  const std::vector<int> rows(x.size(), 0);
  return select_sum(logp, rows, sorted_ids(x));
}

Tensor Model::decode_lstm_logprob(Tape& t, const Tensor& y, const Tensor& z, const Sentence& x) const {
  if (config_.decoder != DecoderKind::lstm || config_.kind != ModelKind::vgvae)
    throw ContractError("model has no LSTM decoder");
  check_sentence(x);
  const Tensor yz = concat(y, z, 1);
  std::vector<int> prev{Vocab::kBos};
  prev.insert(prev.end(), x.begin(), x.end());
  const std::size_t steps = prev.size();
  const std::vector<Tensor> cond(steps, yz);
  const Tensor inputs = concat(gather_rows(p(t, dec_embed_), prev), stack_rows(cond), 1);
  const Tensor h0 = linear(t, yz, dec_h0_w_, dec_h0_b_);
  const Tensor c0 = linear(t, yz, dec_c0_w_, dec_c0_b_);
  const auto hs = run_lstm(t, dec_lstm_, inputs, false, h0, c0);
  const Tensor logp = log_softmax(linear(t, stack_rows(hs), dec_out_w_, dec_out_b_));
  std::vector<int> rows(steps), gold(x.begin(), x.end());
  for (std::size_t k = 0; k < steps; ++k) rows[k] = static_cast<int>(k);
  gold.push_back(Vocab::kEos);
  return select_sum(logp, rows, gold);
}

Tensor Model::position_logprobs(Tape& t, const Tensor& z, const Sentence& x) const {
  if (config_.kind != ModelKind::vgvae) throw ContractError("baseline models have no position predictor");
  check_sentence(x);
  const std::vector<Tensor> zs(x.size(), z);
  const Tensor in = concat(gather_rows(p(t, syn_embed_), x), stack_rows(zs), 1);
  const Tensor h1 = tanh(linear(t, in, wpl_w1_, wpl_b1_));
  const Tensor h2 = tanh(linear(t, h1, wpl_w2_, wpl_b2_));
  return log_softmax(linear(t, h2, wpl_w3_, wpl_b3_));
}

Tensor Model::baseline_representation(Tape& t, const Sentence& x) const {
  check_sentence(x);
  switch (config_.kind) {
    case ModelKind::wordavg: return mean_rows(gather_rows(p(t, sem_embed_), sorted_ids(x)));
    case ModelKind::blstmavg: return bilstm_average(t, sem_embed_, x);
    case ModelKind::vgvae: break;
  }
  throw ContractError("the latent-variable model has no baseline representation");
}

Tensor Model::semantic_direction(Tape& t, const Sentence& x) const {
  if (config_.kind == ModelKind::vgvae) return encode_semantic(t, x).mu;
  return normalize_rows(baseline_representation(t, x));
}

namespace {
std::vector<double> values(const Tensor& v) { return {v.data().begin(), v.data().end()}; }
}  // namespace

VmfParams Model::semantic_params(const Sentence& x) const {
  Tape t(GradMode::frozen);
  const auto q = encode_semantic(t, x);
  return {values(q.mu), q.kappa.item()};
}

GaussParams Model::syntactic_params(const Sentence& x) const {
  Tape t(GradMode::frozen);
  const auto q = encode_syntactic(t, x);
  std::vector<double> var = values(q.logvar);
  for (double& v : var) v = std::exp(v);
  return {values(q.mu), std::move(var)};
}

std::vector<double> Model::embed(const Sentence& x, Variable v) const {
  Tape t(GradMode::frozen);
  if (config_.kind != ModelKind::vgvae) return values(baseline_representation(t, x));
  if (v == Variable::semantic) return values(encode_semantic(t, x).mu);
  return values(encode_syntactic(t, x).mu);
}

}  // namespace vgvae
