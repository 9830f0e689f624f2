#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vgvae/autodiff.hpp"
#include "vgvae/data_io.hpp"
#include "vgvae/distributions.hpp"

namespace vgvae {

enum class EncoderKind { word_avg, bilstm };
enum class DecoderKind { bow, lstm };
/// vgvae: the two-latent model. wordavg / blstmavg: single-representation
/// paraphrase baselines trained with the discriminative loss only.
enum class ModelKind { vgvae, wordavg, blstmavg };
enum class Variable { semantic, syntactic };

std::string to_string(EncoderKind k);
std::string to_string(DecoderKind k);
std::string to_string(ModelKind k);
std::string to_string(Variable v);
EncoderKind parse_encoder_kind(const std::string& s);
DecoderKind parse_decoder_kind(const std::string& s);
ModelKind parse_model_kind(const std::string& s);
Variable parse_variable(const std::string& s);

struct ModelConfig {
  ModelKind kind = ModelKind::vgvae;
  std::size_t vocab_size = 0;
  std::size_t latent_dim_m = 50;
  std::size_t latent_dim_d = 50;
  std::size_t embed_dim = 50;
  std::size_t lstm_hidden = 50;
  EncoderKind encoder = EncoderKind::word_avg;
  DecoderKind decoder = DecoderKind::bow;
  std::size_t decoder_hidden = 100;  // hidden layer of the bag-of-words decoder
  std::size_t encoder_hidden = 100;  // hidden layer after the BiLSTM encoder
  std::size_t wpl_hidden = 100;      // both hidden layers of the position predictor
  std::size_t max_position = 50;     // position classes of the position predictor

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Semantic posterior on a tape: mu is a unit 1 x m row, kappa 1 x 1.
struct SemanticPosterior {
  Tensor mu;
  Tensor kappa;
};

/// Syntactic posterior on a tape: 1 x d rows, var = exp(logvar).
struct SyntacticPosterior {
  Tensor mu;
  Tensor logvar;
};

class Model {
 public:
  /// Parameters uniform in [-0.1, 0.1] from `seed`; LSTM forget-gate
  /// biases start at 1.
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  void zero_grad();

  // Forward passes recorded on a tape. All require a non-empty sentence
  // with IDs below vocab_size.
  SemanticPosterior encode_semantic(Tape& t, const Sentence& x) const;
  SyntacticPosterior encode_syntactic(Tape& t, const Sentence& x) const;
  /// log p(x | y, z) for the configured decoder.
  Tensor decode_logprob(Tape& t, const Tensor& y, const Tensor& z, const Sentence& x) const;
  Tensor decode_bow_logprob(Tape& t, const Tensor& y, const Tensor& z, const Sentence& x) const;
  Tensor decode_lstm_logprob(Tape& t, const Tensor& y, const Tensor& z, const Sentence& x) const;
  /// Log-probabilities over positions, one row per token (T x max_position).
  Tensor position_logprobs(Tape& t, const Tensor& z, const Sentence& x) const;
  /// Baseline sentence representation (1 x embed_dim or 1 x 2*lstm_hidden).
  Tensor baseline_representation(Tape& t, const Sentence& x) const;
  /// Unit vector scored by the discriminative loss: the semantic mean
  /// direction, or the normalized baseline representation.
  Tensor semantic_direction(Tape& t, const Sentence& x) const;

  // Plain-value views used by evaluation (read-only; thread-safe).
  VmfParams semantic_params(const Sentence& x) const;
  GaussParams syntactic_params(const Sentence& x) const;
  /// Vector compared by cosine in evaluation: the semantic mean direction or
  /// the syntactic mean vector (baselines return their representation for
  /// either variable).
  std::vector<double> embed(const Sentence& x, Variable v) const;

 private:
  struct Lstm {
    std::size_t wx, wh, b;  // parameter indices
  };

  std::size_t add_param(const std::string& name, Shape shape);
  Lstm add_lstm(const std::string& prefix, std::size_t input, std::size_t hidden);
  Tensor p(Tape& t, std::size_t idx) const { return t.param(params_[idx]); }
  Tensor linear(Tape& t, const Tensor& x, std::size_t w, std::size_t b) const;
  /// Run an LSTM over precomputed per-step inputs; returns the hidden
  /// states in processing order.
  std::vector<Tensor> run_lstm(Tape& t, const Lstm& cell, const Tensor& inputs, bool reverse, Tensor h,
                               Tensor c) const;
  Tensor bilstm_average(Tape& t, std::size_t embed, const Sentence& x) const;
  void check_sentence(const Sentence& x) const;

  ModelConfig config_;
  std::vector<Parameter> params_;

  std::size_t sem_embed_ = 0, syn_embed_ = 0, dec_embed_ = 0;
  std::size_t sem_mu_w_ = 0, sem_mu_b_ = 0, sem_kappa_w_ = 0, sem_kappa_b_ = 0;
  std::size_t syn_hidden_w_ = 0, syn_hidden_b_ = 0;
  std::size_t syn_mu_w_ = 0, syn_mu_b_ = 0, syn_lv_w_ = 0, syn_lv_b_ = 0;
  Lstm enc_fwd_{}, enc_bwd_{}, dec_lstm_{};
  std::size_t dec_hidden_w_ = 0, dec_hidden_b_ = 0, dec_out_w_ = 0, dec_out_b_ = 0;
  std::size_t dec_h0_w_ = 0, dec_h0_b_ = 0, dec_c0_w_ = 0, dec_c0_b_ = 0;
  std::size_t wpl_w1_ = 0, wpl_b1_ = 0, wpl_w2_ = 0, wpl_b2_ = 0, wpl_w3_ = 0, wpl_b3_ = 0;
};

}  // namespace vgvae
