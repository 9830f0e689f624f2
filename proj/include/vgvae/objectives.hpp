#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vgvae/autodiff.hpp"
#include "vgvae/data_io.hpp"
#include "vgvae/distributions.hpp"
#include "vgvae/kernels.hpp"
#include "vgvae/model.hpp"

namespace vgvae {

struct LossConfig {
  double kl_weight_y = 1.0;
  double kl_weight_z = 1.0;
  double rec_weight = 1.0;
  double prl_weight = 1.0;
  double dpl_margin = 0.4;
  int dpl_start_epoch = 2;
  double wpl_weight = 1.0;
  std::size_t megabatch_k = 20;
  std::size_t max_position = 50;
  bool prl = false;
  bool dpl = false;
  bool wpl = false;

  void validate() const;
  /// Set prl/dpl/wpl from a comma-separated list ("" for none).
  void set_losses(const std::string& list);
  std::string losses() const;
  bool operator==(const LossConfig&) const = default;
};

/// Posteriors and one latent sample per variable for a sentence.
struct Encoded {
  SemanticPosterior qy;
  SyntacticPosterior qz;
  Tensor y;
  Tensor z;
};

Encoded encode_and_sample(const Model& model, Tape& t, const Sentence& x, LatentNoise& noise);

/// rec_weight * -log p(x|y,z) + kl_weight_y * KL_vMF + kl_weight_z * KL_Gauss.
Tensor elbo_loss(const Model& model, Tape& t, const Sentence& x, const Encoded& e, const LossConfig& cfg);
Tensor elbo_loss(const Model& model, Tape& t, const Sentence& x, const LossConfig& cfg, LatentNoise& noise);

/// prl_weight * ( -log p(x1|y2,z1) - log p(x2|y1,z2) ).
Tensor prl_loss(const Model& model, Tape& t, const Sentence& x1, const Encoded& e1, const Sentence& x2,
                const Encoded& e2, const LossConfig& cfg);
Tensor prl_loss(const Model& model, Tape& t, const Sentence& x1, const Sentence& x2, const LossConfig& cfg,
                LatentNoise& noise);

/// wpl_weight * -sum_i log p(position i | e_i, z); positions past the last
/// class are clamped to it.
Tensor wpl_loss(const Model& model, Tape& t, const Sentence& x, const Tensor& z, const LossConfig& cfg);
Tensor wpl_loss(const Model& model, Tape& t, const Sentence& x, const LossConfig& cfg, LatentNoise& noise);

/// max(0, margin - d12 + d1n) + max(0, margin - d12 + d2n) on cosines.
double dpl_loss(double d12, double d1n, double d2n, double margin);
Tensor dpl_loss(const Tensor& d12, const Tensor& d1n, const Tensor& d2n, double margin);
/// Cosines of the models' mean directions (no sampling).
Tensor dpl_loss(const Model& model, Tape& t, const Sentence& x1, const Sentence& x2, const Sentence& n1,
                const Sentence& n2, double margin);

/// Pool of recent sentences with the mean direction cached when their
/// mini-batch entered. Keys identify sentences; partner keys link
/// paraphrases.
class MegaBatch {
 public:
  struct Entry {
    std::size_t key = 0;
    std::size_t partner = 0;
    Sentence sentence;
    std::vector<double> direction;
  };

  explicit MegaBatch(std::size_t k) : k_(k) {}

  /// Append one mini-batch, evicting the oldest once more than k are held.
  /// Directions must be unit vectors of a common dimension.
  void push_batch(std::vector<Entry> batch);
  void clear();

  std::size_t k() const { return k_; }
  std::size_t batches() const { return batches_.size(); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }
  const kernels::Matrix& directions() const { return directions_; }
  const std::deque<std::vector<Entry>>& batch_list() const { return batches_; }

 private:
  void rebuild();

  std::size_t k_;
  std::deque<std::vector<Entry>> batches_;
  std::vector<Entry> entries_;
  kernels::Matrix directions_;
};

inline constexpr std::size_t kNoKey = std::numeric_limits<std::size_t>::max();

/// Position in `mb` of the entry whose cached direction has the highest
/// cosine with `anchor`, skipping entries keyed `partner` (and `self` when
/// given). Ties go to the earliest entry. Throws SamplerError if nothing
/// is eligible.
std::size_t select_negative(std::span<const double> anchor, std::size_t partner, const MegaBatch& mb,
                            std::size_t self = kNoKey);

/// Values of each term of one pair's loss (already weighted).
struct LossTerms {
  Tensor total;
  double elbo = 0.0;
  double prl = 0.0;
  double dpl = 0.0;
  double wpl = 0.0;
  bool dpl_skipped = false;
};

/// Sentence keys of pair i are 2i and 2i+1.
inline std::size_t sentence_key(std::size_t pair, int side) { return 2 * pair + static_cast<std::size_t>(side); }

/// Full objective for one pair. The latent model gets both ELBOs plus the
/// enabled auxiliary losses; baselines get only the discriminative loss.
/// The discriminative term is active from cfg.dpl_start_epoch (1-based)
/// when `mb` is given; negatives exclude the anchor and its partner.
LossTerms total_loss(const Model& model, Tape& t, const SentencePair& pair, std::size_t pair_id,
                     const MegaBatch* mb, int epoch, const LossConfig& cfg, LatentNoise& noise);

}  // namespace vgvae
