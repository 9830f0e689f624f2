#include "vgvae/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "vgvae/errors.hpp"

namespace vgvae {

void LossConfig::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be a finite value >= 0");
  };
  nonneg(kl_weight_y, "kl_weight_y");
  nonneg(kl_weight_z, "kl_weight_z");
  nonneg(rec_weight, "rec_weight");
  nonneg(prl_weight, "prl_weight");
  nonneg(wpl_weight, "wpl_weight");
  if (!(dpl_margin > 0.0) || !std::isfinite(dpl_margin)) throw ConfigError("dpl_margin must be positive");
  if (megabatch_k < 1) throw ConfigError("megabatch_k must be at least 1");
  if (max_position < 1) throw ConfigError("max_position must be at least 1");
  if (dpl_start_epoch < 1) throw ConfigError("dpl_start_epoch must be at least 1");
}

void LossConfig::set_losses(const std::string& list) {
  prl = dpl = wpl = false;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string::npos) end = list.size();
    const std::string name = list.substr(start, end - start);
    if (name == "prl") prl = true;
    else if (name == "dpl") dpl = true;
    else if (name == "wpl") wpl = true;
    else if (name == "all") prl = dpl = wpl = true;
    else if (!name.empty()) throw ConfigError("unknown loss '" + name + "' (expected prl, dpl, wpl or all)");
    start = end + 1;
  }
}

std::string LossConfig::losses() const {
  std::string s;
  for (auto [on, name] : {std::pair{prl, "prl"}, std::pair{dpl, "dpl"}, std::pair{wpl, "wpl"}}) {
    if (!on) continue;
    if (!s.empty()) s += ',';
    s += name;
  }
  return s;
}

// ---------------------------------------------------------------------------

Encoded encode_and_sample(const Model& model, Tape& t, const Sentence& x, LatentNoise& noise) {
  Encoded e;
  e.qy = model.encode_semantic(t, x);
  e.qz = model.encode_syntactic(t, x);
  const std::size_t m = model.config().latent_dim_m, d = model.config().latent_dim_d;
  e.y = vmf_sample(e.qy.mu, e.qy.kappa, noise.vmf(m, e.qy.kappa.item()));
  e.z = gauss_sample(e.qz.mu, e.qz.logvar, noise.gauss(d));
  return e;
}

Tensor elbo_loss(const Model& model, Tape& t, const Sentence& x, const Encoded& e, const LossConfig& cfg) {
  const Tensor rec = scale(model.decode_logprob(t, e.y, e.z, x), -cfg.rec_weight);
  const Tensor kly = scale(kl_vmf_uniform(e.qy.kappa, model.config().latent_dim_m), cfg.kl_weight_y);
  const Tensor klz = scale(kl_gauss_std(e.qz.mu, e.qz.logvar), cfg.kl_weight_z);
  return add(add(rec, kly), klz);
}

Tensor elbo_loss(const Model& model, Tape& t, const Sentence& x, const LossConfig& cfg, LatentNoise& noise) {
  return elbo_loss(model, t, x, encode_and_sample(model, t, x, noise), cfg);
}

Tensor prl_loss(const Model& model, Tape& t, const Sentence& x1, const Encoded& e1, const Sentence& x2,
                const Encoded& e2, const LossConfig& cfg) {
  const Tensor a = model.decode_logprob(t, e2.y, e1.z, x1);
  const Tensor b = model.decode_logprob(t, e1.y, e2.z, x2);
  return scale(add(a, b), -cfg.prl_weight);
}

Tensor prl_loss(const Model& model, Tape& t, const Sentence& x1, const Sentence& x2, const LossConfig& cfg,
                LatentNoise& noise) {
  const Encoded e1 = encode_and_sample(model, t, x1, noise);
  const Encoded e2 = encode_and_sample(model, t, x2, noise);
  return prl_loss(model, t, x1, e1, x2, e2, cfg);
}

Tensor wpl_loss(const Model& model, Tape& t, const Sentence& x, const Tensor& z, const LossConfig& cfg) {
  const Tensor logp = model.position_logprobs(t, z, x);
  const std::size_t classes = logp.cols();
  std::vector<int> rows(x.size()), cols(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    rows[i] = static_cast<int>(i);
    cols[i] = static_cast<int>(std::min(i, classes - 1));
  }
  return scale(select_sum(logp, rows, cols), -cfg.wpl_weight);
}

Tensor wpl_loss(const Model& model, Tape& t, const Sentence& x, const LossConfig& cfg, LatentNoise& noise) {
  const auto qz = model.encode_syntactic(t, x);
  const Tensor z = gauss_sample(qz.mu, qz.logvar, noise.gauss(model.config().latent_dim_d));
  return wpl_loss(model, t, x, z, cfg);
}

double dpl_loss(double d12, double d1n, double d2n, double margin) {
  return std::max(0.0, margin - d12 + d1n) + std::max(0.0, margin - d12 + d2n);
}

Tensor dpl_loss(const Tensor& d12, const Tensor& d1n, const Tensor& d2n, double margin) {
  const Tensor a = relu(add(add_scalar(neg(d12), margin), d1n));
  const Tensor b = relu(add(add_scalar(neg(d12), margin), d2n));
  return add(a, b);
}

Tensor dpl_loss(const Model& model, Tape& t, const Sentence& x1, const Sentence& x2, const Sentence& n1,
                const Sentence& n2, double margin) {
  const Tensor u1 = model.semantic_direction(t, x1);
  const Tensor u2 = model.semantic_direction(t, x2);
  const Tensor v1 = model.semantic_direction(t, n1);
  const Tensor v2 = model.semantic_direction(t, n2);
  return dpl_loss(dot(u1, u2), dot(u1, v1), dot(u2, v2), margin);
}

// ---------------------------------------------------------------------------
// Mega-batch

void MegaBatch::push_batch(std::vector<Entry> batch) {
  const std::size_t dim = entries_.empty() ? (batch.empty() ? 0 : batch[0].direction.size())
                                           : entries_[0].direction.size();
  for (const auto& e : batch) {
    if (e.direction.size() != dim) throw DimensionError("mega-batch directions differ in dimension");
    double n2 = 0.0;
    for (double v : e.direction) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw DomainError("mega-batch direction is not unit-norm");
  }
  batches_.push_back(std::move(batch));
  while (batches_.size() > k_) batches_.pop_front();
  rebuild();
}

void MegaBatch::clear() {
  batches_.clear();
  rebuild();
}

void MegaBatch::rebuild() {
  entries_.clear();
  for (const auto& b : batches_) entries_.insert(entries_.end(), b.begin(), b.end());
  const std::size_t dim = entries_.empty() ? 0 : entries_[0].direction.size();
  directions_ = kernels::Matrix(entries_.size(), dim);
  for (std::size_t i = 0; i < entries_.size(); ++i)
    std::copy(entries_[i].direction.begin(), entries_[i].direction.end(), directions_.row(i).begin());
}

std::size_t select_negative(std::span<const double> anchor, std::size_t partner, const MegaBatch& mb,
                            std::size_t self) {
  std::vector<std::size_t> eligible;
  eligible.reserve(mb.size());
  for (std::size_t i = 0; i < mb.size(); ++i) {
    const auto key = mb.entry(i).key;
    if (key != partner && key != self) eligible.push_back(i);
  }
  if (eligible.empty()) throw SamplerError("no eligible negative in the mega-batch");
  if (anchor.size() != mb.directions().cols)
    throw DimensionError("anchor dimension " + std::to_string(anchor.size()) + " does not match mega-batch (" +
                         std::to_string(mb.directions().cols) + ")");
  return kernels::argmax_dot(anchor, mb.directions(), eligible);
}

// ---------------------------------------------------------------------------

LossTerms total_loss(const Model& model, Tape& t, const SentencePair& pair, std::size_t pair_id,
                     const MegaBatch* mb, int epoch, const LossConfig& cfg, LatentNoise& noise) {
  const bool latent = model.config().kind == ModelKind::vgvae;
  LossTerms out;
  Tensor total = t.scalar(0.0);
  Tensor u1, u2;
  if (latent) {
    const Encoded e1 = encode_and_sample(model, t, pair.x1, noise);
    const Encoded e2 = encode_and_sample(model, t, pair.x2, noise);
    u1 = e1.qy.mu;
    u2 = e2.qy.mu;
    const Tensor elbo = add(elbo_loss(model, t, pair.x1, e1, cfg), elbo_loss(model, t, pair.x2, e2, cfg));
    out.elbo = elbo.item();
    total = add(total, elbo);
    if (cfg.prl) {
      const Tensor prl = prl_loss(model, t, pair.x1, e1, pair.x2, e2, cfg);
      out.prl = prl.item();
      total = add(total, prl);
    }
    if (cfg.wpl) {
      const Tensor wpl = add(wpl_loss(model, t, pair.x1, e1.z, cfg), wpl_loss(model, t, pair.x2, e2.z, cfg));
      out.wpl = wpl.item();
      total = add(total, wpl);
    }
  }
  const bool dpl_on = (cfg.dpl || !latent) && mb != nullptr && epoch >= cfg.dpl_start_epoch;
  if (dpl_on) {
    const std::size_t k1 = sentence_key(pair_id, 0), k2 = sentence_key(pair_id, 1);
    if (!latent) {
      u1 = model.semantic_direction(t, pair.x1);
      u2 = model.semantic_direction(t, pair.x2);
    }
    try {
      const auto i1 = select_negative(u1.data(), k2, *mb, k1);
      const auto i2 = select_negative(u2.data(), k1, *mb, k2);
      const Tensor v1 = model.semantic_direction(t, mb->entry(i1).sentence);
      const Tensor v2 = model.semantic_direction(t, mb->entry(i2).sentence);
      const Tensor dpl = dpl_loss(dot(u1, u2), dot(u1, v1), dot(u2, v2), cfg.dpl_margin);
      out.dpl = dpl.item();
      total = add(total, dpl);
    } catch (const SamplerError&) {
      out.dpl_skipped = true;
    }
  }
  out.total = total;
  return out;
}

}  // namespace vgvae
