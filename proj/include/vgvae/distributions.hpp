#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vgvae/autodiff.hpp"
#include "vgvae/random.hpp"

namespace vgvae {

/// Concentrations below this are treated as exactly uniform (KL = 0).
inline constexpr double kKappaFloor = 1e-12;

/// von Mises-Fisher parameters: unit mean direction and concentration.
struct VmfParams {
  std::vector<double> mu;
  double kappa = 0.0;

  std::size_t dim() const { return mu.size(); }
  /// Throws DomainError unless |mu| = 1 (1e-9) and kappa >= 0.
  void validate() const;
};

/// Diagonal Gaussian with per-dimension variance.
struct GaussParams {
  std::vector<double> mu;
  std::vector<double> var;

  std::size_t dim() const { return mu.size(); }
  void validate() const;
};

/// log I_v(x), the modified Bessel function of the first kind. Power series
/// below x = max(30, v); asymptotic expansions above (uniform Debye
/// expansion in the order, or the large-argument expansion for v < 1).
double log_bessel_i(double order, double x);

/// Mean resultant length A_m(kappa) = I_{m/2}(kappa) / I_{m/2-1}(kappa).
double bessel_ratio(std::size_t m, double kappa);

/// KL( vMF(mu, kappa) || uniform on S^{m-1} ), closed form.
double kl_vmf_uniform(const VmfParams& p);
double kl_vmf_uniform(std::size_t m, double kappa);
/// d/dkappa of kl_vmf_uniform.
double kl_vmf_uniform_grad(std::size_t m, double kappa);

/// KL( N(mu, diag(var)) || N(0, I) ).
double kl_gauss_std(const GaussParams& p);

/// Noise behind one vMF draw: the accepted proposal of the rejection loop
/// and a uniform direction on S^{m-2}. Together with kappa and mu these
/// determine the sample.
struct VmfNoise {
  double proposal = 0.0;
  std::vector<double> tangent;
  std::size_t proposals_tried = 0;
};

/// Rejection-sample the noise for vMF(., kappa) on S^{m-1}.
/// Throws SamplerError after 1e6 rejected proposals.
VmfNoise draw_vmf_noise(std::size_t m, double kappa, Rng& rng);

/// Component along the mean direction implied by an accepted proposal.
double vmf_omega(std::size_t m, double kappa, double proposal);
double vmf_omega_grad(std::size_t m, double kappa, double proposal);

/// Rotate the e1-frame sample (omega, sqrt(1-omega^2) tangent) onto mu by
/// the Householder reflection that maps e1 to mu.
std::vector<double> vmf_assemble(std::span<const double> mu, double omega, std::span<const double> tangent);

std::vector<double> sample_vmf(const VmfParams& p, Rng& rng);
std::vector<double> sample_gauss(const GaussParams& p, Rng& rng);

/// Source of latent noise for one forward pass. Every draw is recorded;
/// after replay() the same draws are returned again in the same order, so
/// a forward pass can be repeated with frozen noise (finite differences,
/// diagnostics).
class LatentNoise {
 public:
  explicit LatentNoise(Rng& rng) : rng_(&rng) {}

  VmfNoise vmf(std::size_t m, double kappa);
  std::vector<double> gauss(std::size_t d);

  void replay() {
    replaying_ = true;
    cursor_ = 0;
  }
  std::size_t draws() const { return log_.size(); }

 private:
  struct Entry {
    VmfNoise vmf;
    std::vector<double> gauss;
    bool is_vmf = false;
  };
  const Entry& next(bool is_vmf, std::size_t dim);

  Rng* rng_;
  std::vector<Entry> log_;
  bool replaying_ = false;
  std::size_t cursor_ = 0;
};

// Tape operations -----------------------------------------------------------

/// Reparameterized vMF sample (1 x m). Gradients reach mu exactly through
/// the reflection and kappa through omega with the accepted proposal held
/// fixed; the acceptance-correction term is dropped.
Tensor vmf_sample(const Tensor& mu, const Tensor& kappa, const VmfNoise& noise);

/// mu + exp(logvar / 2) * eps
Tensor gauss_sample(const Tensor& mu, const Tensor& logvar, std::span<const double> eps);

/// kl_vmf_uniform as a differentiable function of a single-element kappa.
Tensor kl_vmf_uniform(const Tensor& kappa, std::size_t m);

/// kl_gauss_std with var = exp(logvar).
Tensor kl_gauss_std(const Tensor& mu, const Tensor& logvar);

}  // namespace vgvae
