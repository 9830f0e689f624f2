#include "vgvae/distributions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "vgvae/errors.hpp"

namespace vgvae {

namespace {

constexpr double kLn10 = 2.302585092994046;

double log_bessel_series(double v, double x) {
  // I_v(x) = (x/2)^v / Gamma(v+1) * sum_k (x^2/4)^k / (k! (v+1)_k)
  const double q = 0.25 * x * x;
  double term = 1.0, total = 1.0, log_scale = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double ratio = q / ((k + 1.0) * (k + 1.0 + v));
    term *= ratio;
    total += term;
    if (total > 1e200) {
      total *= 1e-200;
      term *= 1e-200;
      log_scale += 200.0 * kLn10;
    }
    if (ratio < 1.0 && term < total * 1e-17) break;
  }
  return v * std::log(0.5 * x) - std::lgamma(v + 1.0) + log_scale + std::log(total);
}

// Coefficients of the Debye polynomials u_k(t), k = 0..K, via
// u_{k+1} = t^2 (1 - t^2) u_k' / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds.
constexpr int kDebyeTerms = 13;
using Poly = std::vector<double>;

const std::vector<Poly>& debye_polynomials() {
  static const std::vector<Poly> polys = [] {
    std::vector<Poly> u{{1.0}};
    for (int k = 0; k + 1 < kDebyeTerms; ++k) {
      const Poly& c = u.back();
      Poly d(c.size() + 3, 0.0);
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] == 0.0) continue;
        const double jj = static_cast<double>(j);
        d[j + 1] += 0.5 * jj * c[j] + c[j] / (8.0 * (jj + 1.0));
        d[j + 3] += -0.5 * jj * c[j] - 5.0 * c[j] / (8.0 * (jj + 3.0));
      }
      u.push_back(std::move(d));
    }
    return u;
  }();
  return polys;
}

double log_bessel_debye(double v, double x) {
  const double r = std::hypot(v, x);
  const double t = v / r;
  const double veta = r + v * std::log(x / (v + r));
  const auto& u = debye_polynomials();
  double total = 0.0, vpow = 1.0;
  for (int k = 0; k < kDebyeTerms; ++k) {
    double p = 0.0;
    for (std::size_t j = u[k].size(); j-- > 0;) p = p * t + u[k][j];
    const double term = p / vpow;
    total += term;
    if (k > 0 && std::abs(term) < 1e-17 * std::abs(total)) break;
    vpow *= v;
  }
  return veta - 0.5 * std::log(2.0 * std::numbers::pi * r) + std::log(total);
}

double log_bessel_hankel(double v, double x) {
  const double mu = 4.0 * v * v;
  double term = 1.0, total = 1.0, prev = INFINITY;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) >= prev) break;  // asymptotic series started diverging
    total += term;
    prev = std::abs(term);
    if (prev < 1e-17 * std::abs(total)) break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(total);
}

}  // namespace

void VmfParams::validate() const {
  if (mu.size() < 2) throw DomainError("vMF dimension must be at least 2");
  double n = 0.0;
  for (double v : mu) n += v * v;
  if (std::abs(std::sqrt(n) - 1.0) >= 1e-9) throw DomainError("vMF mean direction is not unit norm");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("vMF concentration must be finite and >= 0");
}

void GaussParams::validate() const {
  if (mu.size() != var.size())
    throw DimensionError("Gaussian mean has dim " + std::to_string(mu.size()) + ", variance has dim " +
                         std::to_string(var.size()));
  for (double v : var)
    if (!(v > 0.0)) throw DomainError("Gaussian variance must be positive");
}

double log_bessel_i(double order, double x) {
  if (std::isnan(x) || std::isnan(order)) throw NumericError("log_bessel_i of NaN");
  if (x < 0.0) throw DomainError("log_bessel_i: negative argument " + std::to_string(x));
  if (order < 0.0) throw DomainError("log_bessel_i: negative order " + std::to_string(order));
  if (x == 0.0) return order == 0.0 ? 0.0 : -INFINITY;
  if (x < std::max(30.0, order)) return log_bessel_series(order, x);
  if (order < 1.0) return log_bessel_hankel(order, x);
  return log_bessel_debye(order, x);
}

double bessel_ratio(std::size_t m, double kappa) {
  if (kappa < kKappaFloor) return 0.0;
  const double v = 0.5 * static_cast<double>(m);
  return std::exp(log_bessel_i(v, kappa) - log_bessel_i(v - 1.0, kappa));
}

double kl_vmf_uniform(std::size_t m, double kappa) {
  if (m < 2) throw DomainError("kl_vmf_uniform: dimension must be at least 2");
  if (!(kappa >= 0.0)) throw DomainError("kl_vmf_uniform: negative concentration");
  if (kappa < kKappaFloor) return 0.0;
  const double half = 0.5 * static_cast<double>(m);
  const double pi = std::numbers::pi;
  const double kl = kappa * bessel_ratio(m, kappa) + (half - 1.0) * std::log(kappa) - half * std::log(2.0 * pi) -
                    log_bessel_i(half - 1.0, kappa) + half * std::log(pi) + std::log(2.0) - std::lgamma(half);
  return std::max(kl, 0.0);
}

double kl_vmf_uniform(const VmfParams& p) {
  p.validate();
  return kl_vmf_uniform(p.dim(), p.kappa);
}

double kl_vmf_uniform_grad(std::size_t m, double kappa) {
  if (kappa < kKappaFloor) return 0.0;
  // dKL/dk = k A'(k) with A' = 1 - A^2 - (m-1) A / k
  const double a = bessel_ratio(m, kappa);
  return kappa * (1.0 - a * a) - (static_cast<double>(m) - 1.0) * a;
}

double kl_gauss_std(const GaussParams& p) {
  p.validate();
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) s += -std::log(p.var[i]) + p.var[i] + p.mu[i] * p.mu[i] - 1.0;
  return std::max(0.5 * s, 0.0);
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

double envelope_b(double m1, double kappa) {
  return (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1)) / m1;
}

double envelope_b_grad(double m1, double kappa) {
  return (-2.0 + 4.0 * kappa / std::sqrt(4.0 * kappa * kappa + m1 * m1)) / m1;
}

std::vector<double> unit_tangent(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

VmfNoise draw_vmf_noise(std::size_t m, double kappa, Rng& rng) {
  if (m < 2) throw DomainError("vMF dimension must be at least 2");
  const double m1 = static_cast<double>(m) - 1.0;
  const double k = kappa < kKappaFloor ? 0.0 : kappa;
  const double b = envelope_b(m1, k);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = k * x0 + m1 * std::log(1.0 - x0 * x0);
  VmfNoise out;
  for (std::size_t it = 1; it <= 1000000; ++it) {
    const double e = rng.beta(0.5 * m1, 0.5 * m1);
    const double w = (1.0 - (1.0 + b) * e) / (1.0 - (1.0 - b) * e);
    const double u = rng.uniform_open();
    if (k * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      out.proposal = e;
      out.proposals_tried = it;
      out.tangent = unit_tangent(m - 1, rng);
      return out;
    }
  }
  throw SamplerError("vMF rejection sampler stalled (kappa=" + std::to_string(kappa) + ", m=" + std::to_string(m) +
                     ")");
}

double vmf_omega(std::size_t m, double kappa, double proposal) {
  const double b = envelope_b(static_cast<double>(m) - 1.0, kappa < kKappaFloor ? 0.0 : kappa);
  return (1.0 - (1.0 + b) * proposal) / (1.0 - (1.0 - b) * proposal);
}

double vmf_omega_grad(std::size_t m, double kappa, double proposal) {
  const double m1 = static_cast<double>(m) - 1.0;
  const double k = kappa < kKappaFloor ? 0.0 : kappa;
  const double b = envelope_b(m1, k);
  const double den = 1.0 - (1.0 - b) * proposal;
  const double domega_db = -2.0 * proposal * (1.0 - proposal) / (den * den);
  return domega_db * envelope_b_grad(m1, k);
}

namespace {

struct Householder {
  std::vector<double> u;  // e1 - mu
  double norm2 = 0.0;
  bool identity = true;

  explicit Householder(std::span<const double> mu) : u(mu.size()) {
    for (std::size_t i = 0; i < mu.size(); ++i) u[i] = (i == 0 ? 1.0 : 0.0) - mu[i];
    for (double x : u) norm2 += x * x;
    identity = norm2 < 1e-24;
  }

  std::vector<double> apply(std::span<const double> z) const {
    std::vector<double> out(z.begin(), z.end());
    if (identity) return out;
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += u[i] * z[i];
    const double f = 2.0 * s / norm2;
    for (std::size_t i = 0; i < z.size(); ++i) out[i] -= f * u[i];
    return out;
  }
};

std::vector<double> e1_frame(double omega, std::span<const double> tangent) {
  std::vector<double> z(tangent.size() + 1);
  z[0] = omega;
  const double s = std::sqrt(std::max(0.0, 1.0 - omega * omega));
  for (std::size_t i = 0; i < tangent.size(); ++i) z[i + 1] = s * tangent[i];
  return z;
}

}  // namespace

std::vector<double> vmf_assemble(std::span<const double> mu, double omega, std::span<const double> tangent) {
  if (tangent.size() + 1 != mu.size())
    throw DimensionError("vMF tangent has dim " + std::to_string(tangent.size()) + ", expected " +
                         std::to_string(mu.size() - 1));
  return Householder(mu).apply(e1_frame(omega, tangent));
}

std::vector<double> sample_vmf(const VmfParams& p, Rng& rng) {
  p.validate();
  const VmfNoise n = draw_vmf_noise(p.dim(), p.kappa, rng);
  return vmf_assemble(p.mu, vmf_omega(p.dim(), p.kappa, n.proposal), n.tangent);
}

std::vector<double> sample_gauss(const GaussParams& p, Rng& rng) {
  p.validate();
  std::vector<double> out(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) out[i] = p.mu[i] + std::sqrt(p.var[i]) * rng.normal();
  return out;
}

// ---------------------------------------------------------------------------
// LatentNoise

const LatentNoise::Entry& LatentNoise::next(bool is_vmf, std::size_t dim) {
  if (cursor_ >= log_.size()) throw ContractError("LatentNoise: replay requested more draws than were recorded");
  const Entry& e = log_[cursor_++];
  const std::size_t have = e.is_vmf ? e.vmf.tangent.size() + 1 : e.gauss.size();
  if (e.is_vmf != is_vmf || have != dim) throw ContractError("LatentNoise: replayed draw does not match request");
  return e;
}

VmfNoise LatentNoise::vmf(std::size_t m, double kappa) {
  if (replaying_) return next(true, m).vmf;
  Entry e;
  e.is_vmf = true;
  e.vmf = draw_vmf_noise(m, kappa, *rng_);
  log_.push_back(e);
  return e.vmf;
}

std::vector<double> LatentNoise::gauss(std::size_t d) {
  if (replaying_) return next(false, d).gauss;
  Entry e;
  e.gauss.resize(d);
  for (double& x : e.gauss) x = rng_->normal();
  log_.push_back(e);
  return e.gauss;
}

// ---------------------------------------------------------------------------
// Tape operations

Tensor vmf_sample(const Tensor& mu, const Tensor& kappa, const VmfNoise& noise) {
  if (!mu.valid() || !kappa.valid() || mu.tape() != kappa.tape())
    throw ContractError("vmf_sample: operands must share a tape");
  if (kappa.size() != 1) throw DimensionError("vmf_sample: kappa must have one element, got " + shape_str(kappa.shape()));
  const std::size_t m = mu.size();
  if (noise.tangent.size() + 1 != m) throw DimensionError("vmf_sample: noise dimension does not match mu");
  const double k = kappa.item();
  const double omega = vmf_omega(m, k, noise.proposal);
  const std::vector<double> z = e1_frame(omega, noise.tangent);
  const Householder h(mu.data());
  std::vector<double> out = h.apply(z);

  const std::size_t mi = mu.id(), ki = kappa.id();
  return mu.tape()->record(
      {1, m}, std::move(out),
      [mi, ki, m, k, omega, z, h, proposal = noise.proposal, tangent = noise.tangent](Tape& tp, std::size_t self) {
        auto g = tp.grad(self);
        // H is symmetric, so dL/dz = H g
        const std::vector<double> gz = h.apply(g);
        if (!h.identity) {
          double s = 0.0, gu = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            s += h.u[i] * z[i];
            gu += g[i] * h.u[i];
          }
          const double n = h.norm2;
          auto gmu = tp.grad_mut(mi);
          for (std::size_t i = 0; i < m; ++i) {
            const double du = -2.0 * (g[i] * s / n + gu * z[i] / n - 2.0 * gu * s * h.u[i] / (n * n));
            gmu[i] -= du;  // u = e1 - mu
          }
        }
        const double sq = std::sqrt(std::max(0.0, 1.0 - omega * omega));
        double gomega = gz[0];
        if (sq > 1e-12) {
          double acc = 0.0;
          for (std::size_t i = 0; i + 1 < m; ++i) acc += gz[i + 1] * tangent[i];
          gomega -= omega / sq * acc;
        }
        tp.grad_mut(ki)[0] += gomega * vmf_omega_grad(m, k, proposal);
      });
}

Tensor gauss_sample(const Tensor& mu, const Tensor& logvar, std::span<const double> eps) {
  if (eps.size() != mu.size()) throw DimensionError("gauss_sample: noise dimension does not match mu");
  Tape& t = *mu.tape();
  const Tensor e = t.constant(mu.shape(), std::vector<double>(eps.begin(), eps.end()));
  return add(mu, mul(exp(scale(logvar, 0.5)), e));
}

Tensor kl_vmf_uniform(const Tensor& kappa, std::size_t m) {
  if (kappa.size() != 1) throw DimensionError("kl_vmf_uniform: kappa must have one element");
  const double k = kappa.item();
  const std::size_t ki = kappa.id();
  return kappa.tape()->record({}, {kl_vmf_uniform(m, k)}, [ki, m, k](Tape& tp, std::size_t self) {
    tp.grad_mut(ki)[0] += tp.grad(self)[0] * kl_vmf_uniform_grad(m, k);
  });
}

Tensor kl_gauss_std(const Tensor& mu, const Tensor& logvar) {
  if (mu.shape() != logvar.shape())
    throw DimensionError("kl_gauss_std: mean " + shape_str(mu.shape()) + " vs log-variance " +
                         shape_str(logvar.shape()));
  const double d = static_cast<double>(mu.size());
  Tensor s = add(sub(sum(exp(logvar)), sum(logvar)), sum(square(mu)));
  return scale(add_scalar(s, -d), 0.5);
}

}  // namespace vgvae
