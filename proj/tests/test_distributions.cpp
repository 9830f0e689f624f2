#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "vgvae/distributions.hpp"
#include "vgvae/errors.hpp"

using namespace vgvae;
using namespace vgvae::testing;

namespace {

VmfParams unit_e1(std::size_t m, double kappa) {
  VmfParams p;
  p.mu.assign(m, 0.0);
  p.mu[0] = 1.0;
  p.kappa = kappa;
  return p;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("log_bessel_i closed forms") {
  CHECK(log_bessel_i(0.0, 0.0) == 0.0);
  CHECK(log_bessel_i(1.5, 0.0) == -INFINITY);
  const double half = std::log(std::sqrt(2.0 / std::numbers::pi) * std::sinh(1.0));
  CHECK(std::abs(log_bessel_i(0.5, 1.0) - half) < 1e-14);
  // I_{1/2}(x) = sqrt(2/(pi x)) sinh x, I_{-1/2} style checks at larger x
  for (double x : {0.1, 3.0, 29.0, 31.0, 200.0, 700.0}) {
    const double expect = 0.5 * std::log(2.0 / (std::numbers::pi * x)) + x + std::log1p(-std::exp(-2 * x)) - std::log(2.0);
    CHECK(std::abs(log_bessel_i(0.5, x) - expect) < 1e-10 * std::max(1.0, std::abs(expect)));
  }
  CHECK_THROWS_AS(log_bessel_i(1.0, -0.5), DomainError);
}

TEST_CASE("log_bessel_i matches a 50-digit series") {
  const double v24 = log_bessel_i(24.5, 100.0);
  CHECK(std::abs(v24 - oracle_log_bessel_i(24.5, 100.0)) < 1e-10);

  // orders used for m up to 1024 and arguments on both sides of the switch
  const double orders[] = {0.0, 0.5, 1.0, 1.5, 11.5, 12.0, 24.0, 24.5, 49.0, 50.0, 99.0, 255.0, 511.0, 512.0};
  for (double v : orders) {
    const double sw = std::max(30.0, v);
    const double xs[] = {1e-3, 0.7, 5.0, sw * 0.5, sw - 1e-9, sw, sw + 1e-9, sw * 1.01, sw * 1.5, sw * 3.0, 1500.0};
    for (double x : xs) {
      const double got = log_bessel_i(v, x);
      const double want = oracle_log_bessel_i(v, x);
      INFO("v=" << v << " x=" << x);
      // relative error of I below 1e-10 is an absolute error of log I
      CHECK(std::abs(got - want) < 1e-10);
    }
  }
}

TEST_CASE("bessel_ratio agrees with log_bessel_i") {
  for (std::size_t m : {3u, 10u, 50u, 300u}) {
    for (double k : {0.01, 1.0, 50.0, 500.0}) {
      const double v = static_cast<double>(m) / 2.0;
      const double want = std::exp(oracle_log_bessel_i(v, k) - oracle_log_bessel_i(v - 1.0, k));
      CHECK(std::abs(bessel_ratio(m, k) - want) < 1e-10);
    }
  }
  CHECK(bessel_ratio(5, 0.0) == 0.0);
}

TEST_CASE("vMF KL against uniform") {
  CHECK(kl_vmf_uniform(50, 0.0) == 0.0);
  CHECK(kl_vmf_uniform(50, 1e-13) == 0.0);
  CHECK(kl_vmf_uniform(50, 80.0) > kl_vmf_uniform(50, 40.0));
  CHECK_THROWS_AS(kl_vmf_uniform(1, 1.0), DomainError);
  CHECK_THROWS_AS(kl_vmf_uniform(5, -1.0), DomainError);

  // strictly increasing on a grid
  for (std::size_t m : {3u, 25u, 50u, 100u}) {
    double prev = kl_vmf_uniform(m, 0.0);
    for (double k = 0.05; k <= 500.0; k += 0.05 + k * 0.01) {
      const double cur = kl_vmf_uniform(m, k);
      INFO("m=" << m << " kappa=" << k);
      CHECK(cur > prev);
      prev = cur;
    }
  }

  // non-negative on random draws
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t m = 2 + rng.below(200);
    const double k = std::exp(rng.uniform(-12.0, 7.0));
    const double kl = kl_vmf_uniform(m, k);
    CHECK(kl >= 0.0);
    CHECK(std::isfinite(kl));
  }
}

TEST_CASE("vMF KL equals the quadrature form and matches Monte Carlo") {
  // KL = log C + kappa A + log |S^{m-1}| with C from quadrature
  for (std::size_t m : {3u, 25u, 50u}) {
    for (double k : {0.5, 5.0, 40.0, 300.0}) {
      const double want = oracle_log_vmf_normalizer(m, k) + k * bessel_ratio(m, k) + log_sphere_area(m);
      CHECK(std::abs(kl_vmf_uniform(m, k) - want) < 1e-8 * std::max(1.0, want));
    }
  }
  Rng rng(2);
  const McEstimate mc = mc_kl_vmf(3, 1.0, 100000, rng);
  CHECK(std::abs(kl_vmf_uniform(3, 1.0) - mc.mean) < 3.0 * mc.stderr_);
}

TEST_CASE("vMF KL derivative") {
  for (std::size_t m : {2u, 3u, 50u}) {
    for (double k : {0.01, 0.3, 10.0, 400.0}) {
      const double h = k * 1e-5;
      const double fd = (kl_vmf_uniform(m, k + h) - kl_vmf_uniform(m, k - h)) / (2 * h);
      CHECK(kl_vmf_uniform_grad(m, k) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("Gaussian KL") {
  GaussParams zero;
  zero.mu.assign(50, 0.0);
  zero.var.assign(50, 1.0);
  CHECK(kl_gauss_std(zero) == 0.0);
  GaussParams two{{1.0, 0.0}, {1.0, 1.0}};
  CHECK(kl_gauss_std(two) == doctest::Approx(0.5).epsilon(1e-15));
  GaussParams bad{{0.0}, {0.0}};
  CHECK_THROWS_AS(kl_gauss_std(bad), DomainError);
  GaussParams mismatch{{0.0, 1.0}, {1.0}};
  CHECK_THROWS_AS(kl_gauss_std(mismatch), DimensionError);

  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 1 + rng.below(20);
    GaussParams g;
    for (std::size_t j = 0; j < d; ++j) {
      g.mu.push_back(rng.uniform(-3.0, 3.0));
      g.var.push_back(std::exp(rng.uniform(-5.0, 5.0)));
    }
    CHECK(kl_gauss_std(g) >= 0.0);
  }
  GaussParams q{{0.3, -1.2, 0.0}, {0.5, 2.0, 1.3}};
  const McEstimate mc = mc_kl_gauss(q, 100000, rng);
  CHECK(std::abs(kl_gauss_std(q) - mc.mean) < 3.0 * mc.stderr_);
}

TEST_CASE("vMF sampler") {
  Rng rng(4);
  SUBCASE("unit norm and reproducible") {
    for (std::size_t m : {2u, 3u, 17u, 50u}) {
      for (double k : {0.0, 1.0, 100.0, 5000.0}) {
        VmfParams p = unit_e1(m, k);
        // rotate the mean away from e1
        p.mu.assign(m, 1.0 / std::sqrt(static_cast<double>(m)));
        for (int i = 0; i < 200; ++i) CHECK(std::abs(norm(sample_vmf(p, rng)) - 1.0) < 1e-9);
        Rng a(9), b(9);
        CHECK(sample_vmf(p, a) == sample_vmf(p, b));
      }
    }
  }
  SUBCASE("uniform at kappa zero") {
    const VmfParams p = unit_e1(5, 0.0);
    std::vector<double> mean(5, 0.0);
    for (int i = 0; i < 100000; ++i) {
      const auto s = sample_vmf(p, rng);
      for (std::size_t j = 0; j < 5; ++j) mean[j] += s[j] / 100000.0;
    }
    CHECK(norm(mean) < 0.02);
  }
  SUBCASE("mean resultant length and direction") {
    const VmfParams p = unit_e1(3, 100.0);
    std::vector<double> mean(3, 0.0);
    for (int i = 0; i < 100000; ++i) {
      const auto s = sample_vmf(p, rng);
      for (std::size_t j = 0; j < 3; ++j) mean[j] += s[j] / 100000.0;
    }
    CHECK(std::abs(norm(mean) - bessel_ratio(3, 100.0)) < 0.005);

    VmfParams q;
    q.kappa = 50.0;
    for (int j = 0; j < 20; ++j) q.mu.push_back(rng.normal());
    const double n = norm(q.mu);
    for (double& v : q.mu) v /= n;
    std::vector<double> acc(20, 0.0);
    for (int i = 0; i < 100000; ++i) {
      const auto s = sample_vmf(q, rng);
      for (std::size_t j = 0; j < 20; ++j) acc[j] += s[j];
    }
    double dot = 0.0;
    for (std::size_t j = 0; j < 20; ++j) dot += acc[j] * q.mu[j];
    CHECK(dot / norm(acc) > 0.999);
  }
  SUBCASE("acceptance rate at m = 50") {
    for (double k : {0.0, 0.5, 5.0, 50.0, 150.0, 500.0}) {
      std::size_t tried = 0;
      const int draws = 5000;
      for (int i = 0; i < draws; ++i) tried += draw_vmf_noise(50, k, rng).proposals_tried;
      INFO("kappa=" << k);
      CHECK(static_cast<double>(draws) / static_cast<double>(tried) > 0.3);
    }
  }
  SUBCASE("validation") {
    VmfParams p = unit_e1(3, 1.0);
    p.mu[0] = 1.1;
    CHECK_THROWS_AS(sample_vmf(p, rng), DomainError);
    p = unit_e1(3, -1.0);
    CHECK_THROWS_AS(sample_vmf(p, rng), DomainError);
  }
}

TEST_CASE("Householder assembly maps e1 onto mu") {
  const std::vector<double> mu = {0.0, 0.6, 0.8};
  const std::vector<double> tangent = {1.0, 0.0};
  const auto s = vmf_assemble(mu, 1.0, tangent);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx(mu[i]).epsilon(1e-15));
  const auto t = vmf_assemble(mu, 0.0, tangent);
  double dot = 0.0;
  for (std::size_t i = 0; i < 3; ++i) dot += t[i] * mu[i];
  CHECK(std::abs(dot) < 1e-15);
  CHECK(std::abs(norm(t) - 1.0) < 1e-15);
}

TEST_CASE("omega derivative with the proposal held fixed") {
  for (std::size_t m : {3u, 50u}) {
    for (double k : {0.5, 20.0, 300.0}) {
      for (double prop : {0.1, 0.5, 0.93}) {
        const double h = k * 1e-6;
        const double fd = (vmf_omega(m, k + h, prop) - vmf_omega(m, k - h, prop)) / (2 * h);
        CHECK(vmf_omega_grad(m, k, prop) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("Gaussian sampler") {
  Rng rng(5);
  GaussParams tiny{{0.7, -2.0}, {1e-300, 1e-300}};
  const auto s = sample_gauss(tiny, rng);
  CHECK(s[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(-2.0).epsilon(1e-12));

  GaussParams std1{{0.0}, {1.0}};
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = sample_gauss(std1, rng)[0];
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.02);

  // d |mu + sigma eps|^2 / d mu = 2 (mu + sigma eps) with eps fixed
  Parameter mu("mu", {1, 3});
  mu.value = {0.2, -0.4, 1.0};
  Parameter lv("lv", {1, 3});
  lv.value = {0.1, -1.0, 0.5};
  const std::vector<double> eps = {0.3, -1.1, 0.8};
  const GradReport rep = check_gradients({&mu, &lv}, [&](Tape& t) {
    return vgvae::sum(vgvae::square(gauss_sample(t.param(mu), t.param(lv), eps)));
  });
  CHECK(rep.max_rel < 1e-8);
}

TEST_CASE("LatentNoise records and replays") {
  Rng rng(6);
  LatentNoise noise(rng);
  const VmfNoise a = noise.vmf(5, 3.0);
  const auto g = noise.gauss(4);
  CHECK(noise.draws() == 2);
  noise.replay();
  const VmfNoise b = noise.vmf(5, 30.0);
  CHECK(a.proposal == b.proposal);
  CHECK(a.tangent == b.tangent);
  CHECK(noise.gauss(4) == g);
  CHECK_THROWS_AS(noise.gauss(4), ContractError);
  noise.replay();
  CHECK_THROWS_AS(noise.gauss(5), ContractError);
}
