#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mindx/operators.hpp"
#include "oracles.hpp"

using namespace mindx;

namespace {

GradField random_field(int w, int h, double scale, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, scale);
  GradField f(w, h);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.gx[i] = d(gen);
    f.gy[i] = d(gen);
  }
  return f;
}

double dot(const GradField& a, const GradField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.gx[i] * b.gx[i] + a.gy[i] * b.gy[i];
  return s;
}

}  // namespace

TEST_CASE("gradient on a small image") {
  const Image img(3, 2, 1.0, std::vector<double>{1, 2, 4, 0, 5, 5});
  const GradField g = grad(img);
  CHECK(g.gx == std::vector<double>{1, 2, 0, 5, 0, 0});
  CHECK(g.gy == std::vector<double>{-1, 3, 1, 0, 0, 0});
  const Image one(1, 1, 1.0, 7.0);
  CHECK(grad(one).gx[0] == 0.0);
  CHECK(div(grad(one))[0] == 0.0);
}

TEST_CASE("grad and div match dense matrices") {
  for (auto [w, h] : {std::pair{1, 4}, {4, 1}, {2, 2}, {3, 5}, {6, 4}}) {
    CAPTURE(w);
    CAPTURE(h);
    const oracle::DenseGrad G(w, h);
    const Image x = testutil::random_image(w, h, -1.0, 1.0, 17);
    const auto gx = G.apply(std::vector<double>(x.pixels().begin(), x.pixels().end()));
    const GradField g = grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g.gx[i] == doctest::Approx(gx[i]).epsilon(1e-14));
      CHECK(g.gy[i] == doctest::Approx(gx[g.size() + i]).epsilon(1e-14));
    }
    const GradField u = random_field(w, h, 1.0, 23);
    std::vector<double> flat(u.gx);
    flat.insert(flat.end(), u.gy.begin(), u.gy.end());
    const auto gt = G.apply_transpose(flat);
    const Image d = div(u);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(-gt[i]).epsilon(1e-14));
  }
}

TEST_CASE("adjoint identity on random instances") {
  for (int trial = 0; trial < 20; ++trial) {
    for (auto [w, h] : {std::pair{2, 2}, {3, 5}, {17, 9}, {64, 64}}) {
      const Image x = testutil::random_image(w, h, -5.0, 5.0, 1000 + trial);
      const GradField u = random_field(w, h, 3.0, 2000 + trial);
      const double lhs = dot(grad(x), u);
      double rhs = 0.0;
      const Image d = div(u);
      for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * d[i];
      CHECK(std::abs(lhs + rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs) + 1.0));
    }
  }
}

TEST_CASE("div keeps the requested peak") { CHECK(div(GradField(3, 3), 7.0).peak() == 7.0); }

TEST_CASE("operator norm") {
  CHECK(operator_norm_sq(RegularizerConfig::make(1.0)) == 8.0);
  DenoiserSpec d;
  CHECK(operator_norm_sq(RegularizerConfig::make(1.0, 1.0, d)) == 9.0);
  const double small = operator_norm_sq_power(5, 4, false);
  CHECK(small <= 8.0);
  CHECK(small > 6.0);
  CHECK(operator_norm_sq_power(64, 64, false, 2000) == doctest::Approx(8.0).epsilon(2e-3));
  CHECK(operator_norm_sq_power(32, 32, true, 1000) == doctest::Approx(operator_norm_sq_power(32, 32, false, 1000) + 1.0));
  CHECK(operator_norm_sq_power(1, 1, false) == 0.0);
}

TEST_CASE("regularizer configuration") {
  const auto c = RegularizerConfig::make(1.5);
  CHECK(c.rho == doctest::Approx(1.0 / std::sqrt(8.0)));
  CHECK(c.tau * c.rho * 8.0 == doctest::Approx(1.0));
  const auto p = RegularizerConfig::large_rho_steps(1.5);
  CHECK(p.rho == 500.0);
  CHECK(p.tau == doctest::Approx(1.0 / 4000.0));
  CHECK_THROWS_AS(RegularizerConfig::make(1.0, 0.0, std::nullopt, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RegularizerConfig::make(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RegularizerConfig::make(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(RegularizerConfig::make(1.0, 0.0, std::nullopt, 0.0), std::invalid_argument);
}

TEST_CASE("total variation") {
  CHECK(total_variation(Image(5, 5, 1.0, 3.0)) == 0.0);
  Image step(4, 3, 1.0);
  for (int r = 0; r < 3; ++r) step.at(r, 2) = step.at(r, 3) = 1.0;
  CHECK(total_variation(step) == doctest::Approx(3.0));
  Image corner(2, 2, 1.0, std::vector<double>{0, 1, 1, 1});
  CHECK(total_variation(corner) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("TV shrinkage is group soft thresholding") {
  const GradField t = random_field(9, 7, 2.0, 5);
  for (double lambda : {0.0, 0.3, 1.5, 10.0}) {
    const double rho = 0.7;
    const GradField s = prox_tv_dual_shrink(t, lambda, rho);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double n = std::hypot(t.gx[i], t.gy[i]);
      const double keep = std::max(0.0, 1.0 - lambda * rho / n);
      CHECK(s.gx[i] == doctest::Approx(keep * t.gx[i]).epsilon(1e-13));
      CHECK(s.gy[i] == doctest::Approx(keep * t.gy[i]).epsilon(1e-13));
    }
  }
  GradField zero(2, 2);
  CHECK(prox_tv_dual_shrink(zero, 1.0, 1.0).gx == zero.gx);
  CHECK(prox_tv_dual_shrink(zero, 0.0, 1.0).gx == zero.gx);
  CHECK_THROWS_AS(prox_tv_dual_shrink(zero, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_tv_dual_shrink(zero, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("firm nonexpansiveness of the shrinkage") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> param(0.01, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const GradField a = random_field(3, 3, 2.0, 10 * k + 1);
    const GradField b = random_field(3, 3, 2.0, 10 * k + 2);
    const double lambda = param(gen), rho = param(gen);
    const GradField pa = prox_tv_dual_shrink(a, lambda, rho);
    const GradField pb = prox_tv_dual_shrink(b, lambda, rho);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double dx = pa.gx[i] - pb.gx[i], dy = pa.gy[i] - pb.gy[i];
      lhs += dx * dx + dy * dy;
      rhs += dx * (a.gx[i] - b.gx[i]) + dy * (a.gy[i] - b.gy[i]);
    }
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("conjugate prox of the TV term is the ball projection") {
  for (double rho : {0.1, 0.35, 500.0}) {
    const GradField t = random_field(8, 6, 3.0, 9);
    const auto cfg = RegularizerConfig::make(1.5, 0.0, std::nullopt, rho);
    const DualVariable out = prox_conjugate(DualVariable{t, std::nullopt}, cfg);
    std::vector<double> a = t.gx, b = t.gy;
    oracle::ball_project(a, b, 1.5);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(out.grad_part.gx[i] == doctest::Approx(a[i]).epsilon(1e-12));
      CHECK(out.grad_part.gy[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
    CHECK_FALSE(out.id_part.has_value());
  }
}

TEST_CASE("Moreau reconstruction identity") {
  const GradField t = random_field(10, 10, 2.0, 31);
  for (double rho : {0.2, 1.0, 40.0}) {
    const auto cfg = RegularizerConfig::make(0.8, 0.0, std::nullopt, rho);
    const DualVariable conj = prox_conjugate(DualVariable{t, std::nullopt}, cfg);
    GradField scaled = t;
    for (std::size_t i = 0; i < t.size(); ++i) {
      scaled.gx[i] /= rho;
      scaled.gy[i] /= rho;
    }
    const GradField primal = prox_tv_dual_shrink(scaled, 0.8, 1.0 / rho);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(std::abs(conj.grad_part.gx[i] + rho * primal.gx[i] - t.gx[i]) <= 1e-12 * (1.0 + std::abs(t.gx[i])));
      CHECK(std::abs(conj.grad_part.gy[i] + rho * primal.gy[i] - t.gy[i]) <= 1e-12 * (1.0 + std::abs(t.gy[i])));
    }
  }
}

TEST_CASE("generic conjugate prox against a closed form") {
  // f = |.|^2 / 2 is self-conjugate: prox_{rho f*}(t) = t / (1 + rho).
  const std::vector<double> t{1.0, -2.0, 0.5, 8.0};
  auto prox = [](std::span<const double> v, double gamma) {
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x /= 1.0 + gamma;
    return out;
  };
  for (double rho : {0.1, 1.0, 7.0}) {
    const auto out = prox_conjugate(t, rho, prox);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(out[i] == doctest::Approx(t[i] / (1.0 + rho)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(prox_conjugate(t, 0.0, prox), std::invalid_argument);
}

TEST_CASE("denoiser branch of the conjugate prox") {
  DenoiserSpec blur{DenoiserKind::GaussianBlur, 1.0};
  const auto cfg = RegularizerConfig::make(1.0, 0.5, blur, 0.4);
  const Image tid = testutil::random_image(12, 12, -1.0, 1.0, 4);
  const DualVariable out = prox_conjugate(DualVariable{GradField(12, 12), tid}, cfg);
  REQUIRE(out.id_part.has_value());
  Image scaled = tid;
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] /= 0.4;
  const Image den = denoise(scaled, blur);
  for (std::size_t i = 0; i < tid.size(); ++i) {
    CHECK((*out.id_part)[i] + 0.4 * den[i] == doctest::Approx(tid[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(prox_conjugate(DualVariable{GradField(12, 12), std::nullopt}, cfg), std::invalid_argument);

  // Identity denoiser: the conjugate branch collapses to zero.
  const auto ident = RegularizerConfig::make(1.0, 0.5, DenoiserSpec{DenoiserKind::Identity, 1.0}, 0.4);
  const DualVariable z = prox_conjugate(DualVariable{GradField(12, 12), tid}, ident);
  for (double v : z.id_part->pixels()) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("data prox first-order condition") {
  const Image y = testutil::random_image(13, 11, 0.0, 10.0, 1);
  const Image t = testutil::random_image(13, 11, -5.0, 15.0, 2);
  const PixelMask mask = testutil::random_mask(13, 11, 0.6, 3);
  for (double tau : {1e-4, 0.35, 1.0, 250.0}) {
    const Image w = prox_data(t, y, mask, tau);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (mask[i]) {
        // gradient of tau (w - y)^2 + (w - t)^2 / 2
        CHECK(std::abs(2.0 * tau * (w[i] - y[i]) + (w[i] - t[i])) <= 1e-10);
      } else {
        CHECK(w[i] == t[i]);
      }
    }
  }
  CHECK_THROWS_AS(prox_data(t, y, mask, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_data(t, Image(11, 13, 1.0), mask, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_data(t, y, PixelMask(2, 2), 1.0), std::invalid_argument);
}
