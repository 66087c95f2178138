#include "mindx/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mindx/parallel.hpp"

namespace mindx {

namespace {
constexpr double kStepSlack = 1e-12;
}

RegularizerConfig RegularizerConfig::make(double lambda1, double lambda2,
                                          std::optional<DenoiserSpec> denoiser,
                                          std::optional<double> rho, double theta,
                                          std::optional<double> tau) {
  RegularizerConfig c;
  c.lambda1 = lambda1;
  c.lambda2 = lambda2;
  c.denoiser = std::move(denoiser);
  c.theta = theta;
  const double norm_sq = operator_norm_sq(c);
  c.rho = rho.value_or(1.0 / std::sqrt(norm_sq));
  c.tau = tau.value_or(1.0 / (c.rho * norm_sq));
  c.validate();
  return c;
}

RegularizerConfig RegularizerConfig::large_rho_steps(double lambda1, double lambda2,
                                                     std::optional<DenoiserSpec> denoiser) {
  return make(lambda1, lambda2, std::move(denoiser), kLargeRho, 1.0);
}

void RegularizerConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("RegularizerConfig: lambdas must be >= 0");
  }
  if (!(rho > 0.0) || !(tau > 0.0)) throw std::invalid_argument("RegularizerConfig: rho, tau must be > 0");
  if (lambda2 > 0.0 && !denoiser) {
    throw std::invalid_argument("RegularizerConfig: lambda2 > 0 requires a denoiser");
  }
  if (denoiser) denoiser->validate();
  if (tau * rho * operator_norm_sq(*this) > 1.0 + kStepSlack) {
    throw std::invalid_argument("RegularizerConfig: step condition tau*rho*|K|^2 <= 1 violated");
  }
}

GradField grad(const Image& img) {
  const int w = img.width();
  const int h = img.height();
  GradField g(w, h);
  parallel_for(h, [&](std::ptrdiff_t r) {
    const int row = static_cast<int>(r);
    for (int col = 0; col < w; ++col) {
      const std::size_t i = img.index(row, col);
      const double x = img[i];
      g.gx[i] = col + 1 < w ? img[i + 1] - x : 0.0;
      g.gy[i] = row + 1 < h ? img[i + static_cast<std::size_t>(w)] - x : 0.0;
    }
  });
  return g;
}

Image div(const GradField& field, double peak) {
  const int w = field.width;
  const int h = field.height;
  Image out(w, h, peak);
  parallel_for(h, [&](std::ptrdiff_t r) {
    const int row = static_cast<int>(r);
    for (int col = 0; col < w; ++col) {
      const std::size_t i = out.index(row, col);
      double dx = 0.0;
      if (w > 1) {
        if (col == 0) dx = field.gx[i];
        else if (col == w - 1) dx = -field.gx[i - 1];
        else dx = field.gx[i] - field.gx[i - 1];
      }
      double dy = 0.0;
      if (h > 1) {
        const std::size_t up = i - static_cast<std::size_t>(w);
        if (row == 0) dy = field.gy[i];
        else if (row == h - 1) dy = -field.gy[up];
        else dy = field.gy[i] - field.gy[up];
      }
      out[i] = dx + dy;
    }
  });
  return out;
}

double operator_norm_sq(const RegularizerConfig& config) {
  return config.uses_denoiser() ? 9.0 : 8.0;
}

double operator_norm_sq_power(int width, int height, bool with_identity, int iterations) {
  Image v(width, height, 1.0);
  // Deterministic non-constant start; constants are in the kernel of grad.
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::sin(1.0 + 12.9898 * static_cast<double>(i)) + ((i % 2) ? 0.5 : -0.5);
  }
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double norm = std::sqrt(deterministic_sum(v.size(), [&](std::size_t i) { return v[i] * v[i]; }));
    if (norm == 0.0) return with_identity ? 1.0 : 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] /= norm;
    Image kv = div(grad(v));
    // K^T K v = -div(grad v) (+ v)
    for (std::size_t i = 0; i < v.size(); ++i) kv[i] = -kv[i] + (with_identity ? v[i] : 0.0);
    lambda = deterministic_sum(v.size(), [&](std::size_t i) { return v[i] * kv[i]; });
    v = std::move(kv);
  }
  return lambda;
}

GradField prox_tv_dual_shrink(const GradField& t, double lambda1, double rho) {
  if (!(lambda1 >= 0.0) || !(rho > 0.0)) {
    throw std::invalid_argument("prox_tv_dual_shrink: need lambda1 >= 0, rho > 0");
  }
  const double a = lambda1 * rho;
  GradField out(t.width, t.height);
  parallel_for(static_cast<std::ptrdiff_t>(t.size()), [&](std::ptrdiff_t ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double norm = std::hypot(t.gx[i], t.gy[i]);
    const double denom = std::max(a, norm);
    const double factor = denom > 0.0 ? a / denom : 0.0;
    out.gx[i] = t.gx[i] - factor * t.gx[i];
    out.gy[i] = t.gy[i] - factor * t.gy[i];
  });
  return out;
}

Image prox_denoiser(const Image& t, const DenoiserSpec& denoiser) {
  return denoise(t, denoiser);
}

std::vector<double> prox_conjugate(
    std::span<const double> t, double rho,
    const std::function<std::vector<double>(std::span<const double>, double)>& prox) {
  if (!(rho > 0.0)) throw std::invalid_argument("prox_conjugate: rho must be > 0");
  std::vector<double> scaled(t.begin(), t.end());
  for (auto& v : scaled) v /= rho;
  const std::vector<double> p = prox(scaled, 1.0 / rho);
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i] - rho * p[i];
  return out;
}

DualVariable prox_conjugate(const DualVariable& t, const RegularizerConfig& config) {
  const double rho = config.rho;
  DualVariable out;

  // TV branch: t - rho * shrink(t / rho; threshold lambda1 / rho).
  GradField scaled(t.grad_part.width, t.grad_part.height);
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    scaled.gx[i] = t.grad_part.gx[i] / rho;
    scaled.gy[i] = t.grad_part.gy[i] / rho;
  }
  const GradField inner = prox_tv_dual_shrink(scaled, config.lambda1, 1.0 / rho);
  out.grad_part = GradField(scaled.width, scaled.height);
  parallel_for(static_cast<std::ptrdiff_t>(scaled.size()), [&](std::ptrdiff_t ii) {
    const auto i = static_cast<std::size_t>(ii);
    out.grad_part.gx[i] = t.grad_part.gx[i] - rho * inner.gx[i];
    out.grad_part.gy[i] = t.grad_part.gy[i] - rho * inner.gy[i];
  });

  if (config.uses_denoiser()) {
    if (!t.id_part) throw std::invalid_argument("prox_conjugate: missing identity dual part");
    const Image& tid = *t.id_part;
    Image scaled_id = tid;
    for (std::size_t i = 0; i < scaled_id.size(); ++i) scaled_id[i] /= rho;
    DenoiserSpec spec = *config.denoiser;
    if (config.strength_mode == DenoiserStrengthMode::StepScaled) {
      spec.strength *= std::sqrt(config.lambda2 / rho);
    }
    const Image den = prox_denoiser(scaled_id, spec);
    Image id_out = tid;
    for (std::size_t i = 0; i < id_out.size(); ++i) id_out[i] = tid[i] - rho * den[i];
    out.id_part = std::move(id_out);
  }
  return out;
}

Image prox_data(const Image& t, const Image& y_tilde, const PixelMask& mask, double tau) {
  if (!t.same_shape(y_tilde) || !mask.same_shape(t)) {
    throw std::invalid_argument("prox_data: dimension mismatch");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("prox_data: tau must be > 0");
  const double a = 2.0 * tau / (2.0 * tau + 1.0);
  const double b = 1.0 / (2.0 * tau + 1.0);
  Image out = t;
  parallel_for(static_cast<std::ptrdiff_t>(t.size()), [&](std::ptrdiff_t ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (mask[i]) out[i] = a * y_tilde[i] + b * t[i];
  });
  return out;
}

double total_variation(const Image& img) {
  const GradField g = grad(img);
  return deterministic_sum(g.size(), [&](std::size_t i) { return std::hypot(g.gx[i], g.gy[i]); });
}

}  // namespace mindx
