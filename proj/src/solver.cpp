#include "mindx/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mindx/median.hpp"
#include "mindx/parallel.hpp"
#include "mindx/vst.hpp"

namespace mindx {

SolverParams SolverParams::defaults(ImpulseType type, const RegularizerConfig& reg) {
  SolverParams p;
  p.reg = reg;
  p.outer_iters = type == ImpulseType::SaltPepper ? 1 : 10;
  p.inner_iters = 500;
  return p;
}

void SolverParams::validate(std::size_t pixels) const {
  if (outer_iters < 1) throw std::invalid_argument("SolverParams: outer_iters must be >= 1");
  if (inner_iters < 1) throw std::invalid_argument("SolverParams: inner_iters must be >= 1");
  if (mu && *mu > pixels) throw std::invalid_argument("SolverParams: mu exceeds pixel count");
  reg.validate();
}

double x_step_objective(const Image& w, const Image& y_tilde, const PixelMask& omega, double lambda1) {
  const double data = deterministic_sum(w.size(), [&](std::size_t i) {
    if (!omega[i]) return 0.0;
    const double d = w[i] - y_tilde[i];
    return d * d;
  });
  return data + (lambda1 > 0.0 ? lambda1 * total_variation(w) : 0.0);
}

double outlier_objective(const Image& x, const Image& y_tilde, const Image& z, double lambda1) {
  const double data = deterministic_sum(x.size(), [&](std::size_t i) {
    const double d = x[i] - y_tilde[i] + z[i];
    return d * d;
  });
  return data + (lambda1 > 0.0 ? lambda1 * total_variation(x) : 0.0);
}

namespace {

// Indices of the mu largest |v_i|, ties to the lower index.
std::vector<std::size_t> top_magnitude(std::span<const double> v, std::size_t mu) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  mu = std::min(mu, v.size());
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::fabs(v[a]);
    const double mb = std::fabs(v[b]);
    return ma != mb ? ma > mb : a < b;
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(mu), idx.end(), before);
  idx.resize(mu);
  return idx;
}

}  // namespace

Image keep_largest(const Image& field, std::size_t mu) {
  Image out(field.width(), field.height(), field.peak());
  if (mu == 0) return out;
  for (std::size_t i : top_magnitude(field.pixels(), mu)) out[i] = field[i];
  return out;
}

Image z_step(const Image& y_tilde, const Image& x_tilde, std::size_t mu, bool literal_abs) {
  if (!y_tilde.same_shape(x_tilde)) throw std::invalid_argument("z_step: dimension mismatch");
  if (mu > y_tilde.size()) throw std::invalid_argument("z_step: mu exceeds pixel count");
  Image q(y_tilde.width(), y_tilde.height(), y_tilde.peak());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = y_tilde[i] - x_tilde[i];
  Image z = keep_largest(q, mu);
  if (literal_abs) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::fabs(z[i]);
  }
  return z;
}

PixelMask noise_free_mask(const Image& z) {
  PixelMask m(z.width(), z.height());
  for (std::size_t i = 0; i < z.size(); ++i) m.set(i, z[i] == 0.0);
  return m;
}

Image cp_x_step(const Image& y_tilde, const PixelMask& omega, const Image& x_init,
                const RegularizerConfig& reg, int iterations, const CpOptions& options) {
  if (!y_tilde.same_shape(x_init) || !omega.same_shape(y_tilde)) {
    throw std::invalid_argument("cp_x_step: dimension mismatch");
  }
  if (iterations < 1) throw std::invalid_argument("cp_x_step: iterations must be >= 1");
  reg.validate();

  const std::size_t n = y_tilde.size();
  const double rho = reg.rho;
  const double tau = reg.tau;
  const double theta = reg.theta;
  const bool with_id = reg.uses_denoiser();

  Image w = x_init;
  DualVariable u;
  u.grad_part = grad(w);
  if (with_id) u.id_part = w;
  Image s = options.variant == CpVariant::Standard ? w : Image(w.width(), w.height(), w.peak());

  for (int k = 0; k < iterations; ++k) {
    // u <- prox_{rho g*}(u + rho K s)
    const GradField ks = grad(s);
    DualVariable t;
    t.grad_part = GradField(ks.width, ks.height);
    parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t ii) {
      const auto i = static_cast<std::size_t>(ii);
      t.grad_part.gx[i] = u.grad_part.gx[i] + rho * ks.gx[i];
      t.grad_part.gy[i] = u.grad_part.gy[i] + rho * ks.gy[i];
    });
    if (with_id) {
      Image tid = *u.id_part;
      for (std::size_t i = 0; i < n; ++i) tid[i] += rho * s[i];
      t.id_part = std::move(tid);
    }
    u = prox_conjugate(t, reg);

    // w <- prox_{tau f}(w - tau K^T u), K^T u = -div(u_grad) + u_id
    const Image d = div(u.grad_part, w.peak());
    Image v = w;
    parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t ii) {
      const auto i = static_cast<std::size_t>(ii);
      double ktu = -d[i];
      if (with_id) ktu += (*u.id_part)[i];
      v[i] = w[i] - tau * ktu;
    });
    Image w_next = prox_data(v, y_tilde, omega, tau);

    if (options.variant == CpVariant::Standard) {
      parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t ii) {
        const auto i = static_cast<std::size_t>(ii);
        s[i] = w_next[i] + theta * (w_next[i] - w[i]);
      });
    } else {
      parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t ii) {
        const auto i = static_cast<std::size_t>(ii);
        s[i] = s[i] + theta * (w_next[i] - w[i]);
      });
    }

    bool stop = false;
    if (options.early_exit_tol > 0.0) {
      const double diff = deterministic_sum(n, [&](std::size_t i) {
        const double e = w_next[i] - w[i];
        return e * e;
      });
      const double base = deterministic_sum(n, [&](std::size_t i) { return w_next[i] * w_next[i]; });
      stop = std::sqrt(diff) <= options.early_exit_tol * std::max(std::sqrt(base), 1e-300);
    }
    w = std::move(w_next);
    if (options.objective_trace) {
      options.objective_trace->push_back(x_step_objective(w, y_tilde, omega, reg.lambda1));
    }
    if (stop) break;
  }
  return w;
}

AopResult aop_loop(const Image& y_tilde, const Image& z0, const Image& x_init,
                   const SolverParams& params, std::size_t mu, const Image* clean_tilde) {
  params.validate(y_tilde.size());
  if (!z0.same_shape(y_tilde) || !x_init.same_shape(y_tilde)) {
    throw std::invalid_argument("aop_loop: dimension mismatch");
  }
  if (mu > y_tilde.size()) throw std::invalid_argument("aop_loop: mu exceeds pixel count");

  AopResult result{x_init, keep_largest(z0, mu), PixelMask(y_tilde.width(), y_tilde.height()),
                   {}, {}, {}, {}};
  CpOptions cp;
  cp.variant = params.cp_variant;
  cp.early_exit_tol = params.early_exit_tol;
  cp.objective_trace = params.convergence_log ? &result.inner_trace : nullptr;

  for (int t = 0; t < params.outer_iters; ++t) {
    result.omega = noise_free_mask(result.z);
    result.x_tilde = cp_x_step(y_tilde, result.omega, result.x_tilde, params.reg,
                               params.inner_iters, cp);
    result.z = z_step(y_tilde, result.x_tilde, mu, params.literal_abs_z);
    result.support_sizes.push_back(result.z.size() - noise_free_mask(result.z).count());
    result.objective_trace.push_back(
        outlier_objective(result.x_tilde, y_tilde, result.z, params.reg.lambda1));
    if (clean_tilde) {
      result.psnr_trace.push_back(psnr(*clean_tilde, result.x_tilde, clean_tilde->peak()));
    }
  }
  result.omega = noise_free_mask(result.z);
  return result;
}

std::size_t estimate_mu(const Image& z0, ImpulseType /*impulse_type*/,
                        std::optional<std::size_t> override_mu, double eps) {
  if (override_mu) return *override_mu;
  return static_cast<std::size_t>(
      std::count_if(z0.pixels().begin(), z0.pixels().end(), [&](double v) { return v > eps; }));
}

MindxResult mindx_denoise(const Image& y, double sigma, const SolverParams& params,
                          ImpulseType impulse_type, const MindxOptions& options) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("mindx_denoise: sigma must be >= 0");
  params.validate(y.size());

  const Image y_tilde = gat_forward(y, sigma);

  Image z0 = y_tilde;
  Image x0 = y_tilde;
  if (params.detection == DetectionDomain::Stabilized) {
    x0 = impulse_filter(y_tilde, impulse_type);
    for (std::size_t i = 0; i < z0.size(); ++i) z0[i] = std::fabs(x0[i] - y_tilde[i]);
  } else {
    const Image filtered = impulse_filter(y, impulse_type);
    for (std::size_t i = 0; i < z0.size(); ++i) z0[i] = std::fabs(filtered[i] - y[i]);
    x0 = gat_forward(filtered, sigma);
  }

  const std::size_t mu = estimate_mu(z0, impulse_type, params.mu);

  std::optional<Image> clean_tilde;
  if (options.clean) clean_tilde = gat_forward(*options.clean, sigma);

  AopResult aop = aop_loop(y_tilde, z0, x0, params, mu, clean_tilde ? &*clean_tilde : nullptr);

  const GatLut& lut = cached_lut(sigma, options.lut_range_factor * y.peak(), options.lut_cache_dir);
  Image estimate = igat_exact_unbiased(aop.x_tilde, lut, y.peak());
  return {std::move(estimate), mu, std::move(aop)};
}

}  // namespace mindx
