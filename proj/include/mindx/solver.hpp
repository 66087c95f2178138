#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "mindx/image.hpp"
#include "mindx/noise.hpp"
#include "mindx/operators.hpp"

namespace mindx {

/// Initialization and extrapolation of the primal-dual inner loop.
enum class CpVariant {
  // s(0) = w(0), s(k+1) = w(k+1) + theta (w(k+1) - w(k)); solves the x-step problem.
  Standard,
  // s(0) = 0, s(k+1) = s(k) + theta (w(k+1) - w(k)), literally as in the
  // published algorithm listing. Its fixed point regularizes w - w(0)
  // instead of w; kept for comparison.
  Printed,
};

/// Image the impulse detector runs on.
enum class DetectionDomain { Stabilized, Raw };

struct SolverParams {
  std::optional<std::size_t> mu;  // outlier budget; estimated from z0 when empty
  int outer_iters = 1;
  int inner_iters = 500;
  RegularizerConfig reg;
  bool convergence_log = false;  // record the x-step objective every inner iteration
  CpVariant cp_variant = CpVariant::Standard;
  bool literal_abs_z = false;    // store |q_i| instead of q_i on the support
  double early_exit_tol = 0.0;   // relative primal change; 0 disables
  DetectionDomain detection = DetectionDomain::Stabilized;

  /// Outer iterations per impulse type: 1 salt-and-pepper, 10 random-valued.
  static SolverParams defaults(ImpulseType type, const RegularizerConfig& reg);
  void validate(std::size_t pixels) const;
};

struct CpOptions {
  CpVariant variant = CpVariant::Standard;
  double early_exit_tol = 0.0;
  std::vector<double>* objective_trace = nullptr;
};

/// sum_{i in omega} (w_i - y_i)^2 + lambda1 TV(w). The implicit denoiser
/// prior has no closed form and is not included.
double x_step_objective(const Image& w, const Image& y_tilde, const PixelMask& omega, double lambda1);

/// |x - y + z|^2 + lambda1 TV(x).
double outlier_objective(const Image& x, const Image& y_tilde, const Image& z, double lambda1);

/// Best mu-sparse approximation of q = y_tilde - x_tilde: keeps the mu
/// largest |q_i| (ties: lower index first), zero elsewhere.
Image z_step(const Image& y_tilde, const Image& x_tilde, std::size_t mu, bool literal_abs = false);

/// Keeps the mu largest-magnitude entries of a field, zero elsewhere.
Image keep_largest(const Image& field, std::size_t mu);

/// {i : z_i == 0}.
PixelMask noise_free_mask(const Image& z);

/// K primal-dual iterations on the masked least-squares + prior problem.
Image cp_x_step(const Image& y_tilde, const PixelMask& omega, const Image& x_init,
                const RegularizerConfig& reg, int iterations, const CpOptions& options = {});

struct AopResult {
  Image x_tilde;
  Image z;
  PixelMask omega;
  std::vector<double> objective_trace;  // outlier objective after each outer iteration
  std::vector<double> psnr_trace;       // vs clean_tilde, when given
  std::vector<double> inner_trace;      // x-step objective, when convergence_log
  std::vector<std::size_t> support_sizes;
};

/// Alternating outlier pursuit: Omega update, x-step, z-step, repeated
/// outer_iters times. z0 is truncated to its mu largest entries first.
AopResult aop_loop(const Image& y_tilde, const Image& z0, const Image& x_init,
                   const SolverParams& params, std::size_t mu,
                   const Image* clean_tilde = nullptr);

/// Outlier count estimate: entries of z0 above eps, unless overridden.
std::size_t estimate_mu(const Image& z0, ImpulseType impulse_type,
                        std::optional<std::size_t> override_mu, double eps = 1e-6);

struct MindxOptions {
  const Image* clean = nullptr;               // enables the PSNR trace
  std::filesystem::path lut_cache_dir;        // empty: memory cache only
  double lut_range_factor = 1.5;              // LUT x_max = factor * peak
};

struct MindxResult {
  Image estimate;
  std::size_t mu = 0;
  AopResult diagnostics;
};

/// Full pipeline: stabilize, detect impulses, alternate z/x steps, invert
/// with the exact unbiased table.
MindxResult mindx_denoise(const Image& y, double sigma, const SolverParams& params,
                          ImpulseType impulse_type, const MindxOptions& options = {});

}  // namespace mindx
