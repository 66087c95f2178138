#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mindx/denoiser.hpp"
#include "mindx/image.hpp"

namespace mindx {

/// Forward-difference gradient of an image. Neumann boundary: gx is 0 on
/// the last column and gy on the last row.
struct GradField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;

  GradField() = default;
  GradField(int w, int h)
      : width(w), height(h),
        gx(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0),
        gy(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0) {}

  std::size_t size() const { return gx.size(); }
};

/// Dual variable of the stacked operator K = [grad; I]. The identity part
/// only exists when the denoiser prior is active.
struct DualVariable {
  GradField grad_part;
  std::optional<Image> id_part;
};

/// How the plug-in denoiser strength is set inside the conjugate prox.
enum class DenoiserStrengthMode {
  Fixed,      // spec.strength as configured
  StepScaled  // spec.strength * sqrt(lambda2 / rho)
};

inline constexpr double kDefaultLambda = 1.5;
inline constexpr double kLargeRho = 500.0;

/// Weights of the TV and denoiser priors plus the primal-dual steps.
/// Construction through make() enforces tau * rho * |K|^2 <= 1.
struct RegularizerConfig {
  double lambda1 = kDefaultLambda;
  double lambda2 = 0.0;
  std::optional<DenoiserSpec> denoiser;
  DenoiserStrengthMode strength_mode = DenoiserStrengthMode::Fixed;
  double rho = 0.35355339059327373;  // 1/sqrt(8)
  double tau = 0.35355339059327373;
  double theta = 1.0;

  /// rho defaults to 1/|K| and tau to 1/(rho |K|^2), using the analytic
  /// bound for |K|^2.
  static RegularizerConfig make(double lambda1, double lambda2 = 0.0,
                                std::optional<DenoiserSpec> denoiser = std::nullopt,
                                std::optional<double> rho = std::nullopt, double theta = 1.0,
                                std::optional<double> tau = std::nullopt);
  /// rho = 500, theta = 1, tau = 1/(rho |K|^2).
  static RegularizerConfig large_rho_steps(double lambda1, double lambda2 = 0.0,
                                           std::optional<DenoiserSpec> denoiser = std::nullopt);
  bool uses_denoiser() const { return lambda2 > 0.0; }
  void validate() const;
};

GradField grad(const Image& img);

/// Negative adjoint of grad: <grad x, u> = -<x, div u>.
Image div(const GradField& field, double peak = 1.0);

/// Analytic bound on |K|^2: 8 for K = grad, 9 for K = [grad; I].
double operator_norm_sq(const RegularizerConfig& config);

/// Largest eigenvalue of K^T K on a width x height grid by power iteration.
double operator_norm_sq_power(int width, int height, bool with_identity, int iterations = 500);

/// Pointwise t_i - a t_i / max(a, |t_i|) with a = lambda1 * rho.
GradField prox_tv_dual_shrink(const GradField& t, double lambda1, double rho);

Image prox_denoiser(const Image& t, const DenoiserSpec& denoiser);

/// Generic Moreau route: prox_{rho g*}(t) = t - rho prox_{g/rho}(t / rho),
/// where prox(v, gamma) evaluates prox_{gamma g}(v).
std::vector<double> prox_conjugate(
    std::span<const double> t, double rho,
    const std::function<std::vector<double>(std::span<const double>, double)>& prox);

/// Branch-wise conjugate prox for the stacked dual of g = lambda1 TV + lambda2 h.
DualVariable prox_conjugate(const DualVariable& t, const RegularizerConfig& config);

/// Prox of tau * sum_{i in mask} (w_i - y_i)^2; pixels outside the mask pass through.
Image prox_data(const Image& t, const Image& y_tilde, const PixelMask& mask, double tau);

/// sum_i |grad x_i|_2 (isotropic TV).
double total_variation(const Image& img);

}  // namespace mindx
