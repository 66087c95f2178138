#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mindx/denoiser.hpp"
#include "mindx/image.hpp"
#include "mindx/noise.hpp"
#include "mindx/solver.hpp"

namespace mindx {

enum class ExperimentKind { PeakSweep, GaussRatioSweep, ImpulseSweep, Single };
enum class Method { Noisy, AMF, ACWMF, GatDenoise, MindXTV, MindXTVPlug };

std::string_view to_string(ExperimentKind k);
std::string_view to_string(Method m);
ExperimentKind parse_experiment_kind(std::string_view s);
Method parse_method(std::string_view s);

/// Name of the swept parameter in tables: peak, sigma_over_sqrt_peak,
/// impulse_ratio, or none.
std::string_view grid_param_name(ExperimentKind k);

/// Parameters held fixed while the grid varies.
struct FixedParams {
  double peak = 20.0;
  std::optional<double> sigma;  // empty: 0.1 * peak
  double impulse_ratio = 0.5;
  ImpulseType impulse_type = ImpulseType::SaltPepper;
  bool exact_count = false;
};

/// Solver knobs as they appear in the config file.
struct SolverSettings {
  double lambda = kDefaultLambda;     // lambda1 (and lambda2 for MindXTVPlug)
  std::optional<double> rho;          // empty: balanced steps
  double theta = 1.0;
  std::optional<int> outer_iters;     // empty: 1 for salt-pepper, 10 for random-valued
  int inner_iters = 500;
  std::optional<std::size_t> mu;      // empty: estimated from z0
  CpVariant cp_variant = CpVariant::Standard;
  DetectionDomain detection = DetectionDomain::Stabilized;
  DenoiserStrengthMode strength_mode = DenoiserStrengthMode::Fixed;

  /// SolverParams for one method at one impulse type.
  SolverParams to_params(ImpulseType type, bool with_denoiser, const DenoiserSpec& denoiser) const;
};

inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  std::vector<std::string> images;  // file paths or "synthetic:ramp" / "synthetic:shapes"
  ExperimentKind experiment = ExperimentKind::Single;
  std::vector<double> grid;
  FixedParams fixed;
  std::vector<Method> methods;
  SolverSettings solver;
  DenoiserSpec denoiser{DenoiserKind::PatchTransform, 1.0};
  std::uint64_t seed = 0;
  int crop = 128;                   // center crop side for file images; 0 keeps full size
  std::string output;               // CSV path; empty: stdout
  std::string lut_cache_dir;

  void validate() const;
};

/// Default grids: peaks {1,2,5,10,20,30,60,120}, sigma/sqrt(p) {0,0.05,0.1,0.5,1,2,5},
/// impulse ratio {0.1,0.3,0.5,0.7,0.9}, and {0} for Single.
std::vector<double> default_grid(ExperimentKind k);

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, every field present).
std::string config_to_json(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct NoiseCell {
  double peak;
  double sigma;
  double impulse_ratio;
};
NoiseCell cell_noise(const ExperimentConfig& config, double grid_value);

/// Seed of the noise draw for (image, grid point); shared by all methods.
std::uint64_t cell_seed(std::uint64_t master, std::size_t image_index, std::size_t grid_index);

struct ResultRow {
  std::string image;
  Method method = Method::Noisy;
  double grid_value = 0.0;
  std::optional<double> psnr_db;  // empty: the cell failed
  std::string error;
};

struct ResultTable {
  std::string grid_param;
  std::vector<ResultRow> rows;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string started_at;  // informational; not part of emitted tables
  std::string finished_at;
};

enum class TableFormat { CSV, Markdown };

/// Runs every (image, grid point, method) cell. A failing cell is
/// recorded and the run continues. Rows come back canonically sorted.
ResultTable run_experiment(const ExperimentConfig& config);

/// Denoised estimate for one method (the Noisy method returns y).
Image apply_method(Method method, const Image& noisy, double sigma, ImpulseType type,
                   const ExperimentConfig& config);

/// Byte-stable rendering; failed cells print as FAIL, PSNR with 2 decimals.
std::string emit_table(const ResultTable& table, TableFormat format);

/// Loads an experiment image: synthetic fixture or file, center-cropped.
Image load_experiment_image(const std::string& name, int crop);
std::string image_label(const std::string& name);

}  // namespace mindx
