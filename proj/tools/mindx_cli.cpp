// mindx: command-line front end for the denoiser library.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mindx/experiment.hpp"
#include "mindx/io.hpp"
#include "mindx/median.hpp"
#include "mindx/noise.hpp"
#include "mindx/parallel.hpp"
#include "mindx/solver.hpp"
#include "mindx/vst.hpp"

namespace {

using namespace mindx;
using nlohmann::json;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string log_trace;
  int threads = 0;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

void require_out(const CommonFlags& common, const char* sub) {
  if (common.out.empty()) throw CLI::ValidationError(std::string(sub) + " needs --out");
}

// Loads an image file and maps [0, declared_max] onto [0, file_peak]; the
// result keeps peak as its nominal peak.
Image load_scaled(const std::string& path, double peak, std::optional<double> file_peak = {}) {
  Image img = rescale_to_peak(read_image(path).image, file_peak.value_or(peak));
  img.set_peak(peak);
  return img;
}

// Files hold [0, file_peak]; values outside are clipped.
void save(Image img, const std::string& path, bool sixteen, std::optional<double> file_peak = {}) {
  if (file_peak) img.set_peak(*file_peak);
  write_image(img, path, meta_for_path(path, sixteen));
}

struct CorruptArgs {
  std::string input;
  double peak = 20.0;
  std::optional<double> sigma;
  double ratio = 0.5;
  std::string type = "salt-pepper";
  bool exact_count = false;
  std::string mask_out;
  std::optional<double> file_peak;
  bool sixteen = true;
};

int run_corrupt(const CommonFlags& common, const CorruptArgs& a) {
  require_out(common, "corrupt");
  const Image clean = load_scaled(a.input, a.peak);
  NoiseSpec spec{a.peak, a.sigma.value_or(0.1 * a.peak), a.ratio, parse_impulse_type(a.type),
                 common.seed.value_or(0), a.exact_count};
  const Corrupted c = corrupt(clean, spec);
  save(c.noisy, common.out, a.sixteen, a.file_peak);
  if (!a.mask_out.empty()) {
    Image mask(clean.width(), clean.height(), 1.0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = c.clean_mask[i] ? 1.0 : 0.0;
    save(mask, a.mask_out, false);
  }
  std::fprintf(stderr, "corrupt: peak %g sigma %g ratio %g psnr %.2f dB\n", spec.peak, spec.sigma,
               spec.impulse_ratio, psnr(clean, c.noisy, spec.peak));
  return 0;
}

struct DenoiseArgs {
  std::string input;
  std::string clean;
  double peak = 20.0;
  std::optional<double> sigma;
  std::string type = "salt-pepper";
  std::optional<double> lambda;
  std::optional<int> outer;
  std::optional<int> inner;
  std::optional<std::size_t> mu;
  bool plug = false;
  bool printed = false;
  bool raw_detection = false;
  std::string lut_cache;
  std::optional<double> file_peak;
  bool sixteen = false;
};

int run_denoise(const CommonFlags& common, const DenoiseArgs& a) {
  require_out(common, "denoise");
  const ImpulseType type = parse_impulse_type(a.type);
  const double sigma = a.sigma.value_or(0.1 * a.peak);

  ExperimentConfig cfg;
  if (!common.config.empty()) cfg = load_config(common.config);
  SolverSettings s = cfg.solver;
  if (a.lambda) s.lambda = *a.lambda;
  if (a.outer) s.outer_iters = *a.outer;
  if (a.inner) s.inner_iters = *a.inner;
  if (a.mu) s.mu = *a.mu;
  if (a.printed) s.cp_variant = CpVariant::Printed;
  if (a.raw_detection) s.detection = DetectionDomain::Raw;
  SolverParams params = s.to_params(type, a.plug, cfg.denoiser);
  params.convergence_log = !common.log_trace.empty();

  const Image noisy = load_scaled(a.input, a.peak, a.file_peak);
  std::optional<Image> clean;
  std::optional<Image> clean_tilde;
  if (!a.clean.empty()) clean = load_scaled(a.clean, a.peak);

  MindxOptions options;
  options.clean = clean ? &*clean : nullptr;
  options.lut_cache_dir = a.lut_cache.empty() ? cfg.lut_cache_dir : a.lut_cache;
  const MindxResult result = mindx_denoise(noisy, sigma, params, type, options);
  save(result.estimate, common.out, a.sixteen);

  if (clean) {
    std::fprintf(stderr, "denoise: noisy %.2f dB, estimate %.2f dB (mu %zu)\n",
                 psnr(*clean, noisy, a.peak), psnr(*clean, result.estimate, a.peak), result.mu);
  }
  if (!common.log_trace.empty()) {
    const AopResult& d = result.diagnostics;
    json trace = {{"mu", result.mu},
                  {"objective", d.objective_trace},
                  {"psnr_stabilized", d.psnr_trace},
                  {"support_sizes", d.support_sizes},
                  {"inner_objective", d.inner_trace}};
    write_text(common.log_trace, trace.dump(1) + "\n");
  }
  return 0;
}

struct FilterArgs {
  std::string input;
  int max_window = 19;
  std::optional<double> peak;
};

int run_amf(const CommonFlags& common, const FilterArgs& a) {
  require_out(common, "amf");
  const LoadedImage in = read_image(a.input);
  AmfParams params;
  params.max_window = a.max_window;
  write_image(amf(in.image, params), common.out, in.meta);
  return 0;
}

int run_acwmf(const CommonFlags& common, const FilterArgs& a) {
  require_out(common, "acwmf");
  const LoadedImage in = read_image(a.input);
  // Thresholds are defined on a 0..255 scale; scale them to the file's range.
  const Image out = acwmf(in.image, AcwmfParams::for_peak(a.peak.value_or(in.image.peak())));
  write_image(out, common.out, in.meta);
  return 0;
}

struct LutArgs {
  double sigma = 2.0;
  double peak = 20.0;
  std::optional<double> x_max;
  std::size_t points = kDefaultLutPoints;
  std::string csv;
};

int run_lut(const CommonFlags& common, const LutArgs& a) {
  if (common.out.empty() && a.csv.empty()) throw CLI::ValidationError("lut needs --out or --csv");
  const GatLut lut = build_exact_unbiased_lut(a.sigma, a.x_max.value_or(1.5 * a.peak), a.points);
  if (!common.out.empty()) save_lut(lut, common.out);
  if (!a.csv.empty()) write_text(a.csv, lut_to_csv(lut));
  return 0;
}

struct ExperimentArgs {
  std::string markdown;
  std::optional<std::string> lut_cache;
};

int run_experiment_cmd(const CommonFlags& common, const ExperimentArgs& a) {
  if (common.config.empty()) throw CLI::ValidationError("experiment needs --config");
  ExperimentConfig cfg = load_config(common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (!common.out.empty()) cfg.output = common.out;
  if (a.lut_cache) cfg.lut_cache_dir = *a.lut_cache;

  const ResultTable table = run_experiment(cfg);
  write_text(cfg.output, emit_table(table, TableFormat::CSV));
  if (!a.markdown.empty()) write_text(a.markdown, emit_table(table, TableFormat::Markdown));

  std::size_t failed = 0;
  for (const auto& r : table.rows) {
    if (!r.psnr_db) {
      ++failed;
      std::fprintf(stderr, "FAIL %s %s %g: %s\n", r.image.c_str(), std::string(to_string(r.method)).c_str(),
                   r.grid_value, r.error.c_str());
    }
  }
  const std::string meta_path = !common.log_trace.empty() ? common.log_trace
                                : !cfg.output.empty()     ? cfg.output + ".meta.json"
                                                          : std::string{};
  if (!meta_path.empty()) {
    json meta = {{"config_hash", table.config_hash}, {"seed", table.seed},
                 {"started_at", table.started_at},   {"finished_at", table.finished_at},
                 {"threads", max_threads()},         {"failed_cells", failed},
                 {"config", json::parse(config_to_json(cfg))}};
    write_text(meta_path, meta.dump(2) + "\n");
  }
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MindX mixed-noise image denoiser"};
  app.require_subcommand(1);

  CommonFlags common;
  app.add_option("--seed", common.seed, "Noise seed (overrides the config seed)");
  app.add_option("--config", common.config, "JSON config file");
  app.add_option("--out", common.out, "Output path");
  app.add_option("--log-trace", common.log_trace, "Write solver traces or run metadata as JSON");
  app.add_option("--threads", common.threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);

  auto type_check = CLI::IsMember({"salt-pepper", "random-valued", "sp", "rv"});

  CorruptArgs ca;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Add mixed Poisson, Gaussian and impulse noise");
  corrupt_cmd->add_option("input", ca.input, "Clean image")->required()->check(CLI::ExistingFile);
  corrupt_cmd->add_option("--peak", ca.peak, "Peak intensity")->check(CLI::PositiveNumber);
  corrupt_cmd->add_option("--sigma", ca.sigma, "Gaussian std (default 0.1 * peak)")->check(CLI::NonNegativeNumber);
  corrupt_cmd->add_option("--ratio", ca.ratio, "Impulse ratio")->check(CLI::Range(0.0, 1.0));
  corrupt_cmd->add_option("--type", ca.type, "Impulse type")->check(type_check);
  corrupt_cmd->add_flag("--exact-count", ca.exact_count, "Corrupt exactly round(r*N) pixels");
  corrupt_cmd->add_option("--mask", ca.mask_out, "Write the clean-pixel mask");
  corrupt_cmd->add_option("--file-peak", ca.file_peak, "Intensity stored as the file maximum (default: peak)")
      ->check(CLI::PositiveNumber);
  corrupt_cmd->add_flag("!--8bit", ca.sixteen, "Write 8-bit output");

  DenoiseArgs da;
  auto* denoise_cmd = app.add_subcommand("denoise", "Run the full MindX pipeline");
  denoise_cmd->add_option("input", da.input, "Noisy image")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_option("--clean", da.clean, "Clean image, for PSNR reporting")->check(CLI::ExistingFile);
  denoise_cmd->add_option("--peak", da.peak, "Peak intensity the file is scaled to")->check(CLI::PositiveNumber);
  denoise_cmd->add_option("--sigma", da.sigma, "Gaussian std (default 0.1 * peak)")->check(CLI::NonNegativeNumber);
  denoise_cmd->add_option("--type", da.type, "Impulse type")->check(type_check);
  denoise_cmd->add_option("--lambda", da.lambda, "Regularization weight")->check(CLI::PositiveNumber);
  denoise_cmd->add_option("--outer", da.outer, "Outer iterations")->check(CLI::PositiveNumber);
  denoise_cmd->add_option("--inner", da.inner, "Primal-dual iterations")->check(CLI::PositiveNumber);
  denoise_cmd->add_option("--mu", da.mu, "Outlier budget (default: estimated)");
  denoise_cmd->add_flag("--plug", da.plug, "Add the plug-in denoiser prior");
  denoise_cmd->add_flag("--printed-cp", da.printed, "Use the printed primal-dual variant");
  denoise_cmd->add_flag("--raw-detection", da.raw_detection, "Detect impulses before stabilization");
  denoise_cmd->add_option("--lut-cache", da.lut_cache, "Directory for cached inverse tables");
  denoise_cmd->add_option("--file-peak", da.file_peak, "Intensity of the input file maximum (default: peak)")
      ->check(CLI::PositiveNumber);
  denoise_cmd->add_flag("--16bit", da.sixteen, "Write 16-bit output");

  FilterArgs fa;
  auto* amf_cmd = app.add_subcommand("amf", "Adaptive median filter");
  amf_cmd->add_option("input", fa.input, "Input image")->required()->check(CLI::ExistingFile);
  amf_cmd->add_option("--max-window", fa.max_window, "Largest window side")->check(CLI::Range(3, 99));

  auto* acwmf_cmd = app.add_subcommand("acwmf", "Adaptive center-weighted median filter");
  acwmf_cmd->add_option("input", fa.input, "Input image")->required()->check(CLI::ExistingFile);
  acwmf_cmd->add_option("--peak", fa.peak, "Intensity scale for the thresholds (default: file maximum)")
      ->check(CLI::PositiveNumber);

  LutArgs la;
  auto* lut_cmd = app.add_subcommand("lut", "Build the exact unbiased inverse table");
  lut_cmd->add_option("--sigma", la.sigma, "Gaussian std")->check(CLI::NonNegativeNumber);
  lut_cmd->add_option("--peak", la.peak, "Peak; the table covers [0, 1.5 * peak]")->check(CLI::PositiveNumber);
  lut_cmd->add_option("--x-max", la.x_max, "Largest clean value")->check(CLI::PositiveNumber);
  lut_cmd->add_option("--points", la.points, "Log-spaced grid points")->check(CLI::Range(2, 1 << 20));
  lut_cmd->add_option("--csv", la.csv, "Also write the table as CSV");

  ExperimentArgs ea;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a seeded PSNR sweep from a config file");
  exp_cmd->add_option("--markdown", ea.markdown, "Also write a Markdown table");
  exp_cmd->add_option("--lut-cache", ea.lut_cache, "Directory for cached inverse tables");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  set_num_threads(common.threads);

  try {
    if (*corrupt_cmd) return run_corrupt(common, ca);
    if (*denoise_cmd) return run_denoise(common, da);
    if (*amf_cmd) return run_amf(common, fa);
    if (*acwmf_cmd) return run_acwmf(common, fa);
    if (*lut_cmd) return run_lut(common, la);
    if (*exp_cmd) return run_experiment_cmd(common, ea);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mindx: %s\n", e.what());
    return 1;
  }
  return 0;
}
