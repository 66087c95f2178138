#include "mindx/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "mindx/io.hpp"
#include "mindx/median.hpp"
#include "mindx/parallel.hpp"
#include "mindx/rng.hpp"
#include "mindx/synthetic.hpp"
#include "mindx/vst.hpp"

namespace mindx {

using json = nlohmann::json;

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<Enum, std::string_view> (&names)[N],
                const char* what) {
  for (const auto& [value, name] : names) {
    if (name == s) return value;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(s));
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum e, const std::pair<Enum, std::string_view> (&names)[N]) {
  for (const auto& [value, name] : names) {
    if (value == e) return name;
  }
  return "?";
}

constexpr std::pair<ExperimentKind, std::string_view> kKindNames[] = {
    {ExperimentKind::PeakSweep, "peak-sweep"},
    {ExperimentKind::GaussRatioSweep, "gauss-ratio-sweep"},
    {ExperimentKind::ImpulseSweep, "impulse-sweep"},
    {ExperimentKind::Single, "single"},
};

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::Noisy, "noisy"},          {Method::AMF, "amf"},
    {Method::ACWMF, "acwmf"},          {Method::GatDenoise, "gat-denoise"},
    {Method::MindXTV, "mindx-tv"},     {Method::MindXTVPlug, "mindx-tv-plug"},
};

constexpr std::pair<CpVariant, std::string_view> kVariantNames[] = {
    {CpVariant::Standard, "standard"},
    {CpVariant::Printed, "printed"},
};

constexpr std::pair<DetectionDomain, std::string_view> kDomainNames[] = {
    {DetectionDomain::Stabilized, "stabilized"},
    {DetectionDomain::Raw, "raw"},
};

constexpr std::pair<DenoiserStrengthMode, std::string_view> kStrengthNames[] = {
    {DenoiserStrengthMode::Fixed, "fixed"},
    {DenoiserStrengthMode::StepScaled, "step-scaled"},
};

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> known, const char* where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument(std::string("config: unknown key '") + key + "' in " + where);
    }
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string format_psnr(const std::optional<double>& v) {
  if (!v) return "FAIL";
  if (std::isinf(*v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

Image center_crop(const Image& img, int side) {
  if (side <= 0 || (img.width() <= side && img.height() <= side)) return img;
  const int w = std::min(side, img.width());
  const int h = std::min(side, img.height());
  const int r0 = (img.height() - h) / 2;
  const int c0 = (img.width() - w) / 2;
  Image out(w, h, img.peak());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) out.at(r, c) = img.at(r0 + r, c0 + c);
  }
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind k) { return enum_name(k, kKindNames); }
std::string_view to_string(Method m) { return enum_name(m, kMethodNames); }
ExperimentKind parse_experiment_kind(std::string_view s) { return parse_enum(s, kKindNames, "experiment"); }
Method parse_method(std::string_view s) { return parse_enum(s, kMethodNames, "method"); }

std::string_view grid_param_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::PeakSweep: return "peak";
    case ExperimentKind::GaussRatioSweep: return "sigma_over_sqrt_peak";
    case ExperimentKind::ImpulseSweep: return "impulse_ratio";
    case ExperimentKind::Single: return "none";
  }
  return "?";
}

std::vector<double> default_grid(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::PeakSweep: return {1, 2, 5, 10, 20, 30, 60, 120};
    case ExperimentKind::GaussRatioSweep: return {0, 0.05, 0.1, 0.5, 1, 2, 5};
    case ExperimentKind::ImpulseSweep: return {0.1, 0.3, 0.5, 0.7, 0.9};
    case ExperimentKind::Single: return {0};
  }
  return {};
}

SolverParams SolverSettings::to_params(ImpulseType type, bool with_denoiser,
                                       const DenoiserSpec& denoiser) const {
  RegularizerConfig reg = with_denoiser
      ? RegularizerConfig::make(lambda, lambda, denoiser, rho, theta)
      : RegularizerConfig::make(lambda, 0.0, std::nullopt, rho, theta);
  reg.strength_mode = strength_mode;
  SolverParams p = SolverParams::defaults(type, reg);
  if (outer_iters) p.outer_iters = *outer_iters;
  p.inner_iters = inner_iters;
  p.mu = mu;
  p.cp_variant = cp_variant;
  p.detection = detection;
  return p;
}

void ExperimentConfig::validate() const {
  if (images.empty()) throw std::invalid_argument("config: images must be non-empty");
  if (grid.empty()) throw std::invalid_argument("config: grid must be non-empty");
  if (methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
  if (experiment == ExperimentKind::Single && grid.size() != 1) {
    throw std::invalid_argument("config: single experiment takes exactly one grid point");
  }
  for (double g : grid) {
    switch (experiment) {
      case ExperimentKind::PeakSweep:
        if (!(g > 0.0)) throw std::invalid_argument("config: peak grid values must be > 0");
        break;
      case ExperimentKind::GaussRatioSweep:
        if (!(g >= 0.0)) throw std::invalid_argument("config: sigma ratio grid values must be >= 0");
        break;
      case ExperimentKind::ImpulseSweep:
        if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("config: impulse ratios must be in [0, 1]");
        break;
      case ExperimentKind::Single:
        break;
    }
  }
  if (!(fixed.peak > 0.0)) throw std::invalid_argument("config: fixed.peak must be > 0");
  if (fixed.sigma && !(*fixed.sigma >= 0.0)) throw std::invalid_argument("config: fixed.sigma must be >= 0");
  if (!(fixed.impulse_ratio >= 0.0 && fixed.impulse_ratio <= 1.0)) {
    throw std::invalid_argument("config: fixed.impulse_ratio must be in [0, 1]");
  }
  if (crop < 0) throw std::invalid_argument("config: crop must be >= 0");
  denoiser.validate();
  solver.to_params(fixed.impulse_type, false, denoiser).reg.validate();
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown_keys(j, {"schema_version", "images", "experiment", "grid", "fixed", "methods",
                          "method", "solver", "denoiser", "seed", "crop", "output", "lut_cache_dir"},
                      "config");
  if (!j.contains("schema_version")) throw std::invalid_argument("config: missing schema_version");
  if (j.at("schema_version").get<int>() != kConfigSchemaVersion) {
    throw std::invalid_argument("config: unsupported schema_version");
  }

  ExperimentConfig c;
  try {
    c.images = j.at("images").get<std::vector<std::string>>();
    c.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
    c.grid = j.contains("grid") ? j.at("grid").get<std::vector<double>>() : default_grid(c.experiment);

    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    } else if (j.contains("method")) {
      c.methods.push_back(parse_method(j.at("method").get<std::string>()));
    } else {
      throw std::invalid_argument("config: missing methods");
    }

    if (j.contains("fixed")) {
      const json& f = j.at("fixed");
      reject_unknown_keys(f, {"peak", "sigma", "impulse_ratio", "impulse_type", "exact_count"}, "fixed");
      c.fixed.peak = f.value("peak", c.fixed.peak);
      c.fixed.sigma = optional_field<double>(f, "sigma");
      c.fixed.impulse_ratio = f.value("impulse_ratio", c.fixed.impulse_ratio);
      if (f.contains("impulse_type")) c.fixed.impulse_type = parse_impulse_type(f.at("impulse_type").get<std::string>());
      c.fixed.exact_count = f.value("exact_count", false);
    }

    if (j.contains("solver")) {
      const json& s = j.at("solver");
      reject_unknown_keys(s, {"lambda", "rho", "theta", "outer_iters", "inner_iters", "mu", "cp_variant",
                              "detection", "strength_mode"}, "solver");
      c.solver.lambda = s.value("lambda", c.solver.lambda);
      c.solver.rho = optional_field<double>(s, "rho");
      c.solver.theta = s.value("theta", c.solver.theta);
      c.solver.outer_iters = optional_field<int>(s, "outer_iters");
      c.solver.inner_iters = s.value("inner_iters", c.solver.inner_iters);
      c.solver.mu = optional_field<std::size_t>(s, "mu");
      if (s.contains("cp_variant")) c.solver.cp_variant = parse_enum(s.at("cp_variant").get<std::string>(), kVariantNames, "cp_variant");
      if (s.contains("detection")) c.solver.detection = parse_enum(s.at("detection").get<std::string>(), kDomainNames, "detection");
      if (s.contains("strength_mode")) c.solver.strength_mode = parse_enum(s.at("strength_mode").get<std::string>(), kStrengthNames, "strength_mode");
    }

    if (j.contains("denoiser")) {
      const json& d = j.at("denoiser");
      reject_unknown_keys(d, {"kind", "strength", "patch_size", "search_radius", "max_matches", "ref_stride",
                              "threshold_factor"}, "denoiser");
      if (d.contains("kind")) c.denoiser.kind = parse_denoiser_kind(d.at("kind").get<std::string>());
      c.denoiser.strength = d.value("strength", c.denoiser.strength);
      c.denoiser.patch_size = d.value("patch_size", c.denoiser.patch_size);
      c.denoiser.search_radius = d.value("search_radius", c.denoiser.search_radius);
      c.denoiser.max_matches = d.value("max_matches", c.denoiser.max_matches);
      c.denoiser.ref_stride = d.value("ref_stride", c.denoiser.ref_stride);
      c.denoiser.threshold_factor = d.value("threshold_factor", c.denoiser.threshold_factor);
    }

    c.seed = j.value("seed", std::uint64_t{0});
    c.crop = j.value("crop", c.crop);
    c.output = j.value("output", std::string{});
    c.lut_cache_dir = j.value("lut_cache_dir", std::string{});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  json j = {
      {"schema_version", kConfigSchemaVersion},
      {"images", c.images},
      {"experiment", std::string(to_string(c.experiment))},
      {"grid", c.grid},
      {"fixed", {{"peak", c.fixed.peak}, {"sigma", opt(c.fixed.sigma)},
                 {"impulse_ratio", c.fixed.impulse_ratio},
                 {"impulse_type", std::string(to_string(c.fixed.impulse_type))},
                 {"exact_count", c.fixed.exact_count}}},
      {"methods", methods},
      {"solver", {{"lambda", c.solver.lambda}, {"rho", opt(c.solver.rho)}, {"theta", c.solver.theta},
                  {"outer_iters", opt(c.solver.outer_iters)}, {"inner_iters", c.solver.inner_iters},
                  {"mu", opt(c.solver.mu)},
                  {"cp_variant", std::string(enum_name(c.solver.cp_variant, kVariantNames))},
                  {"detection", std::string(enum_name(c.solver.detection, kDomainNames))},
                  {"strength_mode", std::string(enum_name(c.solver.strength_mode, kStrengthNames))}}},
      {"denoiser", {{"kind", std::string(to_string(c.denoiser.kind))}, {"strength", c.denoiser.strength},
                    {"patch_size", c.denoiser.patch_size}, {"search_radius", c.denoiser.search_radius},
                    {"max_matches", c.denoiser.max_matches}, {"ref_stride", c.denoiser.ref_stride},
                    {"threshold_factor", c.denoiser.threshold_factor}}},
      {"seed", c.seed},
      {"crop", c.crop},
      {"output", c.output},
      {"lut_cache_dir", c.lut_cache_dir},
  };
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NoiseCell cell_noise(const ExperimentConfig& config, double grid_value) {
  const FixedParams& f = config.fixed;
  switch (config.experiment) {
    case ExperimentKind::PeakSweep:
      return {grid_value, f.sigma.value_or(0.1 * grid_value), f.impulse_ratio};
    case ExperimentKind::GaussRatioSweep:
      return {f.peak, grid_value * std::sqrt(f.peak), f.impulse_ratio};
    case ExperimentKind::ImpulseSweep:
      return {f.peak, f.sigma.value_or(0.1 * f.peak), grid_value};
    case ExperimentKind::Single:
      return {f.peak, f.sigma.value_or(0.1 * f.peak), f.impulse_ratio};
  }
  throw std::logic_error("cell_noise: unhandled experiment");
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t image_index, std::size_t grid_index) {
  return mix_seed(mix_seed(master, image_index), grid_index);
}

Image load_experiment_image(const std::string& name, int crop) {
  if (is_synthetic_name(name)) return synthetic_by_name(name);
  return center_crop(read_image(name).image, crop);
}

std::string image_label(const std::string& name) {
  if (is_synthetic_name(name)) return name;
  return std::filesystem::path(name).stem().string();
}

Image apply_method(Method method, const Image& noisy, double sigma, ImpulseType type,
                   const ExperimentConfig& config) {
  const MindxOptions options{nullptr, config.lut_cache_dir, 1.5};
  switch (method) {
    case Method::Noisy:
      return noisy;
    case Method::AMF:
      return amf(noisy);
    case Method::ACWMF:
      return acwmf(noisy, AcwmfParams::for_peak(noisy.peak()));
    case Method::GatDenoise: {
      const Image prefiltered = impulse_filter(noisy, type);
      const Image stabilized = denoise(gat_forward(prefiltered, sigma), config.denoiser);
      const GatLut& lut = cached_lut(sigma, 1.5 * noisy.peak(), config.lut_cache_dir);
      return igat_exact_unbiased(stabilized, lut, noisy.peak());
    }
    case Method::MindXTV:
    case Method::MindXTVPlug: {
      const bool plug = method == Method::MindXTVPlug;
      const SolverParams params = config.solver.to_params(type, plug, config.denoiser);
      return mindx_denoise(noisy, sigma, params, type, options).estimate;
    }
  }
  throw std::logic_error("apply_method: unhandled method");
}

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.grid_param = std::string(grid_param_name(config.experiment));
  table.seed = config.seed;
  table.config_hash = config_hash(config);
  table.started_at = iso_now();

  const std::size_t n_images = config.images.size();
  const std::size_t n_grid = config.grid.size();
  const std::size_t n_methods = config.methods.size();

  std::vector<std::optional<Image>> images(n_images);
  std::vector<std::string> load_errors(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    try {
      images[i] = load_experiment_image(config.images[i], config.crop);
    } catch (const std::exception& e) {
      load_errors[i] = e.what();
    }
  }

  std::vector<ResultRow> rows(n_images * n_grid * n_methods);
  parallel_for_dynamic(static_cast<std::ptrdiff_t>(n_images * n_grid), [&](std::ptrdiff_t cell) {
    const std::size_t ii = static_cast<std::size_t>(cell) / n_grid;
    const std::size_t gi = static_cast<std::size_t>(cell) % n_grid;
    const double g = config.grid[gi];
    const std::string label = image_label(config.images[ii]);

    std::optional<Image> clean;
    std::optional<Corrupted> corrupted;
    std::string cell_error = load_errors[ii];
    NoiseCell nc{};
    if (cell_error.empty()) {
      try {
        nc = cell_noise(config, g);
        clean = rescale_to_peak(*images[ii], nc.peak);
        NoiseSpec spec{nc.peak, nc.sigma, nc.impulse_ratio, config.fixed.impulse_type,
                       cell_seed(config.seed, ii, gi), config.fixed.exact_count};
        corrupted = corrupt(*clean, spec);
      } catch (const std::exception& e) {
        cell_error = e.what();
      }
    }

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      ResultRow& row = rows[(ii * n_grid + gi) * n_methods + mi];
      row.image = label;
      row.method = config.methods[mi];
      row.grid_value = g;
      if (!cell_error.empty()) {
        row.error = cell_error;
        continue;
      }
      try {
        const Image est = apply_method(row.method, corrupted->noisy, nc.sigma,
                                       config.fixed.impulse_type, config);
        row.psnr_db = psnr(*clean, est, nc.peak);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  });

  // Canonical order: image (config order), method (config order), grid ascending.
  std::vector<std::tuple<std::size_t, std::size_t, double, std::size_t>> keys;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t ii = k / (n_grid * n_methods);
    const std::size_t mi = k % n_methods;
    keys.emplace_back(ii, mi, rows[k].grid_value, k);
  }
  std::sort(keys.begin(), keys.end());
  table.rows.reserve(rows.size());
  for (const auto& key : keys) table.rows.push_back(std::move(rows[std::get<3>(key)]));
  table.finished_at = iso_now();
  return table;
}

std::string emit_table(const ResultTable& table, TableFormat format) {
  std::ostringstream os;
  if (format == TableFormat::CSV) {
    os << "image,method,grid_param,grid_value,psnr_db\n";
    for (const auto& r : table.rows) {
      os << r.image << ',' << to_string(r.method) << ',' << table.grid_param << ','
         << format_value(r.grid_value) << ',' << format_psnr(r.psnr_db) << '\n';
    }
    return os.str();
  }

  os << "# PSNR (dB) by " << table.grid_param << "\n\n"
     << "seed: " << table.seed << ", config: " << table.config_hash << "\n";
  // Group rows by image, keeping first-seen order.
  std::vector<std::string> image_order;
  std::map<std::string, std::vector<const ResultRow*>> by_image;
  for (const auto& r : table.rows) {
    if (!by_image.count(r.image)) image_order.push_back(r.image);
    by_image[r.image].push_back(&r);
  }
  for (const auto& image : image_order) {
    const auto& rs = by_image[image];
    std::vector<double> grid;
    std::vector<Method> methods;
    for (const auto* r : rs) {
      if (std::find(grid.begin(), grid.end(), r->grid_value) == grid.end()) grid.push_back(r->grid_value);
      if (std::find(methods.begin(), methods.end(), r->method) == methods.end()) methods.push_back(r->method);
    }
    std::sort(grid.begin(), grid.end());
    os << "\n## " << image << "\n\n| Alg. \\ " << table.grid_param << " |";
    for (double g : grid) os << ' ' << format_value(g) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < grid.size(); ++i) os << "---|";
    os << '\n';
    for (Method m : methods) {
      os << "| " << to_string(m) << " |";
      for (double g : grid) {
        std::string cell = "";
        for (const auto* r : rs) {
          if (r->method == m && r->grid_value == g) cell = format_psnr(r->psnr_db);
        }
        os << ' ' << cell << " |";
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace mindx
