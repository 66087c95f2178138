#include "mindx/vst.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mindx/parallel.hpp"

namespace mindx {

namespace {

constexpr double kThreeEighths = 3.0 / 8.0;
constexpr double kQuadratureTol = 1e-12;
constexpr double kQuadratureFailTol = 1e-8;
constexpr char kLutMagic[8] = {'M', 'I', 'N', 'D', 'X', 'L', 'U', 'T'};

double poisson_pmf(std::int64_t k, double x) {
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(x) - x - std::lgamma(kd + 1.0));
}

// E[2 sqrt(k + sigma Z + c)_+] for Z ~ N(0,1), integrated over k +- 8 sigma.
// With y = v^2 - c the integrand 4 v^2 phi(...) is smooth at the branch point.
double gaussian_term(std::int64_t k, double sigma, double c) {
  const double kd = static_cast<double>(k);
  const double lo = std::max(kd - 8.0 * sigma, -c);
  const double hi = kd + 8.0 * sigma;
  if (hi <= lo) return 0.0;
  const double v0 = std::sqrt(lo + c);
  const double v1 = std::sqrt(hi + c);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  auto integrand = [&](double v) {
    const double d = v * v - c - kd;
    return 4.0 * v * v * norm * std::exp(-d * d * inv2s2);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, v0, v1, 15, kQuadratureTol, &err);
  if (err > kQuadratureFailTol * std::max(std::fabs(value), 1e-300) && err > 1e-300) {
    throw std::runtime_error("gat_expectation: quadrature did not converge for k=" +
                             std::to_string(k));
  }
  return value;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("LUT file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

double gat_forward(double y, double sigma) {
  const double shifted = y + kThreeEighths + sigma * sigma;
  return shifted > 0.0 ? 2.0 * std::sqrt(shifted) : 0.0;
}

Image gat_forward(const Image& img, double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("gat_forward: sigma must be >= 0");
  Image out(img.width(), img.height(), gat_forward(img.peak(), sigma));
  parallel_for(static_cast<std::ptrdiff_t>(img.size()), [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = gat_forward(img[k], sigma);
  });
  return out;
}

double gat_inverse_algebraic(double v, double sigma) {
  const double half = 0.5 * v;
  return std::max(0.0, half * half - kThreeEighths - sigma * sigma);
}

Image gat_inverse_algebraic(const Image& img, double sigma, double peak) {
  Image out(img.width(), img.height(), peak);
  parallel_for(static_cast<std::ptrdiff_t>(img.size()), [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = gat_inverse_algebraic(img[k], sigma);
  });
  return out;
}

std::int64_t poisson_truncation(double x) {
  return static_cast<std::int64_t>(std::ceil(x + 10.0 * std::sqrt(x) + 30.0));
}

double gat_expectation(double x, double sigma) {
  if (!(x >= 0.0)) throw std::invalid_argument("gat_expectation: x must be >= 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("gat_expectation: sigma must be >= 0");
  const double c = kThreeEighths + sigma * sigma;
  const std::int64_t k_max = x == 0.0 ? 0 : poisson_truncation(x);
  double total = 0.0;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    const double w = poisson_pmf(k, x);
    if (w == 0.0) continue;
    const double term = sigma == 0.0 ? 2.0 * std::sqrt(static_cast<double>(k) + c)
                                     : gaussian_term(k, sigma, c);
    total += w * term;
  }
  return total;
}

void GatLut::validate() const {
  if (grid.size() < 2 || grid.size() != values.size()) {
    throw std::invalid_argument("GatLut: need >= 2 matching grid/value entries");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("GatLut: grid not strictly ascending");
    if (values[i] < values[i - 1]) throw std::invalid_argument("GatLut: values decreasing");
  }
}

GatLut build_exact_unbiased_lut(double sigma, double x_max, std::size_t points) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("build_exact_unbiased_lut: sigma must be >= 0");
  if (!(x_max > kLutMinClean)) {
    throw std::invalid_argument("build_exact_unbiased_lut: x_max must exceed 1e-3");
  }
  if (points < 2) throw std::invalid_argument("build_exact_unbiased_lut: need >= 2 points");

  GatLut lut;
  lut.sigma = sigma;
  lut.values.resize(points + 1);
  lut.values[0] = 0.0;
  const double log_lo = std::log(kLutMinClean);
  const double log_hi = std::log(x_max);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    lut.values[i + 1] = std::exp(log_lo + t * (log_hi - log_lo));
  }
  lut.values.back() = x_max;

  lut.grid.resize(lut.values.size());
  // Exceptions must not escape the parallel region.
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for_dynamic(static_cast<std::ptrdiff_t>(lut.values.size()), [&](std::ptrdiff_t i) {
    try {
      lut.grid[static_cast<std::size_t>(i)] =
          gat_expectation(lut.values[static_cast<std::size_t>(i)], sigma);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  lut.validate();
  return lut;
}

double igat_exact_unbiased(double v, const GatLut& lut) {
  if (v <= lut.grid_min()) return 0.0;
  if (v >= lut.grid_max()) {
    const double shift = lut.x_max() - gat_inverse_algebraic(lut.grid_max(), lut.sigma);
    return gat_inverse_algebraic(v, lut.sigma) + shift;
  }
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(lut.grid.begin(), lut.grid.end(), v) - lut.grid.begin());
  const std::size_t lo = hi - 1;
  const double t = (v - lut.grid[lo]) / (lut.grid[hi] - lut.grid[lo]);
  return lut.values[lo] + t * (lut.values[hi] - lut.values[lo]);
}

Image igat_exact_unbiased(const Image& img, const GatLut& lut, double peak) {
  Image out(img.width(), img.height(), peak);
  parallel_for(static_cast<std::ptrdiff_t>(img.size()), [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = igat_exact_unbiased(img[k], lut);
  });
  return out;
}

std::vector<std::uint8_t> serialize_lut(const GatLut& lut) {
  lut.validate();
  std::vector<std::uint8_t> out(std::begin(kLutMagic), std::end(kLutMagic));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(kLutFormatVersion >> (8 * i)));
  put_u64(out, std::bit_cast<std::uint64_t>(lut.sigma));
  put_u64(out, lut.grid.size());
  for (double g : lut.grid) put_u64(out, std::bit_cast<std::uint64_t>(g));
  for (double v : lut.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

GatLut deserialize_lut(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kLutMagic, 8) != 0) {
    throw std::runtime_error("not a LUT file (bad magic)");
  }
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) version |= static_cast<std::uint32_t>(bytes[8 + i]) << (8 * i);
  if (version != kLutFormatVersion) {
    throw std::runtime_error("unsupported LUT format version " + std::to_string(version));
  }
  std::size_t pos = 12;
  GatLut lut;
  lut.sigma = std::bit_cast<double>(get_u64(bytes, pos));
  const std::uint64_t n = get_u64(bytes, pos);
  if (n > (bytes.size() - pos) / 16) throw std::runtime_error("LUT file truncated");
  lut.grid.resize(n);
  lut.values.resize(n);
  for (auto& g : lut.grid) g = std::bit_cast<double>(get_u64(bytes, pos));
  for (auto& v : lut.values) v = std::bit_cast<double>(get_u64(bytes, pos));
  lut.validate();
  return lut;
}

void save_lut(const GatLut& lut, const std::filesystem::path& path) {
  const auto bytes = serialize_lut(lut);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GatLut load_lut(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_lut(bytes);
}

std::string lut_to_csv(const GatLut& lut) {
  std::ostringstream os;
  os << "stabilized,clean\n" << std::setprecision(17);
  for (std::size_t i = 0; i < lut.grid.size(); ++i) os << lut.grid[i] << ',' << lut.values[i] << '\n';
  return os.str();
}

const GatLut& cached_lut(double sigma, double x_max, const std::filesystem::path& cache_dir,
                         std::size_t points) {
  static std::mutex mutex;
  static std::map<std::tuple<double, double, std::size_t>, std::unique_ptr<GatLut>> memo;

  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(sigma, x_max, points);
  if (auto it = memo.find(key); it != memo.end()) return *it->second;

  std::filesystem::path file;
  if (!cache_dir.empty()) {
    std::ostringstream name;
    name << "gatlut_v" << kLutFormatVersion << "_s" << std::hex
         << std::bit_cast<std::uint64_t>(sigma) << "_x" << std::bit_cast<std::uint64_t>(x_max)
         << std::dec << "_n" << points << ".bin";
    file = cache_dir / name.str();
    if (std::filesystem::exists(file)) {
      try {
        GatLut lut = load_lut(file);
        if (lut.sigma == sigma && lut.grid.size() == points + 1 && lut.x_max() == x_max) {
          auto& slot = memo[key] = std::make_unique<GatLut>(std::move(lut));
          return *slot;
        }
      } catch (const std::exception&) {
        // stale or corrupt cache entry: rebuild below
      }
    }
  }
  auto lut = std::make_unique<GatLut>(build_exact_unbiased_lut(sigma, x_max, points));
  if (!file.empty()) {
    std::filesystem::create_directories(cache_dir);
    save_lut(*lut, file);
  }
  auto& slot = memo[key] = std::move(lut);
  return *slot;
}

}  // namespace mindx
