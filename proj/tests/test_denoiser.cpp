#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mindx/denoiser.hpp"
#include "mindx/median.hpp"
#include "mindx/parallel.hpp"

using namespace mindx;

namespace {

// Direct 2D convolution with the same truncated, normalized kernel.
Image blur_oracle(const Image& img, double s) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * s)));
  double total = 0.0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) total += std::exp(-0.5 * (i * i + j * j) / (s * s));
  }
  Image out(img.width(), img.height(), img.peak());
  for (int row = 0; row < img.height(); ++row) {
    for (int col = 0; col < img.width(); ++col) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        for (int j = -r; j <= r; ++j) {
          acc += std::exp(-0.5 * (i * i + j * j) / (s * s)) *
                 img.at(reflect_index(row + i, img.height()), reflect_index(col + j, img.width()));
        }
      }
      out.at(row, col) = acc / total;
    }
  }
  return out;
}

Image blobs(int w, int h) {
  Image img(w, h, 20.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      img.at(r, c) = 6.0 + 4.0 * std::sin(r * 0.2) * std::cos(c * 0.15) + ((r / 8 + c / 8) % 2 ? 4.0 : 0.0);
    }
  }
  return img;
}

Image add_gaussian(const Image& img, double s, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, s);
  Image out = img;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += d(gen);
  return out;
}

}  // namespace

TEST_CASE("denoiser names and validation") {
  CHECK(to_string(DenoiserKind::PatchTransform) == "patch-transform");
  CHECK(parse_denoiser_kind("gaussian-blur") == DenoiserKind::GaussianBlur);
  CHECK(parse_denoiser_kind("identity") == DenoiserKind::Identity);
  CHECK_THROWS_AS(parse_denoiser_kind("bm3d"), std::invalid_argument);

  DenoiserSpec s{DenoiserKind::PatchTransform, -1.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {DenoiserKind::PatchTransform, 1.0};
  s.patch_size = 4;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.patch_size = 7;
  s.max_matches = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.max_matches = 16;
  s.ref_stride = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_THROWS_AS(denoise(Image(6, 20, 1.0), DenoiserSpec{DenoiserKind::PatchTransform, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("identity denoiser") {
  const Image img = testutil::random_image(5, 4, 0.0, 1.0, 2);
  CHECK(denoise(img, {DenoiserKind::Identity, 3.0}) == img);
}

TEST_CASE("gaussian blur") {
  const Image img = testutil::random_image(23, 17, 0.0, 10.0, 3, 10.0);
  CHECK(denoise(img, {DenoiserKind::GaussianBlur, 0.0}) == img);
  for (double s : {0.3, 1.0, 2.5}) {
    CHECK(testutil::max_abs_diff(denoise(img, {DenoiserKind::GaussianBlur, s}), blur_oracle(img, s)) < 1e-12);
  }
  // kernel wider than the image still reflects correctly
  const Image tiny = testutil::random_image(3, 2, 0.0, 1.0, 4);
  CHECK(testutil::max_abs_diff(denoise(tiny, {DenoiserKind::GaussianBlur, 2.0}), blur_oracle(tiny, 2.0)) < 1e-12);
}

TEST_CASE("constants are preserved") {
  for (DenoiserKind k : {DenoiserKind::Identity, DenoiserKind::GaussianBlur, DenoiserKind::PatchTransform}) {
    for (double c : {0.0, 3.7, -2.0, 1e4}) {
      const Image flat(21, 19, 20.0, c);
      const Image out = denoise(flat, {k, 1.5});
      for (double v : out.pixels()) CHECK(std::abs(v - c) <= 1e-9 * std::max(1.0, std::abs(c)));
    }
  }
}

TEST_CASE("patch transform with zero strength reproduces its input") {
  const Image img = testutil::random_image(20, 15, 0.0, 5.0, 9, 5.0);
  const Image out = denoise(img, {DenoiserKind::PatchTransform, 0.0});
  CHECK(testutil::max_abs_diff(out, img) < 1e-9);
}

TEST_CASE("patch transform handles the smallest legal image") {
  const Image img = testutil::random_image(7, 7, 0.0, 5.0, 10, 5.0);
  const Image out = denoise(img, {DenoiserKind::PatchTransform, 1.0});
  CHECK(out.same_shape(img));
  CHECK(out.all_finite());
}

TEST_CASE("patch transform removes gaussian noise") {
  const Image clean = blobs(48, 40);
  const Image noisy = add_gaussian(clean, 1.0, 5);
  const Image out = denoise(noisy, {DenoiserKind::PatchTransform, 1.0});
  CHECK(psnr(clean, out, 20.0) > psnr(clean, noisy, 20.0) + 4.0);
  const Image blurred = denoise(noisy, {DenoiserKind::GaussianBlur, 1.0});
  CHECK(psnr(clean, out, 20.0) > psnr(clean, blurred, 20.0));
}

TEST_CASE("patch transform is independent of the thread count") {
  const Image noisy = add_gaussian(blobs(40, 33), 1.0, 6);
  const int before = max_threads();
  set_num_threads(1);
  const Image a = denoise(noisy, {DenoiserKind::PatchTransform, 1.0});
  set_num_threads(4);
  const Image b = denoise(noisy, {DenoiserKind::PatchTransform, 1.0});
  set_num_threads(before);
  CHECK(a == b);
}
