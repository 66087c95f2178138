#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "mindx/image.hpp"

namespace mindx {

enum class ImageFormat { PGM8, PGM16, PNG8, PNG16 };

struct ImageFileMeta {
  ImageFormat format = ImageFormat::PGM8;
  int declared_max = 255;  // 255 for 8-bit formats, 65535 for 16-bit
  bool ascii = false;      // PGM only: P2 instead of P5

  static ImageFileMeta for_format(ImageFormat f);
  void validate() const;
};

struct LoadedImage {
  Image image;  // pixels in [0, declared_max], peak = declared_max
  ImageFileMeta meta;
};

/// Maps [0, img.peak()] to [0, declared_max], rounds half away from zero and clamps.
std::vector<std::uint16_t> quantize(const Image& img, int declared_max);

std::vector<std::uint8_t> encode_pgm(const Image& img, const ImageFileMeta& meta);
std::vector<std::uint8_t> encode_png(const Image& img, const ImageFileMeta& meta);
LoadedImage decode_image(const std::vector<std::uint8_t>& bytes);

/// Format is detected from the file contents. Throws std::runtime_error
/// with a description of what is wrong with the file.
LoadedImage read_image(const std::filesystem::path& path);
void write_image(const Image& img, const std::filesystem::path& path, const ImageFileMeta& meta);

/// PNG for .png, PGM otherwise; 8-bit unless sixteen_bit.
ImageFileMeta meta_for_path(const std::filesystem::path& path, bool sixteen_bit = false);

}  // namespace mindx
