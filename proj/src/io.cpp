#include "mindx/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace mindx {

ImageFileMeta ImageFileMeta::for_format(ImageFormat f) {
  ImageFileMeta m;
  m.format = f;
  m.declared_max = (f == ImageFormat::PGM16 || f == ImageFormat::PNG16) ? 65535 : 255;
  return m;
}

void ImageFileMeta::validate() const {
  const bool sixteen = format == ImageFormat::PGM16 || format == ImageFormat::PNG16;
  if (declared_max != (sixteen ? 65535 : 255)) {
    throw std::invalid_argument("ImageFileMeta: declared_max does not match format depth");
  }
}

ImageFileMeta meta_for_path(const std::filesystem::path& path, bool sixteen_bit) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return ImageFileMeta::for_format(sixteen_bit ? ImageFormat::PNG16 : ImageFormat::PNG8);
  return ImageFileMeta::for_format(sixteen_bit ? ImageFormat::PGM16 : ImageFormat::PGM8);
}

std::vector<std::uint16_t> quantize(const Image& img, int declared_max) {
  if (!img.all_finite()) throw std::invalid_argument("quantize: non-finite pixel");
  std::vector<std::uint16_t> out(img.size());
  const double scale = static_cast<double>(declared_max) / img.peak();
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::round(img[i] * scale);  // half away from zero
    out[i] = static_cast<std::uint16_t>(std::clamp(v, 0.0, static_cast<double>(declared_max)));
  }
  return out;
}

std::vector<std::uint8_t> encode_pgm(const Image& img, const ImageFileMeta& meta) {
  meta.validate();
  const auto q = quantize(img, meta.declared_max);
  std::string header = std::string(meta.ascii ? "P2" : "P5") + "\n" + std::to_string(img.width()) +
                       " " + std::to_string(img.height()) + "\n" +
                       std::to_string(meta.declared_max) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  if (meta.ascii) {
    for (int r = 0; r < img.height(); ++r) {
      std::string line;
      for (int c = 0; c < img.width(); ++c) {
        if (c) line += ' ';
        line += std::to_string(q[img.index(r, c)]);
      }
      line += '\n';
      out.insert(out.end(), line.begin(), line.end());
    }
  } else if (meta.declared_max == 255) {
    for (auto v : q) out.push_back(static_cast<std::uint8_t>(v));
  } else {
    for (auto v : q) {  // Netpbm 16-bit samples are big-endian
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
  }
  return out;
}

namespace {

class PgmParser {
 public:
  explicit PgmParser(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}

  LoadedImage parse() {
    if (b_.size() < 2 || b_[0] != 'P' || (b_[1] != '5' && b_[1] != '2')) {
      throw std::runtime_error("PGM: bad magic number (expected P5 or P2)");
    }
    const bool ascii = b_[1] == '2';
    pos_ = 2;
    const long width = number("width");
    const long height = number("height");
    const long maxval = number("maxval");
    if (width < 1 || height < 1) throw std::runtime_error("PGM: invalid dimensions");
    if (maxval != 255 && maxval != 65535) {
      throw std::runtime_error("PGM: unsupported maxval " + std::to_string(maxval) +
                               " (expected 255 or 65535)");
    }
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> data(n);
    if (ascii) {
      for (auto& v : data) {
        const long s = number("sample");
        if (s > maxval) throw std::runtime_error("PGM: sample exceeds maxval");
        v = static_cast<double>(s);
      }
    } else {
      if (pos_ >= b_.size() || !std::isspace(b_[pos_])) throw std::runtime_error("PGM: malformed header");
      ++pos_;  // single whitespace before raster
      const std::size_t bps = maxval == 255 ? 1 : 2;
      if (b_.size() - pos_ < n * bps) throw std::runtime_error("PGM: truncated pixel data");
      for (std::size_t i = 0; i < n; ++i) {
        unsigned v = b_[pos_ + i * bps];
        if (bps == 2) v = (v << 8) | b_[pos_ + i * bps + 1];
        if (v > static_cast<unsigned>(maxval)) throw std::runtime_error("PGM: sample exceeds maxval");
        data[i] = v;
      }
    }
    LoadedImage out{Image(static_cast<int>(width), static_cast<int>(height),
                          static_cast<double>(maxval), std::move(data)),
                    ImageFileMeta::for_format(maxval == 255 ? ImageFormat::PGM8 : ImageFormat::PGM16)};
    out.meta.ascii = ascii;
    return out;
  }

 private:
  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) {
      throw std::runtime_error(std::string("PGM: truncated or malformed ") + what);
    }
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > 1'000'000'000) throw std::runtime_error(std::string("PGM: ") + what + " too large");
      ++pos_;
    }
    return v;
  }

  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

struct MemReader {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t len) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + len > r->bytes->size()) png_error(png, "truncated PNG data");
  std::memcpy(out, r->bytes->data() + r->pos, len);
  r->pos += len;
}

void png_write_mem(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

struct PngErrorBuf {
  char message[256] = {0};
};

void png_on_error(png_structp png, png_const_charp msg) {
  auto* eb = static_cast<PngErrorBuf*>(png_get_error_ptr(png));
  std::snprintf(eb->message, sizeof(eb->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

LoadedImage decode_png(const std::vector<std::uint8_t>& bytes) {
  PngErrorBuf err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_on_error, png_on_warning);
  if (!png) throw std::runtime_error("PNG: cannot allocate decoder");
  png_infop info = png_create_info_struct(png);
  MemReader reader{&bytes, 0};
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int depth = 0, color = 0;
  const char* failure = nullptr;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(std::string("PNG: ") + err.message);
  }
  png_set_read_fn(png, &reader, png_read_mem);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &depth, &color, nullptr, nullptr, nullptr);
  if (color != PNG_COLOR_TYPE_GRAY) {
    failure = "PNG: only grayscale images without alpha are supported";
  } else {
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raster.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = raster.data() + r * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (failure) throw std::runtime_error(failure);

  const bool sixteen = depth == 16;
  // Low bit depths are expanded by bit replication to the full 8-bit range.
  const int maxval = sixteen ? 65535 : 255;
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = sixteen ? static_cast<double>((raster[2 * i] << 8) | raster[2 * i + 1])
                      : static_cast<double>(raster[i]);
  }
  return {Image(static_cast<int>(width), static_cast<int>(height), maxval, std::move(data)),
          ImageFileMeta::for_format(sixteen ? ImageFormat::PNG16 : ImageFormat::PNG8)};
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img, const ImageFileMeta& meta) {
  meta.validate();
  const auto q = quantize(img, meta.declared_max);
  const bool sixteen = meta.declared_max == 65535;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * (sixteen ? 2 : 1);
  std::vector<std::uint8_t> raster(rowbytes * static_cast<std::size_t>(img.height()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (sixteen) {
      raster[2 * i] = static_cast<std::uint8_t>(q[i] >> 8);
      raster[2 * i + 1] = static_cast<std::uint8_t>(q[i] & 0xff);
    } else {
      raster[i] = static_cast<std::uint8_t>(q[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = raster.data() + r * rowbytes;
  std::vector<std::uint8_t> out;

  PngErrorBuf err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_on_error, png_on_warning);
  if (!png) throw std::runtime_error("PNG: cannot allocate encoder");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(std::string("PNG: ") + err.message);
  }
  png_set_write_fn(png, &out, png_write_mem, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()),
               sixteen ? 16 : 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

LoadedImage decode_image(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P') return PgmParser(bytes).parse();
  throw std::runtime_error("unsupported image format (expected PGM P5/P2 or grayscale PNG)");
}

LoadedImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_image(const Image& img, const std::filesystem::path& path, const ImageFileMeta& meta) {
  const bool png = meta.format == ImageFormat::PNG8 || meta.format == ImageFormat::PNG16;
  const auto bytes = png ? encode_png(img, meta) : encode_pgm(img, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace mindx
