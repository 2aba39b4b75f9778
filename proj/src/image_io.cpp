#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "ads/error.hpp"
#include "ads/image.hpp"

namespace ads {

GrayImage::GrayImage(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  if (height < 1 || width < 1) {
    throw ContractViolation("GrayImage: dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

GrayImage::GrayImage(int height, int width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < 1 || width < 1) {
    throw ContractViolation("GrayImage: dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ContractViolation("GrayImage: pixel buffer size does not match dimensions");
  }
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in, const std::string& what) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty()) throw FormatError(what + ": truncated PGM header");
  return token;
}

int parse_positive(const std::string& token, const std::string& what) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size() || value < 1) throw FormatError("");
    return value;
  } catch (const std::exception&) {
    throw FormatError(what + ": bad PGM header field '" + token + "'");
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw FormatError("cannot open " + path.string());
  return f;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string what = path.string();
  const std::string magic = next_token(in, what);
  if (magic == "P6" || magic == "P3") {
    throw FormatError(what + ": colour images are not supported");
  }
  if (magic != "P5") throw FormatError(what + ": not a binary PGM (P5) file");
  const int width = parse_positive(next_token(in, what), what);
  const int height = parse_positive(next_token(in, what), what);
  const int maxval = parse_positive(next_token(in, what), what);
  if (maxval != 255) throw FormatError(what + ": only 8-bit PGM (maxval 255) is supported");
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw FormatError(what + ": truncated PGM pixel data");
  }
  return GrayImage(height, width, std::move(pixels));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  const auto px = img.pixels();
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

GrayImage read_png(const std::filesystem::path& path) {
  const std::string what = path.string();
  FilePtr file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError(what + ": libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError(what + ": libpng initialisation failed");
  }
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  std::string problem;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(what + ": corrupt PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    problem = "colour or alpha PNG images are not supported";
  } else if (bit_depth != 8) {
    problem = "only 8-bit grayscale PNG is supported";
  } else {
    pixels.resize(static_cast<std::size_t>(width) * height);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) rows[r] = pixels.data() + static_cast<std::size_t>(r) * width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!problem.empty()) throw FormatError(what + ": " + problem);
  return GrayImage(height, width, std::move(pixels));
}

namespace {

void write_png_raw(const std::filesystem::path& path, int height, int width, int color_type,
                   int channels, const std::uint8_t* data) {
  const std::string what = path.string();
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError(what + ": libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError(what + ": libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(what + ": PNG write failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(r) * width * channels));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  write_png_raw(path, img.height(), img.width(), PNG_COLOR_TYPE_GRAY, 1, img.pixels().data());
}

void write_png_rgb(const std::filesystem::path& path, int height, int width,
                   std::span<const Rgb> pixels) {
  if (pixels.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ContractViolation("write_png_rgb: pixel count does not match dimensions");
  }
  std::vector<std::uint8_t> raw;
  raw.reserve(pixels.size() * 3);
  for (const Rgb& p : pixels) {
    raw.push_back(p.r);
    raw.push_back(p.g);
    raw.push_back(p.b);
  }
  write_png_raw(path, height, width, PNG_COLOR_TYPE_RGB, 3, raw.data());
}

GrayImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), sizeof sig);
  if (in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (in.gcount() >= 2 && sig[0] == 'P') return read_pgm(path);
  throw FormatError(path.string() + ": unrecognised image format (expected PGM or PNG)");
}

}  // namespace ads
