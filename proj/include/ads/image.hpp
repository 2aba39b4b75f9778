#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ads {

/// 8-bit grayscale image, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int height, int width, std::uint8_t fill = 0);
  GrayImage(int height, int width, std::vector<std::uint8_t> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t operator()(int r, int c) const { return pixels_[index(r, c)]; }
  std::uint8_t& operator()(int r, int c) { return pixels_[index(r, c)]; }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

struct Rgb {
  std::uint8_t r, g, b;
};

// Binary PGM ("P5", maxval 255) and 8-bit grayscale PNG. Colour inputs are
// rejected with FormatError.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& img);
void write_png_rgb(const std::filesystem::path& path, int height, int width,
                   std::span<const Rgb> pixels);

/// Dispatches on the file signature (PGM or PNG).
GrayImage read_image(const std::filesystem::path& path);

}  // namespace ads
