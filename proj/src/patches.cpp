#include "ads/patches.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ads/error.hpp"

namespace ads {

PatchSet extract_patches(const GrayImage& img, int side, int stride, std::optional<int> label) {
  if (side < 1 || stride < 1) {
    throw ContractViolation("extract_patches: side and stride must be positive");
  }
  if (side > img.height() || side > img.width()) {
    throw DegenerateInput("extract_patches: patch side " + std::to_string(side) +
                          " exceeds image size " + std::to_string(img.height()) + "x" +
                          std::to_string(img.width()));
  }
  const int rows = (img.height() - side) / stride + 1;
  const int cols = (img.width() - side) / stride + 1;
  PatchSet set;
  set.side = side;
  set.data.resize(static_cast<Eigen::Index>(side) * side,
                  static_cast<Eigen::Index>(rows) * cols);
  set.meta.reserve(static_cast<std::size_t>(rows) * cols);
  const int offset = patch_anchor_offset(side);
  Eigen::Index k = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j, ++k) {
      const int top = i * stride;
      const int left = j * stride;
      double* out = set.data.col(k).data();
      for (int c = 0; c < side; ++c) {
        for (int r = 0; r < side; ++r) *out++ = img(top + r, left + c);
      }
      set.meta.push_back({top + offset, left + offset, label});
    }
  }
  return set;
}

Vector patch_at(const GrayImage& img, int top, int left, int side) {
  if (top < 0 || left < 0 || top + side > img.height() || left + side > img.width()) {
    throw ContractViolation("patch_at: window outside image");
  }
  Vector v(static_cast<Eigen::Index>(side) * side);
  Eigen::Index k = 0;
  for (int c = 0; c < side; ++c) {
    for (int r = 0; r < side; ++r) v[k++] = img(top + r, left + c);
  }
  return v;
}

Matrix gaussian_mask(int side, double sigma) {
  if (side < 1 || !(sigma > 0.0)) {
    throw ContractViolation("gaussian_mask: side must be positive and sigma > 0");
  }
  const double center = (side - 1) / 2.0;
  Matrix w(side, side);
  for (int c = 0; c < side; ++c) {
    for (int r = 0; r < side; ++r) {
      const double dr = r - center;
      const double dc = c - center;
      w(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
    }
  }
  // Central pixel(s) are the maxima; divide so they are exactly 1.
  const double peak = w.maxCoeff();
  w /= peak;
  return w;
}

Vector sharpen(const Vector& patch) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(patch.size()))));
  if (side * side != patch.size() || side == 0) {
    throw ContractViolation("sharpen: patch length is not a perfect square");
  }
  const auto at = [&](int r, int c) {
    r = std::clamp(r, 0, side - 1);
    c = std::clamp(c, 0, side - 1);
    return patch[r + c * side];
  };
  Vector out(patch.size());
  for (int c = 0; c < side; ++c) {
    for (int r = 0; r < side; ++r) {
      const double centre = at(r, c);
      const double laplacian =
          at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1) - 4.0 * centre;
      out[r + c * side] = centre - laplacian;
    }
  }
  return out;
}

Vector preprocess(const Vector& patch, const Matrix& mask) {
  if (mask.size() != patch.size()) {
    throw ContractViolation("preprocess: mask size does not match patch size");
  }
  const Eigen::Map<const Vector> weights(mask.data(), mask.size());
  return sharpen(patch.cwiseProduct(weights));
}

PatchSet preprocess(const PatchSet& patches, const Matrix& mask) {
  if (mask.rows() != patches.side || mask.cols() != patches.side) {
    throw ContractViolation("preprocess: mask side does not match patch side");
  }
  PatchSet out;
  out.side = patches.side;
  out.meta = patches.meta;
  out.data.resize(patches.data.rows(), patches.data.cols());
  for (Eigen::Index k = 0; k < patches.data.cols(); ++k) {
    out.data.col(k) = preprocess(Vector(patches.data.col(k)), mask);
  }
  return out;
}

namespace {

int reflect(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

}  // namespace

GrayImage mirror_pad(const GrayImage& img, int top, int left, int bottom, int right) {
  if (top < 0 || left < 0 || bottom < 0 || right < 0) {
    throw ContractViolation("mirror_pad: negative padding");
  }
  if (top >= img.height() || bottom >= img.height() || left >= img.width() ||
      right >= img.width()) {
    throw DegenerateInput("mirror_pad: padding must be smaller than the image dimension");
  }
  GrayImage out(img.height() + top + bottom, img.width() + left + right);
  for (int r = 0; r < out.height(); ++r) {
    const int sr = reflect(r - top, img.height());
    for (int c = 0; c < out.width(); ++c) {
      out(r, c) = img(sr, reflect(c - left, img.width()));
    }
  }
  return out;
}

GrayImage overexpose(const GrayImage& img, int delta) {
  if (delta < 0) throw ContractViolation("overexpose: delta must be nonnegative");
  const auto px = img.pixels();
  const int lo = *std::min_element(px.begin(), px.end());
  const int hi = *std::max_element(px.begin(), px.end()) + delta;
  if (hi == lo) throw DegenerateInput("overexpose: constant image with zero offset");
  GrayImage out(img.height(), img.width());
  auto dst = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double scaled = 255.0 * (px[i] + delta - lo) / static_cast<double>(hi - lo);
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::round(scaled), 0.0, 255.0));
  }
  return out;
}

}  // namespace ads
