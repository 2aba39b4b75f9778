#pragma once

#include <optional>
#include <vector>

#include "ads/image.hpp"
#include "ads/linalg.hpp"

namespace ads {

struct PatchMeta {
  int row = 0;  // anchor pixel, see patch_anchor_offset()
  int col = 0;
  std::optional<int> label;
};

/// Columns are vectorised side x side patches, column-major within the patch
/// (entry r + c * side holds pixel (r, c)).
struct PatchSet {
  int side = 0;
  Matrix data;
  std::vector<PatchMeta> meta;

  int dim() const { return side * side; }
  int count() const { return static_cast<int>(data.cols()); }
};

/// A patch anchored at pixel (r, c) covers rows [r - o, r - o + side) where
/// o = (side - 1) / 2; for 8x8 patches that is rows r-3 .. r+4.
constexpr int patch_anchor_offset(int side) { return (side - 1) / 2; }

/// Every fully contained side x side window at the given stride, scanned
/// row-major over window positions.
PatchSet extract_patches(const GrayImage& img, int side, int stride,
                         std::optional<int> label = std::nullopt);

/// Single patch whose top-left corner is (top, left).
Vector patch_at(const GrayImage& img, int top, int left, int side);

/// Centre-weighted Gaussian: exp(-d^2 / (2 sigma^2)) about the continuous
/// centre ((side-1)/2, (side-1)/2), scaled so the largest weight is 1.
Matrix gaussian_mask(int side, double sigma);

/// patch - laplacian(patch), 4-neighbour kernel with replicate padding.
Vector sharpen(const Vector& patch);

/// mask (element-wise) followed by sharpen.
Vector preprocess(const Vector& patch, const Matrix& mask);
PatchSet preprocess(const PatchSet& patches, const Matrix& mask);

/// Edge-inclusive symmetric reflection: [a b c] padded left by 2 is [b a a b c].
GrayImage mirror_pad(const GrayImage& img, int top, int left, int bottom, int right);

/// Brightness offset followed by a contrast stretch back onto [0, 255]:
/// round(255 * (I + delta - min I) / (max(I + delta) - min I)).
GrayImage overexpose(const GrayImage& img, int delta);

}  // namespace ads
