#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ads/classify.hpp"

namespace ads {

// Layout (little-endian):
//   "ADS1", u16 version (1), u16 side, u16 classes, u16 sparsity
//   per class: u16 levels, u32 record count, then records in pre-order
//   record:    u8 tag (0 root, 1 child, 2 merged), u16 level,
//              u16 parent atom (tag 1, otherwise 0), u16 K, K*dim f64
// A child record hangs below the most recent record of the level above.
// Merged records follow the tree in ascending level. The Gaussian sigma is
// not stored; loaded models carry the default.

std::vector<std::uint8_t> encode_model(const ClassifierModel& model);
ClassifierModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace ads
