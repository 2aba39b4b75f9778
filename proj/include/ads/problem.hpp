#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ads/classify.hpp"
#include "ads/dictlearn.hpp"
#include "ads/image.hpp"

namespace ads {

struct AugmentSpec {
  std::vector<int> deltas;   // over-exposure levels; empty disables augmentation
  long per_delta = 0;        // samples drawn per level

  bool enabled() const { return !deltas.empty(); }
};

/// Everything a train/classify run needs. Read from a `key = value` file.
struct ProblemSpec {
  std::string name;
  std::vector<std::filesystem::path> class_images;  // index = class label
  std::filesystem::path test_image;
  std::optional<std::filesystem::path> ground_truth;
  TrainConfig train;
  int side = 8;
  int sparsity = 2;
  double sigma = 4.0;
  int train_stride = 1;
  SmoothingParams smoothing;
  int trials = 20;
  AugmentSpec augment;
};

/// Relative paths are resolved against `base_dir`. Unknown keys, malformed
/// values and duplicate keys throw ContractViolation.
ProblemSpec parse_problem(const std::string& text, const std::filesystem::path& base_dir = {});
ProblemSpec load_problem(const std::filesystem::path& path);

/// Throws ContractViolation when a referenced file is missing.
void check_files(const ProblemSpec& spec);

struct TrainingData {
  std::vector<Matrix> processed;  // per class, preprocessed patches
  std::vector<Matrix> raw;        // same columns before preprocessing
  std::vector<long> original_counts;
  std::vector<long> augmented_counts;
};

/// Patches of every training image. With augmentation each class keeps
/// deltas.size() * per_delta original patches (all of them if fewer exist)
/// plus per_delta patches of every over-exposed copy, drawn under the seed.
TrainingData build_training_data(std::span<const GrayImage> images, int side, int stride,
                                 double sigma, const AugmentSpec& augment, std::uint64_t seed);

ClassifierModel train_model(const TrainingData& data, const TrainConfig& cfg, int side,
                            int sparsity, double sigma, std::vector<double>* seconds = nullptr);

}  // namespace ads
