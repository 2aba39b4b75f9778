#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "ads/image.hpp"
#include "ads/smoothing.hpp"
#include "ads/sparse.hpp"

namespace ads {

struct ClassifierModel {
  std::vector<MultilevelDictionary> dictionaries;  // index = class label
  int side = 8;
  int sparsity = 2;
  double sigma = 4.0;

  int classes() const { return static_cast<int>(dictionaries.size()); }
  /// Throws ContractViolation if dictionaries disagree with side or class order.
  void validate() const;
};

struct SmoothingParams {
  double u = 0.16;
  double lam = 2.0;
  int small = 2000;
  int big = 10000;
  int depth = 2;
};

struct Report {
  std::vector<double> trial_errors;            // filled when ground truth is given
  double mean_error = 0.0;
  std::vector<std::vector<long>> confusion;    // summed over trials, [truth][predicted]
  std::vector<std::vector<double>> energy_traces;
  double cost_volume_seconds = 0.0;
  std::vector<double> trial_seconds;
};

struct ClassifyResult {
  CostVolume costs;
  std::vector<LabelImage> labels;  // one per trial
  Report report;
};

/// Normalised reconstruction error of the patch around every pixel, for
/// every class. The image is mirror padded so border pixels get full patches.
CostVolume cost_volume(const GrayImage& img, const ClassifierModel& model);

/// Expansion, alpha-erosion and edge erosion on a precomputed cost volume,
/// repeated for `trials` seeds derived from `seed`.
ClassifyResult smooth_trials(CostVolume costs, const SmoothingParams& params, int trials,
                             std::uint64_t seed, const LabelImage* truth = nullptr);

ClassifyResult classify(const GrayImage& img, const ClassifierModel& model,
                        const SmoothingParams& params, int trials, std::uint64_t seed,
                        const LabelImage* truth = nullptr);

/// Fraction of pixels where f and truth differ.
double error_rate(const LabelImage& f, const LabelImage& truth);

/// C x C counts; rows are true classes.
std::vector<std::vector<long>> confusion(const LabelImage& f, const LabelImage& truth, int classes);

/// Plain text, one `key = value` per line.
void write_report(const std::filesystem::path& path, const Report& report);

/// Label image stored as an 8-bit image whose value is the class index.
GrayImage labels_to_image(const LabelImage& f);
LabelImage image_to_labels(const GrayImage& img);
void write_label_png(const std::filesystem::path& path, const LabelImage& f, int classes);

}  // namespace ads
