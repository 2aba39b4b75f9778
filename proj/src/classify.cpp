#include "ads/classify.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "ads/error.hpp"
#include "ads/parallel.hpp"
#include "ads/patches.hpp"
#include "ads/rng.hpp"

namespace ads {

void ClassifierModel::validate() const {
  if (dictionaries.empty()) throw ContractViolation("ClassifierModel: no classes");
  if (side < 1 || sparsity < 1 || !(sigma > 0.0)) {
    throw ContractViolation("ClassifierModel: side, sparsity and sigma must be positive");
  }
  for (std::size_t c = 0; c < dictionaries.size(); ++c) {
    if (dictionaries[c].dim() != side * side) {
      throw ContractViolation("ClassifierModel: dictionary dimension does not match patch side");
    }
    if (dictionaries[c].class_id() != static_cast<int>(c)) {
      throw ContractViolation("ClassifierModel: dictionaries must be ordered by class id");
    }
  }
}

CostVolume cost_volume(const GrayImage& img, const ClassifierModel& model) {
  model.validate();
  const int side = model.side;
  const int before = patch_anchor_offset(side);
  const int after = side - 1 - before;
  const GrayImage padded = mirror_pad(img, before, before, after, after);
  const Matrix mask = gaussian_mask(side, model.sigma);
  const int classes = model.classes();
  CostVolume cv(img.height(), img.width(), classes);
  parallel_for(static_cast<std::size_t>(img.height()), [&](std::size_t row) {
    const int r = static_cast<int>(row);
    for (int c = 0; c < img.width(); ++c) {
      const Vector y = preprocess(patch_at(padded, r, c, side), mask);
      for (int k = 0; k < classes; ++k) {
        const SparsePath path =
            decompose(y, model.dictionaries[static_cast<std::size_t>(k)], model.sparsity);
        cv.at(r, c, k) = norm_error(y, path);
      }
    }
  });
  return cv;
}

double error_rate(const LabelImage& f, const LabelImage& truth) {
  if (f.height() != truth.height() || f.width() != truth.width()) {
    throw ContractViolation("error_rate: label images differ in size");
  }
  long wrong = 0;
  for (int p = 0; p < f.pixels(); ++p) wrong += f[p] != truth[p];
  return static_cast<double>(wrong) / static_cast<double>(f.pixels());
}

std::vector<std::vector<long>> confusion(const LabelImage& f, const LabelImage& truth,
                                         int classes) {
  if (f.height() != truth.height() || f.width() != truth.width()) {
    throw ContractViolation("confusion: label images differ in size");
  }
  std::vector<std::vector<long>> m(static_cast<std::size_t>(classes),
                                   std::vector<long>(static_cast<std::size_t>(classes), 0));
  for (int p = 0; p < f.pixels(); ++p) {
    if (truth[p] < 0 || truth[p] >= classes || f[p] < 0 || f[p] >= classes) {
      throw ContractViolation("confusion: label outside class range");
    }
    ++m[static_cast<std::size_t>(truth[p])][static_cast<std::size_t>(f[p])];
  }
  return m;
}

ClassifyResult smooth_trials(CostVolume costs, const SmoothingParams& params, int trials,
                             std::uint64_t seed, const LabelImage* truth) {
  if (trials < 1) throw ContractViolation("classify: trials must be >= 1");
  if (truth && (truth->height() != costs.height() || truth->width() != costs.width())) {
    throw ContractViolation("classify: ground truth size differs from the test image");
  }
  ClassifyResult result;
  result.costs = std::move(costs);
  const auto n = static_cast<std::size_t>(trials);
  result.labels.resize(n);
  result.report.energy_traces.resize(n);
  result.report.trial_seconds.resize(n);

  parallel_for(n, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    ExpansionResult expanded =
        alpha_expansion(result.costs, params.u, derive_seed(seed, static_cast<std::uint64_t>(t)));
    LabelImage f = alpha_erosion(expanded.labels, result.costs, params.u, params.lam,
                                 params.small, params.big);
    result.labels[t] = edge_erosion(f, result.costs, params.depth);
    result.report.energy_traces[t] = std::move(expanded.energy_trace);
    result.report.trial_seconds[t] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  if (truth) {
    const int classes = result.costs.classes();
    result.report.confusion.assign(static_cast<std::size_t>(classes),
                                   std::vector<long>(static_cast<std::size_t>(classes), 0));
    for (const LabelImage& f : result.labels) {
      result.report.trial_errors.push_back(error_rate(f, *truth));
      const auto m = confusion(f, *truth, classes);
      for (int i = 0; i < classes; ++i) {
        for (int j = 0; j < classes; ++j) {
          result.report.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
              m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
      }
    }
    const auto& e = result.report.trial_errors;
    result.report.mean_error = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
  }
  return result;
}

ClassifyResult classify(const GrayImage& img, const ClassifierModel& model,
                        const SmoothingParams& params, int trials, std::uint64_t seed,
                        const LabelImage* truth) {
  const auto start = std::chrono::steady_clock::now();
  CostVolume cv = cost_volume(img, model);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ClassifyResult result = smooth_trials(std::move(cv), params, trials, seed, truth);
  result.report.cost_volume_seconds = seconds;
  return result;
}

void write_report(const std::filesystem::path& path, const Report& report) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "trials = " << report.energy_traces.size() << "\n";
  out << "cost_volume_seconds = " << report.cost_volume_seconds << "\n";
  for (std::size_t t = 0; t < report.trial_seconds.size(); ++t) {
    out << "trial_seconds_" << t << " = " << report.trial_seconds[t] << "\n";
  }
  for (std::size_t t = 0; t < report.energy_traces.size(); ++t) {
    out << "energy_trace_" << t << " =";
    for (double e : report.energy_traces[t]) out << " " << e;
    out << "\n";
  }
  if (!report.trial_errors.empty()) {
    for (std::size_t t = 0; t < report.trial_errors.size(); ++t) {
      out << "error_rate_" << t << " = " << report.trial_errors[t] << "\n";
    }
    out << "mean_error = " << report.mean_error << "\n";
    out << "mean_error_percent = " << std::fixed << std::setprecision(2)
        << 100.0 * report.mean_error << "\n" << std::defaultfloat << std::setprecision(17);
    for (std::size_t i = 0; i < report.confusion.size(); ++i) {
      out << "confusion_" << i << " =";
      for (long v : report.confusion[i]) out << " " << v;
      out << "\n";
    }
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

GrayImage labels_to_image(const LabelImage& f) {
  GrayImage img(f.height(), f.width());
  auto px = img.pixels();
  for (int p = 0; p < f.pixels(); ++p) {
    if (f[p] < 0 || f[p] > 255) throw ContractViolation("labels_to_image: label exceeds 255");
    px[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(f[p]);
  }
  return img;
}

LabelImage image_to_labels(const GrayImage& img) {
  std::vector<int> labels(img.pixels().begin(), img.pixels().end());
  return LabelImage(img.height(), img.width(), std::move(labels));
}

void write_label_png(const std::filesystem::path& path, const LabelImage& f, int classes) {
  std::vector<Rgb> colors(static_cast<std::size_t>(std::max(classes, 1)));
  for (std::size_t k = 0; k < colors.size(); ++k) {
    // Evenly spaced hues.
    const double h = 6.0 * static_cast<double>(k) / static_cast<double>(colors.size());
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = 1; g = x; break;
      case 1: r = x; g = 1; break;
      case 2: g = 1; b = x; break;
      case 3: g = x; b = 1; break;
      case 4: r = x; b = 1; break;
      default: r = 1; b = x; break;
    }
    colors[k] = {static_cast<std::uint8_t>(255 * r), static_cast<std::uint8_t>(255 * g),
                 static_cast<std::uint8_t>(255 * b)};
  }
  std::vector<Rgb> px(static_cast<std::size_t>(f.pixels()));
  for (int p = 0; p < f.pixels(); ++p) {
    px[static_cast<std::size_t>(p)] = colors.at(static_cast<std::size_t>(f[p]));
  }
  write_png_rgb(path, f.height(), f.width(), px);
}

}  // namespace ads
