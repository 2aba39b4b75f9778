#include "ads/problem.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "ads/error.hpp"
#include "ads/patches.hpp"
#include "ads/rng.hpp"

namespace ads {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ContractViolation("config: bad value for '" + key + "': " + value);
  }
  return out;
}

// Accepts plain reals and fractions such as 1/40.
double parse_real(const std::string& key, const std::string& value) {
  const auto slash = value.find('/');
  if (slash == std::string::npos) return parse_number<double>(key, value);
  const double num = parse_number<double>(key, trim(value.substr(0, slash)));
  const double den = parse_number<double>(key, trim(value.substr(slash + 1)));
  if (den == 0.0) throw ContractViolation("config: zero denominator for '" + key + "'");
  return num / den;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

ProblemSpec parse_problem(const std::string& text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ContractViolation("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ContractViolation("config line " + std::to_string(lineno) + ": empty key");
    if (!entries.emplace(key, value).second) throw ContractViolation("config: duplicate key '" + key + "'");
  }

  ProblemSpec spec;
  std::map<int, std::filesystem::path> classes;
  for (const auto& [key, value] : entries) {
    if (key == "name") spec.name = value;
    else if (key == "dataset") {
      const auto dir = resolve(base_dir, value);
      for (int i = 0;; ++i) {
        const auto p = dir / ("class_" + std::to_string(i) + ".pgm");
        if (!std::filesystem::exists(p)) break;
        classes.emplace(i, p);  // explicit class_<i> keys take precedence
      }
      if (!entries.contains("test")) spec.test_image = dir / "test.pgm";
      if (!entries.contains("ground_truth") && std::filesystem::exists(dir / "gt.pgm")) {
        spec.ground_truth = dir / "gt.pgm";
      }
    } else if (key.starts_with("class_")) {
      const int idx = parse_number<int>(key, key.substr(6));
      if (idx < 0) throw ContractViolation("config: negative class index");
      classes[idx] = resolve(base_dir, value);
    } else if (key == "test") spec.test_image = resolve(base_dir, value);
    else if (key == "ground_truth") spec.ground_truth = resolve(base_dir, value);
    else if (key == "natoms") spec.train.natoms = parse_number<int>(key, value);
    else if (key == "levels") spec.train.levels = parse_number<int>(key, value);
    else if (key == "iters_level1") spec.train.iters_level1 = parse_number<int>(key, value);
    else if (key == "iters_other") spec.train.iters_other = parse_number<int>(key, value);
    else if (key == "alpha") spec.train.alpha = parse_real(key, value);
    else if (key == "seed") spec.train.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "side") spec.side = parse_number<int>(key, value);
    else if (key == "sparsity") spec.sparsity = parse_number<int>(key, value);
    else if (key == "sigma") spec.sigma = parse_real(key, value);
    else if (key == "train_stride") spec.train_stride = parse_number<int>(key, value);
    else if (key == "u") spec.smoothing.u = parse_real(key, value);
    else if (key == "lam") spec.smoothing.lam = parse_real(key, value);
    else if (key == "small") spec.smoothing.small = parse_number<int>(key, value);
    else if (key == "big") spec.smoothing.big = parse_number<int>(key, value);
    else if (key == "depth") spec.smoothing.depth = parse_number<int>(key, value);
    else if (key == "trials") spec.trials = parse_number<int>(key, value);
    else if (key == "augment_deltas") spec.augment.deltas = parse_int_list(key, value);
    else if (key == "augment_per_delta") spec.augment.per_delta = parse_number<long>(key, value);
    else throw ContractViolation("config: unknown key '" + key + "'");
  }

  for (int i = 0; i < static_cast<int>(classes.size()); ++i) {
    auto it = classes.find(i);
    if (it == classes.end()) {
      throw ContractViolation("config: class indices must be 0..C-1 without gaps");
    }
    spec.class_images.push_back(it->second);
  }
  if (spec.class_images.empty()) throw ContractViolation("config: no training classes");
  if (spec.test_image.empty()) throw ContractViolation("config: no test image");
  spec.train.validate();
  if (spec.side < 1 || spec.sparsity < 1 || !(spec.sigma > 0) || spec.train_stride < 1) {
    throw ContractViolation("config: side, sparsity, sigma and train_stride must be positive");
  }
  if (spec.trials < 1) throw ContractViolation("config: trials must be >= 1");
  if (spec.smoothing.u < 0 || spec.smoothing.lam < 0 || spec.smoothing.small < 0 ||
      spec.smoothing.big < 0 || spec.smoothing.depth < 0) {
    throw ContractViolation("config: smoothing parameters must be nonnegative");
  }
  for (int d : spec.augment.deltas) {
    if (d < 0) throw ContractViolation("config: over-exposure levels must be nonnegative");
  }
  if (spec.augment.enabled() && spec.augment.per_delta < 1) {
    throw ContractViolation("config: augment_per_delta must be positive when deltas are given");
  }
  return spec;
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str(), path.parent_path());
}

void check_files(const ProblemSpec& spec) {
  auto need = [](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw ContractViolation("missing file " + p.string());
  };
  for (const auto& p : spec.class_images) need(p);
  need(spec.test_image);
  if (spec.ground_truth) need(*spec.ground_truth);
}

namespace {

// Columns `keep` of m (sorted ascending for reproducible column order).
Matrix pick(const Matrix& m, std::vector<std::size_t> keep) {
  std::sort(keep.begin(), keep.end());
  Matrix out(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(keep[j]));
  }
  return out;
}

Matrix draw(const Matrix& m, long count, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(m.cols());
  if (static_cast<std::size_t>(count) >= n) return m;
  Rng rng(seed);
  return pick(m, rng.sample(n, static_cast<std::size_t>(count)));
}

}  // namespace

TrainingData build_training_data(std::span<const GrayImage> images, int side, int stride,
                                 double sigma, const AugmentSpec& augment, std::uint64_t seed) {
  TrainingData data;
  const Matrix mask = gaussian_mask(side, sigma);
  const std::size_t nd = augment.deltas.size();
  for (std::size_t c = 0; c < images.size(); ++c) {
    const std::uint64_t cseed = derive_seed(seed, 0x5eed0000u + c);
    Matrix raw = extract_patches(images[c], side, stride).data;
    long augmented = 0;
    if (augment.enabled()) {
      std::vector<Matrix> parts;
      parts.push_back(draw(raw, static_cast<long>(nd) * augment.per_delta, derive_seed(cseed, 0)));
      for (std::size_t i = 0; i < nd; ++i) {
        const Matrix exp =
            extract_patches(overexpose(images[c], augment.deltas[i]), side, stride).data;
        parts.push_back(draw(exp, augment.per_delta, derive_seed(cseed, i + 1)));
        augmented += parts.back().cols();
      }
      Eigen::Index cols = 0;
      for (const Matrix& p : parts) cols += p.cols();
      Matrix all(raw.rows(), cols);
      Eigen::Index at = 0;
      for (const Matrix& p : parts) {
        all.middleCols(at, p.cols()) = p;
        at += p.cols();
      }
      data.original_counts.push_back(static_cast<long>(parts.front().cols()));
      raw = std::move(all);
    } else {
      data.original_counts.push_back(static_cast<long>(raw.cols()));
    }
    data.augmented_counts.push_back(augmented);
    Matrix processed(raw.rows(), raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) processed.col(j) = preprocess(raw.col(j), mask);
    data.processed.push_back(std::move(processed));
    data.raw.push_back(std::move(raw));
  }
  return data;
}

ClassifierModel train_model(const TrainingData& data, const TrainConfig& cfg, int side,
                            int sparsity, double sigma, std::vector<double>* seconds) {
  ClassifierModel model;
  model.dictionaries = train_all(data.processed, data.raw, cfg, seconds);
  model.side = side;
  model.sparsity = sparsity;
  model.sigma = sigma;
  model.validate();
  return model;
}

}  // namespace ads
