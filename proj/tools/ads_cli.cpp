// ads: train, classify, eval and augment from the command line.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ads/classify.hpp"
#include "ads/error.hpp"
#include "ads/image.hpp"
#include "ads/model_io.hpp"
#include "ads/patches.hpp"
#include "ads/problem.hpp"
#include "ads/smoothing.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<int> trials;
  bool emit_costvolume = false;
  std::string model;
  std::vector<std::string> eval_files;
  std::string augment_dir;
  std::vector<int> deltas;
};

fs::path model_path(const Options& o) {
  return o.model.empty() ? fs::path(o.out) / "model.ads" : fs::path(o.model);
}

int cmd_train(const Options& o) {
  ads::ProblemSpec spec = ads::load_problem(o.config);
  if (o.seed) spec.train.seed = *o.seed;
  for (const auto& p : spec.class_images) {
    if (!fs::exists(p)) throw ads::ContractViolation("missing file " + p.string());
  }
  std::vector<ads::GrayImage> images;
  for (const auto& p : spec.class_images) images.push_back(ads::read_image(p));

  const auto t0 = std::chrono::steady_clock::now();
  const ads::TrainingData data = ads::build_training_data(
      images, spec.side, spec.train_stride, spec.sigma, spec.augment, spec.train.seed);
  std::vector<double> seconds;
  const ads::ClassifierModel model =
      ads::train_model(data, spec.train, spec.side, spec.sparsity, spec.sigma, &seconds);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(model_path(o).parent_path().empty() ? fs::path(".") : model_path(o).parent_path());
  ads::save_model(model_path(o), model);

  for (int c = 0; c < model.classes(); ++c) {
    const auto& d = model.dictionaries[static_cast<std::size_t>(c)];
    std::printf("class %d: %ld original + %ld augmented samples, %d tree dictionaries, %d merged, "
                "%d x %d atoms each, %.2f s\n",
                c, data.original_counts[static_cast<std::size_t>(c)],
                data.augmented_counts[static_cast<std::size_t>(c)], d.node_count(),
                d.merged_count(), d.dim(), d.atoms_per_dictionary(),
                seconds[static_cast<std::size_t>(c)]);
  }
  std::printf("model written to %s (%.2f s)\n", model_path(o).string().c_str(), total);
  return 0;
}

int cmd_classify(const Options& o) {
  ads::ProblemSpec spec = ads::load_problem(o.config);
  if (o.seed) spec.train.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  ads::check_files(spec);

  ads::ClassifierModel model = ads::load_model(model_path(o));
  if (model.classes() != static_cast<int>(spec.class_images.size())) {
    throw ads::ContractViolation("model has " + std::to_string(model.classes()) +
                                 " classes, config lists " +
                                 std::to_string(spec.class_images.size()));
  }
  if (model.side != spec.side) throw ads::ContractViolation("model patch side differs from config");
  model.sparsity = spec.sparsity;
  model.sigma = spec.sigma;

  const ads::GrayImage test = ads::read_image(spec.test_image);
  std::optional<ads::LabelImage> truth;
  if (spec.ground_truth) truth = ads::image_to_labels(ads::read_image(*spec.ground_truth));

  const ads::ClassifyResult result = ads::classify(test, model, spec.smoothing, spec.trials,
                                                   spec.train.seed, truth ? &*truth : nullptr);
  const fs::path out(o.out);
  fs::create_directories(out);
  for (std::size_t t = 0; t < result.labels.size(); ++t) {
    ads::write_pgm(out / ("labels_" + std::to_string(t) + ".pgm"),
                   ads::labels_to_image(result.labels[t]));
  }
  ads::write_label_png(out / "labels_0.png", result.labels.front(), model.classes());
  ads::write_report(out / "report.txt", result.report);
  if (o.emit_costvolume) ads::write_cost_volume(out / "costs.cvol", result.costs);

  if (truth) {
    std::printf("mean error %.2f%% over %d trials\n", 100.0 * result.report.mean_error, spec.trials);
  } else {
    std::printf("%d label images written to %s\n", spec.trials, out.string().c_str());
  }
  return 0;
}

int cmd_eval(const Options& o) {
  const ads::LabelImage f = ads::image_to_labels(ads::read_image(o.eval_files.at(0)));
  const ads::LabelImage gt = ads::image_to_labels(ads::read_image(o.eval_files.at(1)));
  std::printf("%.2f\n", 100.0 * ads::error_rate(f, gt));
  return 0;
}

int cmd_augment(const Options& o) {
  if (o.deltas.empty()) throw ads::ContractViolation("augment: no --delta values given");
  const fs::path out(o.out);
  fs::create_directories(out);
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(o.augment_dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());
  for (const auto& p : inputs) {
    const ads::GrayImage img = ads::read_image(p);
    for (int d : o.deltas) {
      const fs::path target = out / (p.stem().string() + "_exp" + std::to_string(d) + ".pgm");
      ads::write_pgm(target, ads::overexpose(img, d));
    }
  }
  std::printf("%zu images x %zu levels written to %s\n", inputs.size(), o.deltas.size(),
              out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Texture classification with adaptive multilevel dictionaries"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "learn one dictionary structure per class");
  train->add_option("--config", o.config, "problem file")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", o.seed, "overrides the config seed");
  train->add_option("--out", o.out, "output directory (model.ads)");
  train->add_option("--model", o.model, "explicit model path");

  auto* classify = app.add_subcommand("classify", "label the test image");
  classify->add_option("--config", o.config, "problem file")->required()->check(CLI::ExistingFile);
  classify->add_option("--seed", o.seed, "overrides the config seed");
  classify->add_option("--out", o.out, "output directory");
  classify->add_option("--trials", o.trials, "number of smoothing trials")->check(CLI::PositiveNumber);
  classify->add_option("--model", o.model, "model path (default <out>/model.ads)");
  classify->add_flag("--emit-costvolume", o.emit_costvolume, "also write costs.cvol");

  auto* eval = app.add_subcommand("eval", "print the pixel error rate in percent");
  eval->add_option("files", o.eval_files, "label image and ground truth")
      ->required()->expected(2)->check(CLI::ExistingFile);

  auto* augment = app.add_subcommand("augment", "write over-exposed copies of every image in a directory");
  augment->add_option("dir", o.augment_dir, "input directory")->required()->check(CLI::ExistingDirectory);
  augment->add_option("--delta", o.deltas, "over-exposure levels")->required()->delimiter(',');
  augment->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ads: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*train) return cmd_train(o);
    if (*classify) return cmd_classify(o);
    if (*eval) return cmd_eval(o);
    if (*augment) return cmd_augment(o);
  } catch (const std::exception& e) {
    std::cerr << "ads: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
