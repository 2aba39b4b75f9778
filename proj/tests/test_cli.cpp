#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "ads/bytes.hpp"
#include "ads/classify.hpp"
#include "ads/image.hpp"
#include "ads/model_io.hpp"
#include "ads/patches.hpp"
#include "ads/smoothing.hpp"
#include "doctest.h"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ADS_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Three small texture classes, a test mosaic and its ground truth.
fs::path make_dataset(const std::string& name, const std::string& extra) {
  const fs::path dir = fs::temp_directory_path() / ("ads_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  const double angles[3] = {0, 45, 90};
  std::vector<ads::GrayImage> tex;
  for (int c = 0; c < 3; ++c) {
    ads::write_pgm(dir / ("class_" + std::to_string(c) + ".pgm"), synthetic::texture(angles[c], 48, 48, 10 + c));
    tex.push_back(synthetic::texture(angles[c], 40, 40, 20 + c));
  }
  const auto gt = synthetic::three_regions(40, 40);
  ads::write_pgm(dir / "test.pgm", synthetic::mosaic(tex, gt));
  ads::write_pgm(dir / "gt.pgm", ads::labels_to_image(gt));
  std::ofstream(dir / "problem.cfg") << "dataset = .\nnatoms = 12\niters_level1 = 4\niters_other = 2\n"
                                        "small = 20\nbig = 200\ntrials = 2\n" << extra;
  return dir;
}

}  // namespace

TEST_CASE("train writes a model that reloads to the same bytes, deterministically") {
  const fs::path dir = make_dataset("train", "");
  const std::string cfg = (dir / "problem.cfg").string();
  auto r = run("train --config " + cfg + " --out " + (dir / "a").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("class 2:") != std::string::npos);
  r = run("train --config " + cfg + " --out " + (dir / "b").string());
  REQUIRE(r.code == 0);
  const auto a = slurp(dir / "a" / "model.ads");
  CHECK(a == slurp(dir / "b" / "model.ads"));
  const auto model = ads::load_model(dir / "a" / "model.ads");
  CHECK(model.classes() == 3);
  const auto again = ads::encode_model(model);
  CHECK(std::string(again.begin(), again.end()) == a);

  r = run("train --config " + cfg + " --seed 99 --out " + (dir / "c").string());
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "c" / "model.ads") != a);
}

TEST_CASE("one-class problem gives a one-structure model") {
  const fs::path dir = make_dataset("one", "");
  fs::remove(dir / "class_1.pgm");
  fs::remove(dir / "class_2.pgm");
  std::ofstream(dir / "one.cfg") << "class_0 = class_0.pgm\ntest = test.pgm\nnatoms = 8\niters_level1 = 2\niters_other = 2\n";
  REQUIRE(run("train --config " + (dir / "one.cfg").string() + " --out " + dir.string()).code == 0);
  CHECK(ads::load_model(dir / "model.ads").classes() == 1);
}

TEST_CASE("classify: pipeline identity, report and determinism") {
  const fs::path dir = make_dataset("classify", "");
  const std::string cfg = (dir / "problem.cfg").string();
  const std::string out = (dir / "out").string();
  REQUIRE(run("train --config " + cfg + " --out " + out).code == 0);

  std::ofstream(dir / "off.cfg") << "dataset = .\nnatoms = 12\nu = 0\nsmall = 0\ndepth = 0\n";
  auto r = run("classify --config " + (dir / "off.cfg").string() + " --model " + out +
               "/model.ads --trials 1 --emit-costvolume --out " + (dir / "off").string());
  REQUIRE(r.code == 0);
  const auto cv = ads::read_cost_volume(dir / "off" / "costs.cvol");
  const auto labels = ads::image_to_labels(ads::read_pgm(dir / "off" / "labels_0.pgm"));
  CHECK(labels == ads::argmin_labels(cv));
  CHECK(!fs::exists(dir / "off" / "labels_1.pgm"));

  r = run("classify --config " + cfg + " --out " + out);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mean error") != std::string::npos);
  const auto report = slurp(dir / "out" / "report.txt");
  CHECK(report.find("error_rate_0 = ") != std::string::npos);
  CHECK(report.find("error_rate_1 = ") != std::string::npos);
  CHECK(report.find("mean_error = ") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "labels_0.png"));
  const auto first = slurp(dir / "out" / "labels_1.pgm");
  REQUIRE(run("classify --config " + cfg + " --out " + out).code == 0);
  CHECK(slurp(dir / "out" / "labels_1.pgm") == first);
}

TEST_CASE("eval prints the error percentage") {
  const fs::path dir = make_dataset("eval", "");
  ads::LabelImage a(4, 5, 0), b(4, 5, 1), c(4, 5, 0);
  for (int p = 0; p < 7; ++p) c[p] = 1;
  ads::write_pgm(dir / "a.pgm", ads::labels_to_image(a));
  ads::write_pgm(dir / "b.pgm", ads::labels_to_image(b));
  ads::write_pgm(dir / "c.pgm", ads::labels_to_image(c));
  CHECK(run("eval " + (dir / "a.pgm").string() + " " + (dir / "a.pgm").string()).out == "0.00\n");
  CHECK(run("eval " + (dir / "a.pgm").string() + " " + (dir / "b.pgm").string()).out == "100.00\n");
  CHECK(run("eval " + (dir / "c.pgm").string() + " " + (dir / "a.pgm").string()).out == "35.00\n");
  const auto mismatch = run("eval " + (dir / "a.pgm").string() + " " + (dir / "test.pgm").string());
  CHECK(mismatch.code != 0);
}

TEST_CASE("augment writes over-exposed copies") {
  const fs::path dir = make_dataset("augment", "");
  const auto r = run("augment " + dir.string() + " --delta 100,300 --out " + (dir / "aug").string());
  REQUIRE(r.code == 0);
  const auto img = ads::read_pgm(dir / "aug" / "class_1_exp300.pgm");
  CHECK(img == ads::overexpose(ads::read_pgm(dir / "class_1.pgm"), 300));
  CHECK(fs::exists(dir / "aug" / "test_exp100.pgm"));
}

TEST_CASE("failures exit nonzero with a one-line diagnostic") {
  const fs::path dir = make_dataset("fail", "natom = 3\n");
  auto r = run("train --config " + (dir / "problem.cfg").string());
  CHECK(r.code != 0);
  CHECK(r.out.find("unknown key 'natom'") != std::string::npos);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);

  // Model trained on two classes used with a three-class config.
  const fs::path two = make_dataset("fail2", "");
  fs::remove(two / "class_2.pgm");
  REQUIRE(run("train --config " + (two / "problem.cfg").string() + " --out " + two.string()).code == 0);
  const fs::path three = make_dataset("fail3", "");
  r = run("classify --config " + (three / "problem.cfg").string() + " --model " + (two / "model.ads").string() +
          " --out " + (three / "o").string());
  CHECK(r.code != 0);
  CHECK(r.out.find("classes") != std::string::npos);

  CHECK(run("bogus").code != 0);
  CHECK(run("classify --config /nonexistent.cfg").code != 0);
}
