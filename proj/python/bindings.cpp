#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "ads/classify.hpp"
#include "ads/dictlearn.hpp"
#include "ads/error.hpp"
#include "ads/image.hpp"
#include "ads/linalg.hpp"
#include "ads/model_io.hpp"
#include "ads/patches.hpp"
#include "ads/problem.hpp"
#include "ads/smoothing.hpp"

namespace py = pybind11;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using I32Array = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ads::GrayImage to_image(const U8Array& a) {
  if (a.ndim() != 2) throw ads::ContractViolation("expected a 2-d uint8 array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  std::vector<std::uint8_t> px(a.data(), a.data() + a.size());
  return ads::GrayImage(h, w, std::move(px));
}

U8Array from_image(const ads::GrayImage& img) {
  U8Array a({img.height(), img.width()});
  std::memcpy(a.mutable_data(), img.pixels().data(), img.pixels().size());
  return a;
}

ads::LabelImage to_labels(const I32Array& a) {
  if (a.ndim() != 2) throw ads::ContractViolation("expected a 2-d label array");
  std::vector<int> v(a.data(), a.data() + a.size());
  return ads::LabelImage(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), std::move(v));
}

I32Array from_labels(const ads::LabelImage& f) {
  I32Array a({f.height(), f.width()});
  std::copy(f.labels().begin(), f.labels().end(), a.mutable_data());
  return a;
}

ads::CostVolume to_costs(const F64Array& a) {
  if (a.ndim() != 3) throw ads::ContractViolation("expected a (height, width, classes) array");
  std::vector<double> v(a.data(), a.data() + a.size());
  return ads::CostVolume(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                         static_cast<int>(a.shape(2)), std::move(v));
}

F64Array from_costs(const ads::CostVolume& cv) {
  F64Array a({cv.height(), cv.width(), cv.classes()});
  std::copy(cv.data().begin(), cv.data().end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_adstruct, m) {
  m.doc() = "Adaptive multilevel dictionary texture classifier";

  auto error = py::register_exception<ads::Error>(m, "Error");
  py::register_exception<ads::ContractViolation>(m, "ContractViolation", error.ptr());
  py::register_exception<ads::DegenerateInput>(m, "DegenerateInput", error.ptr());
  py::register_exception<ads::InsufficientData>(m, "InsufficientData", error.ptr());
  py::register_exception<ads::FormatError>(m, "FormatError", error.ptr());

  m.def("max_eigvec", [](const ads::Matrix& a) {
    const ads::EigenPair p = ads::max_eigvec(a);
    return py::make_tuple(p.vector, p.value);
  }, py::arg("a"), "Largest eigenpair (vector, value) of a symmetric matrix.");
  m.def("dominant_singular_dir", &ads::dominant_singular_dir, py::arg("y"));

  m.def("overexpose", [](const U8Array& img, int delta) {
    return from_image(ads::overexpose(to_image(img), delta));
  }, py::arg("img"), py::arg("delta"));
  m.def("mirror_pad", [](const U8Array& img, int top, int left, int bottom, int right) {
    return from_image(ads::mirror_pad(to_image(img), top, left, bottom, right));
  }, py::arg("img"), py::arg("top"), py::arg("left"), py::arg("bottom"), py::arg("right"));
  m.def("extract_patches", [](const U8Array& img, int side, int stride) {
    return ads::extract_patches(to_image(img), side, stride).data;
  }, py::arg("img"), py::arg("side") = 8, py::arg("stride") = 1,
     "Patches as columns, column-major within each patch.");

  m.def("read_image", [](const std::filesystem::path& p) { return from_image(ads::read_image(p)); });
  m.def("write_pgm", [](const std::filesystem::path& p, const U8Array& img) {
    ads::write_pgm(p, to_image(img));
  });

  py::class_<ads::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("natoms", &ads::TrainConfig::natoms)
      .def_readwrite("levels", &ads::TrainConfig::levels)
      .def_readwrite("iters_level1", &ads::TrainConfig::iters_level1)
      .def_readwrite("iters_other", &ads::TrainConfig::iters_other)
      .def_readwrite("alpha", &ads::TrainConfig::alpha)
      .def_readwrite("seed", &ads::TrainConfig::seed);

  py::class_<ads::SmoothingParams>(m, "SmoothingParams")
      .def(py::init<>())
      .def_readwrite("u", &ads::SmoothingParams::u)
      .def_readwrite("lam", &ads::SmoothingParams::lam)
      .def_readwrite("small", &ads::SmoothingParams::small)
      .def_readwrite("big", &ads::SmoothingParams::big)
      .def_readwrite("depth", &ads::SmoothingParams::depth);

  py::class_<ads::ClassifierModel>(m, "ClassifierModel")
      .def_property_readonly("classes", &ads::ClassifierModel::classes)
      .def_readwrite("side", &ads::ClassifierModel::side)
      .def_readwrite("sparsity", &ads::ClassifierModel::sparsity)
      .def_readwrite("sigma", &ads::ClassifierModel::sigma)
      .def("shape", [](const ads::ClassifierModel& model) {
        py::list out;
        for (const auto& d : model.dictionaries) {
          out.append(py::dict(py::arg("nodes") = d.node_count(),
                              py::arg("merged") = d.merged_count(),
                              py::arg("atoms") = d.atoms_per_dictionary()));
        }
        return out;
      })
      .def("to_bytes", [](const ads::ClassifierModel& model) {
        const auto b = ads::encode_model(model);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      })
      .def_static("from_bytes", [](const py::bytes& data) {
        const std::string s = data;
        return ads::decode_model(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      });

  m.def("train", [](const std::vector<U8Array>& images, const ads::TrainConfig& cfg, int side,
                    int stride, int sparsity, double sigma) {
    std::vector<ads::GrayImage> imgs;
    for (const auto& a : images) imgs.push_back(to_image(a));
    py::gil_scoped_release release;
    const ads::TrainingData data =
        ads::build_training_data(imgs, side, stride, sigma, ads::AugmentSpec{}, cfg.seed);
    return ads::train_model(data, cfg, side, sparsity, sigma);
  }, py::arg("images"), py::arg("config") = ads::TrainConfig{}, py::arg("side") = 8,
     py::arg("stride") = 1, py::arg("sparsity") = 2, py::arg("sigma") = 4.0,
     "One training image per class, in class order.");
  m.def("save_model", &ads::save_model, py::arg("path"), py::arg("model"));
  m.def("load_model", &ads::load_model, py::arg("path"));

  m.def("cost_volume", [](const U8Array& img, const ads::ClassifierModel& model) {
    const ads::GrayImage g = to_image(img);
    ads::CostVolume cv;
    {
      py::gil_scoped_release release;
      cv = ads::cost_volume(g, model);
    }
    return from_costs(cv);
  }, py::arg("img"), py::arg("model"));

  m.def("classify", [](const U8Array& img, const ads::ClassifierModel& model,
                       const ads::SmoothingParams& params, int trials, std::uint64_t seed,
                       std::optional<I32Array> truth) {
    const ads::GrayImage g = to_image(img);
    std::optional<ads::LabelImage> gt;
    if (truth) gt = to_labels(*truth);
    ads::ClassifyResult r;
    {
      py::gil_scoped_release release;
      r = ads::classify(g, model, params, trials, seed, gt ? &*gt : nullptr);
    }
    py::list labels;
    for (const auto& f : r.labels) labels.append(from_labels(f));
    py::dict report;
    report["trial_errors"] = r.report.trial_errors;
    report["mean_error"] = r.report.mean_error;
    report["confusion"] = r.report.confusion;
    report["energy_traces"] = r.report.energy_traces;
    return py::make_tuple(labels, report);
  }, py::arg("img"), py::arg("model"), py::arg("params") = ads::SmoothingParams{},
     py::arg("trials") = 20, py::arg("seed") = 0, py::arg("truth") = std::nullopt);

  m.def("argmin_labels", [](const F64Array& cv) { return from_labels(ads::argmin_labels(to_costs(cv))); });
  m.def("energy", [](const I32Array& f, const F64Array& cv, double u) {
    return ads::energy(to_labels(f), to_costs(cv), u);
  }, py::arg("labels"), py::arg("costs"), py::arg("u"));
  m.def("alpha_expansion", [](const F64Array& cv, double u, std::uint64_t seed) {
    const ads::ExpansionResult r = ads::alpha_expansion(to_costs(cv), u, seed);
    return py::make_tuple(from_labels(r.labels), r.energy_trace);
  }, py::arg("costs"), py::arg("u") = 0.16, py::arg("seed") = 0);
  m.def("error_rate", [](const I32Array& f, const I32Array& gt) {
    return ads::error_rate(to_labels(f), to_labels(gt));
  });
}
