#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vra/vra.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

template <typename T, typename Array>
vra::Matrix<T> to_matrix(const Array& a) {
    if (a.ndim() != 2) {
        throw vra::DimensionMismatch("expected a 2-D array");
    }
    vra::Matrix<T> m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.values().begin());
    return m;
}

template <typename T>
py::array_t<T> to_array(const vra::Matrix<T>& m) {
    py::array_t<T> out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

vra::PredictionSet prediction_set(const DoubleArray& values) {
    vra::PredictionSet p;
    p.values = to_matrix<double>(values);
    p.repeats = p.values.rows();
    p.video_ids.resize(p.values.cols());
    return p;
}

} // namespace

PYBIND11_MODULE(_vra, m) {
    m.doc() = "Core of the visual realism assessment pipeline";

    auto error = py::register_exception<vra::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<vra::ConfigError>(m, "ConfigError", error.ptr());
    auto data = py::register_exception<vra::DataError>(m, "DataError", error.ptr());
    py::register_exception<vra::NumericError>(m, "NumericError", error.ptr());
    // Most specific first: pybind11 tries translators in reverse registration order.
    py::register_exception<vra::TooFewFrames>(m, "TooFewFrames", data.ptr());

    m.def("plcc", [](const std::vector<double>& x, const std::vector<double>& y) { return vra::plcc(x, y); },
          "x"_a, "y"_a);
    m.def("srcc", [](const std::vector<double>& x, const std::vector<double>& y) { return vra::srcc(x, y); },
          "x"_a, "y"_a);
    m.def("rmse", [](const std::vector<double>& x, const std::vector<double>& y) { return vra::rmse_metric(x, y); },
          "x"_a, "y"_a);
    m.def("fractional_ranks", [](const std::vector<double>& v) { return vra::fractional_ranks(v); }, "values"_a);
    m.def(
        "final_score",
        [](const std::vector<std::pair<double, double>>& pairs) {
            std::vector<vra::SetMetrics> sets;
            for (const auto& [p, s] : pairs) {
                vra::SetMetrics sm;
                sm.plcc = p;
                sm.srcc = s;
                sets.push_back(sm);
            }
            return vra::final_score(sets);
        },
        "pairs"_a, "Unweighted mean over sets of (plcc + srcc) / 2; takes (plcc, srcc) pairs.");

    m.def(
        "pool",
        [](const DoubleArray& frames) {
            const auto p = vra::pool_concat(to_matrix<double>(frames));
            return py::make_tuple(p.mean, p.std);
        },
        "frames"_a, "Per-dimension mean and Bessel-corrected std of an (n, D) array.");

    m.def("average_predictions", [](const DoubleArray& v) { return vra::average_predictions(prediction_set(v)); },
          "values"_a);
    m.def("pairwise_consistency_rmse",
          [](const DoubleArray& v) { return vra::pairwise_consistency_rmse(prediction_set(v)); }, "values"_a);
    m.def(
        "ensemble",
        [](const std::vector<double>& a, const std::vector<double>& b, double wa, double wb) {
            return vra::ensemble_weighted(a, b, {wa, wb});
        },
        "a"_a, "b"_a, "weight_a"_a = 0.75, "weight_b"_a = 0.25);

    m.def(
        "scale_bbox",
        [](std::array<double, 4> box, double factor, double width, double height) {
            const auto s = vra::scale_bbox({box[0], box[1], box[2], box[3]}, factor, width, height);
            return std::array<double, 4>{s.x1, s.y1, s.x2, s.y2};
        },
        "box"_a, "factor"_a = vra::default_crop_scale, "width"_a, "height"_a);

    m.def("write_feature_file",
          [](const std::filesystem::path& path, const FloatArray& a) { vra::write_feature_file(path, to_matrix<float>(a)); },
          "path"_a, "frames"_a);
    m.def("read_feature_file", [](const std::filesystem::path& path) { return to_array(vra::read_feature_file(path)); },
          "path"_a);

    py::class_<vra::TrainedModel>(m, "Model")
        .def_static("load", &vra::load_checkpoint, "path"_a)
        .def("save", [](const vra::TrainedModel& model, const std::filesystem::path& p) { vra::save_checkpoint(model, p); },
             "path"_a)
        .def_property_readonly("input_dim", [](const vra::TrainedModel& model) { return model.params.input_dim(); })
        .def_property_readonly("hidden_dims", [](const vra::TrainedModel& model) { return model.params.hidden_dims(); })
        .def_property_readonly("sequence_length",
                               [](const vra::TrainedModel& model) { return model.config.sequence_length; })
        .def(
            "forward",
            [](const vra::TrainedModel& model, const std::vector<double>& x) {
                vra::RngStream unused(0);
                return vra::forward(model.params, x, vra::Mode::eval, unused);
            },
            "pooled"_a, "Eval-mode prediction for one pooled [mean, std] vector.")
        .def(
            "predict",
            [](const vra::TrainedModel& model, const FloatArray& frames, const std::string& video_id,
               std::size_t repeats, std::uint64_t seed) {
                const std::vector<vra::FrameFeatureMatrix> videos{{video_id, to_matrix<float>(frames)}};
                const auto p = vra::predict_repeated(model.params, videos, model.config.sequence_length, repeats,
                                                     seed, vra::Execution::sequential);
                return vra::average_predictions(p).front();
            },
            "frames"_a, "video_id"_a, "repeats"_a = 10, "seed"_a = 0,
            "Average of `repeats` window predictions for one video.");

}
