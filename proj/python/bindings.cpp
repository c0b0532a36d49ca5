#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cloudrca/config.hpp"
#include "cloudrca/eval.hpp"
#include "cloudrca/io.hpp"
#include "cloudrca/khbn.hpp"
#include "cloudrca/logtpl.hpp"
#include "cloudrca/pipeline.hpp"
#include "cloudrca/synth.hpp"
#include "cloudrca/tsdetect.hpp"

namespace py = pybind11;
using namespace cloudrca;

namespace {

PipelineOptions options_from(const std::optional<std::string>& config_json) {
    return config_json ? parse_run_config(*config_json).pipeline : PipelineOptions{};
}

TimeSeries series_from(const std::vector<double>& values, Timestamp step) {
    TimeSeries s;
    s.metric_id = "series";
    s.values = values;
    s.timestamps.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) s.timestamps.push_back(static_cast<Timestamp>(i) * step);
    return s;
}

}  // namespace

PYBIND11_MODULE(_cloudrca, m) {
    m.doc() = "Native core of cloudrca";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    py::class_<Corpus>(m, "Corpus")
        .def_property_readonly("platform_id", [](const Corpus& c) { return c.topology.platform_id; })
        .def_property_readonly("n_metrics", [](const Corpus& c) { return c.metrics.size(); })
        .def_property_readonly("n_logs", [](const Corpus& c) { return c.logs.size(); })
        .def_property_readonly("n_windows", [](const Corpus& c) { return c.windows.size(); })
        .def_property_readonly("topology_json", [](const Corpus& c) { return topology_to_json(c.topology); })
        .def("save", [](const Corpus& c, const std::filesystem::path& dir) { write_corpus(c, dir); }, py::arg("dir"));

    m.def("load_corpus", &load_corpus, py::arg("dir"));
    m.def("standard_benchmark", &synth::standard_benchmark, py::arg("seed") = 1,
          "The three synthetic benchmark platforms, largest first.");

    m.def(
        "run_pipeline_json",
        [](const Corpus& c, const std::optional<std::string>& config_json) {
            const auto opt = options_from(config_json);
            py::gil_scoped_release release;
            const auto r = run_pipeline(c, opt);
            return std::make_tuple(eval_report_to_json(r.report), r.node_count, r.seconds);
        },
        py::arg("corpus"), py::arg("config_json") = py::none());

    m.def(
        "detect_json",
        [](const std::vector<double>& values, long long split, const std::optional<std::string>& detection_json,
           Timestamp step) {
            const DetectionConfig cfg = detection_json ? parse_detection_config(*detection_json) : DetectionConfig{};
            const auto s = series_from(values, step);
            const auto r = split < 0 ? detect_anomalies(s, cfg) : detect_anomalies(s, split * step, cfg);
            return reports_to_json({r});
        },
        py::arg("values"), py::arg("split") = -1, py::arg("detection_json") = py::none(), py::arg("step") = 1);

    m.def(
        "decompose",
        [](const std::vector<double>& values, int period) {
            const auto d = decompose(std::span<const double>(values), period);
            return std::make_tuple(d.trend, d.seasonal, d.remainder);
        },
        py::arg("values"), py::arg("period"));

    m.def(
        "detect_period",
        [](const std::vector<double>& x, int max_period, double acf_threshold) {
            return detect_period(std::span<const double>(x), max_period, acf_threshold);
        },
        py::arg("values"), py::arg("max_period") = 24, py::arg("acf_threshold") = 0.3);
    m.def("mann_kendall_s", [](const std::vector<double>& x) { return mann_kendall_s(std::span<const double>(x)); },
          py::arg("values"));

    m.def("preprocess", [](const std::string& message) { return preprocess(message); }, py::arg("message"));

    m.def(
        "train_khbn_json",
        [](const std::string& topology_json, const std::string& dataset_json, const std::optional<std::string>& config_json) {
            const auto opt = options_from(config_json).khbn;
            return train_khbn(parse_topology(topology_json), parse_dataset(dataset_json), opt).to_json();
        },
        py::arg("topology_json"), py::arg("dataset_json"), py::arg("config_json") = py::none());

    m.def(
        "infer_json",
        [](const std::string& model_json, const std::vector<std::uint8_t>& bits, std::optional<double> floor) {
            const auto model = KhbnModel::from_json(model_json);
            return diagnosis_to_json(floor ? infer_module_fallback(model, bits, *floor) : infer(model, bits));
        },
        py::arg("model_json"), py::arg("bits"), py::arg("confidence_floor") = py::none());

    m.def("validate_config", [](const std::string& text) { return run_config_to_json(parse_run_config(text)); },
          py::arg("config_json"));
}
