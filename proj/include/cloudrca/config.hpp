#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cloudrca/pipeline.hpp"
#include "cloudrca/tsdetect.hpp"

namespace cloudrca {

struct RunPaths {
    std::optional<std::string> metrics;
    std::optional<std::string> logs;
    std::optional<std::string> topology;
    std::optional<std::string> windows;
    std::optional<std::string> model;
    std::optional<std::string> output_dir;

    bool operator==(const RunPaths&) const = default;
};

/// Every tunable of a run. JSON sections: paths, detection, templates, clustering, features,
/// khbn, split, stages, plus a top-level seed. Absent keys keep their defaults.
struct RunConfig {
    RunPaths paths;
    PipelineOptions pipeline;

    void validate() const;
};

/// Unknown keys, wrong types and out-of-range values raise ValidationError naming the key path,
/// e.g. "detection.alpha_esd".
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

/// The detection section on its own: {"alpha_esd", ..., "esd_max_anomalies"}.
DetectionConfig parse_detection_config(const std::string& json_text);
std::string detection_config_to_json(const DetectionConfig& cfg);

}  // namespace cloudrca
