#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cloudrca/pipeline.hpp"
#include "cloudrca/tsdetect.hpp"

namespace cloudrca::synth {

struct MetricSpec {
    std::string metric_id;
    double base = 100.0;
    double amplitude = 10.0;
    int period = 12;  // in points
    double noise = 2.0;
};

/// Log templates may contain the placeholders {name}, {num}, {ip}, {path} and {hex}.
struct ModuleSpec {
    std::string module_id;
    std::vector<MetricSpec> metrics;
    std::vector<std::string> chatter;
};

struct MetricEffect {
    std::string metric_id;
    AnomalyKind kind = AnomalyKind::MeanChange;
    double probability = 1.0;
};

struct FaultSignature {
    std::string type_id;
    std::string module_id;
    std::vector<MetricEffect> effects;
    /// Paraphrases of the fault's log line; each fault picks one for its whole burst.
    std::vector<std::string> log_templates;
    double burst_probability = 1.0;
};

struct PlatformSpec {
    std::string platform_id;
    std::vector<ModuleSpec> modules;
    std::vector<FaultSignature> types;
    std::set<std::pair<std::string, std::string>> dependencies;
    std::vector<std::string> names;  // pool for {name}
    /// Per-module fault counts; when set they replace n_faults_per_type and are spread evenly
    /// over the module's types.
    std::map<std::string, std::size_t> module_fault_counts;

    Timestamp start = 1'700'000'000;
    Timestamp step = 15;
    std::size_t window_points = 40;
    std::size_t lookback_points = 40;
    double chatter_interval = 90.0;  // mean seconds between chatter lines per module

    double spike_sigmas = 8.0;
    double variance_factor = 3.0;
    double shift_sigmas = 5.0;
    double drift_sigmas_per_period = 2.0;
    std::size_t burst_min = 10;
    std::size_t burst_max = 50;
    std::uint64_t seed = 1;

    void validate() const;
    PlatformTopology topology() const;
};

using GeneratedCorpus = Corpus;

/// Normal segments carry seasonal signal, Gaussian noise and chatter; fault segments additionally
/// carry the signature's injected anomalies and log burst inside the window. Deterministic in spec.seed.
GeneratedCorpus generate(const PlatformSpec& spec, std::size_t n_normal, std::size_t n_faults_per_type);

/// The three benchmark platforms, largest first: "batch", "stream", "olap". They share the
/// host and network modules (metrics, types and log vocabulary).
std::vector<PlatformSpec> standard_specs(std::uint64_t seed);
std::vector<GeneratedCorpus> standard_benchmark(std::uint64_t seed);

/// Modules whose definitions are identical across the standard platforms.
std::set<std::string> standard_shared_modules();

/// Normal-window counts of the standard platforms, in standard_specs order.
std::vector<std::size_t> standard_normal_counts();

}  // namespace cloudrca::synth
