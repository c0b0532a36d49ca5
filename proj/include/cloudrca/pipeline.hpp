#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cloudrca/data_model.hpp"
#include "cloudrca/features.hpp"
#include "cloudrca/khbn.hpp"
#include "cloudrca/logcluster.hpp"
#include "cloudrca/logtpl.hpp"
#include "cloudrca/tsdetect.hpp"

namespace cloudrca {

/// Raw telemetry of one platform plus its observation windows (bits empty, labels on faults).
struct Corpus {
    std::vector<TimeSeries> metrics;
    std::vector<LogRecord> logs;
    PlatformTopology topology;
    std::vector<Sample> windows;

    bool operator==(const Corpus&) const = default;
};

inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kLogsFile = "logs.txt";
inline constexpr const char* kTopologyFile = "topology.json";
inline constexpr const char* kWindowsFile = "windows.json";

/// A corpus directory holds the four files above.
Corpus load_corpus(const std::filesystem::path& dir);
void write_corpus(const Corpus& c, const std::filesystem::path& dir);

/// Windows as a featureless dataset, the on-disk form of a window list.
Dataset windows_dataset(const std::string& platform_id, const std::vector<Sample>& windows);

/// Every (metric, window) pair sliced to [window_start - lookback, window_end) and decomposed once.
/// Reports for any alpha setting are then cheap.
class DetectionCache {
public:
    /// `lookback` <= 0 means "one window length".
    DetectionCache(const std::vector<TimeSeries>& metrics, const std::vector<Sample>& windows,
                   const DetectionConfig& cfg, Timestamp lookback = 0);

    /// One report per (metric, window), metric-major.
    std::vector<AnomalyReport> reports(const DetectionConfig& cfg) const;
    std::size_t size() const noexcept { return prepared_.size(); }

private:
    std::vector<PreparedSeries> prepared_;
};

/// Stand-in used when anomaly detection is switched off: a window point is flagged when its raw
/// value lies more than `z` standard deviations from the mean of the lookback segment.
std::vector<AnomalyReport> naive_reports(const std::vector<TimeSeries>& metrics, const std::vector<Sample>& windows,
                                         Timestamp lookback = 0, double z = 3.0);

struct LogModelOptions {
    TreeBuildOptions tree;
    EmbeddingOptions embedding;
    /// Each distinct preprocessed message contributes at most this many copies to the embedding corpus.
    std::size_t embed_max_copies = 16;
    double distance_threshold = 0.3;
    std::optional<double> theta;
    bool template_extraction = true;
    bool clustering = true;

    void validate() const;
};

/// Frozen log featurizer: message -> template -> pattern -> `log:` feature id.
struct LogModel {
    LogModelOptions options;
    TemplateTree tree;
    EmbeddingTable embeddings;
    std::vector<LogPattern> patterns;
    double theta = 0.0;
    std::map<int, std::string> template_feature;
    /// Feature ids of whole messages, used when template extraction is off.
    std::map<std::string, std::string> message_feature;
    std::map<std::string, std::string> feature_owner;

    std::optional<std::string> feature_of(std::string_view message) const;
    std::vector<PatternOccurrence> occurrences(const std::vector<LogRecord>& logs) const;
    /// `topo` with this model's log features registered as owned patterns.
    PlatformTopology extend(const PlatformTopology& topo) const;
};

/// Builds the template tree, embeddings and patterns from `logs`.
LogModel fit_log_model(const std::vector<LogRecord>& logs, const LogModelOptions& opt);

struct TemplateClustering {
    EmbeddingTable embeddings;
    std::vector<LogPattern> patterns;
    double theta = 0.0;
};

/// Trains embeddings on `logs` and clusters the tree's templates.
TemplateClustering cluster_templates(const TemplateTree& tree, const std::vector<LogRecord>& logs,
                                     const LogModelOptions& opt);

/// A model from an existing tree and patterns (no patterns: every template is its own feature).
/// Feature owners are the majority module of the matching records in `logs`.
LogModel assemble_log_model(TemplateTree tree, std::vector<LogPattern> patterns, double theta,
                            const std::vector<LogRecord>& logs, const LogModelOptions& opt);

/// Logs whose timestamp falls inside any of `windows`.
std::vector<LogRecord> logs_in_windows(const std::vector<LogRecord>& logs, const std::vector<Sample>& windows);

struct PipelineOptions {
    DetectionConfig detection;
    LogModelOptions log;
    std::size_t k = 200;
    KhbnOptions khbn;
    double train_fraction = 0.6;
    std::uint64_t seed = 1;
    bool anomaly_detection = true;
    /// <= 0 means "one window length".
    Timestamp lookback = 0;

    void validate() const;
};

/// Train and test windows, both featurized with the same log model and selected feature set.
struct PreparedData {
    LogModel log_model;
    PlatformTopology topology;  // extended with log features
    Dataset train;
    Dataset test;
    std::map<std::string, double> selection_scores;
};

/// Featurizes `windows` through `lm`. Reports for metrics missing from `topo` are ignored.
Dataset featurize(const std::vector<AnomalyReport>& reports, const LogModel& lm, const std::vector<LogRecord>& logs,
                  const std::vector<Sample>& windows, const PlatformTopology& topo);

/// Featurizes both window lists through `log_model`, selects k features on the training side and
/// projects the test side onto them.
PreparedData featurize_split(const std::vector<AnomalyReport>& reports, LogModel log_model,
                             const std::vector<LogRecord>& logs, const std::vector<Sample>& train_windows,
                             const std::vector<Sample>& test_windows, const PlatformTopology& topology, std::size_t k);

/// Split, detect, fit the log model on training windows, featurize both sides and select k features.
/// `cache` may be null; it must have been built over `corpus.windows` when given.
PreparedData prepare_data(const Corpus& corpus, const PipelineOptions& opt, const DetectionCache* cache = nullptr);
/// As above with an explicit split; both window lists must come from `corpus.windows`.
/// `topology` replaces corpus.topology when given.
PreparedData prepare_data(const Corpus& corpus, const std::vector<Sample>& train_windows,
                          const std::vector<Sample>& test_windows, const PipelineOptions& opt,
                          const DetectionCache* cache = nullptr, const PlatformTopology* topology = nullptr);

}  // namespace cloudrca
