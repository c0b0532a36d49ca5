#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cloudrca/data_model.hpp"
#include "cloudrca/tsdetect.hpp"

namespace cloudrca {

/// One occurrence of a log feature (already mapped to its `log:` feature id).
struct PatternOccurrence {
    std::string feature_id;
    Timestamp timestamp = 0;
};

struct FeatureMatrix {
    Dataset data;
    std::map<std::string, double> selection_scores;
    /// Rows whose window saw no telemetry at all (all-zero by construction).
    std::vector<std::size_t> uncovered_rows;
};

/// Feature ids implied by a topology: `kpi:` ids for owned metrics, then the `log:` pattern ids.
std::vector<std::string> topology_feature_ids(const PlatformTopology& topo);

/// Builds one row per window. A `kpi:` bit is set when any finding of a report for that metric
/// overlaps the window; a `log:` bit is set when the pattern occurs inside the window.
FeatureMatrix build_matrix(const std::vector<AnomalyReport>& reports, const std::vector<PatternOccurrence>& occurrences,
                           const std::vector<Sample>& windows, const PlatformTopology& topo);

/// TF-IDF score per feature with documents = negative samples grouped by root-cause type.
std::map<std::string, double> tfidf_scores(const Dataset& d);

/// Keeps the k best-scoring features (ties to the earlier column), in their original order.
FeatureMatrix tfidf_select(const FeatureMatrix& m, std::size_t k);

/// Restricts (and zero-fills) a dataset to `feature_ids`.
Dataset project_features(const Dataset& d, const std::vector<std::string>& feature_ids);

}  // namespace cloudrca
