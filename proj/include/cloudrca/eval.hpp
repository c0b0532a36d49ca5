#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cloudrca/data_model.hpp"
#include "cloudrca/khbn.hpp"
#include "cloudrca/pipeline.hpp"

namespace cloudrca {

struct Prediction {
    std::string predicted;
    std::string truth;
};

inline constexpr double kCoverThreshold = 0.6;

struct EvalReport {
    std::map<std::string, double> per_type_precision;
    double precision = 0.0;
    double cover_rate = 0.0;
    double f1 = 0.0;
    std::set<std::string> covered;
    std::map<std::string, std::map<std::string, std::size_t>> confusion;  // truth -> predicted -> count

    bool operator==(const EvalReport&) const = default;
};

/// Per-type precision is the fraction of a true type's samples predicted correctly; a type is
/// covered when that fraction is at least 0.6. With `topo`, every true type must be declared there.
EvalReport evaluate(const std::vector<Prediction>& predictions, const PlatformTopology* topo = nullptr);

std::string eval_report_to_json(const EvalReport& r);
std::string eval_report_table(const EvalReport& r);

/// Best-type prediction for every negative sample of `test`; feature ids must match the model.
std::vector<Prediction> predict(const KhbnModel& model, const Dataset& test);

struct RunResult {
    EvalReport report;
    KhbnModel model;
    std::vector<Prediction> predictions;
    std::size_t node_count = 0;  // features + modules + types
    double seconds = 0.0;
};

/// Trains on data.train and predicts the best type of every negative test sample.
RunResult train_and_evaluate(const PreparedData& data, const PipelineOptions& opt);
/// prepare_data + train_and_evaluate; seconds covers both.
RunResult run_pipeline(const Corpus& corpus, const PipelineOptions& opt, const DetectionCache* cache = nullptr);

struct AblationToggles {
    bool anomaly_detection = true;
    bool template_extraction = true;
    bool clustering = true;

    std::string name() const;
};

/// Full pipeline followed by each single stage switched off.
std::vector<AblationToggles> standard_ablations();

struct AblationRow {
    AblationToggles toggles;
    EvalReport report;
    std::size_t node_count = 0;
    double seconds = 0.0;
};

std::vector<AblationRow> run_ablation(const Corpus& corpus, const PipelineOptions& opt,
                                      const std::vector<AblationToggles>& configs = standard_ablations(),
                                      const DetectionCache* cache = nullptr);
std::string ablation_to_json(const std::vector<AblationRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

/// For every target dataset, imports the other datasets' negatives whose label module is shared,
/// restricted to the target's features owned by that module and present in the donor (missing
/// ones zero-filled). `topologies[i]` owns the features of `datasets[i]`.
std::vector<Dataset> transfer_pool(const std::vector<Dataset>& datasets, const std::vector<PlatformTopology>& topologies,
                                   const std::set<std::string>& shared_modules,
                                   std::vector<std::string>* warnings = nullptr);

struct TransferOutcome {
    std::string target;
    std::size_t imported = 0;
    EvalReport baseline;  // shared-module test faults, target data only
    EvalReport pooled;    // same test faults, donors' shared-module faults added to training
    std::vector<std::string> warnings;
};

/// Target = the corpus with the fewest windows. Donor windows are featurized through the
/// target's log model so that feature ids align.
TransferOutcome run_transfer(const std::vector<Corpus>& corpora, const std::set<std::string>& shared_modules,
                             const PipelineOptions& opt);
std::string transfer_to_json(const TransferOutcome& t);

struct NovelTypeOutcome {
    std::vector<std::string> held_out;
    std::size_t faults = 0;
    double module_accuracy = 0.0;
    double flag_rate = 0.0;
};

/// Holds out the lexicographically last type of every module: removed from the topology and from
/// training, then all of its faults are diagnosed with the module fallback.
NovelTypeOutcome run_novel_type(const Corpus& corpus, const PipelineOptions& opt, const DetectionCache* cache = nullptr);
std::string novel_type_to_json(const NovelTypeOutcome& n);

}  // namespace cloudrca
