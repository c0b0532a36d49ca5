#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cloudrca/bayesnet.hpp"
#include "cloudrca/data_model.hpp"

namespace cloudrca {

enum class NodeLayer { Metric, Module, Type };

const char* to_string(NodeLayer l);

/// Layered DAG. Nodes [0, n_metric) are the metric layer in feature order, followed by
/// module nodes (sorted by id) and type nodes (sorted by id).
struct KhbnStructure {
    std::vector<std::string> nodes;
    std::vector<NodeLayer> layers;
    std::map<std::string, std::size_t> index;
    std::set<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)
    std::size_t n_metric = 0;
    std::map<std::size_t, std::size_t> owner;  // metric or type node -> module node

    std::vector<std::size_t> parents(std::size_t v) const;
    std::vector<std::size_t> nodes_in(NodeLayer layer) const;
    std::vector<std::size_t> types_of(std::size_t module_node) const;
    /// Throws ValidationError if the edge set has a directed cycle.
    void validate() const;
    bool operator==(const KhbnStructure&) const = default;
};

/// Knowledge edges from the topology: module -> type for cause types, module -> metric for
/// ownership, module -> module for declared dependencies.
KhbnStructure allocate(const PlatformTopology& topo, const std::vector<std::string>& feature_ids);

struct CausalEdge {
    std::string from;
    std::string to;
    double strength = 0.0;
};

struct PcLearnResult {
    std::vector<CausalEdge> edges;
    std::vector<std::pair<std::string, std::string>> skeleton;
    std::vector<std::string> warnings;
};

/// PC over the metric features of `d` (positives and negatives alike).
PcLearnResult pc_learn(const Dataset& d, double alpha, std::size_t max_condition_size);

/// Adds type -> metric edges where a type's fault windows raise the metric's firing rate
/// above its rate in normal windows by at least `min_lift`. Only types of the metric's owner
/// module are considered.
void add_association_edges(KhbnStructure& s, const Dataset& d, double min_lift);

/// Adds causal metric -> metric edges, keeping at most `max_parents` strongest per child and
/// skipping any edge that would close a cycle.
void add_causal_edges(KhbnStructure& s, const std::vector<CausalEdge>& edges, std::size_t max_parents);

struct KhbnOptions {
    double alpha = 0.01;
    std::size_t max_condition_size = 2;
    std::size_t max_causal_parents = 2;
    double min_lift = 0.25;
    double confidence_floor = 0.2;
    bool learn_causal = true;

    void validate() const;
};

struct KhbnModel {
    KhbnStructure structure;
    bn::BinaryNetwork net;
    std::vector<std::string> feature_ids;
    std::vector<std::string> warnings;

    std::string fingerprint() const;
    std::string to_json() const;
    static KhbnModel from_json(const std::string& text);
};

/// Laplace-smoothed (pseudo-count 1) maximum-likelihood CPTs. Module and type states come from labels.
KhbnModel fit_cpts(const KhbnStructure& s, const Dataset& d);

/// allocate + association edges + PC causal edges + fit_cpts.
KhbnModel train_khbn(const PlatformTopology& topo, const Dataset& train, const KhbnOptions& opt);

struct Diagnosis {
    std::vector<std::pair<std::string, double>> types;    // descending score, ties by id
    std::vector<std::pair<std::string, double>> modules;  // descending P(module faulty | evidence)
    std::string best_type;
    std::string best_module;
    double best_module_probability = 0.0;
    bool novel_type = false;
    bool degenerate = false;
};

/// Scores every type t of module m as P(t = 1 | m = 1, e) * P(m = 1 | e) with e the metric bits.
Diagnosis infer(const KhbnModel& model, const std::vector<std::uint8_t>& observed);
/// As infer, but checks that the sample's feature ids match the model's.
Diagnosis infer(const KhbnModel& model, const std::vector<std::string>& feature_ids,
                const std::vector<std::uint8_t>& observed);
/// Raises novel_type when the best type score is below `confidence_floor`; the module answer stands.
Diagnosis infer_module_fallback(const KhbnModel& model, const std::vector<std::uint8_t>& observed,
                                double confidence_floor);

std::string diagnosis_to_json(const Diagnosis& d);

}  // namespace cloudrca
