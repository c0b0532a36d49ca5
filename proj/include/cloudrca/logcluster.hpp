#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cloudrca/logtpl.hpp"

namespace cloudrca {

using Vec = std::vector<double>;

struct EmbeddingOptions {
    std::size_t dim = 32;
    std::size_t window = 2;
    std::size_t epochs = 15;
    std::size_t negatives = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 7;
};

struct EmbeddingTable {
    std::size_t dim = 0;
    std::map<std::string, Vec> vectors;
    std::uint64_t fingerprint = 0;  // hash of the training corpus

    /// Vector for `token`; zero vector (and *miss = true) when out of vocabulary.
    Vec lookup(const std::string& token, bool* miss = nullptr) const;

    std::string to_json() const;
    static EmbeddingTable from_json(const std::string& text);
    bool operator==(const EmbeddingTable&) const = default;
};

/// Skip-gram with negative sampling over token sequences. Deterministic in `opt.seed`.
EmbeddingTable train_embeddings(const std::vector<Tokens>& corpus, const EmbeddingOptions& opt);

/// Mean of the non-wildcard token vectors (with multiplicity); zero for all-wildcard input.
Vec template_vector(const Tokens& tokens, const EmbeddingTable& e);
Vec template_vector(const Template& t, const EmbeddingTable& e);

/// Cosine similarity; 0 when either vector is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct LogPattern {
    int pattern_id = 0;
    std::vector<int> members;  // template ids, ascending
    int representative = 0;
    Vec representative_vector;
    double average_internal_similarity = 1.0;

    bool operator==(const LogPattern&) const = default;
};

/// Score(i) = mean over the other members j of (1 - cos(i, j)); 0 for a singleton.
double representative_score(int member, const std::vector<int>& members, const std::map<int, Vec>& vectors);
int select_representative(const std::vector<int>& members, const std::map<int, Vec>& vectors);

/// Average-linkage agglomerative clustering under cosine distance, merging while the
/// closest pair is strictly closer than `distance_threshold`. Pattern ids are 1..m in
/// order of each cluster's smallest template id.
std::vector<LogPattern> cluster(const std::map<int, Vec>& vectors, double distance_threshold);

/// Mean of the patterns' average internal similarities.
double compute_threshold(const std::vector<LogPattern>& patterns);

inline constexpr int kUnembeddablePattern = 0;

struct Assignment {
    int pattern_id = 0;
    bool created = false;
};

/// Assigns a template to a pattern. A template that is already a member keeps its pattern;
/// otherwise the most similar representative wins when its similarity is at least `theta`
/// (ties to the smaller id), else a new pattern is created with the input as representative.
Assignment assign_online(const Vec& vec, std::vector<LogPattern>& patterns, double theta,
                         int template_id = 0);

std::string patterns_to_json(const std::vector<LogPattern>& patterns, double theta);
std::pair<std::vector<LogPattern>, double> patterns_from_json(const std::string& text);

}  // namespace cloudrca
