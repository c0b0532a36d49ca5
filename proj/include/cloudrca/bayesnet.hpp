#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cloudrca::bn {

/// Discrete network over binary variables 0..n-1.
/// cpt[v][c] = P(v = 1 | parents in configuration c), where bit j of c is the state of parents[v][j].
struct BinaryNetwork {
    std::vector<std::vector<std::size_t>> parents;
    std::vector<std::vector<double>> cpt;

    std::size_t size() const noexcept { return parents.size(); }
    /// Throws std::invalid_argument on a cycle, bad parent index or malformed table.
    void validate() const;
    /// Topological order (ties to the smaller index). Throws on a cycle.
    std::vector<std::size_t> topological_order() const;
};

/// Factor over binary variables; entry index bit j is the state of vars[j]. Values are
/// scaled by exp(log_scale) to keep long products away from underflow.
struct Factor {
    std::vector<std::size_t> vars;  // ascending
    std::vector<double> table;
    double log_scale = 0.0;
};

Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, std::size_t var);

/// Evidence: -1 = unobserved, 0/1 = clamped state.
using Evidence = std::vector<std::int8_t>;

struct Posterior {
    std::vector<std::size_t> vars;  // ascending, as requested
    std::vector<double> probs;      // normalised joint over vars, same indexing as Factor
    double log_evidence = 0.0;      // log P(evidence)
    bool degenerate = false;        // P(evidence) == 0; probs are uniform
};

/// Exact joint posterior over `query` given `evidence`, by variable elimination with
/// barren-node pruning and a greedy min-degree order.
Posterior query(const BinaryNetwork& net, const Evidence& evidence, std::vector<std::size_t> query);

/// P(var = 1 | evidence); 0 or 1 when var itself is observed.
double marginal(const BinaryNetwork& net, const Evidence& evidence, std::size_t var);

}  // namespace cloudrca::bn
