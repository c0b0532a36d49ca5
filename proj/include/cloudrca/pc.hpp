#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cloudrca::pc {

/// Column-major binary data: one bitset per variable over the samples.
class BinaryData {
public:
    BinaryData(std::size_t n_vars, std::size_t n_samples);
    /// rows[s][v] in {0, 1}.
    static BinaryData from_rows(const std::vector<std::vector<std::uint8_t>>& rows, std::size_t n_vars);

    void set(std::size_t var, std::size_t sample);
    bool get(std::size_t var, std::size_t sample) const;
    std::size_t vars() const noexcept { return n_vars_; }
    std::size_t samples() const noexcept { return n_samples_; }
    const std::vector<std::uint64_t>& column(std::size_t var) const { return cols_[var]; }
    std::size_t words() const noexcept { return words_; }

private:
    std::size_t n_vars_, n_samples_, words_;
    std::vector<std::vector<std::uint64_t>> cols_;
};

struct G2Result {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    bool low_power = false;  // fewer than 5 samples per cell on average
};

/// G^2 test of x independent of y given the variables in `cond`. Degrees of freedom
/// count only the non-empty margins of each stratum.
G2Result g2_test(const BinaryData& data, std::size_t x, std::size_t y, const std::vector<std::size_t>& cond);

struct Options {
    double alpha = 0.01;
    std::size_t max_condition_size = 2;
};

struct Edge {
    std::size_t from;
    std::size_t to;
    double strength;  // smallest G^2 statistic seen while the edge survived

    bool operator==(const Edge& o) const { return from == o.from && to == o.to; }
};

struct Result {
    std::vector<std::pair<std::size_t, std::size_t>> skeleton;  // (a, b) with a < b
    std::vector<Edge> edges;                                    // oriented, acyclic
    std::vector<std::string> warnings;
};

/// PC algorithm: skeleton by conditional-independence pruning, v-structures, Meek rules,
/// then lexicographic orientation of what is left (flipped where it would close a cycle).
Result learn(const BinaryData& data, const Options& opt);

}  // namespace cloudrca::pc
