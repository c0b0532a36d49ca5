#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cloudrca {

using Timestamp = std::int64_t;  // epoch seconds

/// Raised when input data violates a documented invariant. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line)
        : ValidationError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct TimeSeries {
    std::string metric_id;
    std::string module_id;
    std::vector<Timestamp> timestamps;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    /// Throws ValidationError unless timestamps are strictly increasing and match values in length.
    void validate() const;
    /// Points with start <= ts < end.
    TimeSeries slice(Timestamp start, Timestamp end) const;

    bool operator==(const TimeSeries&) const = default;
};

struct LogRecord {
    Timestamp timestamp = 0;
    std::string module_id;
    std::string message;

    bool operator==(const LogRecord&) const = default;
};

struct PlatformTopology {
    std::string platform_id;
    std::set<std::string> modules;
    std::map<std::string, std::string> metric_owner;
    std::map<std::string, std::string> pattern_owner;
    std::map<std::string, std::string> cause_types;  // type_id -> module_id
    std::set<std::pair<std::string, std::string>> module_dependencies;

    void validate() const;
    /// Types owned by `module`, in lexicographic order.
    std::vector<std::string> types_of(const std::string& module) const;
    /// Owner of a `kpi:` or `log:` feature id, if known.
    std::optional<std::string> feature_owner(const std::string& feature_id) const;

    bool operator==(const PlatformTopology&) const = default;
};

enum class Polarity { Positive, Negative };

struct Label {
    std::string module_id;
    std::string type_id;

    bool operator==(const Label&) const = default;
    auto operator<=>(const Label&) const = default;
};

/// One observation window. Bits are aligned with the owning Dataset's feature_ids.
struct Sample {
    Timestamp window_start = 0;
    Timestamp window_end = 0;
    std::vector<std::uint8_t> bits;
    std::optional<Label> label;
    Polarity polarity = Polarity::Positive;

    bool operator==(const Sample&) const = default;
};

struct Dataset {
    std::string platform_id;
    std::vector<std::string> feature_ids;
    std::vector<Sample> samples;

    /// Checks bit widths, window ordering, labels on negatives and, when given, label types.
    void validate(const PlatformTopology* topo = nullptr) const;
    std::optional<std::size_t> feature_index(const std::string& id) const;

    bool operator==(const Dataset&) const = default;
};

struct SplitResult {
    Dataset train;
    Dataset test;
    /// Types with fewer than two negatives; they cannot appear on both sides.
    std::vector<std::string> undersized_types;
};

/// Positives all go to training; negatives are split per type at `train_fraction`, deterministic in `seed`.
SplitResult split_dataset(const Dataset& d, double train_fraction, std::uint64_t seed);

inline constexpr const char* kKpiPrefix = "kpi:";
inline constexpr const char* kLogPrefix = "log:";

inline std::string kpi_feature(const std::string& metric_id) { return kKpiPrefix + metric_id; }
inline std::string log_feature(const std::string& pattern_name) { return kLogPrefix + pattern_name; }

}  // namespace cloudrca
