#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cloudrca/data_model.hpp"

namespace cloudrca {

enum class AnomalyKind { SpikeDip, VarianceChange, MeanChange, LongTrend };

const char* to_string(AnomalyKind k);
AnomalyKind anomaly_kind_from_string(const std::string& s);

struct DecompositionResult {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> remainder;
    int period = 0;
};

/// Outcome of a single hypothesis test.
struct TestOutcome {
    double statistic = 0.0;
    double threshold = 0.0;  // critical value of the statistic at the chosen alpha
    double p_value = 1.0;
    bool decision = false;
};

struct Finding {
    AnomalyKind kind;
    Timestamp start;  // inclusive
    Timestamp end;    // exclusive
};

struct AnomalyReport {
    std::string metric_id;
    Timestamp window_start = 0;
    Timestamp window_end = 0;
    int period = 0;
    bool too_short = false;
    std::set<AnomalyKind> findings;
    std::vector<Finding> spans;
    std::map<std::string, TestOutcome> statistics;  // keyed by test name: esd, f_test, t_test, mann_kendall

    bool any_in(Timestamp start, Timestamp end) const;
};

struct TrendFilterOptions {
    double lambda = 50.0;
    double tolerance = 1e-6;
    int max_iterations = 200;
};

struct DetectionConfig {
    double alpha_esd = 0.05;
    double alpha_f = 0.05;
    double alpha_t = 0.05;
    double alpha_mk = 0.05;
    std::size_t min_length = 20;
    int max_period = 24;
    double acf_threshold = 0.3;
    std::size_t esd_max_anomalies = 5;
    /// Fraction of nominal degrees of freedom credited to MAD-based variances in the F test.
    double f_df_efficiency = 0.37;
    /// Mean-change and trend tests treat fluctuations below this many remainder sigmas as noise.
    double trend_noise_sigmas = 1.5;
    TrendFilterOptions trend_filter;

    void validate() const;
};

/// Seasonal period in samples, or 0 when none qualifies.
int detect_period(std::span<const double> values, int max_period, double acf_threshold);
int detect_period(const TimeSeries& s, int max_period, double acf_threshold);

/// Robust L1 trend filter: minimises sum |x - t| + lambda * sum |second difference of t|.
std::vector<double> l1_trend_filter(std::span<const double> x, const TrendFilterOptions& opt = {});

/// Additive decomposition; trend + seasonal + remainder reproduces the input exactly
/// when summed in that order.
DecompositionResult decompose(std::span<const double> values, int period, const TrendFilterOptions& opt = {});
DecompositionResult decompose(const TimeSeries& s, int period, const TrendFilterOptions& opt = {});

/// Generalised ESD with median/MAD studentisation. Returns flagged indices, most extreme first.
std::vector<std::size_t> test_spikes_dips(std::span<const double> remainder, double alpha, std::size_t max_anomalies);

/// F test on robust variances of [0, split) vs [split, n). `df_efficiency` scales nominal degrees of freedom.
TestOutcome test_variance_change(std::span<const double> remainder, std::size_t split, double alpha,
                                 double df_efficiency = 1.0);

/// Welch T on segment medians with MAD scales. Segment scales are floored at `scale_floor`.
TestOutcome test_mean_change(std::span<const double> trend, std::size_t split, double alpha,
                             double scale_floor = 0.0);

/// Mann-Kendall trend test. Pairs differing by at most `tolerance` count as ties.
TestOutcome test_long_trend(std::span<const double> trend, double alpha, double tolerance = 0.0);
/// The Mann-Kendall S statistic alone.
long long mann_kendall_s(std::span<const double> x, double tolerance = 0.0);

/// Runs the routed test battery on `s`, treating points before `split_ts` as the reference segment.
AnomalyReport detect_anomalies(const TimeSeries& s, Timestamp split_ts, const DetectionConfig& cfg);
/// Same, splitting at the midpoint of the series.
AnomalyReport detect_anomalies(const TimeSeries& s, const DetectionConfig& cfg);
/// Routed tests on an existing decomposition (lets callers reuse one decomposition across alphas).
AnomalyReport detect_on_decomposition(const TimeSeries& s, const DecompositionResult& d, std::size_t split,
                                      const DetectionConfig& cfg);

/// The alpha-independent half of detection: period, decomposition and split index.
struct PreparedSeries {
    TimeSeries series;
    DecompositionResult decomposition;
    std::size_t split = 0;
    bool too_short = false;
};

/// Uses cfg.min_length, max_period, acf_threshold and trend_filter; the alphas are not read.
PreparedSeries prepare_series(TimeSeries s, Timestamp split_ts, const DetectionConfig& cfg);
/// detect_anomalies(s, split_ts, cfg) == detect_prepared(prepare_series(s, split_ts, cfg), cfg).
AnomalyReport detect_prepared(const PreparedSeries& p, const DetectionConfig& cfg);

/// Sliding window keeping a sorted copy of its contents so that median and MAD update in O(capacity).
class RobustWindow {
public:
    explicit RobustWindow(std::size_t capacity);

    void update(double value);
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }
    double median() const;
    double mad() const;

private:
    std::size_t capacity_;
    std::vector<double> sorted_;
    std::deque<double> fifo_;
};

/// Functional form: returns the window after inserting `value`.
RobustWindow update_window(RobustWindow w, double value);

}  // namespace cloudrca
