#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cloudrca/tsdetect.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cloudrca;

namespace {

std::vector<double> sinusoid(std::size_t n, double period, double amp = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period);
    return v;
}

TimeSeries as_series(const std::vector<double>& v, Timestamp step = 15) {
    TimeSeries s{"m", "host", {}, v};
    for (std::size_t i = 0; i < v.size(); ++i) s.timestamps.push_back(static_cast<Timestamp>(i) * step);
    return s;
}

double sample_acf(const std::vector<double>& x, std::size_t lag) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) den += (x[i] - m) * (x[i] - m);
    for (std::size_t i = 0; i + lag < x.size(); ++i) num += (x[i] - m) * (x[i + lag] - m);
    return num / den;
}

void expect_exact_additivity(const std::vector<double>& x, const DecompositionResult& d) {
    ASSERT_EQ(d.trend.size(), x.size());
    ASSERT_EQ(d.seasonal.size(), x.size());
    ASSERT_EQ(d.remainder.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ASSERT_EQ(d.trend[i] + d.seasonal[i] + d.remainder[i], x[i]) << "at " << i;
    }
}

}  // namespace

// ---------------------------------------------------------------- period

TEST(Period, CleanSinusoid) {
    const auto x = sinusoid(240, 24.0);
    EXPECT_EQ(detect_period(x, 30, 0.3), 24);
}

TEST(Period, ConstantSeries) {
    EXPECT_EQ(detect_period(std::vector<double>(100, 4.2), 24, 0.3), 0);
}

TEST(Period, WhiteNoiseBelowThreshold) {
    const auto x = test_support::gaussian(200, 1.0, 11);
    for (std::size_t lag = 2; lag <= 24; ++lag) ASSERT_LT(sample_acf(x, lag), 0.5) << "fixture check at lag " << lag;
    EXPECT_EQ(detect_period(x, 24, 0.5), 0);
}

TEST(Period, RespectsBounds) {
    const auto x = sinusoid(240, 24.0);
    const int p = detect_period(x, 12, 0.3);
    EXPECT_TRUE(p == 0 || (p >= 2 && p <= 12));
}

TEST(Period, RobustToTenPercentOutliers) {
    std::mt19937_64 rng(5);
    auto x = sinusoid(240, 24.0);
    const auto noise = test_support::gaussian(240, 0.05, 6);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += noise[i];
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < 24; ++k) x[idx[k]] *= 10.0;
    const int p = detect_period(x, 30, 0.3);
    EXPECT_GE(p, 23);
    EXPECT_LE(p, 25);
}

// ---------------------------------------------------------------- decomposition

TEST(Decompose, LinearRampIsAllTrend) {
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    const auto d = decompose(x, 0);
    expect_exact_additivity(x, d);
    EXPECT_EQ(d.period, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(d.seasonal[i], 0.0);
        EXPECT_NEAR(d.remainder[i], 0.0, 1e-6);
    }
}

TEST(Decompose, SquareWaveGoesToSeasonal) {
    std::vector<double> x;
    for (int c = 0; c < 12; ++c) x.insert(x.end(), {3.0, 3.0, -3.0, -3.0});
    const auto d = decompose(x, 4);
    expect_exact_additivity(x, d);
    const auto [lo, hi] = std::minmax_element(d.trend.begin(), d.trend.end());
    EXPECT_LT(*hi - *lo, 1e-6);  // trend is a constant level
    EXPECT_NEAR(d.trend.front(), 0.0, 1e-6);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(d.seasonal[i], x[i], 1e-6);
        EXPECT_NEAR(d.remainder[i], 0.0, 1e-6);
    }
}

TEST(Decompose, AdditivityIsExactOnRandomFixtures) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 40 + seed * 7;
        const int period = seed % 3 == 0 ? 0 : static_cast<int>(4 + seed % 9);
        auto x = test_support::gaussian(n, 1.0 + static_cast<double>(seed), seed + 100, 1e3 * static_cast<double>(seed));
        const auto wave = sinusoid(n, period ? period : 10.0, 5.0);
        for (std::size_t i = 0; i < n; ++i) x[i] += wave[i] + 0.01 * static_cast<double>(i * i);
        expect_exact_additivity(x, decompose(x, period));
    }
}

TEST(Decompose, ZeroPeriodMeansZeroSeasonal) {
    const auto x = test_support::gaussian(60, 1.0, 3);
    const auto d = decompose(x, 0);
    for (double s : d.seasonal) EXPECT_EQ(s, 0.0);
}

TEST(Decompose, PeriodOutOfBoundsRejected) {
    const auto x = test_support::gaussian(30, 1.0, 3);
    EXPECT_THROW(decompose(x, 1), std::invalid_argument);
    EXPECT_THROW(decompose(x, 16), std::invalid_argument);
    EXPECT_NO_THROW(decompose(x, 15));
}

TEST(Decompose, ShiftEquivariance) {
    // Kept away from zero: near-zero points cannot be split bit-exactly and are folded into the trend.
    auto x = test_support::gaussian(96, 1.0, 21, 50.0);
    const auto wave = sinusoid(96, 12.0, 4.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += wave[i];
    auto shifted = x;
    for (auto& v : shifted) v += 250.0;
    const auto a = decompose(x, 12);
    const auto b = decompose(shifted, 12);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(b.trend[i], a.trend[i] + 250.0, 1e-5);
        EXPECT_NEAR(b.remainder[i], a.remainder[i], 1e-5);
    }
    DetectionConfig cfg;
    const auto ra = detect_anomalies(as_series(x), cfg);
    auto sb = as_series(shifted);
    const auto rb = detect_anomalies(sb, cfg);
    EXPECT_EQ(ra.findings.count(AnomalyKind::SpikeDip), rb.findings.count(AnomalyKind::SpikeDip));
    EXPECT_EQ(ra.findings.count(AnomalyKind::VarianceChange), rb.findings.count(AnomalyKind::VarianceChange));
}

// ---------------------------------------------------------------- ESD

TEST(Esd, SinglePlantedOutlier) {
    auto x = test_support::gaussian(99, 1.0, 42);
    x.insert(x.begin() + 37, 50.0);
    const auto ref = oracle::generalized_esd(x, 0.05, 5);
    ASSERT_EQ(ref, std::vector<std::size_t>{37});
    EXPECT_EQ(test_spikes_dips(x, 0.05, 5), ref);
}

TEST(Esd, AllZeroRemainder) {
    EXPECT_TRUE(test_spikes_dips(std::vector<double>(30, 0.0), 0.05, 5).empty());
}

TEST(Esd, MaxAnomaliesKeepsTheLarger) {
    auto x = test_support::gaussian(60, 1.0, 8);
    x[10] = 20.0;
    x[40] = -35.0;
    const auto ref = oracle::generalized_esd(x, 0.05, 1);
    ASSERT_EQ(ref, std::vector<std::size_t>{40});
    EXPECT_EQ(test_spikes_dips(x, 0.05, 1), ref);
    EXPECT_EQ(test_spikes_dips(x, 0.05, 5), oracle::generalized_esd(x, 0.05, 5));
}

TEST(Esd, MatchesReferenceOnSeededFixtures) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 20 + seed * 5;
        auto x = test_support::gaussian(n, 1.0, seed + 500);
        const std::size_t planted = seed % 4;
        for (std::size_t k = 0; k < planted; ++k) {
            x[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] += (k % 2 ? -1.0 : 1.0) * (4.0 + 2.0 * k);
        }
        for (double alpha : {0.01, 0.05, 0.1}) {
            EXPECT_EQ(test_spikes_dips(x, alpha, 5), oracle::generalized_esd(x, alpha, 5)) << "seed " << seed;
        }
    }
}

TEST(Esd, RejectsShortInput) {
    EXPECT_THROW(test_spikes_dips(std::vector<double>(9, 1.0), 0.05, 3), std::invalid_argument);
}

// ---------------------------------------------------------------- F test

namespace {

double f_oracle_p(const std::vector<double>& a, const std::vector<double>& b) {
    const double va = std::pow(oracle::mad_sigma(a), 2), vb = std::pow(oracle::mad_sigma(b), 2);
    const bool b_big = vb >= va;
    const double f = b_big ? vb / va : va / vb;
    boost::math::fisher_f dist(static_cast<double>((b_big ? b : a).size() - 1),
                               static_cast<double>((b_big ? a : b).size() - 1));
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, f)));
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST(VarianceTest, TripledSigmaDetected) {
    const auto a = test_support::gaussian(50, 1.0, 1), b = test_support::gaussian(50, 3.0, 2);
    const auto r = test_variance_change(concat(a, b), 50, 0.05);
    EXPECT_NEAR(r.p_value, f_oracle_p(a, b), 1e-10);
    EXPECT_LT(f_oracle_p(a, b), 0.05);
    EXPECT_TRUE(r.decision);
}

TEST(VarianceTest, IdenticalSegments) {
    const auto a = test_support::gaussian(30, 1.0, 4);
    const auto r = test_variance_change(concat(a, a), 30, 0.05);
    EXPECT_DOUBLE_EQ(r.statistic, 1.0);
    EXPECT_FALSE(r.decision);
}

TEST(VarianceTest, OnePercentScaleNotDetected) {
    const auto a = test_support::gaussian(50, 1.0, 5);
    auto b = a;
    for (auto& v : b) v *= 1.01;
    const auto r = test_variance_change(concat(a, b), 50, 0.05);
    EXPECT_NEAR(r.p_value, f_oracle_p(a, b), 1e-10);
    EXPECT_GT(f_oracle_p(a, b), 0.05);
    EXPECT_FALSE(r.decision);
}

TEST(VarianceTest, BothConstantIsNoDecision) {
    const std::vector<double> x(20, 2.0);
    EXPECT_FALSE(test_variance_change(x, 10, 0.05).decision);
}

TEST(VarianceTest, ShortSegmentsRejected) {
    EXPECT_THROW(test_variance_change(std::vector<double>(9, 1.0), 4, 0.05), std::invalid_argument);
}

// ---------------------------------------------------------------- T test

namespace {

double welch_oracle_p(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double qa = std::numbers::pi / 2 * std::pow(oracle::mad_sigma(a), 2) / na;
    const double qb = std::numbers::pi / 2 * std::pow(oracle::mad_sigma(b), 2) / nb;
    const double t = (oracle::median_of(b) - oracle::median_of(a)) / std::sqrt(qa + qb);
    const double df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), std::fabs(t))));
}

}  // namespace

TEST(MeanTest, StepDetected) {
    const auto a = test_support::gaussian(30, 0.1, 7), b = test_support::gaussian(30, 0.1, 8, 5.0);
    const auto r = test_mean_change(concat(a, b), 30, 0.05);
    EXPECT_NEAR(r.p_value, welch_oracle_p(a, b), 1e-10);
    EXPECT_TRUE(r.decision);
    EXPECT_GT(r.statistic, 0.0);
}

TEST(MeanTest, FlatTrend) {
    EXPECT_FALSE(test_mean_change(std::vector<double>(40, 3.0), 20, 0.05).decision);
}

TEST(MeanTest, TinyStepNotDetected) {
    const auto a = test_support::gaussian(20, 1.0, 9), b = test_support::gaussian(20, 1.0, 10, 0.01);
    const auto r = test_mean_change(concat(a, b), 20, 0.05);
    EXPECT_NEAR(r.p_value, welch_oracle_p(a, b), 1e-10);
    EXPECT_GT(welch_oracle_p(a, b), 0.05);
    EXPECT_FALSE(r.decision);
}

// ---------------------------------------------------------------- Mann-Kendall

TEST(MannKendall, IncreasingFive) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    EXPECT_EQ(mann_kendall_s(x), 10);
    const auto r = test_long_trend(x, 0.05);
    EXPECT_NEAR(r.statistic, 9.0 / std::sqrt(50.0 / 3.0), 1e-12);
    EXPECT_NEAR(r.statistic, 2.20, 0.005);
    EXPECT_TRUE(r.decision);
}

TEST(MannKendall, DecreasingFive) {
    const std::vector<double> x{5, 4, 3, 2, 1};
    EXPECT_EQ(mann_kendall_s(x), -10);
    const auto r = test_long_trend(x, 0.05);
    EXPECT_NEAR(r.statistic, -2.20, 0.005);
    EXPECT_TRUE(r.decision);
}

TEST(MannKendall, ConstantSequence) {
    const std::vector<double> x(8, 1.0);
    EXPECT_EQ(mann_kendall_s(x), 0);
    EXPECT_FALSE(test_long_trend(x, 0.05).decision);
}

TEST(MannKendall, ClosedFormMatchesPairEnumeration) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const auto n = std::uniform_int_distribution<std::size_t>(5, 12)(rng);
        std::uniform_int_distribution<int> level(0, seed % 2 ? 4 : 1000);  // odd seeds carry ties
        std::vector<double> x(n);
        for (auto& v : x) v = level(rng);
        EXPECT_EQ(mann_kendall_s(x), oracle::mk_s_pairs(x)) << "seed " << seed;
        EXPECT_NEAR(test_long_trend(x, 0.05).statistic, oracle::mk_z(x), 1e-12) << "seed " << seed;
    }
}

TEST(MannKendall, ToleranceTreatsSmallDifferencesAsTies) {
    const std::vector<double> x{0.0, 0.001, 0.002, 0.003, 0.004};
    EXPECT_EQ(mann_kendall_s(x, 0.01), 0);
    EXPECT_EQ(mann_kendall_s(x, 0.0), 10);
}

// ---------------------------------------------------------------- routing

namespace {

std::vector<double> seasonal_series(std::size_t n, std::uint64_t seed) {
    auto x = test_support::gaussian(n, 1.0, seed, 100.0);
    const auto wave = sinusoid(n, 12.0, 10.0);
    for (std::size_t i = 0; i < n; ++i) x[i] += wave[i];
    return x;
}

}  // namespace

TEST(Detect, CleanSeasonalSeriesHasNoFindings) {
    const auto r = detect_anomalies(as_series(seasonal_series(96, 3)), DetectionConfig{});
    EXPECT_FALSE(r.too_short);
    EXPECT_EQ(r.period, 12);
    EXPECT_TRUE(r.findings.empty());
    for (const char* test : {"esd", "f_test", "t_test", "mann_kendall"}) EXPECT_TRUE(r.statistics.count(test));
}

TEST(Detect, LevelShiftGivesMeanChange) {
    auto x = seasonal_series(96, 3);
    for (std::size_t i = 48; i < x.size(); ++i) x[i] += 8.0;
    const auto r = detect_anomalies(as_series(x), DetectionConfig{});
    EXPECT_TRUE(r.findings.count(AnomalyKind::MeanChange));
}

TEST(Detect, SpikeRoutedToRemainder) {
    auto x = seasonal_series(96, 3);
    x[70] += 30.0;
    const auto r = detect_anomalies(as_series(x), DetectionConfig{});
    EXPECT_TRUE(r.findings.count(AnomalyKind::SpikeDip));
    bool span_found = false;
    for (const auto& f : r.spans) span_found |= f.kind == AnomalyKind::SpikeDip && f.start <= 70 * 15 && 70 * 15 < f.end;
    EXPECT_TRUE(span_found);
}

TEST(Detect, EveryFindingBackedByPositiveDecision) {
    const char* names[] = {"esd", "f_test", "t_test", "mann_kendall"};
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        auto x = seasonal_series(80, seed);
        if (seed % 3 == 1) for (std::size_t i = 40; i < 80; ++i) x[i] += 0.3 * static_cast<double>(i - 40);
        if (seed % 3 == 2) x[60] -= 25.0;
        const auto r = detect_anomalies(as_series(x), DetectionConfig{});
        for (auto k : r.findings) {
            const auto& st = r.statistics.at(names[static_cast<int>(k)]);
            EXPECT_TRUE(st.decision);
        }
        for (int k = 0; k < 4; ++k) {
            EXPECT_EQ(r.statistics.at(names[k]).decision, r.findings.count(static_cast<AnomalyKind>(k)) > 0);
        }
    }
}

TEST(Detect, TooShortSeriesIsMarked) {
    DetectionConfig cfg;
    const auto r = detect_anomalies(as_series(test_support::gaussian(10, 1.0, 1)), cfg);
    EXPECT_TRUE(r.too_short);
    EXPECT_TRUE(r.findings.empty());
}

TEST(Detect, PreparedPathMatchesDirectPath) {
    auto x = seasonal_series(96, 4);
    for (std::size_t i = 60; i < x.size(); ++i) x[i] += 5.0;
    const auto s = as_series(x);
    DetectionConfig cfg;
    for (double a : {0.01, 0.05, 0.1}) {
        cfg.alpha_esd = cfg.alpha_f = cfg.alpha_t = cfg.alpha_mk = a;
        const auto direct = detect_anomalies(s, 48 * 15, cfg);
        const auto prepared = detect_prepared(prepare_series(s, 48 * 15, cfg), cfg);
        EXPECT_EQ(direct.findings, prepared.findings);
        EXPECT_EQ(direct.window_start, prepared.window_start);
        EXPECT_EQ(direct.statistics.at("t_test").statistic, prepared.statistics.at("t_test").statistic);
    }
}

TEST(Detect, ConfigValidation) {
    DetectionConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.alpha_f = 1.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
}

// ---------------------------------------------------------------- robust window

TEST(RobustWindow, InsertIntoSortedBuffer) {
    RobustWindow w(10);
    for (double v : {7.0, 1.0, 3.0}) w.update(v);
    w = update_window(w, 5.0);
    EXPECT_EQ(w.sorted(), (std::vector<double>{1, 3, 5, 7}));
    EXPECT_DOUBLE_EQ(w.median(), 4.0);
}

TEST(RobustWindow, CapacityOneTracksLastValue) {
    RobustWindow w(1);
    for (double v : {3.0, -2.0, 8.5}) {
        w.update(v);
        EXPECT_EQ(w.size(), 1u);
        EXPECT_DOUBLE_EQ(w.median(), v);
        EXPECT_DOUBLE_EQ(w.mad(), 0.0);
    }
}

TEST(RobustWindow, MatchesBatchRecomputation) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-100, 100);
    std::uniform_int_distribution<int> small(0, 9);
    const std::size_t cap = 37;
    RobustWindow w(cap);
    std::vector<double> history;
    for (int i = 0; i < 10000; ++i) {
        const double v = i % 3 ? u(rng) : small(rng);  // ties as well as distinct values
        w.update(v);
        history.push_back(v);
        const std::size_t from = history.size() > cap ? history.size() - cap : 0;
        const std::vector<double> buf(history.begin() + static_cast<std::ptrdiff_t>(from), history.end());
        ASSERT_LE(w.size(), cap);
        ASSERT_EQ(w.size(), buf.size());
        const double med = oracle::median_of(buf);
        ASSERT_EQ(w.median(), med) << "step " << i;
        std::vector<double> dev;
        for (double b : buf) dev.push_back(std::fabs(b - med));
        ASSERT_EQ(w.mad(), oracle::median_of(dev)) << "step " << i;
    }
}

TEST(RobustWindow, ZeroCapacityRejected) {
    EXPECT_THROW(RobustWindow(0), std::invalid_argument);
}
