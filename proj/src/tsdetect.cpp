#include "cloudrca/tsdetect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cloudrca/stats.hpp"

namespace cloudrca {

const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::SpikeDip: return "spike_dip";
        case AnomalyKind::VarianceChange: return "variance_change";
        case AnomalyKind::MeanChange: return "mean_change";
        case AnomalyKind::LongTrend: return "long_trend";
    }
    return "?";
}

AnomalyKind anomaly_kind_from_string(const std::string& s) {
    for (auto k : {AnomalyKind::SpikeDip, AnomalyKind::VarianceChange, AnomalyKind::MeanChange, AnomalyKind::LongTrend}) {
        if (s == to_string(k)) return k;
    }
    throw ValidationError("unknown anomaly kind '" + s + "'");
}

bool AnomalyReport::any_in(Timestamp start, Timestamp end) const {
    for (const auto& f : spans) {
        if (f.start < end && start < f.end) return true;
    }
    return false;
}

void DetectionConfig::validate() const {
    for (double a : {alpha_esd, alpha_f, alpha_t, alpha_mk}) {
        if (!(a > 0.0 && a < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    }
    if (min_length < 10) throw ValidationError("min_length must be at least 10");
    if (max_period < 2) throw ValidationError("max_period must be at least 2");
    if (!(acf_threshold > 0.0 && acf_threshold < 1.0)) throw ValidationError("acf_threshold must lie in (0, 1)");
    if (!(f_df_efficiency > 0.0 && f_df_efficiency <= 1.0)) throw ValidationError("f_df_efficiency must lie in (0, 1]");
    if (trend_noise_sigmas < 0.0) throw ValidationError("trend_noise_sigmas must be non-negative");
    if (!(trend_filter.lambda > 0.0)) throw ValidationError("trend filter lambda must be positive");
    if (trend_filter.max_iterations < 1) throw ValidationError("trend filter max_iterations must be positive");
}

// ---------------------------------------------------------------- period

namespace {

std::size_t mirror(long long i, std::size_t n) {
    const auto m = static_cast<long long>(n);
    while (i < 0 || i >= m) {
        if (i < 0) i = -i - 1;
        if (i >= m) i = 2 * m - i - 1;
    }
    return static_cast<std::size_t>(i);
}

std::vector<double> autocorrelation(const std::vector<double>& y, std::size_t max_lag) {
    const std::size_t n = y.size();
    double m = 0.0;
    for (double v : y) m += v;
    m /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : y) denom += (v - m) * (v - m);
    std::vector<double> r(max_lag + 1, 0.0);
    if (denom <= 0.0) return r;
    for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
        double num = 0.0;
        for (std::size_t i = 0; i + k < n; ++i) num += (y[i] - m) * (y[i + k] - m);
        r[k] = num / denom;
    }
    return r;
}

}  // namespace

int detect_period(std::span<const double> values, int max_period, double acf_threshold) {
    const std::size_t n = values.size();
    if (n < 4) throw std::invalid_argument("detect_period needs at least 4 points");
    if (max_period < 2) return 0;

    // Winsorise so isolated outliers cannot dominate the correlation.
    const double med = stats::median(values);
    const double sigma = stats::kMadToSigma * stats::mad(values, med);
    std::vector<double> x(values.begin(), values.end());
    if (sigma > 0.0) {
        const double lo = med - 2.5 * sigma, hi = med + 2.5 * sigma;
        for (double& v : x) v = std::clamp(v, lo, hi);
    }

    // Haar a-trous: keep the detail bands, drop the coarsest approximation (slow trend).
    int levels = 1;
    while ((1 << levels) < 2 * max_period) ++levels;
    std::vector<double> c = x, next(n);
    for (int j = 0; j < levels; ++j) {
        const long long step = 1LL << j;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = 0.5 * (c[i] + c[mirror(static_cast<long long>(i) + step, n)]);
        }
        c.swap(next);
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - c[i];

    const auto kmax = std::min<std::size_t>(static_cast<std::size_t>(max_period), n - 2);
    if (kmax < 2) return 0;
    const auto r = autocorrelation(y, kmax + 1);
    int best = 0;
    double best_r = acf_threshold;
    for (std::size_t k = 2; k <= kmax; ++k) {
        const bool peak = r[k] > r[k - 1] && r[k] >= r[k + 1];
        if (peak && r[k] >= best_r && (best == 0 || r[k] > best_r)) {
            best = static_cast<int>(k);
            best_r = r[k];
        }
    }
    return best;
}

int detect_period(const TimeSeries& s, int max_period, double acf_threshold) {
    return detect_period(std::span<const double>(s.values), max_period, acf_threshold);
}

// ---------------------------------------------------------------- trend filter

namespace {

// Solves a symmetric positive definite pentadiagonal system in place via banded LDL^T.
// a0: diagonal, a1[i] = A(i, i+1), a2[i] = A(i, i+2).
std::vector<double> solve_pentadiagonal(const std::vector<double>& a0, const std::vector<double>& a1,
                                        const std::vector<double>& a2, const std::vector<double>& b) {
    const std::size_t n = a0.size();
    std::vector<double> d(n), l1(n, 0.0), l2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2) l2[i] = a2[i - 2] / d[i - 2];
        if (i >= 1) {
            double s = a1[i - 1];
            if (i >= 2) s -= l2[i] * l1[i - 1] * d[i - 2];
            l1[i] = s / d[i - 1];
        }
        double di = a0[i];
        if (i >= 1) di -= l1[i] * l1[i] * d[i - 1];
        if (i >= 2) di -= l2[i] * l2[i] * d[i - 2];
        d[i] = di;
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        if (i >= 1) s -= l1[i] * z[i - 1];
        if (i >= 2) s -= l2[i] * z[i - 2];
        z[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] /= d[i];
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = z[k];
        if (k + 1 < n) s -= l1[k + 1] * x[k + 1];
        if (k + 2 < n) s -= l2[k + 2] * x[k + 2];
        x[k] = s;
    }
    return x;
}

}  // namespace

std::vector<double> l1_trend_filter(std::span<const double> x, const TrendFilterOptions& opt) {
    const std::size_t n = x.size();
    if (n < 3) return std::vector<double>(x.begin(), x.end());

    // Solve on the median-centred series so that the tolerances, and hence the result, are
    // equivariant under a constant shift.
    const double offset = stats::median(std::vector<double>(x.begin(), x.end()));
    std::vector<double> xc(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xc[i] = x[i] - offset;
        scale = std::max(scale, std::fabs(xc[i]));
    }
    const double eps = 1e-9 * std::max(1.0, scale);
    const double tol = opt.tolerance * std::max(1.0, scale);

    std::vector<double> w(n, 1.0), v(n - 2, 1.0);
    std::vector<double> t = xc;
    std::vector<double> a0(n), a1(n - 1), a2(n - 2), b(n);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        std::fill(a0.begin(), a0.end(), 0.0);
        std::fill(a1.begin(), a1.end(), 0.0);
        std::fill(a2.begin(), a2.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            a0[i] = w[i];
            b[i] = w[i] * xc[i];
        }
        // lambda * D2^T V D2, row j of D2 = (1, -2, 1) at columns j..j+2.
        for (std::size_t j = 0; j + 2 < n; ++j) {
            const double c = opt.lambda * v[j];
            a0[j] += c;
            a0[j + 1] += 4.0 * c;
            a0[j + 2] += c;
            a1[j] += -2.0 * c;
            a1[j + 1] += -2.0 * c;
            a2[j] += c;
        }
        auto next = solve_pentadiagonal(a0, a1, a2, b);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::fabs(next[i] - t[i]));
        t.swap(next);
        for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(std::fabs(xc[i] - t[i]), eps);
        for (std::size_t j = 0; j + 2 < n; ++j) {
            v[j] = 1.0 / std::max(std::fabs(t[j] - 2.0 * t[j + 1] + t[j + 2]), eps);
        }
        if (iter > 0 && change <= tol) break;
    }
    for (double& ti : t) ti += offset;
    return t;
}

// ---------------------------------------------------------------- decomposition

namespace {

constexpr int kSeasonalCycles = 2;  // same-phase neighbours within this many cycles on each side

void centre(std::vector<double>& s) {
    double m = 0.0;
    for (double v : s) m += v;
    m /= static_cast<double>(s.size());
    for (double& v : s) v -= m;
}

// Chooses remainder so that (trend + seasonal) + remainder == x bit for bit.
void close_exactly(std::span<const double> x, DecompositionResult& d) {
    const std::size_t n = x.size();
    d.remainder.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double base = d.trend[i] + d.seasonal[i];
        double r = x[i] - base;
        for (int k = 0; k < 64 && base + r != x[i]; ++k) {
            r = std::nextafter(r, (base + r) < x[i] ? std::numeric_limits<double>::infinity()
                                                    : -std::numeric_limits<double>::infinity());
        }
        if (base + r != x[i]) {
            // Pathological magnitude gap; fold the point into the trend.
            d.trend[i] = x[i];
            d.seasonal[i] = 0.0;
            r = 0.0;
        }
        d.remainder[i] = r;
    }
}

}  // namespace

DecompositionResult decompose(std::span<const double> values, int period, const TrendFilterOptions& opt) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("decompose needs a non-empty series");
    if (period != 0 && (period < 2 || static_cast<std::size_t>(period) > n / 2)) {
        throw std::invalid_argument("period must be 0 or within [2, n/2]");
    }
    DecompositionResult d;
    d.period = period;
    d.seasonal.assign(n, 0.0);
    if (period == 0) {
        d.trend = l1_trend_filter(values, opt);
        close_exactly(values, d);
        return d;
    }

    const auto p = static_cast<std::size_t>(period);
    // Initial seasonal guess: global phase medians.
    std::vector<double> phase_median(p);
    for (std::size_t ph = 0; ph < p; ++ph) {
        std::vector<double> bucket;
        for (std::size_t i = ph; i < n; i += p) bucket.push_back(values[i]);
        phase_median[ph] = stats::median(bucket);
    }
    for (std::size_t i = 0; i < n; ++i) d.seasonal[i] = phase_median[i % p];
    centre(d.seasonal);

    std::vector<double> work(n);
    for (int outer = 0; outer < 2; ++outer) {
        for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - d.seasonal[i];
        d.trend = l1_trend_filter(work, opt);
        for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - d.trend[i];
        // Non-local seasonal filter: median over the other same-phase points within K cycles.
        // Leaving the point itself out keeps the remainder free of a point mass at zero.
        std::vector<double> bucket;
        for (std::size_t i = 0; i < n; ++i) {
            bucket.clear();
            for (long long c = -kSeasonalCycles; c <= kSeasonalCycles; ++c) {
                if (c == 0) continue;
                const long long k = static_cast<long long>(i) + c * static_cast<long long>(p);
                if (k >= 0 && k < static_cast<long long>(n)) bucket.push_back(work[static_cast<std::size_t>(k)]);
            }
            d.seasonal[i] = stats::median(bucket);
        }
        centre(d.seasonal);
    }
    for (std::size_t i = 0; i < n; ++i) work[i] = values[i] - d.seasonal[i];
    d.trend = l1_trend_filter(work, opt);
    close_exactly(values, d);
    return d;
}

DecompositionResult decompose(const TimeSeries& s, int period, const TrendFilterOptions& opt) {
    return decompose(std::span<const double>(s.values), period, opt);
}

// ---------------------------------------------------------------- tests

namespace {

struct EsdTrace {
    std::vector<std::size_t> order;  // removal order
    std::vector<double> r;           // test statistic per step
    std::vector<double> lambda;      // critical value per step
    std::size_t flagged = 0;
};

EsdTrace run_esd(std::span<const double> x, double alpha, std::size_t max_anomalies) {
    const std::size_t n = x.size();
    EsdTrace tr;
    std::vector<bool> removed(n, false);
    std::vector<double> rest;
    const std::size_t steps = std::min(max_anomalies, n > 3 ? n - 3 : 0);
    for (std::size_t i = 1; i <= steps; ++i) {
        rest.clear();
        for (std::size_t k = 0; k < n; ++k) {
            if (!removed[k]) rest.push_back(x[k]);
        }
        const double med = stats::median(rest);
        const double sigma = std::max(stats::kMadToSigma * stats::mad(rest, med), stats::kMadFloor);
        std::size_t arg = n;
        double best = -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (removed[k]) continue;
            const double dev = std::fabs(x[k] - med);
            if (dev > best) {
                best = dev;
                arg = k;
            }
        }
        const auto m = static_cast<double>(n - i + 1);  // points remaining before this removal
        const double p = 1.0 - alpha / (2.0 * m);
        const double t = stats::students_t_quantile(p, m - 2.0);
        const double lam = (m - 1.0) * t / std::sqrt((m - 2.0 + t * t) * m);
        tr.order.push_back(arg);
        tr.r.push_back(best / sigma);
        tr.lambda.push_back(lam);
        removed[arg] = true;
        if (best / sigma > lam) tr.flagged = i;
    }
    return tr;
}

}  // namespace

std::vector<std::size_t> test_spikes_dips(std::span<const double> remainder, double alpha,
                                          std::size_t max_anomalies) {
    if (remainder.size() < 10) throw std::invalid_argument("spike/dip test needs at least 10 points");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    const auto tr = run_esd(remainder, alpha, max_anomalies);
    return {tr.order.begin(), tr.order.begin() + static_cast<std::ptrdiff_t>(tr.flagged)};
}

TestOutcome test_variance_change(std::span<const double> remainder, std::size_t split, double alpha,
                                 double df_efficiency) {
    if (split < 5 || remainder.size() < split + 5) {
        throw std::invalid_argument("variance test needs at least 5 points per segment");
    }
    const auto a = remainder.subspan(0, split);
    const auto b = remainder.subspan(split);
    const double sa = stats::kMadToSigma * stats::mad(a, stats::median(a));
    const double sb = stats::kMadToSigma * stats::mad(b, stats::median(b));
    TestOutcome out;
    if (sa < stats::kMadFloor && sb < stats::kMadFloor) {
        out.statistic = 1.0;
        out.threshold = std::numeric_limits<double>::infinity();
        return out;
    }
    const double va = std::max(sa, stats::kMadFloor) * std::max(sa, stats::kMadFloor);
    const double vb = std::max(sb, stats::kMadFloor) * std::max(sb, stats::kMadFloor);
    const bool b_larger = vb >= va;
    const double f = b_larger ? vb / va : va / vb;
    const double df_num = df_efficiency * static_cast<double>((b_larger ? b.size() : a.size()) - 1);
    const double df_den = df_efficiency * static_cast<double>((b_larger ? a.size() : b.size()) - 1);
    out.statistic = f;
    out.p_value = std::min(1.0, 2.0 * stats::fisher_f_sf(f, df_num, df_den));
    out.threshold = stats::fisher_f_quantile(1.0 - alpha / 2.0, df_num, df_den);
    out.decision = out.p_value < alpha;
    return out;
}

TestOutcome test_mean_change(std::span<const double> trend, std::size_t split, double alpha, double scale_floor) {
    if (split < 5 || trend.size() < split + 5) {
        throw std::invalid_argument("mean-change test needs at least 5 points per segment");
    }
    const auto a = trend.subspan(0, split);
    const auto b = trend.subspan(split);
    const double ma = stats::median(a), mb = stats::median(b);
    const double floor = std::max(scale_floor, stats::kMadFloor);
    const double sa = std::max(stats::kMadToSigma * stats::mad(a, ma), floor);
    const double sb = std::max(stats::kMadToSigma * stats::mad(b, mb), floor);
    const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    // Sampling variance of a median under normality is pi/2 times that of the mean.
    const double qa = std::numbers::pi / 2.0 * sa * sa / na;
    const double qb = std::numbers::pi / 2.0 * sb * sb / nb;
    const double df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    TestOutcome out;
    out.statistic = (mb - ma) / std::sqrt(qa + qb);
    out.p_value = std::min(1.0, 2.0 * stats::students_t_sf(std::fabs(out.statistic), df));
    out.threshold = stats::students_t_quantile(1.0 - alpha / 2.0, df);
    out.decision = out.p_value < alpha;
    return out;
}

long long mann_kendall_s(std::span<const double> x, double tolerance) {
    if (tolerance == 0.0) {
        // Rank counting: S = sum over j of (#earlier below x_j) - (#earlier above x_j), in O(n log n).
        std::vector<double> sorted(x.begin(), x.end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<long long> fenwick(sorted.size() + 1, 0);
        auto below = [&](std::size_t r) {  // earlier values with rank < r
            long long c = 0;
            for (; r > 0; r -= r & (~r + 1)) c += fenwick[r];
            return c;
        };
        long long s = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const auto r = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x[j]) -
                                                    sorted.begin());
            const long long lower = below(r);
            const long long upto = below(r + 1);
            s += lower - (static_cast<long long>(j) - upto);
            for (std::size_t k = r + 1; k < fenwick.size(); k += k & (~k + 1)) ++fenwick[k];
        }
        return s;
    }
    long long s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double d = x[j] - x[i];
            if (d > tolerance) ++s;
            else if (d < -tolerance) --s;
        }
    }
    return s;
}

TestOutcome test_long_trend(std::span<const double> trend, double alpha, double tolerance) {
    const std::size_t n = trend.size();
    if (n < 5) throw std::invalid_argument("Mann-Kendall test needs at least 5 points");
    const long long s = mann_kendall_s(trend, tolerance);
    const auto nd = static_cast<double>(n);
    double var = nd * (nd - 1.0) * (2.0 * nd + 5.0);
    if (tolerance == 0.0) {
        std::vector<double> v(trend.begin(), trend.end());
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j < n && v[j] == v[i]) ++j;
            const auto t = static_cast<double>(j - i);
            var -= t * (t - 1.0) * (2.0 * t + 5.0);
            i = j;
        }
    }
    var /= 18.0;
    TestOutcome out;
    if (var > 0.0) {
        if (s > 0) out.statistic = (static_cast<double>(s) - 1.0) / std::sqrt(var);
        else if (s < 0) out.statistic = (static_cast<double>(s) + 1.0) / std::sqrt(var);
    }
    out.p_value = std::min(1.0, 2.0 * stats::normal_sf(std::fabs(out.statistic)));
    out.threshold = stats::normal_quantile(1.0 - alpha / 2.0);
    out.decision = std::fabs(out.statistic) > out.threshold;
    return out;
}

// ---------------------------------------------------------------- routing

AnomalyReport detect_on_decomposition(const TimeSeries& s, const DecompositionResult& d, std::size_t split,
                                      const DetectionConfig& cfg) {
    const std::size_t n = s.size();
    AnomalyReport rep;
    rep.metric_id = s.metric_id;
    rep.period = d.period;
    split = std::clamp<std::size_t>(split, 5, n - 5);
    rep.window_start = s.timestamps[split];
    rep.window_end = s.timestamps.back() + 1;

    // Spikes and dips live in the remainder.
    const auto esd = run_esd(d.remainder, cfg.alpha_esd, cfg.esd_max_anomalies);
    TestOutcome e;
    if (!esd.r.empty()) {
        e.statistic = esd.r.front();
        e.threshold = esd.lambda.front();
    }
    e.decision = esd.flagged > 0;
    e.p_value = e.decision ? cfg.alpha_esd : 1.0;  // ESD yields a decision, not a p-value
    rep.statistics["esd"] = e;
    for (std::size_t i = 0; i < esd.flagged; ++i) {
        const Timestamp ts = s.timestamps[esd.order[i]];
        rep.spans.push_back({AnomalyKind::SpikeDip, ts, ts + 1});
    }

    const Timestamp tail_start = s.timestamps[split];
    const Timestamp tail_end = rep.window_end;

    // Variance change in the remainder.
    const auto f = test_variance_change(d.remainder, split, cfg.alpha_f, cfg.f_df_efficiency);
    rep.statistics["f_test"] = f;
    if (f.decision) rep.spans.push_back({AnomalyKind::VarianceChange, tail_start, tail_end});

    // Mean change and long-term trend live in the trend; the noise scale comes from the reference remainder.
    const std::span<const double> ref(d.remainder.data(), split);
    const double noise = cfg.trend_noise_sigmas * stats::kMadToSigma * stats::mad(ref, stats::median(ref));
    const auto t = test_mean_change(d.trend, split, cfg.alpha_t, noise);
    rep.statistics["t_test"] = t;
    if (t.decision) rep.spans.push_back({AnomalyKind::MeanChange, tail_start, tail_end});

    const auto mk = test_long_trend(d.trend, cfg.alpha_mk, noise);
    rep.statistics["mann_kendall"] = mk;
    if (mk.decision) rep.spans.push_back({AnomalyKind::LongTrend, tail_start, tail_end});

    for (const auto& sp : rep.spans) rep.findings.insert(sp.kind);
    return rep;
}

PreparedSeries prepare_series(TimeSeries s, Timestamp split_ts, const DetectionConfig& cfg) {
    s.validate();
    PreparedSeries p;
    const std::size_t n = s.size();
    if (n < cfg.min_length || n < 10) {
        p.too_short = true;
        p.series = std::move(s);
        return p;
    }
    p.split = static_cast<std::size_t>(
        std::lower_bound(s.timestamps.begin(), s.timestamps.end(), split_ts) - s.timestamps.begin());
    const int max_p = std::min<int>(cfg.max_period, static_cast<int>(n / 2));
    const int period = detect_period(s, max_p, cfg.acf_threshold);
    p.decomposition = decompose(s, period, cfg.trend_filter);
    p.series = std::move(s);
    return p;
}

AnomalyReport detect_prepared(const PreparedSeries& p, const DetectionConfig& cfg) {
    if (p.too_short) {
        AnomalyReport rep;
        rep.metric_id = p.series.metric_id;
        rep.too_short = true;
        if (!p.series.timestamps.empty()) {
            rep.window_start = p.series.timestamps.front();
            rep.window_end = p.series.timestamps.back() + 1;
        }
        return rep;
    }
    return detect_on_decomposition(p.series, p.decomposition, p.split, cfg);
}

AnomalyReport detect_anomalies(const TimeSeries& s, Timestamp split_ts, const DetectionConfig& cfg) {
    return detect_prepared(prepare_series(s, split_ts, cfg), cfg);
}

AnomalyReport detect_anomalies(const TimeSeries& s, const DetectionConfig& cfg) {
    if (s.values.empty()) throw ValidationError("cannot analyse an empty series");
    const std::size_t mid = s.size() / 2;
    return detect_anomalies(s, s.timestamps[std::min(mid, s.size() - 1)], cfg);
}

}  // namespace cloudrca
