#include "cloudrca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace cloudrca::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean of empty range");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median_sorted(std::span<const double> sorted) {
    if (sorted.empty()) throw std::invalid_argument("median of empty range");
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double median(std::span<const double> x) {
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    return median_sorted(v);
}

double mad(std::span<const double> x, double center) {
    std::vector<double> d;
    d.reserve(x.size());
    for (double v : x) d.push_back(std::fabs(v - center));
    std::sort(d.begin(), d.end());
    return median_sorted(d);
}

double robust_sigma(std::span<const double> x) {
    return std::max(kMadToSigma * mad(x, median(x)), kMadFloor);
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

double normal_sf(double z) { return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), z)); }

double students_t_quantile(double p, double df) {
    return boost::math::quantile(boost::math::students_t_distribution<>(df), p);
}

double students_t_sf(double t, double df) {
    return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<>(df), t));
}

double fisher_f_sf(double f, double df1, double df2) {
    if (f <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<>(df1, df2), f));
}

double fisher_f_quantile(double p, double df1, double df2) {
    return boost::math::quantile(boost::math::fisher_f_distribution<>(df1, df2), p);
}

double chi_squared_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), x));
}

}  // namespace cloudrca::stats
