#pragma once

#include <span>
#include <vector>

namespace cloudrca::stats {

/// Consistency constant turning a MAD into a Gaussian sigma estimate.
inline constexpr double kMadToSigma = 1.4826;
inline constexpr double kMadFloor = 1e-9;

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> x);
double median(std::span<const double> x);
/// Median of an already sorted range.
double median_sorted(std::span<const double> sorted);
/// Raw median absolute deviation about `center`.
double mad(std::span<const double> x, double center);
/// kMadToSigma * MAD about the median, floored at kMadFloor.
double robust_sigma(std::span<const double> x);

// Distribution helpers (thin wrappers over Boost.Math).
double normal_quantile(double p);
double normal_sf(double z);
double students_t_quantile(double p, double df);
double students_t_sf(double t, double df);
double fisher_f_sf(double f, double df1, double df2);
double fisher_f_quantile(double p, double df1, double df2);
double chi_squared_sf(double x, double df);

}  // namespace cloudrca::stats
