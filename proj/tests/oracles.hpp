#pragma once

// Straightforward reference implementations used to check the library's optimised versions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "cloudrca/bayesnet.hpp"

namespace cloudrca::oracle {

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mad_sigma(const std::vector<double>& v) {
    const double m = median_of(v);
    std::vector<double> dev;
    for (double x : v) dev.push_back(std::fabs(x - m));
    return std::max(1.4826 * median_of(dev), 1e-9);
}

/// Rosner's generalised ESD with median centring and MAD scale. Candidates with equal
/// deviation go to the smaller index. Returns the flagged indices, most extreme first.
inline std::vector<std::size_t> generalized_esd(const std::vector<double>& x, double alpha, std::size_t max_outliers) {
    const std::size_t n = x.size();
    std::vector<std::size_t> alive(n);
    for (std::size_t i = 0; i < n; ++i) alive[i] = i;
    std::vector<std::size_t> removed;
    std::size_t outliers = 0;
    const std::size_t r = std::min(max_outliers, n - 3);
    for (std::size_t i = 1; i <= r; ++i) {
        std::vector<double> vals;
        for (auto k : alive) vals.push_back(x[k]);
        const double c = median_of(vals);
        const double s = mad_sigma(vals);
        std::size_t best = 0;
        for (std::size_t a = 1; a < alive.size(); ++a) {
            if (std::fabs(x[alive[a]] - c) > std::fabs(x[alive[best]] - c)) best = a;
        }
        const double ri = std::fabs(x[alive[best]] - c) / s;
        const double df = static_cast<double>(n - i - 1);
        const double p = 1.0 - alpha / (2.0 * static_cast<double>(n - i + 1));
        const double t = boost::math::quantile(boost::math::students_t(df), p);
        const double lambda = static_cast<double>(n - i) * t / std::sqrt((df + t * t) * static_cast<double>(n - i + 1));
        removed.push_back(alive[best]);
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best));
        if (ri > lambda) outliers = i;
    }
    removed.resize(outliers);
    return removed;
}

/// Mann-Kendall S by enumerating every pair.
inline long long mk_s_pairs(const std::vector<double>& x) {
    long long s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
    }
    return s;
}

/// Continuity-corrected Z with the tie-corrected variance.
inline double mk_z(const std::vector<double>& x) {
    const long long s = mk_s_pairs(x);
    const double n = static_cast<double>(x.size());
    double var = n * (n - 1) * (2 * n + 5);
    std::vector<double> v = x;
    std::sort(v.begin(), v.end());
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        const double t = static_cast<double>(j - i);
        var -= t * (t - 1) * (2 * t + 5);
        i = j;
    }
    var /= 18.0;
    if (s == 0 || var <= 0) return 0.0;
    return (static_cast<double>(s) - (s > 0 ? 1.0 : -1.0)) / std::sqrt(var);
}

/// Probability of every one of the 2^n joint states, as a product of CPT entries.
struct Enumeration {
    std::vector<double> joint;  // indexed by full state bitmask
};

inline Enumeration enumerate_joint(const bn::BinaryNetwork& net) {
    const std::size_t n = net.size();
    Enumeration e;
    e.joint.assign(std::size_t{1} << n, 0.0);
    for (std::size_t state = 0; state < e.joint.size(); ++state) {
        double p = 1.0;
        for (std::size_t v = 0; v < n; ++v) {
            std::size_t cfg = 0;
            for (std::size_t j = 0; j < net.parents[v].size(); ++j) {
                if (state >> net.parents[v][j] & 1) cfg |= std::size_t{1} << j;
            }
            const double p1 = net.cpt[v][cfg];
            p *= (state >> v & 1) ? p1 : 1.0 - p1;
        }
        e.joint[state] = p;
    }
    return e;
}

/// Normalised posterior over `query` (ascending vars; entry bit j = state of query[j]).
inline std::vector<double> brute_posterior(const bn::BinaryNetwork& net, const bn::Evidence& ev,
                                           const std::vector<std::size_t>& query, double* p_evidence = nullptr) {
    const auto e = enumerate_joint(net);
    std::vector<double> out(std::size_t{1} << query.size(), 0.0);
    double total = 0.0;
    for (std::size_t state = 0; state < e.joint.size(); ++state) {
        bool ok = true;
        for (std::size_t v = 0; v < ev.size(); ++v) {
            if (ev[v] >= 0 && static_cast<int>(state >> v & 1) != ev[v]) ok = false;
        }
        if (!ok) continue;
        std::size_t idx = 0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            if (state >> query[j] & 1) idx |= std::size_t{1} << j;
        }
        out[idx] += e.joint[state];
        total += e.joint[state];
    }
    if (p_evidence) *p_evidence = total;
    for (auto& p : out) p /= total;
    return out;
}

/// Random DAG over `n` nodes (edges only from lower to higher index of a random permutation)
/// with at most `max_parents` parents per node and CPT entries in [0.05, 0.95].
inline bn::BinaryNetwork random_network(std::size_t n, std::size_t max_parents, std::mt19937_64& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    bn::BinaryNetwork net;
    net.parents.resize(n);
    net.cpt.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t v = perm[pos];
        std::vector<std::size_t> candidates(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(pos));
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const std::size_t k = std::min(candidates.size(), std::uniform_int_distribution<std::size_t>(0, max_parents)(rng));
        net.parents[v].assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
        net.cpt[v].resize(std::size_t{1} << k);
        for (auto& p : net.cpt[v]) p = u(rng);
    }
    return net;
}

}  // namespace cloudrca::oracle
