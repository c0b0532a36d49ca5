#include "cloudrca/pc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "cloudrca/stats.hpp"

namespace cloudrca::pc {

BinaryData::BinaryData(std::size_t n_vars, std::size_t n_samples)
    : n_vars_(n_vars), n_samples_(n_samples), words_((n_samples + 63) / 64), cols_(n_vars, std::vector<std::uint64_t>(words_, 0)) {}

BinaryData BinaryData::from_rows(const std::vector<std::vector<std::uint8_t>>& rows, std::size_t n_vars) {
    BinaryData d(n_vars, rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != n_vars) throw std::invalid_argument("row width does not match the variable count");
        for (std::size_t v = 0; v < n_vars; ++v) {
            if (rows[s][v]) d.set(v, s);
        }
    }
    return d;
}

void BinaryData::set(std::size_t var, std::size_t sample) { cols_[var][sample / 64] |= std::uint64_t{1} << (sample % 64); }

bool BinaryData::get(std::size_t var, std::size_t sample) const {
    return (cols_[var][sample / 64] >> (sample % 64)) & 1U;
}

namespace {

std::size_t popcount_and(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
    return c;
}

std::size_t popcount_and3(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                          const std::vector<std::uint64_t>& m) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i] & m[i]));
    return c;
}

double g2_term(double o, double e) { return o > 0.0 ? o * std::log(o / e) : 0.0; }

}  // namespace

G2Result g2_test(const BinaryData& data, std::size_t x, std::size_t y, const std::vector<std::size_t>& cond) {
    const std::size_t W = data.words();
    std::vector<std::uint64_t> valid(W, ~std::uint64_t{0});
    if (data.samples() % 64 != 0 && W > 0) valid[W - 1] = (std::uint64_t{1} << (data.samples() % 64)) - 1;
    if (data.samples() == 0) valid.assign(W, 0);

    G2Result r;
    const std::size_t strata = std::size_t{1} << cond.size();
    const auto& cx = data.column(x);
    const auto& cy = data.column(y);
    std::vector<std::uint64_t> mask(W);
    for (std::size_t s = 0; s < strata; ++s) {
        mask = valid;
        for (std::size_t j = 0; j < cond.size(); ++j) {
            const auto& cz = data.column(cond[j]);
            const bool on = (s >> j) & 1U;
            for (std::size_t w = 0; w < W; ++w) mask[w] &= on ? cz[w] : ~cz[w];
        }
        const auto n = static_cast<double>(popcount_and(mask, valid));
        if (n == 0.0) continue;
        const auto nx = static_cast<double>(popcount_and(cx, mask));
        const auto ny = static_cast<double>(popcount_and(cy, mask));
        const auto nxy = static_cast<double>(popcount_and3(cx, cy, mask));
        const double o[2][2] = {{n - nx - ny + nxy, ny - nxy}, {nx - nxy, nxy}};
        const double row[2] = {n - nx, nx}, col[2] = {n - ny, ny};
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                if (o[a][b] > 0.0) r.statistic += 2.0 * g2_term(o[a][b], row[a] * col[b] / n);
            }
        }
        const int rows_nz = (row[0] > 0) + (row[1] > 0), cols_nz = (col[0] > 0) + (col[1] > 0);
        r.df += static_cast<double>((rows_nz - 1) * (cols_nz - 1));
    }
    r.statistic = std::max(r.statistic, 0.0);
    r.low_power = static_cast<double>(data.samples()) < 5.0 * 4.0 * static_cast<double>(strata);
    r.p_value = r.df > 0.0 ? stats::chi_squared_sf(r.statistic, r.df) : 1.0;
    return r;
}

namespace {

// Calls fn on each size-k subset of `pool` in lexicographic order; stops when fn returns true.
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t k,
                     const std::function<bool(const std::vector<std::size_t>&)>& fn) {
    if (k > pool.size()) return false;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    std::vector<std::size_t> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
        if (fn(subset)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == pool.size() - k + i - 1) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

class Graph {
public:
    explicit Graph(std::size_t n) : n_(n), adj_(n * n, 0), dir_(n * n, 0) {}
    bool adjacent(std::size_t a, std::size_t b) const { return adj_[a * n_ + b]; }
    void connect(std::size_t a, std::size_t b) { adj_[a * n_ + b] = adj_[b * n_ + a] = 1; }
    void disconnect(std::size_t a, std::size_t b) { adj_[a * n_ + b] = adj_[b * n_ + a] = 0; }
    bool directed(std::size_t a, std::size_t b) const { return dir_[a * n_ + b]; }  // a -> b
    bool undirected(std::size_t a, std::size_t b) const {
        return adjacent(a, b) && !directed(a, b) && !directed(b, a);
    }
    void orient(std::size_t a, std::size_t b) { dir_[a * n_ + b] = 1; }
    std::vector<std::size_t> neighbours(std::size_t a) const {
        std::vector<std::size_t> out;
        for (std::size_t b = 0; b < n_; ++b) {
            if (adjacent(a, b)) out.push_back(b);
        }
        return out;
    }

private:
    std::size_t n_;
    std::vector<std::uint8_t> adj_, dir_;
};

bool reaches(const std::vector<std::vector<std::size_t>>& out, std::size_t from, std::size_t to) {
    std::vector<bool> seen(out.size(), false);
    std::vector<std::size_t> stack{from};
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        if (seen[v]) continue;
        seen[v] = true;
        for (std::size_t w : out[v]) stack.push_back(w);
    }
    return false;
}

}  // namespace

Result learn(const BinaryData& data, const Options& opt) {
    const std::size_t n = data.vars();
    Result res;
    Graph g(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) g.connect(a, b);
    }
    std::vector<double> strength(n * n, std::numeric_limits<double>::infinity());
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> sepset;
    std::size_t low_power_kept = 0;

    for (std::size_t level = 0; level <= opt.max_condition_size; ++level) {
        // Adjacency snapshot for order independence within a level.
        std::vector<std::vector<std::size_t>> nb(n);
        bool any = false;
        for (std::size_t a = 0; a < n; ++a) {
            nb[a] = g.neighbours(a);
            if (nb[a].size() > level) any = true;
        }
        if (!any) break;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!g.adjacent(a, b)) continue;
                bool removed = false;
                for (std::size_t side = 0; side < 2 && !removed; ++side) {
                    const std::size_t x = side == 0 ? a : b, y = side == 0 ? b : a;
                    std::vector<std::size_t> pool;
                    for (std::size_t z : nb[x]) {
                        if (z != y) pool.push_back(z);
                    }
                    removed = for_each_subset(pool, level, [&](const std::vector<std::size_t>& cond) {
                        const auto t = g2_test(data, a, b, cond);
                        if (t.low_power) {
                            ++low_power_kept;
                            return false;
                        }
                        strength[a * n + b] = std::min(strength[a * n + b], t.statistic);
                        if (t.p_value > opt.alpha) {
                            sepset[{a, b}] = cond;
                            return true;
                        }
                        return false;
                    });
                }
                if (removed) g.disconnect(a, b);
            }
        }
    }
    if (low_power_kept > 0) {
        res.warnings.push_back("kept edges through " + std::to_string(low_power_kept) +
                               " conditional-independence tests with too few samples per cell");
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (g.adjacent(a, b)) res.skeleton.emplace_back(a, b);
        }
    }

    // Unshielded colliders x -> z <- y where z is not in sepset(x, y).
    for (std::size_t z = 0; z < n; ++z) {
        const auto nz = g.neighbours(z);
        for (std::size_t i = 0; i < nz.size(); ++i) {
            for (std::size_t j = i + 1; j < nz.size(); ++j) {
                const std::size_t x = nz[i], y = nz[j];
                if (g.adjacent(x, y)) continue;
                const auto it = sepset.find({x, y});
                if (it != sepset.end() && std::find(it->second.begin(), it->second.end(), z) != it->second.end()) {
                    continue;
                }
                if (!g.directed(z, x)) g.orient(x, z);
                if (!g.directed(z, y)) g.orient(y, z);
            }
        }
    }
    // Edges that ended up oriented both ways by conflicting colliders count as undirected below.

    // Meek rules to a fixpoint.
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b || !g.undirected(a, b)) continue;
                bool orient = false;
                for (std::size_t c = 0; c < n && !orient; ++c) {
                    if (c == a || c == b) continue;
                    // R1: c -> a - b, c not adjacent to b.
                    if (g.adjacent(c, a) && g.directed(c, a) && !g.directed(a, c) && !g.adjacent(c, b)) orient = true;
                    // R2: a -> c -> b.
                    if (g.directed(a, c) && !g.directed(c, a) && g.directed(c, b) && !g.directed(b, c)) orient = true;
                }
                if (!orient) {
                    // R3: a - c1 -> b, a - c2 -> b, c1 and c2 not adjacent.
                    std::vector<std::size_t> cs;
                    for (std::size_t c = 0; c < n; ++c) {
                        if (c != a && c != b && g.undirected(a, c) && g.directed(c, b) && !g.directed(b, c)) {
                            cs.push_back(c);
                        }
                    }
                    for (std::size_t i = 0; i < cs.size() && !orient; ++i) {
                        for (std::size_t j = i + 1; j < cs.size() && !orient; ++j) {
                            if (!g.adjacent(cs[i], cs[j])) orient = true;
                        }
                    }
                }
                if (orient) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
    }

    // Assemble an acyclic orientation: compelled edges first, then the rest lexicographically.
    std::vector<std::vector<std::size_t>> out(n);
    auto add = [&](std::size_t from, std::size_t to) {
        if (reaches(out, to, from)) std::swap(from, to);
        out[from].push_back(to);
        res.edges.push_back({from, to, strength[std::min(from, to) * n + std::max(from, to)]});
    };
    std::vector<std::pair<std::size_t, std::size_t>> loose;
    for (const auto& [a, b] : res.skeleton) {
        const bool ab = g.directed(a, b), ba = g.directed(b, a);
        if (ab && !ba) add(a, b);
        else if (ba && !ab) add(b, a);
        else loose.emplace_back(a, b);
    }
    for (const auto& [a, b] : loose) add(a, b);
    std::sort(res.edges.begin(), res.edges.end(),
              [](const Edge& x, const Edge& y) { return std::pair(x.from, x.to) < std::pair(y.from, y.to); });
    return res;
}

}  // namespace cloudrca::pc
