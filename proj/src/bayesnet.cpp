#include "cloudrca/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace cloudrca::bn {

void BinaryNetwork::validate() const {
    const std::size_t n = size();
    if (cpt.size() != n) throw std::invalid_argument("network has a CPT count mismatch");
    for (std::size_t v = 0; v < n; ++v) {
        if (parents[v].size() > 24) throw std::invalid_argument("node " + std::to_string(v) + " has too many parents");
        if (cpt[v].size() != (std::size_t{1} << parents[v].size())) {
            throw std::invalid_argument("CPT of node " + std::to_string(v) + " does not cover all configurations");
        }
        std::set<std::size_t> seen;
        for (std::size_t p : parents[v]) {
            if (p >= n || p == v || !seen.insert(p).second) {
                throw std::invalid_argument("node " + std::to_string(v) + " has an invalid parent");
            }
        }
        for (double q : cpt[v]) {
            if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("CPT entry outside [0, 1]");
        }
    }
    (void)topological_order();
}

std::vector<std::size_t> BinaryNetwork::topological_order() const {
    const std::size_t n = size();
    std::vector<std::size_t> indeg(n, 0);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t p : parents[v]) {
            children[p].push_back(v);
            ++indeg[v];
        }
    }
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v) {
        if (indeg[v] == 0) ready.insert(v);
    }
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const std::size_t v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (std::size_t c : children[v]) {
            if (--indeg[c] == 0) ready.insert(c);
        }
    }
    if (order.size() != n) throw std::invalid_argument("network contains a directed cycle");
    return order;
}

namespace {

void rescale(Factor& f) {
    double mx = 0.0;
    for (double x : f.table) mx = std::max(mx, x);
    if (mx > 0.0 && std::isfinite(mx)) {
        for (double& x : f.table) x /= mx;
        f.log_scale += std::log(mx);
    }
}

// Position of each variable of `sub` inside `super` (both ascending).
std::vector<std::size_t> positions(const std::vector<std::size_t>& sub, const std::vector<std::size_t>& super) {
    std::vector<std::size_t> pos;
    pos.reserve(sub.size());
    for (std::size_t v : sub) {
        pos.push_back(static_cast<std::size_t>(std::lower_bound(super.begin(), super.end(), v) - super.begin()));
    }
    return pos;
}

std::size_t project(std::size_t idx, const std::vector<std::size_t>& pos) {
    std::size_t out = 0;
    for (std::size_t j = 0; j < pos.size(); ++j) out |= ((idx >> pos[j]) & 1U) << j;
    return out;
}

}  // namespace

Factor multiply(const Factor& a, const Factor& b) {
    Factor out;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(out.vars));
    if (out.vars.size() > 30) throw std::length_error("factor too large");
    const auto pa = positions(a.vars, out.vars), pb = positions(b.vars, out.vars);
    const std::size_t size = std::size_t{1} << out.vars.size();
    out.table.resize(size);
    for (std::size_t i = 0; i < size; ++i) out.table[i] = a.table[project(i, pa)] * b.table[project(i, pb)];
    out.log_scale = a.log_scale + b.log_scale;
    rescale(out);
    return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
    auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end() || *it != var) return f;
    const auto j = static_cast<std::size_t>(it - f.vars.begin());
    Factor out;
    out.vars = f.vars;
    out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(j));
    out.table.assign(std::size_t{1} << out.vars.size(), 0.0);
    const std::size_t low = (std::size_t{1} << j) - 1;
    for (std::size_t i = 0; i < f.table.size(); ++i) {
        const std::size_t k = (i & low) | ((i >> (j + 1)) << j);
        out.table[k] += f.table[i];
    }
    out.log_scale = f.log_scale;
    rescale(out);
    return out;
}

namespace {

// CPT of `v` as a factor, with observed variables already clamped away.
Factor cpt_factor(const BinaryNetwork& net, const Evidence& ev, std::size_t v) {
    std::vector<std::size_t> scope = net.parents[v];
    scope.push_back(v);
    std::vector<std::size_t> free;
    for (std::size_t x : scope) {
        if (ev[x] < 0) free.push_back(x);
    }
    std::sort(free.begin(), free.end());
    Factor f;
    f.vars = free;
    f.table.resize(std::size_t{1} << free.size());
    const auto& par = net.parents[v];
    for (std::size_t i = 0; i < f.table.size(); ++i) {
        auto state = [&](std::size_t x) -> int {
            if (ev[x] >= 0) return ev[x];
            const auto j = static_cast<std::size_t>(std::lower_bound(free.begin(), free.end(), x) - free.begin());
            return static_cast<int>((i >> j) & 1U);
        };
        std::size_t cfg = 0;
        for (std::size_t j = 0; j < par.size(); ++j) cfg |= static_cast<std::size_t>(state(par[j])) << j;
        const double p1 = net.cpt[v][cfg];
        f.table[i] = state(v) ? p1 : 1.0 - p1;
    }
    rescale(f);
    return f;
}

}  // namespace

Posterior query(const BinaryNetwork& net, const Evidence& evidence, std::vector<std::size_t> q) {
    const std::size_t n = net.size();
    if (evidence.size() != n) throw std::invalid_argument("evidence size does not match the network");
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    for (std::size_t v : q) {
        if (v >= n) throw std::invalid_argument("query variable out of range");
        if (evidence[v] >= 0) throw std::invalid_argument("query variable is observed");
    }

    // Barren-node pruning: keep only ancestors of evidence and query nodes.
    std::vector<bool> keep(n, false);
    std::vector<std::size_t> stack;
    for (std::size_t v = 0; v < n; ++v) {
        if (evidence[v] >= 0 || std::binary_search(q.begin(), q.end(), v)) stack.push_back(v);
    }
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        if (keep[v]) continue;
        keep[v] = true;
        for (std::size_t p : net.parents[v]) {
            if (!keep[p]) stack.push_back(p);
        }
    }

    std::vector<Factor> factors;
    for (std::size_t v = 0; v < n; ++v) {
        if (keep[v]) factors.push_back(cpt_factor(net, evidence, v));
    }

    // Hidden variables to eliminate.
    std::set<std::size_t> hidden;
    for (std::size_t v = 0; v < n; ++v) {
        if (keep[v] && evidence[v] < 0 && !std::binary_search(q.begin(), q.end(), v)) hidden.insert(v);
    }
    while (!hidden.empty()) {
        // Greedy min-degree: fewest distinct neighbours in the current factor graph.
        std::size_t best = *hidden.begin();
        std::size_t best_deg = std::numeric_limits<std::size_t>::max();
        for (std::size_t v : hidden) {
            std::set<std::size_t> nb;
            for (const auto& f : factors) {
                if (std::binary_search(f.vars.begin(), f.vars.end(), v)) nb.insert(f.vars.begin(), f.vars.end());
            }
            if (nb.size() < best_deg) {
                best_deg = nb.size();
                best = v;
            }
        }
        hidden.erase(best);
        Factor prod;
        prod.table = {1.0};
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (std::binary_search(f.vars.begin(), f.vars.end(), best)) {
                prod = multiply(prod, f);
            } else {
                rest.push_back(std::move(f));
            }
        }
        rest.push_back(sum_out(prod, best));
        factors.swap(rest);
    }

    Factor joint;
    joint.table = {1.0};
    for (const auto& f : factors) joint = multiply(joint, f);
    // Scalar factors may leave `joint` over a subset of the query; extend to the full query.
    if (joint.vars != q) {
        Factor ones;
        ones.vars = q;
        ones.table.assign(std::size_t{1} << q.size(), 1.0);
        joint = multiply(joint, ones);
    }

    Posterior post;
    post.vars = q;
    double z = 0.0;
    for (double x : joint.table) z += x;
    if (!(z > 0.0) || !std::isfinite(z)) {
        post.degenerate = true;
        post.log_evidence = -std::numeric_limits<double>::infinity();
        post.probs.assign(joint.table.size(), 1.0 / static_cast<double>(joint.table.size()));
        return post;
    }
    post.log_evidence = joint.log_scale + std::log(z);
    post.probs.resize(joint.table.size());
    for (std::size_t i = 0; i < joint.table.size(); ++i) post.probs[i] = joint.table[i] / z;
    return post;
}

double marginal(const BinaryNetwork& net, const Evidence& evidence, std::size_t var) {
    if (var < evidence.size() && evidence[var] >= 0) return evidence[var] == 1 ? 1.0 : 0.0;
    return query(net, evidence, {var}).probs.at(1);
}

}  // namespace cloudrca::bn
