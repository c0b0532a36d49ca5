#include "cloudrca/khbn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cloudrca/pc.hpp"

namespace cloudrca {

using nlohmann::json;

const char* to_string(NodeLayer l) {
    switch (l) {
        case NodeLayer::Metric: return "metric";
        case NodeLayer::Module: return "module";
        case NodeLayer::Type: return "type";
    }
    return "?";
}

namespace {

NodeLayer layer_from_string(const std::string& s) {
    if (s == "metric") return NodeLayer::Metric;
    if (s == "module") return NodeLayer::Module;
    if (s == "type") return NodeLayer::Type;
    throw ValidationError("unknown node layer '" + s + "'");
}

bool reaches(const std::set<std::pair<std::size_t, std::size_t>>& edges, std::size_t n, std::size_t from,
             std::size_t to) {
    std::vector<std::vector<std::size_t>> out(n);
    for (const auto& [a, b] : edges) out[a].push_back(b);
    std::vector<bool> seen(n, false);
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

// Sort key that treats scores equal to 12 significant digits as ties.
double rank_key(double x) { return std::round(x * 1e12) / 1e12; }

}  // namespace

std::vector<std::size_t> KhbnStructure::parents(std::size_t v) const {
    std::vector<std::size_t> out;
    for (const auto& [a, b] : edges) {
        if (b == v) out.push_back(a);
    }
    return out;
}

std::vector<std::size_t> KhbnStructure::nodes_in(NodeLayer layer) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i] == layer) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> KhbnStructure::types_of(std::size_t module_node) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i] == NodeLayer::Type && owner.at(i) == module_node) out.push_back(i);
    }
    return out;
}

void KhbnStructure::validate() const {
    const std::size_t n = nodes.size();
    std::vector<std::size_t> indeg(n, 0);
    std::vector<std::vector<std::size_t>> out(n);
    for (const auto& [a, b] : edges) {
        if (a >= n || b >= n) throw ValidationError("edge references an unknown node");
        out[a].push_back(b);
        ++indeg[b];
    }
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v) {
        if (indeg[v] == 0) ready.push_back(v);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        const std::size_t v = ready.back();
        ready.pop_back();
        ++visited;
        for (std::size_t w : out[v]) {
            if (--indeg[w] == 0) ready.push_back(w);
        }
    }
    if (visited != n) throw ValidationError("network structure contains a directed cycle");
}

KhbnStructure allocate(const PlatformTopology& topo, const std::vector<std::string>& feature_ids) {
    topo.validate();
    // Dependency cycles are reported with the offending path.
    {
        std::map<std::string, std::vector<std::string>> out;
        for (const auto& [a, b] : topo.module_dependencies) out[a].push_back(b);
        std::map<std::string, int> state;
        std::vector<std::string> path;
        std::function<void(const std::string&)> dfs = [&](const std::string& m) {
            state[m] = 1;
            path.push_back(m);
            for (const auto& nx : out[m]) {
                if (state[nx] == 1) {
                    std::string cyc;
                    auto it = std::find(path.begin(), path.end(), nx);
                    for (; it != path.end(); ++it) cyc += *it + " -> ";
                    throw ValidationError("module dependency cycle: " + cyc + nx);
                }
                if (state[nx] == 0) dfs(nx);
            }
            path.pop_back();
            state[m] = 2;
        };
        for (const auto& m : topo.modules) {
            if (state[m] == 0) dfs(m);
        }
    }

    KhbnStructure s;
    auto add_node = [&](const std::string& name, NodeLayer layer) {
        if (s.index.count(name)) throw ValidationError("duplicate node id '" + name + "'");
        s.index[name] = s.nodes.size();
        s.nodes.push_back(name);
        s.layers.push_back(layer);
    };
    for (const auto& f : feature_ids) add_node(f, NodeLayer::Metric);
    s.n_metric = feature_ids.size();
    for (const auto& m : topo.modules) add_node(m, NodeLayer::Module);
    for (const auto& [t, m] : topo.cause_types) add_node(t, NodeLayer::Type);

    for (std::size_t i = 0; i < feature_ids.size(); ++i) {
        const auto owner = topo.feature_owner(feature_ids[i]);
        if (!owner) throw ValidationError("feature '" + feature_ids[i] + "' has no owner module in the topology");
        s.owner[i] = s.index.at(*owner);
        s.edges.emplace(s.index.at(*owner), i);
    }
    for (const auto& [t, m] : topo.cause_types) {
        s.owner[s.index.at(t)] = s.index.at(m);
        s.edges.emplace(s.index.at(m), s.index.at(t));
    }
    for (const auto& [a, b] : topo.module_dependencies) s.edges.emplace(s.index.at(a), s.index.at(b));
    s.validate();
    return s;
}

PcLearnResult pc_learn(const Dataset& d, double alpha, std::size_t max_condition_size) {
    if (d.feature_ids.size() < 2) throw std::invalid_argument("causal learning needs at least two metric features");
    std::vector<std::vector<std::uint8_t>> rows;
    rows.reserve(d.samples.size());
    for (const auto& s : d.samples) rows.push_back(s.bits);
    const auto data = pc::BinaryData::from_rows(rows, d.feature_ids.size());
    const auto r = pc::learn(data, {alpha, max_condition_size});
    PcLearnResult out;
    out.warnings = r.warnings;
    for (const auto& [a, b] : r.skeleton) out.skeleton.emplace_back(d.feature_ids[a], d.feature_ids[b]);
    for (const auto& e : r.edges) out.edges.push_back({d.feature_ids[e.from], d.feature_ids[e.to], e.strength});
    return out;
}

namespace {

bool node_state(const KhbnStructure& s, std::size_t v, const Sample& smp) {
    switch (s.layers[v]) {
        case NodeLayer::Metric: return smp.bits[v] != 0;
        case NodeLayer::Module: return smp.label && smp.label->module_id == s.nodes[v];
        case NodeLayer::Type: return smp.label && smp.label->type_id == s.nodes[v];
    }
    return false;
}

void check_features(const KhbnStructure& s, const Dataset& d) {
    if (d.feature_ids.size() != s.n_metric ||
        !std::equal(d.feature_ids.begin(), d.feature_ids.end(), s.nodes.begin())) {
        throw ValidationError("dataset feature ids do not match the network's metric layer");
    }
}

}  // namespace

void add_association_edges(KhbnStructure& s, const Dataset& d, double min_lift) {
    check_features(s, d);
    for (std::size_t t : s.nodes_in(NodeLayer::Type)) {
        const std::size_t m = s.owner.at(t);
        const std::string& module = s.nodes[m];
        std::vector<double> in(s.n_metric, 0.0), base(s.n_metric, 0.0);
        double n_in = 0.0, n_base = 0.0;
        for (const auto& smp : d.samples) {
            const bool is_t = smp.label && smp.label->type_id == s.nodes[t];
            const bool other = !smp.label || smp.label->module_id != module;
            if (!is_t && !other) continue;
            auto& acc = is_t ? in : base;
            (is_t ? n_in : n_base) += 1.0;
            for (std::size_t f = 0; f < s.n_metric; ++f) acc[f] += smp.bits[f];
        }
        if (n_in == 0.0) continue;
        for (std::size_t f = 0; f < s.n_metric; ++f) {
            if (s.owner.at(f) != m) continue;
            const double lift = in[f] / n_in - (n_base > 0.0 ? base[f] / n_base : 0.0);
            if (lift >= min_lift) s.edges.emplace(t, f);
        }
    }
}

void add_causal_edges(KhbnStructure& s, const std::vector<CausalEdge>& edges, std::size_t max_parents) {
    // Strongest first across all children, so a weak edge never blocks a stronger one.
    std::vector<std::tuple<double, std::size_t, std::size_t>> cands;
    for (const auto& e : edges) {
        const std::size_t a = s.index.at(e.from), b = s.index.at(e.to);
        if (s.layers[a] != NodeLayer::Metric || s.layers[b] != NodeLayer::Metric) {
            throw ValidationError("causal edges may only connect metric nodes");
        }
        cands.emplace_back(e.strength, a, b);
    }
    std::stable_sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
        if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
        return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
    });
    std::map<std::size_t, std::size_t> kept;
    for (const auto& [strength, parent, child] : cands) {
        if (kept[child] == max_parents || s.edges.count({parent, child})) continue;
        if (reaches(s.edges, s.nodes.size(), child, parent)) continue;
        s.edges.emplace(parent, child);
        ++kept[child];
    }
    s.validate();
}

void KhbnOptions::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("khbn alpha must lie in (0, 1)");
    if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) {
        throw ValidationError("confidence_floor must lie in [0, 1]");
    }
    if (max_causal_parents > 8) throw ValidationError("max_causal_parents must be at most 8");
    if (!(min_lift > 0.0 && min_lift <= 1.0)) throw ValidationError("min_lift must lie in (0, 1]");
}

KhbnModel fit_cpts(const KhbnStructure& s, const Dataset& d) {
    s.validate();
    check_features(s, d);
    KhbnModel model;
    model.structure = s;
    model.feature_ids = d.feature_ids;
    const std::size_t n = s.nodes.size();
    model.net.parents.assign(n, {});
    model.net.cpt.assign(n, {});
    for (const auto& [a, b] : s.edges) model.net.parents[b].push_back(a);

    // States of every node for every sample, computed once.
    std::vector<std::vector<std::uint8_t>> state(d.samples.size(), std::vector<std::uint8_t>(n));
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        for (std::size_t v = 0; v < n; ++v) state[i][v] = node_state(s, v, d.samples[i]);
    }
    for (std::size_t v = 0; v < n; ++v) {
        auto& par = model.net.parents[v];
        std::sort(par.begin(), par.end());
        if (par.size() > 20) throw ValidationError("node '" + s.nodes[v] + "' has too many parents");
        const std::size_t configs = std::size_t{1} << par.size();
        std::vector<double> n1(configs, 0.0), nt(configs, 0.0);
        for (const auto& st : state) {
            std::size_t cfg = 0;
            for (std::size_t j = 0; j < par.size(); ++j) cfg |= static_cast<std::size_t>(st[par[j]]) << j;
            nt[cfg] += 1.0;
            n1[cfg] += st[v];
        }
        auto& cpt = model.net.cpt[v];
        cpt.resize(configs);
        for (std::size_t c = 0; c < configs; ++c) cpt[c] = (n1[c] + 1.0) / (nt[c] + 2.0);
    }
    return model;
}

KhbnModel train_khbn(const PlatformTopology& topo, const Dataset& train, const KhbnOptions& opt) {
    opt.validate();
    auto s = allocate(topo, train.feature_ids);
    add_association_edges(s, train, opt.min_lift);
    std::vector<std::string> warnings;
    if (opt.learn_causal && train.feature_ids.size() >= 2) {
        auto pc = pc_learn(train, opt.alpha, opt.max_condition_size);
        add_causal_edges(s, pc.edges, opt.max_causal_parents);
        warnings = pc.warnings;
    }
    auto model = fit_cpts(s, train);
    model.warnings = std::move(warnings);
    return model;
}

std::string KhbnModel::fingerprint() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& f : feature_ids) {
        for (unsigned char c : f) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string KhbnModel::to_json() const {
    json nodes = json::array();
    for (std::size_t v = 0; v < structure.nodes.size(); ++v) {
        json parents = json::array();
        for (std::size_t p : net.parents[v]) parents.push_back(structure.nodes[p]);
        json node = {{"id", structure.nodes[v]},
                     {"layer", to_string(structure.layers[v])},
                     {"parents", parents},
                     {"cpt", net.cpt[v]}};
        if (auto it = structure.owner.find(v); it != structure.owner.end()) node["module"] = structure.nodes[it->second];
        nodes.push_back(std::move(node));
    }
    json j = {{"format", "khbn-1"},
              {"fingerprint", fingerprint()},
              {"feature_ids", feature_ids},
              {"nodes", nodes},
              {"warnings", warnings}};
    return j.dump(1) + "\n";
}

KhbnModel KhbnModel::from_json(const std::string& text) {
    KhbnModel m;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "khbn-1") throw ValidationError("unsupported model format");
        m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
        m.warnings = j.value("warnings", std::vector<std::string>{});
        auto& s = m.structure;
        const auto& nodes = j.at("nodes");
        for (const auto& jn : nodes) {
            const auto id = jn.at("id").get<std::string>();
            if (s.index.count(id)) throw ValidationError("duplicate node id '" + id + "' in model");
            s.index[id] = s.nodes.size();
            s.nodes.push_back(id);
            s.layers.push_back(layer_from_string(jn.at("layer").get<std::string>()));
        }
        s.n_metric = m.feature_ids.size();
        for (std::size_t v = 0; v < s.n_metric; ++v) {
            if (v >= s.nodes.size() || s.nodes[v] != m.feature_ids[v] || s.layers[v] != NodeLayer::Metric) {
                throw ValidationError("model metric layer does not match its feature ids");
            }
        }
        m.net.parents.resize(s.nodes.size());
        m.net.cpt.resize(s.nodes.size());
        for (std::size_t v = 0; v < s.nodes.size(); ++v) {
            const auto& jn = nodes[v];
            if (jn.contains("module")) s.owner[v] = s.index.at(jn.at("module").get<std::string>());
            for (const auto& p : jn.at("parents")) {
                const std::size_t pi = s.index.at(p.get<std::string>());
                m.net.parents[v].push_back(pi);
                s.edges.emplace(pi, v);
            }
            m.net.cpt[v] = jn.at("cpt").get<std::vector<double>>();
        }
        if (j.at("fingerprint").get<std::string>() != m.fingerprint()) {
            throw ValidationError("model fingerprint does not match its feature ids");
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model document: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ValidationError(std::string("model references an unknown node: ") + e.what());
    }
    try {
        m.net.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("invalid model: ") + e.what());
    }
    m.structure.validate();
    return m;
}

Diagnosis infer(const KhbnModel& model, const std::vector<std::uint8_t>& observed) {
    const auto& s = model.structure;
    if (observed.size() != s.n_metric) throw ValidationError("observation width does not match the metric layer");
    bn::Evidence ev(s.nodes.size(), -1);
    for (std::size_t i = 0; i < s.n_metric; ++i) {
        if (observed[i] > 1) throw ValidationError("observed bits must be 0 or 1");
        ev[i] = static_cast<std::int8_t>(observed[i]);
    }
    Diagnosis d;
    const auto modules = s.nodes_in(NodeLayer::Module);
    for (std::size_t m : modules) {
        auto types = s.types_of(m);
        std::vector<std::size_t> q = types;
        q.push_back(m);
        const auto post = bn::query(model.net, ev, q);
        if (post.degenerate) {
            d.degenerate = true;
            break;
        }
        auto bit = [&](std::size_t v) {
            return static_cast<std::size_t>(std::lower_bound(post.vars.begin(), post.vars.end(), v) - post.vars.begin());
        };
        const std::size_t mb = bit(m);
        double pm = 0.0;
        for (std::size_t i = 0; i < post.probs.size(); ++i) {
            if ((i >> mb) & 1U) pm += post.probs[i];
        }
        d.modules.emplace_back(s.nodes[m], pm);
        for (std::size_t t : types) {
            const std::size_t tb = bit(t);
            double joint = 0.0;
            for (std::size_t i = 0; i < post.probs.size(); ++i) {
                if (((i >> mb) & 1U) && ((i >> tb) & 1U)) joint += post.probs[i];
            }
            // P(t | m, e) * P(m | e) is exactly the joint P(t, m | e).
            d.types.emplace_back(s.nodes[t], joint);
        }
    }
    if (d.degenerate) {
        d.modules.clear();
        d.types.clear();
        const auto types = s.nodes_in(NodeLayer::Type);
        for (std::size_t m : modules) d.modules.emplace_back(s.nodes[m], 1.0 / static_cast<double>(modules.size()));
        for (std::size_t t : types) d.types.emplace_back(s.nodes[t], 1.0 / static_cast<double>(types.size()));
    }
    auto by_score = [](const auto& a, const auto& b) {
        const double ka = rank_key(a.second), kb = rank_key(b.second);
        if (ka != kb) return ka > kb;
        return a.first < b.first;
    };
    std::sort(d.types.begin(), d.types.end(), by_score);
    std::sort(d.modules.begin(), d.modules.end(), by_score);
    if (!d.types.empty()) d.best_type = d.types.front().first;
    if (!d.modules.empty()) {
        d.best_module = d.modules.front().first;
        d.best_module_probability = d.modules.front().second;
    }
    return d;
}

Diagnosis infer(const KhbnModel& model, const std::vector<std::string>& feature_ids,
                const std::vector<std::uint8_t>& observed) {
    if (feature_ids != model.feature_ids) {
        throw ValidationError("feature ids do not match the model (trained on a different feature set)");
    }
    return infer(model, observed);
}

Diagnosis infer_module_fallback(const KhbnModel& model, const std::vector<std::uint8_t>& observed,
                                double confidence_floor) {
    auto d = infer(model, observed);
    const double best = d.types.empty() ? 0.0 : d.types.front().second;
    d.novel_type = best < confidence_floor;
    return d;
}

std::string diagnosis_to_json(const Diagnosis& d) {
    json types = json::array(), modules = json::array();
    for (const auto& [t, p] : d.types) types.push_back({{"type_id", t}, {"score", p}});
    for (const auto& [m, p] : d.modules) modules.push_back({{"module_id", m}, {"probability", p}});
    json j = {{"best_type", d.best_type},
              {"best_module", d.best_module},
              {"best_module_probability", d.best_module_probability},
              {"novel_type", d.novel_type},
              {"degenerate", d.degenerate},
              {"types", types},
              {"modules", modules}};
    return j.dump(1) + "\n";
}

}  // namespace cloudrca
