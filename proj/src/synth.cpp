#include "cloudrca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cloudrca::synth {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(unit(rng) * static_cast<double>(n)); }

std::string fill(const std::string& tpl, const std::vector<std::string>& names, std::mt19937_64& rng) {
    std::string out;
    out.reserve(tpl.size() + 16);
    for (std::size_t i = 0; i < tpl.size();) {
        if (tpl[i] == '{') {
            const auto close = tpl.find('}', i);
            const auto key = tpl.substr(i + 1, close - i - 1);
            if (key == "name") {
                out += names[pick(rng, names.size())];
            } else if (key == "num") {
                out += std::to_string(pick(rng, 100000));
            } else if (key == "ip") {
                out += "10." + std::to_string(pick(rng, 256)) + "." + std::to_string(pick(rng, 256)) + "." +
                       std::to_string(1 + pick(rng, 254));
            } else if (key == "path") {
                out += "/var/lib/vol" + std::to_string(pick(rng, 64)) + "/seg" + std::to_string(pick(rng, 4096));
            } else if (key == "hex") {
                static const char* digits = "0123456789abcdef";
                out += "0x";
                for (int k = 0; k < 8; ++k) out += digits[pick(rng, 16)];
            } else {
                throw ValidationError("unknown placeholder {" + key + "} in log template");
            }
            i = close + 1;
        } else {
            out += tpl[i++];
        }
    }
    return out;
}

}  // namespace

void PlatformSpec::validate() const {
    if (platform_id.empty()) throw ValidationError("platform spec needs a platform_id");
    if (modules.empty()) throw ValidationError("platform spec needs at least one module");
    if (step <= 0 || window_points < 10 || lookback_points < 10) {
        throw ValidationError("step must be positive and window/lookback at least 10 points");
    }
    if (burst_min < 1 || burst_max < burst_min) throw ValidationError("burst bounds must satisfy 1 <= min <= max");
    if (!(chatter_interval > 0.0)) throw ValidationError("chatter_interval must be positive");
    std::map<std::string, const ModuleSpec*> mods;
    std::set<std::string> metrics;
    for (const auto& m : modules) {
        if (!mods.emplace(m.module_id, &m).second) throw ValidationError("duplicate module '" + m.module_id + "'");
        for (const auto& ms : m.metrics) {
            if (!metrics.insert(ms.metric_id).second) throw ValidationError("duplicate metric '" + ms.metric_id + "'");
            if (ms.period < 2 || !(ms.noise > 0.0)) {
                throw ValidationError("metric '" + ms.metric_id + "' needs period >= 2 and positive noise");
            }
        }
        for (const auto& c : m.chatter) {
            if (c.find('{') != std::string::npos && c.find('}') == std::string::npos) {
                throw ValidationError("unterminated placeholder in chatter template");
            }
        }
    }
    if (!module_fault_counts.empty()) {
        for (const auto& [m, n] : module_fault_counts) {
            if (!mods.count(m)) throw ValidationError("fault count for unknown module '" + m + "'");
        }
    }
    if (types.empty()) throw ValidationError("platform spec needs at least one root-cause type");
    std::set<std::string> type_ids;
    for (const auto& t : types) {
        if (!type_ids.insert(t.type_id).second) throw ValidationError("duplicate type '" + t.type_id + "'");
        auto it = mods.find(t.module_id);
        if (it == mods.end()) throw ValidationError("type '" + t.type_id + "' references unknown module");
        if (t.effects.empty()) throw ValidationError("type '" + t.type_id + "' has no metric effects");
        for (const auto& e : t.effects) {
            const auto& owned = it->second->metrics;
            if (std::none_of(owned.begin(), owned.end(), [&](const MetricSpec& m) { return m.metric_id == e.metric_id; })) {
                throw ValidationError("type '" + t.type_id + "' affects metric '" + e.metric_id +
                                      "' outside its module");
            }
        }
    }
    for (const auto& [a, b] : dependencies) {
        if (!mods.count(a) || !mods.count(b)) throw ValidationError("dependency references an unknown module");
    }
    if (names.empty()) throw ValidationError("platform spec needs a non-empty name pool");
}

PlatformTopology PlatformSpec::topology() const {
    PlatformTopology t;
    t.platform_id = platform_id;
    for (const auto& m : modules) {
        t.modules.insert(m.module_id);
        for (const auto& ms : m.metrics) t.metric_owner[ms.metric_id] = m.module_id;
    }
    for (const auto& ty : types) t.cause_types[ty.type_id] = ty.module_id;
    t.module_dependencies = dependencies;
    return t;
}

GeneratedCorpus generate(const PlatformSpec& spec, std::size_t n_normal, std::size_t n_faults_per_type) {
    spec.validate();
    if (n_normal < 1) throw ValidationError("n_normal must be at least 1");
    if (spec.module_fault_counts.empty() && n_faults_per_type < 1) {
        throw ValidationError("n_faults_per_type must be at least 1");
    }
    std::mt19937_64 rng(spec.seed ^ fnv1a(spec.platform_id));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Segment plan: -1 for a normal segment, otherwise the index of the injected type.
    std::vector<int> plan(n_normal, -1);
    if (spec.module_fault_counts.empty()) {
        for (std::size_t t = 0; t < spec.types.size(); ++t) plan.insert(plan.end(), n_faults_per_type, static_cast<int>(t));
    } else {
        for (const auto& [module, count] : spec.module_fault_counts) {
            std::vector<int> owned;
            for (std::size_t t = 0; t < spec.types.size(); ++t) {
                if (spec.types[t].module_id == module) owned.push_back(static_cast<int>(t));
            }
            if (owned.empty()) continue;
            for (std::size_t j = 0; j < owned.size(); ++j) {
                const std::size_t n = count / owned.size() + (j < count % owned.size() ? 1 : 0);
                plan.insert(plan.end(), n, owned[j]);
            }
        }
    }
    for (std::size_t i = plan.size(); i > 1; --i) std::swap(plan[i - 1], plan[pick(rng, i)]);

    const std::size_t L = spec.lookback_points, W = spec.window_points, seg = L + W;
    const std::size_t total = plan.size() * seg;
    GeneratedCorpus out;
    out.topology = spec.topology();

    for (std::size_t i = 0; i < plan.size(); ++i) {
        Sample w;
        w.window_start = spec.start + static_cast<Timestamp>(i * seg + L) * spec.step;
        w.window_end = w.window_start + static_cast<Timestamp>(W) * spec.step;
        if (plan[i] >= 0) {
            const auto& ty = spec.types[static_cast<std::size_t>(plan[i])];
            w.polarity = Polarity::Negative;
            w.label = Label{ty.module_id, ty.type_id};
        }
        out.windows.push_back(std::move(w));
    }

    // Metrics: seasonal signal plus Gaussian noise, then injections inside fault windows.
    std::map<std::string, std::pair<TimeSeries*, std::vector<double>>> eps;
    for (const auto& m : spec.modules) {
        for (const auto& ms : m.metrics) {
            TimeSeries s;
            s.metric_id = ms.metric_id;
            s.module_id = m.module_id;
            s.timestamps.resize(total);
            s.values.resize(total);
            const double phase = 2.0 * std::numbers::pi * unit(rng);
            std::vector<double> e(total);
            for (std::size_t g = 0; g < total; ++g) {
                e[g] = gauss(rng);
                s.timestamps[g] = spec.start + static_cast<Timestamp>(g) * spec.step;
                s.values[g] = ms.base + ms.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(g) / ms.period + phase) +
                              ms.noise * e[g];
            }
            out.metrics.push_back(std::move(s));
            eps[ms.metric_id].second = std::move(e);
        }
    }
    for (auto& s : out.metrics) eps[s.metric_id].first = &s;
    std::map<std::string, const MetricSpec*> mspec;
    for (const auto& m : spec.modules) {
        for (const auto& ms : m.metrics) mspec[ms.metric_id] = &ms;
    }

    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (plan[i] < 0) continue;
        const auto& ty = spec.types[static_cast<std::size_t>(plan[i])];
        std::vector<const MetricEffect*> applied;
        for (const auto& e : ty.effects) {
            if (unit(rng) < e.probability) applied.push_back(&e);
        }
        if (applied.empty()) applied.push_back(&ty.effects.front());
        const std::size_t w0 = i * seg + L;
        for (const MetricEffect* e : applied) {
            auto& [series, noise] = eps.at(e->metric_id);
            const MetricSpec& ms = *mspec.at(e->metric_id);
            const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
            auto& v = series->values;
            switch (e->kind) {
                case AnomalyKind::SpikeDip: {
                    const std::size_t k = 1 + pick(rng, 3);
                    for (std::size_t j = 0; j < k; ++j) {
                        const double sg = unit(rng) < 0.5 ? -1.0 : 1.0;
                        v[w0 + 2 + pick(rng, W - 4)] += sg * spec.spike_sigmas * ms.noise;
                    }
                    break;
                }
                case AnomalyKind::VarianceChange:
                    for (std::size_t j = 0; j < W; ++j) v[w0 + j] += (spec.variance_factor - 1.0) * ms.noise * noise[w0 + j];
                    break;
                case AnomalyKind::MeanChange:
                    for (std::size_t j = 0; j < W; ++j) v[w0 + j] += sign * spec.shift_sigmas * ms.noise;
                    break;
                case AnomalyKind::LongTrend:
                    for (std::size_t j = 0; j < W; ++j) {
                        v[w0 + j] += sign * spec.drift_sigmas_per_period * ms.noise * static_cast<double>(j + 1) / ms.period;
                    }
                    break;
            }
        }
    }

    // Logs: chatter over every segment, bursts inside fault windows.
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const Timestamp seg_start = spec.start + static_cast<Timestamp>(i * seg) * spec.step;
        const Timestamp seg_end = seg_start + static_cast<Timestamp>(seg) * spec.step;
        for (const auto& m : spec.modules) {
            if (m.chatter.empty()) continue;
            double t = static_cast<double>(seg_start);
            while (true) {
                t += -std::log(1.0 - unit(rng)) * spec.chatter_interval;
                if (t >= static_cast<double>(seg_end)) break;
                const auto& tpl = m.chatter[pick(rng, m.chatter.size())];
                out.logs.push_back({static_cast<Timestamp>(t), m.module_id, fill(tpl, spec.names, rng)});
            }
        }
        if (plan[i] < 0) continue;
        const auto& ty = spec.types[static_cast<std::size_t>(plan[i])];
        if (ty.log_templates.empty() || unit(rng) >= ty.burst_probability) continue;
        const auto& tpl = ty.log_templates[pick(rng, ty.log_templates.size())];
        const std::size_t count = spec.burst_min + pick(rng, spec.burst_max - spec.burst_min + 1);
        const auto& w = out.windows[i];
        for (std::size_t j = 0; j < count; ++j) {
            const Timestamp ts = w.window_start + static_cast<Timestamp>(pick(rng, static_cast<std::size_t>(w.window_end - w.window_start)));
            out.logs.push_back({ts, ty.module_id, fill(tpl, spec.names, rng)});
        }
    }
    std::stable_sort(out.logs.begin(), out.logs.end(),
                     [](const LogRecord& a, const LogRecord& b) { return a.timestamp < b.timestamp; });
    return out;
}

namespace {

// Pronounceable pseudo-words; every word handed out is unique within one vocabulary.
class Vocab {
public:
    std::string word(std::mt19937_64& rng, int syllables) {
        static const std::string cons = "bdfgklmnprtvz";
        static const std::string vow = "aeiou";
        while (true) {
            std::string w;
            for (int s = 0; s < syllables; ++s) {
                w += cons[pick(rng, cons.size())];
                w += vow[pick(rng, vow.size())];
            }
            if (used_.insert(w).second) return w;
        }
    }

private:
    std::set<std::string> used_;
};

struct ModuleBlueprint {
    std::string module_id;
    std::vector<std::string> metric_names;
    std::vector<std::string> type_names;  // candidates; the first n are used
};

const std::vector<ModuleBlueprint>& blueprints() {
    static const std::vector<ModuleBlueprint> b = {
        {"host",
         {"cpu", "mem", "disk_io", "load"},
         {"cpu_saturation", "disk_failure", "kernel_panic", "memory_leak", "thermal_throttle"}},
        {"network",
         {"rx_bytes", "tx_bytes", "retransmits", "latency"},
         {"dns_failure", "link_down", "packet_loss", "switch_reboot"}},
        {"storage",
         {"iops", "read_latency", "write_latency", "queue_depth"},
         {"checksum_error", "compaction_stall", "disk_full", "replica_lag", "slow_disk", "wal_corruption"}},
        {"scheduler",
         {"pending_jobs", "alloc_latency", "slots_used", "preemptions"},
         {"deadlock", "heartbeat_loss", "over_commit", "queue_starvation", "quota_exceeded", "task_storm"}},
        {"service",
         {"qps", "error_rate", "p99_latency", "threads"},
         {"config_error", "connection_leak", "gc_pause", "hot_key", "thread_exhaustion", "version_mismatch"}},
    };
    return b;
}

// Metric-index sets and log-family index per type, by type count. Metric 0 is the module's
// health metric and reacts to every type. Types 0/1 differ only in metrics, types 2/3 only in
// logs; the last type has a signature no other type shares.
std::vector<std::pair<std::vector<std::size_t>, std::size_t>> signature_layout(std::size_t n_types) {
    switch (n_types) {
        case 3: return {{{1, 0}, 0}, {{2, 0}, 0}, {{3, 1, 0}, 1}};
        case 4: return {{{1, 0}, 0}, {{2, 0}, 0}, {{3, 0}, 1}, {{3, 1, 0}, 2}};
        case 5: return {{{1, 0}, 0}, {{2, 0}, 0}, {{3, 0}, 1}, {{3, 0}, 2}, {{3, 1, 0}, 3}};
        case 6: return {{{1, 0}, 0}, {{2, 0}, 0}, {{3, 0}, 1}, {{3, 0}, 2}, {{1, 2, 0}, 3}, {{3, 1, 0}, 4}};
        default: throw std::invalid_argument("benchmark modules have 3 to 6 types");
    }
}

struct BuiltModule {
    ModuleSpec module;
    std::vector<FaultSignature> types;
};

BuiltModule build_module(const ModuleBlueprint& bp, std::size_t n_types, const std::string& key, Vocab& vocab) {
    std::mt19937_64 rng(fnv1a(key));
    BuiltModule out;
    out.module.module_id = bp.module_id;
    static const int periods[] = {8, 10, 12, 16, 20};
    for (const auto& name : bp.metric_names) {
        MetricSpec ms;
        ms.metric_id = bp.module_id + "." + name;
        ms.base = 50.0 + 450.0 * unit(rng);
        ms.noise = ms.base * (0.01 + 0.02 * unit(rng));
        ms.amplitude = ms.noise * (8.0 + 8.0 * unit(rng));
        ms.period = periods[pick(rng, 5)];
        out.module.metrics.push_back(ms);
    }
    // Chatter: four families of three paraphrases, each line naming a peer and a counter.
    for (int f = 0; f < 4; ++f) {
        const auto a = vocab.word(rng, 4), b = vocab.word(rng, 4), c = vocab.word(rng, 4);
        for (int v = 0; v < 3; ++v) {
            out.module.chatter.push_back(a + " " + b + " " + vocab.word(rng, 4) + " " + c + " {name} {num}");
        }
    }
    // Fault log families: five shared words plus one of twelve paraphrase words.
    const auto layout = signature_layout(n_types);
    std::size_t n_families = 0;
    for (const auto& [m, f] : layout) n_families = std::max(n_families, f + 1);
    std::vector<std::vector<std::string>> families(n_families);
    static const char* tails[] = {"{num} {ip}", "{path} {num}", "{hex} {ip}", "{num} {path}"};
    for (std::size_t f = 0; f < n_families; ++f) {
        std::vector<std::string> w;
        for (int k = 0; k < 5; ++k) w.push_back(vocab.word(rng, 4));
        for (int v = 0; v < 12; ++v) {
            families[f].push_back(w[0] + " " + w[1] + " " + vocab.word(rng, 4) + " " + w[2] + " " + w[3] + " " + w[4] +
                                  " " + tails[(f + static_cast<std::size_t>(v)) % 4]);
        }
    }
    const std::size_t salt = fnv1a(bp.module_id) % 4;
    for (std::size_t t = 0; t < n_types; ++t) {
        FaultSignature sig;
        sig.type_id = bp.module_id + "." + bp.type_names[t];
        sig.module_id = bp.module_id;
        const auto& [metrics, family] = layout[t];
        for (std::size_t j = 0; j < metrics.size(); ++j) {
            MetricEffect e;
            e.metric_id = out.module.metrics[metrics[j]].metric_id;
            e.kind = static_cast<AnomalyKind>((t + metrics[j] + salt) % 4);
            e.probability = j == 0 ? 1.0 : 0.9;
            sig.effects.push_back(e);
        }
        sig.log_templates = families[family];
        sig.burst_probability = 0.95;
        out.types.push_back(std::move(sig));
    }
    return out;
}

struct PlatformPlan {
    std::string platform_id;
    std::map<std::string, std::size_t> n_types;
    std::map<std::string, std::size_t> faults;
    std::size_t normal;
};

const std::vector<PlatformPlan>& plans() {
    static const std::vector<PlatformPlan> p = {
        {"batch",
         {{"storage", 5}, {"scheduler", 4}, {"host", 5}, {"network", 4}, {"service", 3}},
         {{"storage", 40}, {"scheduler", 40}, {"host", 40}, {"network", 40}, {"service", 40}},
         840},
        {"stream",
         {{"storage", 4}, {"scheduler", 3}, {"host", 5}, {"network", 4}, {"service", 4}},
         {{"storage", 13}, {"scheduler", 14}, {"host", 22}, {"network", 18}, {"service", 9}},
         316},
        {"olap",
         {{"storage", 3}, {"scheduler", 4}, {"host", 5}, {"network", 4}, {"service", 3}},
         {{"storage", 7}, {"scheduler", 8}, {"host", 12}, {"network", 9}, {"service", 5}},
         169},
    };
    return p;
}

}  // namespace

std::set<std::string> standard_shared_modules() { return {"host", "network"}; }

std::vector<std::size_t> standard_normal_counts() {
    std::vector<std::size_t> out;
    for (const auto& p : plans()) out.push_back(p.normal);
    return out;
}

std::vector<PlatformSpec> standard_specs(std::uint64_t seed) {
    const auto shared = standard_shared_modules();
    std::vector<PlatformSpec> out;
    for (const auto& plan : plans()) {
        Vocab vocab;
        std::map<std::string, BuiltModule> built;
        // Shared modules first, from platform-independent keys, so their vocabulary is identical everywhere.
        for (const auto& bp : blueprints()) {
            if (shared.count(bp.module_id)) {
                built[bp.module_id] = build_module(bp, plan.n_types.at(bp.module_id), "shared/" + bp.module_id, vocab);
            }
        }
        std::mt19937_64 name_rng(fnv1a("names"));
        std::vector<std::string> names;
        for (int i = 0; i < 300; ++i) names.push_back(vocab.word(name_rng, 3));
        for (const auto& bp : blueprints()) {
            if (!shared.count(bp.module_id)) {
                built[bp.module_id] =
                    build_module(bp, plan.n_types.at(bp.module_id), plan.platform_id + "/" + bp.module_id, vocab);
            }
        }
        PlatformSpec spec;
        spec.platform_id = plan.platform_id;
        spec.seed = seed;
        spec.names = std::move(names);
        for (const auto& bp : blueprints()) {
            auto& b = built.at(bp.module_id);
            spec.modules.push_back(b.module);
            for (auto& t : b.types) spec.types.push_back(t);
        }
        spec.dependencies = {{"host", "storage"},    {"host", "scheduler"},    {"network", "storage"},
                             {"network", "service"}, {"storage", "service"}, {"scheduler", "service"}};
        spec.module_fault_counts = plan.faults;
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<GeneratedCorpus> standard_benchmark(std::uint64_t seed) {
    const auto specs = standard_specs(seed);
    const auto normal = standard_normal_counts();
    std::vector<GeneratedCorpus> out;
    for (std::size_t i = 0; i < specs.size(); ++i) out.push_back(generate(specs[i], normal[i], 1));
    return out;
}

}  // namespace cloudrca::synth
