#include "cloudrca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "cloudrca/io.hpp"
#include "cloudrca/stats.hpp"

namespace cloudrca {

Dataset windows_dataset(const std::string& platform_id, const std::vector<Sample>& windows) {
    Dataset d;
    d.platform_id = platform_id;
    d.samples = windows;
    for (auto& s : d.samples) s.bits.clear();
    return d;
}

namespace {

Timestamp lookback_for(const Sample& w, Timestamp lookback) {
    return lookback > 0 ? lookback : w.window_end - w.window_start;
}

}  // namespace

DetectionCache::DetectionCache(const std::vector<TimeSeries>& metrics, const std::vector<Sample>& windows,
                               const DetectionConfig& cfg, Timestamp lookback) {
    cfg.validate();
    prepared_.reserve(metrics.size() * windows.size());
    for (const auto& m : metrics) {
        m.validate();
        for (const auto& w : windows) {
            auto slice = m.slice(w.window_start - lookback_for(w, lookback), w.window_end);
            prepared_.push_back(prepare_series(std::move(slice), w.window_start, cfg));
        }
    }
}

std::vector<AnomalyReport> DetectionCache::reports(const DetectionConfig& cfg) const {
    cfg.validate();
    std::vector<AnomalyReport> out;
    out.reserve(prepared_.size());
    for (const auto& p : prepared_) out.push_back(detect_prepared(p, cfg));
    return out;
}

std::vector<AnomalyReport> naive_reports(const std::vector<TimeSeries>& metrics, const std::vector<Sample>& windows,
                                         Timestamp lookback, double z) {
    std::vector<AnomalyReport> out;
    out.reserve(metrics.size() * windows.size());
    for (const auto& m : metrics) {
        for (const auto& w : windows) {
            AnomalyReport rep;
            rep.metric_id = m.metric_id;
            rep.window_start = w.window_start;
            rep.window_end = w.window_end;
            const auto ref = m.slice(w.window_start - lookback_for(w, lookback), w.window_start);
            const auto cur = m.slice(w.window_start, w.window_end);
            if (ref.size() < 2) {
                rep.too_short = true;
                out.push_back(std::move(rep));
                continue;
            }
            const double mu = stats::mean(ref.values);
            const double sd = stats::stddev(ref.values);
            for (std::size_t i = 0; i < cur.size(); ++i) {
                const double dev = std::abs(cur.values[i] - mu);
                if (sd > 0.0 ? dev > z * sd : dev > 0.0) {
                    rep.spans.push_back({AnomalyKind::SpikeDip, cur.timestamps[i], cur.timestamps[i] + 1});
                    rep.findings.insert(AnomalyKind::SpikeDip);
                }
            }
            out.push_back(std::move(rep));
        }
    }
    return out;
}

void LogModelOptions::validate() const {
    if (tree.max_leaves < 1) throw ValidationError("max_leaves must be at least 1");
    if (!(distance_threshold > 0.0 && distance_threshold <= 2.0)) {
        throw ValidationError("distance_threshold must lie in (0, 2]");
    }
    if (theta && !(*theta >= -1.0 && *theta <= 1.0)) throw ValidationError("theta must lie in [-1, 1]");
    if (embedding.dim < 2) throw ValidationError("embedding dim must be at least 2");
    if (embedding.window < 1) throw ValidationError("embedding window must be at least 1");
    if (embedding.epochs < 1) throw ValidationError("embedding epochs must be at least 1");
    if (!(embedding.learning_rate > 0.0)) throw ValidationError("embedding learning_rate must be positive");
    if (embed_max_copies < 1) throw ValidationError("embed_max_copies must be at least 1");
}

namespace {

PreprocessOptions raw_options(const PreprocessOptions& p) {
    PreprocessOptions raw = p;
    raw.mask_variables = false;
    raw.extra_patterns.clear();
    return raw;
}

std::optional<std::string> lookup_feature(const LogModel& lm, const Preprocessor& pre, std::string_view message) {
    if (!lm.options.template_extraction) {
        const auto toks = pre(message);
        if (!toks) return std::nullopt;
        auto it = lm.message_feature.find(join_tokens(*toks));
        if (it == lm.message_feature.end()) return std::nullopt;
        return it->second;
    }
    const int id = lm.tree.extract(message, pre);
    if (id == 0) return std::nullopt;
    auto it = lm.template_feature.find(id);
    if (it == lm.template_feature.end()) return std::nullopt;
    return it->second;
}

Preprocessor model_preprocessor(const LogModelOptions& opt) {
    return Preprocessor(opt.template_extraction ? opt.tree.preprocess : raw_options(opt.tree.preprocess));
}

// Majority owner per feature; ties go to the lexicographically smaller module.
std::map<std::string, std::string> majority_owner(const std::map<std::string, std::map<std::string, std::size_t>>& votes) {
    std::map<std::string, std::string> out;
    for (const auto& [fid, by_module] : votes) {
        std::size_t best = 0;
        for (const auto& [module, n] : by_module) {
            if (n > best) {
                best = n;
                out[fid] = module;
            }
        }
    }
    return out;
}

}  // namespace

std::optional<std::string> LogModel::feature_of(std::string_view message) const {
    return lookup_feature(*this, model_preprocessor(options), message);
}

std::vector<PatternOccurrence> LogModel::occurrences(const std::vector<LogRecord>& logs) const {
    const auto pre = model_preprocessor(options);
    std::vector<PatternOccurrence> out;
    for (const auto& r : logs) {
        if (auto f = lookup_feature(*this, pre, r.message)) out.push_back({*f, r.timestamp});
    }
    return out;
}

PlatformTopology LogModel::extend(const PlatformTopology& topo) const {
    PlatformTopology out = topo;
    for (const auto& [fid, module] : feature_owner) {
        if (topo.modules.count(module)) out.pattern_owner[fid] = module;
    }
    return out;
}

LogModel fit_log_model(const std::vector<LogRecord>& logs, const LogModelOptions& opt) {
    opt.validate();
    if (!opt.template_extraction) {
        LogModel lm;
        lm.options = opt;
        std::map<std::string, std::map<std::string, std::size_t>> votes;
        const Preprocessor pre(raw_options(opt.tree.preprocess));
        for (const auto& r : logs) {
            const auto toks = pre(r.message);
            if (!toks) continue;
            const auto text = join_tokens(*toks);
            const auto fid = log_feature(text);
            lm.message_feature.emplace(text, fid);
            ++votes[fid][r.module_id];
        }
        lm.feature_owner = majority_owner(votes);
        return lm;
    }

    std::vector<std::string> messages;
    messages.reserve(logs.size());
    for (const auto& r : logs) messages.push_back(r.message);
    auto built = build_template_tree(messages, opt.tree);
    if (!opt.clustering) return assemble_log_model(std::move(built.tree), {}, 0.0, logs, opt);

    auto clustered = cluster_templates(built.tree, logs, opt);
    auto lm = assemble_log_model(std::move(built.tree), std::move(clustered.patterns), clustered.theta, logs, opt);
    lm.embeddings = std::move(clustered.embeddings);
    return lm;
}

TemplateClustering cluster_templates(const TemplateTree& tree, const std::vector<LogRecord>& logs,
                                     const LogModelOptions& opt) {
    opt.validate();
    const Preprocessor pre(opt.tree.preprocess);
    std::vector<Tokens> corpus;
    std::map<Tokens, std::size_t> copies;
    for (const auto& r : logs) {
        auto toks = pre(r.message);
        if (!toks) continue;
        if (++copies[*toks] > opt.embed_max_copies) continue;
        // Masked variables carry no meaning and would give every template a shared context.
        std::erase(*toks, std::string(kWildcard));
        if (!toks->empty()) corpus.push_back(std::move(*toks));
    }
    TemplateClustering out;
    out.embeddings = train_embeddings(corpus, opt.embedding);
    std::map<int, Vec> vectors;
    for (const Template* t : tree.templates()) vectors[t->template_id] = template_vector(*t, out.embeddings);
    out.patterns = cluster(vectors, opt.distance_threshold);
    out.theta = opt.theta ? *opt.theta : compute_threshold(out.patterns);
    return out;
}

LogModel assemble_log_model(TemplateTree tree, std::vector<LogPattern> patterns, double theta,
                            const std::vector<LogRecord>& logs, const LogModelOptions& opt) {
    opt.validate();
    if (!opt.template_extraction) throw ValidationError("assembling a log model needs template extraction");
    LogModel lm;
    lm.options = opt;
    lm.options.clustering = !patterns.empty();
    lm.tree = std::move(tree);
    lm.patterns = std::move(patterns);
    lm.theta = theta;
    if (lm.patterns.empty()) {
        for (const Template* t : lm.tree.templates()) lm.template_feature[t->template_id] = log_feature(join_tokens(t->tokens));
    } else {
        for (const auto& p : lm.patterns) {
            const auto fid = log_feature(join_tokens(lm.tree.at(p.representative).tokens));
            for (int member : p.members) lm.template_feature[member] = fid;
        }
    }
    const Preprocessor pre(opt.tree.preprocess);
    std::map<std::string, std::map<std::string, std::size_t>> votes;
    for (const auto& r : logs) {
        if (auto f = lookup_feature(lm, pre, r.message)) ++votes[*f][r.module_id];
    }
    lm.feature_owner = majority_owner(votes);
    return lm;
}

std::vector<LogRecord> logs_in_windows(const std::vector<LogRecord>& logs, const std::vector<Sample>& windows) {
    std::vector<std::pair<Timestamp, Timestamp>> iv;
    iv.reserve(windows.size());
    for (const auto& w : windows) iv.emplace_back(w.window_start, w.window_end);
    std::sort(iv.begin(), iv.end());
    std::vector<Timestamp> starts, reach;
    Timestamp mx = 0;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        starts.push_back(iv[i].first);
        mx = i == 0 ? iv[i].second : std::max(mx, iv[i].second);
        reach.push_back(mx);
    }
    std::vector<LogRecord> out;
    for (const auto& r : logs) {
        auto it = std::upper_bound(starts.begin(), starts.end(), r.timestamp);
        if (it == starts.begin()) continue;
        const auto idx = static_cast<std::size_t>(it - starts.begin()) - 1;
        if (reach[idx] > r.timestamp) out.push_back(r);
    }
    return out;
}

void PipelineOptions::validate() const {
    detection.validate();
    log.validate();
    khbn.validate();
    if (k < 1) throw ValidationError("k must be at least 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("train_fraction must lie in (0, 1)");
}

Dataset featurize(const std::vector<AnomalyReport>& reports, const LogModel& lm, const std::vector<LogRecord>& logs,
                  const std::vector<Sample>& windows, const PlatformTopology& topo) {
    std::vector<AnomalyReport> owned;
    owned.reserve(reports.size());
    for (const auto& r : reports) {
        if (topo.metric_owner.count(r.metric_id)) owned.push_back(r);
    }
    std::vector<PatternOccurrence> occ;
    for (auto& o : lm.occurrences(logs_in_windows(logs, windows))) {
        if (topo.pattern_owner.count(o.feature_id)) occ.push_back(std::move(o));
    }
    return build_matrix(owned, occ, windows, topo).data;
}

PreparedData prepare_data(const Corpus& corpus, const std::vector<Sample>& train_windows,
                          const std::vector<Sample>& test_windows, const PipelineOptions& opt,
                          const DetectionCache* cache, const PlatformTopology* topology) {
    opt.validate();
    std::vector<AnomalyReport> reports;
    if (!opt.anomaly_detection) {
        reports = naive_reports(corpus.metrics, corpus.windows, opt.lookback);
    } else if (cache) {
        reports = cache->reports(opt.detection);
    } else {
        reports = DetectionCache(corpus.metrics, corpus.windows, opt.detection, opt.lookback).reports(opt.detection);
    }

    return featurize_split(reports, fit_log_model(logs_in_windows(corpus.logs, train_windows), opt.log), corpus.logs,
                           train_windows, test_windows, topology ? *topology : corpus.topology, opt.k);
}

PreparedData featurize_split(const std::vector<AnomalyReport>& reports, LogModel log_model,
                             const std::vector<LogRecord>& logs, const std::vector<Sample>& train_windows,
                             const std::vector<Sample>& test_windows, const PlatformTopology& topology, std::size_t k) {
    PreparedData out;
    out.log_model = std::move(log_model);
    out.topology = out.log_model.extend(topology);
    FeatureMatrix train;
    train.data = featurize(reports, out.log_model, logs, train_windows, out.topology);
    auto selected = tfidf_select(train, k);
    out.selection_scores = std::move(selected.selection_scores);
    out.train = std::move(selected.data);
    out.test = project_features(featurize(reports, out.log_model, logs, test_windows, out.topology),
                                out.train.feature_ids);
    return out;
}

PreparedData prepare_data(const Corpus& corpus, const PipelineOptions& opt, const DetectionCache* cache) {
    opt.validate();
    const auto split = split_dataset(windows_dataset(corpus.topology.platform_id, corpus.windows), opt.train_fraction,
                                     opt.seed);
    return prepare_data(corpus, split.train.samples, split.test.samples, opt, cache);
}

Corpus load_corpus(const std::filesystem::path& dir) {
    Corpus c;
    c.metrics = load_metrics(dir / kMetricsFile);
    c.logs = load_logs(dir / kLogsFile);
    c.topology = load_topology(dir / kTopologyFile);
    auto windows = load_dataset(dir / kWindowsFile);
    if (!windows.feature_ids.empty()) throw ValidationError("window list must not carry features");
    c.windows = std::move(windows.samples);
    return c;
}

void write_corpus(const Corpus& c, const std::filesystem::path& dir) {
    std::ostringstream metrics, logs;
    write_metrics(metrics, c.metrics);
    write_logs(logs, c.logs);
    write_file(dir / kMetricsFile, metrics.str());
    write_file(dir / kLogsFile, logs.str());
    write_file(dir / kTopologyFile, topology_to_json(c.topology));
    write_file(dir / kWindowsFile, dataset_to_json(windows_dataset(c.topology.platform_id, c.windows)));
}

}  // namespace cloudrca
