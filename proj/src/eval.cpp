#include "cloudrca/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cloudrca {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json report_json(const EvalReport& r) {
    return {{"precision", r.precision},
            {"cover_rate", r.cover_rate},
            {"f1", r.f1},
            {"per_type_precision", r.per_type_precision},
            {"covered", r.covered},
            {"confusion", r.confusion}};
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

}  // namespace

EvalReport evaluate(const std::vector<Prediction>& predictions, const PlatformTopology* topo) {
    if (predictions.empty()) throw ValidationError("cannot evaluate an empty prediction list");
    EvalReport r;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // correct, total
    for (const auto& p : predictions) {
        if (topo && !topo->cause_types.count(p.truth)) {
            throw ValidationError("true type '" + p.truth + "' is not declared in the topology");
        }
        ++r.confusion[p.truth][p.predicted];
        auto& [correct, total] = counts[p.truth];
        ++total;
        if (p.predicted == p.truth) ++correct;
    }
    double sum = 0.0;
    for (const auto& [type, c] : counts) {
        const auto [correct, total] = c;
        const double prec = static_cast<double>(correct) / static_cast<double>(total);
        r.per_type_precision[type] = prec;
        sum += prec;
        if (5 * correct >= 3 * total) r.covered.insert(type);  // correct / total >= 0.6, exactly
    }
    const auto n_types = static_cast<double>(counts.size());
    r.precision = sum / n_types;
    r.cover_rate = static_cast<double>(r.covered.size()) / n_types;
    const double pc = r.precision + r.cover_rate;
    r.f1 = pc > 0.0 ? 2.0 * r.precision * r.cover_rate / pc : 0.0;
    return r;
}

std::string eval_report_to_json(const EvalReport& r) { return report_json(r).dump(1) + "\n"; }

std::string eval_report_table(const EvalReport& r) {
    std::ostringstream out;
    std::size_t width = 4;
    for (const auto& [t, p] : r.per_type_precision) width = std::max(width, t.size());
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %9s  %7s\n", static_cast<int>(width), "type", "precision", "covered");
    out << line;
    for (const auto& [t, p] : r.per_type_precision) {
        std::snprintf(line, sizeof line, "%-*s  %9.4f  %7s\n", static_cast<int>(width), t.c_str(), p,
                      r.covered.count(t) ? "yes" : "no");
        out << line;
    }
    out << "\nprecision  cover_rate  f1_score\n";
    std::snprintf(line, sizeof line, "%9.4f  %10.4f  %8.4f\n", r.precision, r.cover_rate, r.f1);
    out << line;
    return out.str();
}

std::vector<Prediction> predict(const KhbnModel& model, const Dataset& test) {
    std::vector<Prediction> out;
    for (const auto& s : test.samples) {
        if (s.polarity != Polarity::Negative || !s.label) continue;
        const auto d = infer(model, test.feature_ids, s.bits);
        out.push_back({d.best_type, s.label->type_id});
    }
    return out;
}

RunResult train_and_evaluate(const PreparedData& data, const PipelineOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult out;
    out.model = train_khbn(data.topology, data.train, opt.khbn);
    out.predictions = predict(out.model, data.test);
    out.report = evaluate(out.predictions, &data.topology);
    out.node_count = out.model.feature_ids.size() + data.topology.modules.size() + data.topology.cause_types.size();
    out.seconds = seconds_since(t0);
    return out;
}

RunResult run_pipeline(const Corpus& corpus, const PipelineOptions& opt, const DetectionCache* cache) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = prepare_data(corpus, opt, cache);
    auto out = train_and_evaluate(data, opt);
    out.seconds = seconds_since(t0);
    return out;
}

std::string AblationToggles::name() const {
    if (anomaly_detection && template_extraction && clustering) return "full";
    std::string n;
    auto add = [&](bool on, const char* stage) {
        if (!on) n += std::string(n.empty() ? "" : "+") + stage;
    };
    add(anomaly_detection, "no_anomaly_detection");
    add(template_extraction, "no_template_extraction");
    add(clustering, "no_clustering");
    return n;
}

std::vector<AblationToggles> standard_ablations() {
    return {{true, true, true}, {false, true, true}, {true, false, true}, {true, true, false}};
}

std::vector<AblationRow> run_ablation(const Corpus& corpus, const PipelineOptions& opt,
                                      const std::vector<AblationToggles>& configs, const DetectionCache* cache) {
    opt.validate();
    std::optional<DetectionCache> own;
    const bool needs_cache = std::any_of(configs.begin(), configs.end(), [](const auto& c) { return c.anomaly_detection; });
    if (!cache && needs_cache) {
        own.emplace(corpus.metrics, corpus.windows, opt.detection, opt.lookback);
        cache = &*own;
    }
    std::vector<AblationRow> rows;
    for (const auto& c : configs) {
        PipelineOptions o = opt;
        o.anomaly_detection = c.anomaly_detection;
        o.log.template_extraction = c.template_extraction;
        o.log.clustering = c.clustering;
        const auto r = run_pipeline(corpus, o, cache);
        rows.push_back({c, r.report, r.node_count, r.seconds});
    }
    return rows;
}

std::string ablation_to_json(const std::vector<AblationRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"configuration", r.toggles.name()},
                       {"anomaly_detection", r.toggles.anomaly_detection},
                       {"template_extraction", r.toggles.template_extraction},
                       {"clustering", r.toggles.clustering},
                       {"node_count", r.node_count},
                       {"seconds", r.seconds},
                       {"report", report_json(r.report)}});
    }
    return json{{"ablation", arr}}.dump(1) + "\n";
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-17s %-17s %-10s %9s %10s %8s %6s\n", "anomaly_detection", "template_extract",
                  "clustering", "precision", "cover_rate", "f1_score", "nodes");
    out << line;
    auto on = [](bool b) { return b ? "ON" : "NONE"; };
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-17s %-17s %-10s %9s %10s %8s %6zu\n", on(r.toggles.anomaly_detection),
                      on(r.toggles.template_extraction), on(r.toggles.clustering), fmt(r.report.precision).c_str(),
                      fmt(r.report.cover_rate).c_str(), fmt(r.report.f1).c_str(), r.node_count);
        out << line;
    }
    return out.str();
}

std::vector<Dataset> transfer_pool(const std::vector<Dataset>& datasets, const std::vector<PlatformTopology>& topologies,
                                   const std::set<std::string>& shared_modules, std::vector<std::string>* warnings) {
    if (datasets.size() < 2) throw ValidationError("transfer pooling needs at least two datasets");
    if (topologies.size() != datasets.size()) throw ValidationError("one topology per dataset is required");
    auto warn = [&](const std::string& w) {
        if (warnings) warnings->push_back(w);
    };
    std::vector<Dataset> out;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        Dataset target = datasets[i];
        const auto& topo = topologies[i];
        for (std::size_t j = 0; j < datasets.size(); ++j) {
            if (j == i) continue;
            const auto& donor = datasets[j];
            const std::set<std::string> donor_ids(donor.feature_ids.begin(), donor.feature_ids.end());
            std::set<std::string> usable;
            for (const auto& m : shared_modules) {
                if (!topo.modules.count(m)) {
                    warn("module '" + m + "' is not part of platform '" + target.platform_id + "'; skipped");
                    continue;
                }
                const bool aligned = std::any_of(target.feature_ids.begin(), target.feature_ids.end(), [&](const std::string& f) {
                    return donor_ids.count(f) && topo.feature_owner(f) == m;
                });
                if (aligned) {
                    usable.insert(m);
                } else {
                    warn("no aligned features for module '" + m + "' between '" + target.platform_id + "' and '" +
                         donor.platform_id + "'; skipped");
                }
            }
            if (usable.empty()) continue;
            Dataset picked;
            picked.feature_ids = donor.feature_ids;
            for (const auto& s : donor.samples) {
                if (s.polarity != Polarity::Negative || !s.label || !usable.count(s.label->module_id)) continue;
                if (!topo.cause_types.count(s.label->type_id)) {
                    warn("type '" + s.label->type_id + "' from '" + donor.platform_id + "' is unknown to '" +
                         target.platform_id + "'; sample skipped");
                    continue;
                }
                picked.samples.push_back(s);
            }
            for (auto& s : project_features(picked, target.feature_ids).samples) target.samples.push_back(std::move(s));
        }
        out.push_back(std::move(target));
    }
    return out;
}

namespace {

EvalReport evaluate_subset(const KhbnModel& model, const Dataset& test, const std::set<std::string>& modules,
                           const PlatformTopology& topo) {
    std::vector<Prediction> preds;
    for (const auto& s : test.samples) {
        if (s.polarity != Polarity::Negative || !s.label || !modules.count(s.label->module_id)) continue;
        preds.push_back({infer(model, test.feature_ids, s.bits).best_type, s.label->type_id});
    }
    return evaluate(preds, &topo);
}

}  // namespace

TransferOutcome run_transfer(const std::vector<Corpus>& corpora, const std::set<std::string>& shared_modules,
                             const PipelineOptions& opt) {
    if (corpora.size() < 2) throw ValidationError("transfer needs at least two platforms");
    opt.validate();
    std::size_t ti = 0;
    for (std::size_t i = 1; i < corpora.size(); ++i) {
        if (corpora[i].windows.size() < corpora[ti].windows.size()) ti = i;
    }
    const Corpus& target = corpora[ti];
    TransferOutcome out;
    out.target = target.topology.platform_id;

    const auto split = split_dataset(windows_dataset(out.target, target.windows), opt.train_fraction, opt.seed);
    const auto data = prepare_data(target, split.train.samples, split.test.samples, opt);

    std::vector<Dataset> datasets{data.train};
    std::vector<PlatformTopology> topos{data.topology};
    for (std::size_t j = 0; j < corpora.size(); ++j) {
        if (j == ti) continue;
        const Corpus& donor = corpora[j];
        const auto dsplit = split_dataset(windows_dataset(donor.topology.platform_id, donor.windows), opt.train_fraction,
                                          opt.seed);
        std::vector<Sample> windows;
        for (const auto& s : dsplit.train.samples) {
            if (s.polarity == Polarity::Negative && s.label && shared_modules.count(s.label->module_id)) windows.push_back(s);
        }
        if (windows.empty()) continue;
        const auto reports = opt.anomaly_detection
                                 ? DetectionCache(donor.metrics, windows, opt.detection, opt.lookback).reports(opt.detection)
                                 : naive_reports(donor.metrics, windows, opt.lookback);
        auto ds = featurize(reports, data.log_model, donor.logs, windows, data.topology);
        ds.platform_id = donor.topology.platform_id;
        datasets.push_back(std::move(ds));
        topos.push_back(data.topology);
    }
    auto pooled = transfer_pool(datasets, topos, shared_modules, &out.warnings).front();
    out.imported = pooled.samples.size() - data.train.samples.size();

    const auto base_model = train_khbn(data.topology, data.train, opt.khbn);
    out.baseline = evaluate_subset(base_model, data.test, shared_modules, data.topology);
    const auto pooled_model = train_khbn(data.topology, pooled, opt.khbn);
    out.pooled = evaluate_subset(pooled_model, data.test, shared_modules, data.topology);
    return out;
}

std::string transfer_to_json(const TransferOutcome& t) {
    return json{{"target", t.target},
                {"imported_samples", t.imported},
                {"baseline", report_json(t.baseline)},
                {"pooled", report_json(t.pooled)},
                {"warnings", t.warnings}}
               .dump(1) +
           "\n";
}

NovelTypeOutcome run_novel_type(const Corpus& corpus, const PipelineOptions& opt, const DetectionCache* cache) {
    opt.validate();
    NovelTypeOutcome out;
    PlatformTopology topo = corpus.topology;
    std::set<std::string> held;
    for (const auto& m : corpus.topology.modules) {
        const auto types = corpus.topology.types_of(m);
        if (types.size() < 2) continue;
        held.insert(types.back());
        topo.cause_types.erase(types.back());
    }
    out.held_out.assign(held.begin(), held.end());

    const auto split = split_dataset(windows_dataset(topo.platform_id, corpus.windows), opt.train_fraction, opt.seed);
    std::vector<Sample> train, test;
    for (const auto& s : split.train.samples) {
        if (!(s.label && held.count(s.label->type_id))) train.push_back(s);
    }
    for (const auto& s : corpus.windows) {
        if (s.label && held.count(s.label->type_id)) test.push_back(s);
    }
    if (test.empty()) throw ValidationError("no faults of the held-out types");
    const auto data = prepare_data(corpus, train, test, opt, cache, &topo);
    const auto model = train_khbn(data.topology, data.train, opt.khbn);
    std::size_t module_ok = 0, flagged = 0;
    for (const auto& s : data.test.samples) {
        const auto d = infer_module_fallback(model, s.bits, opt.khbn.confidence_floor);
        if (d.best_module == s.label->module_id) ++module_ok;
        if (d.novel_type) ++flagged;
    }
    out.faults = data.test.samples.size();
    out.module_accuracy = static_cast<double>(module_ok) / static_cast<double>(out.faults);
    out.flag_rate = static_cast<double>(flagged) / static_cast<double>(out.faults);
    return out;
}

std::string novel_type_to_json(const NovelTypeOutcome& n) {
    return json{{"held_out", n.held_out},
                {"faults", n.faults},
                {"module_accuracy", n.module_accuracy},
                {"novel_flag_rate", n.flag_rate}}
               .dump(1) +
           "\n";
}

}  // namespace cloudrca
