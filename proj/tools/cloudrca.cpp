#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cloudrca/config.hpp"
#include "cloudrca/eval.hpp"
#include "cloudrca/io.hpp"
#include "cloudrca/khbn.hpp"
#include "cloudrca/logcluster.hpp"
#include "cloudrca/logtpl.hpp"
#include "cloudrca/pipeline.hpp"
#include "cloudrca/synth.hpp"

namespace fs = std::filesystem;
using namespace cloudrca;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

RunConfig load_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
    if (c.seed) cfg.pipeline.seed = *c.seed;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg) {
    if (!c.out.empty()) return c.out;
    if (cfg.paths.output_dir) return *cfg.paths.output_dir;
    throw ValidationError("--out is required (or paths.output_dir in the config)");
}

// A command-line path wins over the config; one of them must be present.
fs::path need(const std::string& flag_value, const std::optional<std::string>& from_config, const char* flag) {
    if (!flag_value.empty()) return flag_value;
    if (from_config) return *from_config;
    throw ValidationError(std::string("--") + flag + " is required");
}

std::vector<Sample> load_windows(const fs::path& p) {
    auto d = load_dataset(p);
    if (!d.feature_ids.empty()) throw ValidationError(p.string() + ": a window list carries no features");
    return d.samples;
}

SplitResult split_windows(const std::vector<Sample>& windows, const RunConfig& cfg) {
    return split_dataset(windows_dataset("", windows), cfg.pipeline.train_fraction, cfg.pipeline.seed);
}

void say(const fs::path& p) { std::cerr << "wrote " << p.string() << "\n"; }

void put(const fs::path& p, const std::string& text) {
    write_file(p, text);
    say(p);
}

// Modules whose owned metric names agree across every corpus.
std::set<std::string> common_modules(const std::vector<Corpus>& corpora) {
    auto metrics_of = [](const PlatformTopology& t, const std::string& m) {
        std::set<std::string> out;
        for (const auto& [metric, owner] : t.metric_owner) {
            if (owner == m) out.insert(metric);
        }
        return out;
    };
    std::set<std::string> out;
    for (const auto& m : corpora.front().topology.modules) {
        const auto ref = metrics_of(corpora.front().topology, m);
        bool same = !ref.empty();
        for (const auto& c : corpora) same = same && c.topology.modules.count(m) && metrics_of(c.topology, m) == ref;
        if (same) out.insert(m);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Root cause analysis over metrics, logs and topology"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config, "run configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", common.seed, "overrides the configured seed");
    app.add_option("--out", common.out, "output directory");

    std::string platform = "all";
    auto* synth_cmd = app.add_subcommand("synth", "generate the standard benchmark corpora");
    synth_cmd->add_option("--platform", platform, "batch, stream, olap or all");

    std::string metrics, windows, logs, topology, tree, patterns, reports, train, test, model, dataset;
    std::vector<std::string> corpora;
    std::size_t sample = 0;

    auto* detect_cmd = app.add_subcommand("detect", "anomaly reports for every (metric, window)");
    detect_cmd->add_option("--metrics", metrics);
    detect_cmd->add_option("--windows", windows);

    auto* templates_cmd = app.add_subcommand("templates", "template tree from training-window logs");
    templates_cmd->add_option("--logs", logs);
    templates_cmd->add_option("--windows", windows);

    auto* cluster_cmd = app.add_subcommand("cluster", "log patterns and threshold from a template tree");
    cluster_cmd->add_option("--logs", logs);
    cluster_cmd->add_option("--windows", windows);
    cluster_cmd->add_option("--tree", tree)->required();

    auto* featurize_cmd = app.add_subcommand("featurize", "train/test feature matrices");
    featurize_cmd->add_option("--reports", reports)->required();
    featurize_cmd->add_option("--logs", logs);
    featurize_cmd->add_option("--windows", windows);
    featurize_cmd->add_option("--topology", topology);
    featurize_cmd->add_option("--tree", tree)->required();
    featurize_cmd->add_option("--patterns", patterns, "omit to use every template as its own feature");

    auto* train_cmd = app.add_subcommand("train", "fit the knowledge-informed Bayesian network");
    train_cmd->add_option("--train", train)->required();
    train_cmd->add_option("--topology", topology);

    auto* infer_cmd = app.add_subcommand("infer", "diagnose one window of a feature matrix");
    infer_cmd->add_option("--model", model);
    infer_cmd->add_option("--dataset", dataset)->required();
    infer_cmd->add_option("--sample", sample, "sample index within the dataset")->required();

    auto* eval_cmd = app.add_subcommand("eval", "precision, cover rate and f1 on a test matrix");
    eval_cmd->add_option("--model", model);
    eval_cmd->add_option("--test", test)->required();
    eval_cmd->add_option("--topology", topology, "extended topology from featurize");

    auto* ablate_cmd = app.add_subcommand("ablate", "full pipeline versus each stage switched off");
    ablate_cmd->add_option("--corpus", corpora, "corpus directory")->required()->expected(1);

    auto* transfer_cmd = app.add_subcommand("transfer", "pool shared-module faults into the smallest corpus");
    transfer_cmd->add_option("--corpus", corpora, "corpus directories (two or more)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig cfg = load_config(common);
        const auto& opt = cfg.pipeline;
        const auto& paths = cfg.paths;

        if (*synth_cmd) {
            const fs::path out = out_dir(common, cfg);
            bool any = false;
            for (const auto& c : synth::standard_benchmark(opt.seed)) {
                if (platform != "all" && platform != c.topology.platform_id) continue;
                write_corpus(c, out / c.topology.platform_id);
                say(out / c.topology.platform_id);
                any = true;
            }
            if (!any) throw ValidationError("unknown platform '" + platform + "'");
        } else if (*detect_cmd) {
            const auto series = load_metrics(need(metrics, paths.metrics, "metrics"));
            const auto w = load_windows(need(windows, paths.windows, "windows"));
            const auto reps = opt.anomaly_detection
                                  ? DetectionCache(series, w, opt.detection, opt.lookback).reports(opt.detection)
                                  : naive_reports(series, w, opt.lookback);
            put(out_dir(common, cfg) / "reports.json", reports_to_json(reps));
        } else if (*templates_cmd) {
            const auto records = load_logs(need(logs, paths.logs, "logs"));
            const auto split = split_windows(load_windows(need(windows, paths.windows, "windows")), cfg);
            std::vector<std::string> messages;
            for (const auto& r : logs_in_windows(records, split.train.samples)) messages.push_back(r.message);
            const auto built = build_template_tree(messages, opt.log.tree);
            put(out_dir(common, cfg) / "tree.json", built.tree.to_json());
        } else if (*cluster_cmd) {
            const auto records = load_logs(need(logs, paths.logs, "logs"));
            const auto split = split_windows(load_windows(need(windows, paths.windows, "windows")), cfg);
            const auto t = TemplateTree::from_json(read_file(tree));
            const auto c = cluster_templates(t, logs_in_windows(records, split.train.samples), opt.log);
            const fs::path out = out_dir(common, cfg);
            put(out / "patterns.json", patterns_to_json(c.patterns, c.theta));
            put(out / "embeddings.json", c.embeddings.to_json());
        } else if (*featurize_cmd) {
            const auto records = load_logs(need(logs, paths.logs, "logs"));
            const auto split = split_windows(load_windows(need(windows, paths.windows, "windows")), cfg);
            const auto topo = load_topology(need(topology, paths.topology, "topology"));
            auto t = TemplateTree::from_json(read_file(tree));
            std::vector<LogPattern> pats;
            double theta = 0.0;
            if (!patterns.empty()) std::tie(pats, theta) = patterns_from_json(read_file(patterns));
            auto lm = assemble_log_model(std::move(t), std::move(pats), theta,
                                         logs_in_windows(records, split.train.samples), opt.log);
            const auto data = featurize_split(parse_reports(read_file(reports)), std::move(lm), records,
                                              split.train.samples, split.test.samples, topo, opt.k);
            const fs::path out = out_dir(common, cfg);
            put(out / "train.json", dataset_to_json(data.train));
            put(out / "test.json", dataset_to_json(data.test));
            put(out / "topology.json", topology_to_json(data.topology));
        } else if (*train_cmd) {
            const auto d = load_dataset(train);
            const auto topo = load_topology(need(topology, paths.topology, "topology"));
            const auto m = train_khbn(topo, d, opt.khbn);
            for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
            put(out_dir(common, cfg) / "model.json", m.to_json());
        } else if (*infer_cmd) {
            const auto m = KhbnModel::from_json(read_file(need(model, paths.model, "model")));
            const auto d = load_dataset(dataset);
            if (sample >= d.samples.size()) {
                throw ValidationError("--sample " + std::to_string(sample) + " is out of range (dataset has " +
                                      std::to_string(d.samples.size()) + " samples)");
            }
            if (d.feature_ids != m.feature_ids) {
                throw ValidationError("feature ids do not match the model (trained on a different feature set)");
            }
            const auto diag = infer_module_fallback(m, d.samples[sample].bits, opt.khbn.confidence_floor);
            const auto text = diagnosis_to_json(diag);
            std::cout << text;
            if (!common.out.empty() || paths.output_dir) put(out_dir(common, cfg) / "diagnosis.json", text);
        } else if (*eval_cmd) {
            const auto m = KhbnModel::from_json(read_file(need(model, paths.model, "model")));
            const auto d = load_dataset(test);
            std::optional<PlatformTopology> topo;
            if (!topology.empty()) topo = load_topology(topology);
            const auto report = evaluate(predict(m, d), topo ? &*topo : nullptr);
            const fs::path out = out_dir(common, cfg);
            put(out / "eval.json", eval_report_to_json(report));
            put(out / "eval.txt", eval_report_table(report));
            std::cout << eval_report_table(report);
        } else if (*ablate_cmd) {
            const auto corpus = load_corpus(corpora.front());
            const auto rows = run_ablation(corpus, opt);
            const fs::path out = out_dir(common, cfg);
            put(out / "ablation.json", ablation_to_json(rows));
            put(out / "ablation.txt", ablation_table(rows));
            std::cout << ablation_table(rows);
        } else if (*transfer_cmd) {
            if (corpora.size() < 2) throw ValidationError("transfer needs at least two --corpus directories");
            std::vector<Corpus> cs;
            for (const auto& dir : corpora) cs.push_back(load_corpus(dir));
            const auto shared = common_modules(cs);
            if (shared.empty()) throw ValidationError("the corpora share no module");
            const auto t = run_transfer(cs, shared, opt);
            for (const auto& w : t.warnings) std::cerr << "warning: " << w << "\n";
            put(out_dir(common, cfg) / "transfer.json", transfer_to_json(t));
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
