#include "cloudrca/config.hpp"

#include <optional>
#include <set>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "cloudrca/io.hpp"

namespace cloudrca {

using nlohmann::json;

namespace {

// Reads typed fields of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(where() + ": expected an object");
    }

    /// Call after the last read: any key that was not asked for is an error.
    void finish() const {
        for (const auto& [key, v] : j_.items()) {
            if (!seen_.count(key)) throw ValidationError(key_path(key) + ": unknown key");
        }
    }

    template <class T>
    void number(const char* key, T& out) {
        const json* v = find(key);
        if (!v) return;
        if constexpr (std::is_floating_point_v<T>) {
            if (!v->is_number()) throw ValidationError(key_path(key) + ": expected a number");
            out = v->get<T>();
        } else {
            if (!v->is_number_integer()) throw ValidationError(key_path(key) + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v->get<long long>() < 0) throw ValidationError(key_path(key) + ": must not be negative");
            }
            out = v->get<T>();
        }
    }

    void boolean(const char* key, bool& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_boolean()) throw ValidationError(key_path(key) + ": expected true or false");
        out = v->get<bool>();
    }

    void string(const char* key, std::optional<std::string>& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_string()) throw ValidationError(key_path(key) + ": expected a string");
        out = v->get<std::string>();
    }

    void strings(const char* key, std::vector<std::string>& out) {
        const json* v = find(key);
        if (!v) return;
        if (!v->is_array()) throw ValidationError(key_path(key) + ": expected an array of strings");
        out.clear();
        for (const auto& e : *v) {
            if (!e.is_string()) throw ValidationError(key_path(key) + ": expected an array of strings");
            out.push_back(e.get<std::string>());
        }
    }

    const json* sub(const char* key) { return find(key); }
    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    // A failed range check names the offending key.
    template <class F>
    void check(const char* key, bool ok, F&& message) const {
        if (!ok) throw ValidationError(key_path(key) + ": " + message());
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json* find(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

bool open01(double x) { return x > 0.0 && x < 1.0; }

void read_detection(Section& s, DetectionConfig& d, Timestamp* lookback) {
    if (s.sub("alpha")) {
        double alpha = 0.0;
        s.number("alpha", alpha);
        s.check("alpha", open01(alpha), [] { return "must lie in (0, 1)"; });
        d.alpha_esd = d.alpha_f = d.alpha_t = d.alpha_mk = alpha;
    }
    s.number("alpha_esd", d.alpha_esd);
    s.number("alpha_f", d.alpha_f);
    s.number("alpha_t", d.alpha_t);
    s.number("alpha_mk", d.alpha_mk);
    for (auto [key, v] : {std::pair{"alpha_esd", d.alpha_esd}, std::pair{"alpha_f", d.alpha_f},
                          std::pair{"alpha_t", d.alpha_t}, std::pair{"alpha_mk", d.alpha_mk}}) {
        s.check(key, open01(v), [] { return "must lie in (0, 1)"; });
    }
    s.number("min_length", d.min_length);
    s.check("min_length", d.min_length >= 10, [] { return "must be at least 10"; });
    s.number("max_period", d.max_period);
    s.check("max_period", d.max_period >= 2, [] { return "must be at least 2"; });
    s.number("acf_threshold", d.acf_threshold);
    s.check("acf_threshold", d.acf_threshold > 0.0 && d.acf_threshold < 1.0, [] { return "must lie in (0, 1)"; });
    s.number("esd_max_anomalies", d.esd_max_anomalies);
    s.check("esd_max_anomalies", d.esd_max_anomalies >= 1, [] { return "must be at least 1"; });
    s.number("f_df_efficiency", d.f_df_efficiency);
    s.check("f_df_efficiency", d.f_df_efficiency > 0.0 && d.f_df_efficiency <= 1.0,
            [] { return "must lie in (0, 1]"; });
    s.number("trend_noise_sigmas", d.trend_noise_sigmas);
    s.check("trend_noise_sigmas", d.trend_noise_sigmas >= 0.0, [] { return "must not be negative"; });
    s.number("trend_lambda", d.trend_filter.lambda);
    s.check("trend_lambda", d.trend_filter.lambda > 0.0, [] { return "must be positive"; });
    s.number("trend_tolerance", d.trend_filter.tolerance);
    s.check("trend_tolerance", d.trend_filter.tolerance > 0.0, [] { return "must be positive"; });
    s.number("trend_max_iterations", d.trend_filter.max_iterations);
    s.check("trend_max_iterations", d.trend_filter.max_iterations >= 1, [] { return "must be at least 1"; });
    if (lookback) {
        s.number("lookback_seconds", *lookback);
        s.check("lookback_seconds", *lookback >= 0, [] { return "must not be negative"; });
    }
    s.finish();
    d.validate();
}

json detection_json(const DetectionConfig& d) {
    return {{"alpha_esd", d.alpha_esd},
            {"alpha_f", d.alpha_f},
            {"alpha_t", d.alpha_t},
            {"alpha_mk", d.alpha_mk},
            {"min_length", d.min_length},
            {"max_period", d.max_period},
            {"acf_threshold", d.acf_threshold},
            {"esd_max_anomalies", d.esd_max_anomalies},
            {"f_df_efficiency", d.f_df_efficiency},
            {"trend_noise_sigmas", d.trend_noise_sigmas},
            {"trend_lambda", d.trend_filter.lambda},
            {"trend_tolerance", d.trend_filter.tolerance},
            {"trend_max_iterations", d.trend_filter.max_iterations}};
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
}

}  // namespace

void RunConfig::validate() const {
    try {
        pipeline.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    const json root = parse_text(json_text);
    RunConfig cfg;
    auto& p = cfg.pipeline;
    Section top(root, "");
    top.number("seed", p.seed);
    if (const json* j = top.sub("paths")) {
        Section s(*j, "paths");
        s.string("metrics", cfg.paths.metrics);
        s.string("logs", cfg.paths.logs);
        s.string("topology", cfg.paths.topology);
        s.string("windows", cfg.paths.windows);
        s.string("model", cfg.paths.model);
        s.string("output_dir", cfg.paths.output_dir);
        s.finish();
    }
    if (const json* j = top.sub("detection")) {
        Section s(*j, "detection");
        read_detection(s, p.detection, &p.lookback);
    }
    if (const json* j = top.sub("templates")) {
        Section s(*j, "templates");
        s.number("max_leaves", p.log.tree.max_leaves);
        s.check("max_leaves", p.log.tree.max_leaves >= 1, [] { return "must be at least 1"; });
        s.boolean("mask_variables", p.log.tree.preprocess.mask_variables);
        s.boolean("stem", p.log.tree.preprocess.stem);
        s.strings("extra_patterns", p.log.tree.preprocess.extra_patterns);
        s.finish();
    }
    if (const json* j = top.sub("clustering")) {
        Section s(*j, "clustering");
        auto& e = p.log.embedding;
        s.number("dim", e.dim);
        s.check("dim", e.dim >= 2, [] { return "must be at least 2"; });
        s.number("window", e.window);
        s.check("window", e.window >= 1, [] { return "must be at least 1"; });
        s.number("epochs", e.epochs);
        s.check("epochs", e.epochs >= 1, [] { return "must be at least 1"; });
        s.number("negatives", e.negatives);
        s.number("learning_rate", e.learning_rate);
        s.check("learning_rate", e.learning_rate > 0.0, [] { return "must be positive"; });
        s.number("embedding_seed", e.seed);
        s.number("embed_max_copies", p.log.embed_max_copies);
        s.check("embed_max_copies", p.log.embed_max_copies >= 1, [] { return "must be at least 1"; });
        s.number("distance_threshold", p.log.distance_threshold);
        s.check("distance_threshold", p.log.distance_threshold > 0.0 && p.log.distance_threshold <= 2.0,
                [] { return "must lie in (0, 2]"; });
        if (const json* t = s.sub("theta"); t && !t->is_null()) {
            if (!t->is_number()) throw ValidationError("clustering.theta: expected a number or null");
            p.log.theta = t->get<double>();
            s.check("theta", *p.log.theta >= -1.0 && *p.log.theta <= 1.0, [] { return "must lie in [-1, 1]"; });
        }
        s.finish();
    }
    if (const json* j = top.sub("features")) {
        Section s(*j, "features");
        s.number("k", p.k);
        s.check("k", p.k >= 1, [] { return "must be at least 1"; });
        s.finish();
    }
    if (const json* j = top.sub("khbn")) {
        Section s(*j, "khbn");
        auto& k = p.khbn;
        s.number("alpha", k.alpha);
        s.check("alpha", open01(k.alpha), [] { return "must lie in (0, 1)"; });
        s.number("max_condition_size", k.max_condition_size);
        s.number("max_causal_parents", k.max_causal_parents);
        s.number("min_lift", k.min_lift);
        s.check("min_lift", k.min_lift >= 0.0 && k.min_lift <= 1.0, [] { return "must lie in [0, 1]"; });
        s.number("confidence_floor", k.confidence_floor);
        s.check("confidence_floor", k.confidence_floor >= 0.0 && k.confidence_floor <= 1.0,
                [] { return "must lie in [0, 1]"; });
        s.boolean("learn_causal", k.learn_causal);
        s.finish();
    }
    if (const json* j = top.sub("split")) {
        Section s(*j, "split");
        s.number("train_fraction", p.train_fraction);
        s.check("train_fraction", open01(p.train_fraction), [] { return "must lie in (0, 1)"; });
        s.finish();
    }
    if (const json* j = top.sub("stages")) {
        Section s(*j, "stages");
        s.boolean("anomaly_detection", p.anomaly_detection);
        s.boolean("template_extraction", p.log.template_extraction);
        s.boolean("clustering", p.log.clustering);
        s.finish();
    }
    top.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

std::string run_config_to_json(const RunConfig& cfg) {
    const auto& p = cfg.pipeline;
    json paths = json::object();
    auto put = [&](const char* key, const std::optional<std::string>& v) {
        if (v) paths[key] = *v;
    };
    put("metrics", cfg.paths.metrics);
    put("logs", cfg.paths.logs);
    put("topology", cfg.paths.topology);
    put("windows", cfg.paths.windows);
    put("model", cfg.paths.model);
    put("output_dir", cfg.paths.output_dir);
    json det = detection_json(p.detection);
    det["lookback_seconds"] = p.lookback;
    const auto& e = p.log.embedding;
    json j = {
        {"seed", p.seed},
        {"paths", paths},
        {"detection", det},
        {"templates",
         {{"max_leaves", p.log.tree.max_leaves},
          {"mask_variables", p.log.tree.preprocess.mask_variables},
          {"stem", p.log.tree.preprocess.stem},
          {"extra_patterns", p.log.tree.preprocess.extra_patterns}}},
        {"clustering",
         {{"dim", e.dim},
          {"window", e.window},
          {"epochs", e.epochs},
          {"negatives", e.negatives},
          {"learning_rate", e.learning_rate},
          {"embedding_seed", e.seed},
          {"embed_max_copies", p.log.embed_max_copies},
          {"distance_threshold", p.log.distance_threshold},
          {"theta", p.log.theta ? json(*p.log.theta) : json(nullptr)}}},
        {"features", {{"k", p.k}}},
        {"khbn",
         {{"alpha", p.khbn.alpha},
          {"max_condition_size", p.khbn.max_condition_size},
          {"max_causal_parents", p.khbn.max_causal_parents},
          {"min_lift", p.khbn.min_lift},
          {"confidence_floor", p.khbn.confidence_floor},
          {"learn_causal", p.khbn.learn_causal}}},
        {"split", {{"train_fraction", p.train_fraction}}},
        {"stages",
         {{"anomaly_detection", p.anomaly_detection},
          {"template_extraction", p.log.template_extraction},
          {"clustering", p.log.clustering}}},
    };
    return j.dump(2) + "\n";
}

DetectionConfig parse_detection_config(const std::string& json_text) {
    const json root = parse_text(json_text);
    DetectionConfig d;
    Section s(root, "");
    read_detection(s, d, nullptr);
    return d;
}

std::string detection_config_to_json(const DetectionConfig& cfg) { return detection_json(cfg).dump(2) + "\n"; }

}  // namespace cloudrca
