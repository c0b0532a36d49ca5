#include "cloudrca/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cloudrca {

void TimeSeries::validate() const {
    if (timestamps.size() != values.size()) {
        throw ValidationError("series '" + metric_id + "': timestamps and values differ in length");
    }
    if (values.empty()) {
        throw ValidationError("series '" + metric_id + "' is empty");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] <= timestamps[i - 1]) {
            throw ValidationError("series '" + metric_id + "': timestamps not strictly increasing at " +
                                  std::to_string(timestamps[i]));
        }
    }
}

TimeSeries TimeSeries::slice(Timestamp start, Timestamp end) const {
    TimeSeries out{metric_id, module_id, {}, {}};
    auto lo = std::lower_bound(timestamps.begin(), timestamps.end(), start);
    auto hi = std::lower_bound(timestamps.begin(), timestamps.end(), end);
    const auto a = static_cast<std::size_t>(lo - timestamps.begin());
    const auto b = static_cast<std::size_t>(hi - timestamps.begin());
    out.timestamps.assign(timestamps.begin() + a, timestamps.begin() + b);
    out.values.assign(values.begin() + a, values.begin() + b);
    return out;
}

void PlatformTopology::validate() const {
    auto require_module = [&](const std::string& m, const std::string& ctx) {
        if (!modules.count(m)) {
            throw ValidationError("unknown module '" + m + "' referenced by " + ctx);
        }
    };
    for (const auto& [metric, m] : metric_owner) require_module(m, "metric '" + metric + "'");
    for (const auto& [pattern, m] : pattern_owner) require_module(m, "pattern '" + pattern + "'");
    for (const auto& [type, m] : cause_types) require_module(m, "cause type '" + type + "'");
    for (const auto& [from, to] : module_dependencies) {
        require_module(from, "dependency");
        require_module(to, "dependency");
        if (from == to) throw ValidationError("module '" + from + "' depends on itself");
    }
}

std::vector<std::string> PlatformTopology::types_of(const std::string& module) const {
    std::vector<std::string> out;
    for (const auto& [type, m] : cause_types) {
        if (m == module) out.push_back(type);
    }
    return out;
}

std::optional<std::string> PlatformTopology::feature_owner(const std::string& feature_id) const {
    auto strip = [&](const char* prefix) -> std::optional<std::string> {
        const std::string p(prefix);
        if (feature_id.rfind(p, 0) == 0) return feature_id.substr(p.size());
        return std::nullopt;
    };
    if (auto metric = strip(kKpiPrefix)) {
        auto it = metric_owner.find(*metric);
        if (it != metric_owner.end()) return it->second;
        return std::nullopt;
    }
    if (strip(kLogPrefix)) {
        auto it = pattern_owner.find(feature_id);
        if (it != pattern_owner.end()) return it->second;
    }
    return std::nullopt;
}

void Dataset::validate(const PlatformTopology* topo) const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        const std::string where = "sample " + std::to_string(i);
        if (s.window_start >= s.window_end) throw ValidationError(where + ": window_start >= window_end");
        if (s.bits.size() != feature_ids.size()) throw ValidationError(where + ": bit width mismatch");
        for (auto b : s.bits) {
            if (b > 1) throw ValidationError(where + ": feature bits must be 0 or 1");
        }
        if (s.polarity == Polarity::Negative && !s.label) {
            throw ValidationError(where + ": negative sample without label");
        }
        if (topo && s.label) {
            auto it = topo->cause_types.find(s.label->type_id);
            if (it == topo->cause_types.end()) {
                throw ValidationError(where + ": unknown cause type '" + s.label->type_id + "'");
            }
            if (it->second != s.label->module_id) {
                throw ValidationError(where + ": type '" + s.label->type_id + "' is not owned by module '" +
                                      s.label->module_id + "'");
            }
        }
    }
}

std::optional<std::size_t> Dataset::feature_index(const std::string& id) const {
    auto it = std::find(feature_ids.begin(), feature_ids.end(), id);
    if (it == feature_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - feature_ids.begin());
}

SplitResult split_dataset(const Dataset& d, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
    SplitResult out;
    out.train.platform_id = out.test.platform_id = d.platform_id;
    out.train.feature_ids = out.test.feature_ids = d.feature_ids;

    std::map<std::string, std::vector<std::size_t>> by_type;
    std::vector<bool> to_train(d.samples.size(), false);
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const Sample& s = d.samples[i];
        if (s.polarity == Polarity::Positive) {
            to_train[i] = true;
        } else {
            by_type[s.label ? s.label->type_id : std::string()].push_back(i);
        }
    }

    std::mt19937_64 rng(seed);
    for (auto& [type, idx] : by_type) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t n = idx.size();
        if (n < 2) out.undersized_types.push_back(type);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
        if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
        for (std::size_t k = 0; k < n_train && k < n; ++k) to_train[idx[k]] = true;
    }

    // Keep the original sample order on both sides.
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        (to_train[i] ? out.train : out.test).samples.push_back(d.samples[i]);
    }
    return out;
}

}  // namespace cloudrca
