#include "cloudrca/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace cloudrca {

std::vector<std::string> topology_feature_ids(const PlatformTopology& topo) {
    std::vector<std::string> ids;
    for (const auto& [metric, owner] : topo.metric_owner) ids.push_back(kpi_feature(metric));
    for (const auto& [pattern, owner] : topo.pattern_owner) ids.push_back(pattern);
    return ids;
}

FeatureMatrix build_matrix(const std::vector<AnomalyReport>& reports, const std::vector<PatternOccurrence>& occurrences,
                           const std::vector<Sample>& windows, const PlatformTopology& topo) {
    FeatureMatrix m;
    m.data.platform_id = topo.platform_id;
    m.data.feature_ids = topology_feature_ids(topo);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < m.data.feature_ids.size(); ++i) col[m.data.feature_ids[i]] = i;

    std::unordered_map<std::string, std::vector<const AnomalyReport*>> by_metric;
    for (const auto& r : reports) {
        if (!col.count(kpi_feature(r.metric_id))) {
            throw ValidationError("metric '" + r.metric_id + "' has no owner module in the topology");
        }
        by_metric[kpi_feature(r.metric_id)].push_back(&r);
    }
    std::vector<const PatternOccurrence*> occ;
    for (const auto& o : occurrences) {
        if (!col.count(o.feature_id)) throw ValidationError("pattern '" + o.feature_id + "' has no owner module");
        occ.push_back(&o);
    }
    std::stable_sort(occ.begin(), occ.end(),
                     [](const PatternOccurrence* a, const PatternOccurrence* b) { return a->timestamp < b->timestamp; });

    for (std::size_t w = 0; w < windows.size(); ++w) {
        Sample s = windows[w];
        s.bits.assign(m.data.feature_ids.size(), 0);
        bool covered = false;
        for (const auto& [fid, reps] : by_metric) {
            for (const AnomalyReport* r : reps) {
                if (r->window_start < s.window_end && s.window_start < r->window_end) covered = true;
                if (r->any_in(s.window_start, s.window_end)) s.bits[col[fid]] = 1;
            }
        }
        auto lo = std::lower_bound(occ.begin(), occ.end(), s.window_start,
                                   [](const PatternOccurrence* o, Timestamp t) { return o->timestamp < t; });
        for (; lo != occ.end() && (*lo)->timestamp < s.window_end; ++lo) {
            s.bits[col[(*lo)->feature_id]] = 1;
            covered = true;
        }
        if (!covered) m.uncovered_rows.push_back(w);
        m.data.samples.push_back(std::move(s));
    }
    return m;
}

std::map<std::string, double> tfidf_scores(const Dataset& d) {
    const std::size_t F = d.feature_ids.size();
    std::map<std::string, std::vector<const Sample*>> by_type;
    for (const auto& s : d.samples) {
        if (s.polarity == Polarity::Negative && s.label) by_type[s.label->type_id].push_back(&s);
    }
    std::map<std::string, double> scores;
    const auto T = static_cast<double>(by_type.size());
    std::vector<std::vector<double>> tf;
    std::vector<std::size_t> df(F, 0);
    for (const auto& [type, rows] : by_type) {
        std::vector<double> t(F, 0.0);
        for (const Sample* s : rows) {
            for (std::size_t f = 0; f < F; ++f) t[f] += s->bits[f];
        }
        for (std::size_t f = 0; f < F; ++f) {
            t[f] /= static_cast<double>(rows.size());
            if (t[f] > 0.0) ++df[f];
        }
        tf.push_back(std::move(t));
    }
    for (std::size_t f = 0; f < F; ++f) {
        double best = 0.0;
        if (T > 0.0) {
            const double idf = std::log(T / (1.0 + static_cast<double>(df[f])));
            best = -std::numeric_limits<double>::infinity();
            for (const auto& t : tf) best = std::max(best, t[f] * idf);
        }
        scores[d.feature_ids[f]] = best;
    }
    return scores;
}

Dataset project_features(const Dataset& d, const std::vector<std::string>& feature_ids) {
    std::unordered_map<std::string, std::size_t> src;
    for (std::size_t i = 0; i < d.feature_ids.size(); ++i) src[d.feature_ids[i]] = i;
    Dataset out;
    out.platform_id = d.platform_id;
    out.feature_ids = feature_ids;
    std::vector<long> map(feature_ids.size(), -1);
    for (std::size_t i = 0; i < feature_ids.size(); ++i) {
        if (auto it = src.find(feature_ids[i]); it != src.end()) map[i] = static_cast<long>(it->second);
    }
    out.samples.reserve(d.samples.size());
    for (const auto& s : d.samples) {
        Sample t = s;
        t.bits.assign(feature_ids.size(), 0);
        for (std::size_t i = 0; i < map.size(); ++i) {
            if (map[i] >= 0) t.bits[i] = s.bits[static_cast<std::size_t>(map[i])];
        }
        out.samples.push_back(std::move(t));
    }
    return out;
}

FeatureMatrix tfidf_select(const FeatureMatrix& m, std::size_t k) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    FeatureMatrix out;
    out.uncovered_rows = m.uncovered_rows;
    out.selection_scores = tfidf_scores(m.data);
    const std::size_t F = m.data.feature_ids.size();
    if (k >= F) {
        out.data = m.data;
        return out;
    }
    std::vector<std::size_t> idx(F);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return out.selection_scores.at(m.data.feature_ids[a]) > out.selection_scores.at(m.data.feature_ids[b]);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> keep;
    for (std::size_t i : idx) keep.push_back(m.data.feature_ids[i]);
    out.data = project_features(m.data, keep);
    return out;
}

}  // namespace cloudrca
