#include "cloudrca/logcluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cloudrca/data_model.hpp"

namespace cloudrca {

using nlohmann::json;

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine similarity of vectors with different sizes");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double representative_score(int member, const std::vector<int>& members, const std::map<int, Vec>& vectors) {
    if (members.size() < 2) return 0.0;
    const Vec& vi = vectors.at(member);
    double s = 0.0;
    for (int j : members) {
        if (j != member) s += 1.0 - cosine_similarity(vi, vectors.at(j));
    }
    return s / static_cast<double>(members.size() - 1);
}

int select_representative(const std::vector<int>& members, const std::map<int, Vec>& vectors) {
    if (members.empty()) throw std::invalid_argument("cannot pick a representative of an empty cluster");
    int best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int m : members) {
        const double s = representative_score(m, members, vectors);
        if (s < best_score || (s == best_score && m < best)) {
            best = m;
            best_score = s;
        }
    }
    return best;
}

namespace {

LogPattern make_pattern(int pattern_id, std::vector<int> members, const std::map<int, Vec>& vectors) {
    std::sort(members.begin(), members.end());
    LogPattern p;
    p.pattern_id = pattern_id;
    p.representative = select_representative(members, vectors);
    p.representative_vector = vectors.at(p.representative);
    p.members = std::move(members);
    if (p.members.size() > 1) {
        double s = 0.0;
        for (int m : p.members) {
            if (m != p.representative) s += cosine_similarity(p.representative_vector, vectors.at(m));
        }
        p.average_internal_similarity = s / static_cast<double>(p.members.size() - 1);
    }
    return p;
}

}  // namespace

std::vector<LogPattern> cluster(const std::map<int, Vec>& vectors, double distance_threshold) {
    if (vectors.empty()) throw std::invalid_argument("clustering needs at least one vector");
    if (!(distance_threshold > 0.0 && distance_threshold < 2.0)) {
        throw std::invalid_argument("distance_threshold must lie in (0, 2)");
    }
    std::vector<int> ids;
    std::vector<const Vec*> vecs;
    for (const auto& [id, v] : vectors) {
        ids.push_back(id);
        vecs.push_back(&v);
    }
    const std::size_t n = ids.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[i * n + j] = dist[j * n + i] = 1.0 - cosine_similarity(*vecs[i], *vecs[j]);
        }
    }
    // Cluster slots stay at the index of their smallest member, so scanning slots in
    // index order visits clusters in order of their smallest template id.
    std::vector<std::vector<int>> members(n);
    std::vector<bool> alive(n, true);
    for (std::size_t i = 0; i < n; ++i) members[i] = {ids[i]};

    while (true) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = n, bj = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (alive[j] && dist[i * n + j] < best) {
                    best = dist[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi == n || !(best < distance_threshold)) break;
        // Lance-Williams update for average linkage.
        const auto ni = static_cast<double>(members[bi].size()), nj = static_cast<double>(members[bj].size());
        for (std::size_t k = 0; k < n; ++k) {
            if (!alive[k] || k == bi || k == bj) continue;
            const double d = (ni * dist[bi * n + k] + nj * dist[bj * n + k]) / (ni + nj);
            dist[bi * n + k] = dist[k * n + bi] = d;
        }
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
        alive[bj] = false;
    }

    std::vector<LogPattern> out;
    int next = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) out.push_back(make_pattern(next++, members[i], vectors));
    }
    return out;
}

double compute_threshold(const std::vector<LogPattern>& patterns) {
    if (patterns.empty()) throw std::invalid_argument("threshold needs at least one pattern");
    double s = 0.0;
    for (const auto& p : patterns) s += p.average_internal_similarity;
    return s / static_cast<double>(patterns.size());
}

Assignment assign_online(const Vec& vec, std::vector<LogPattern>& patterns, double theta, int template_id) {
    if (!(theta >= -1.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in [-1, 1]");
    if (template_id != 0) {
        for (const auto& p : patterns) {
            if (std::binary_search(p.members.begin(), p.members.end(), template_id)) return {p.pattern_id, false};
        }
    }
    if (std::all_of(vec.begin(), vec.end(), [](double x) { return x == 0.0; })) return {kUnembeddablePattern, false};

    LogPattern* best = nullptr;
    double best_sim = -std::numeric_limits<double>::infinity();
    int max_id = 0;
    for (auto& p : patterns) {
        max_id = std::max(max_id, p.pattern_id);
        const double s = cosine_similarity(vec, p.representative_vector);
        if (s > best_sim || (s == best_sim && best && p.pattern_id < best->pattern_id)) {
            best_sim = s;
            best = &p;
        }
    }
    if (best && best_sim >= theta) {
        if (template_id != 0) {
            best->members.insert(std::upper_bound(best->members.begin(), best->members.end(), template_id),
                                 template_id);
        }
        return {best->pattern_id, false};
    }
    LogPattern p;
    p.pattern_id = max_id + 1;
    if (template_id != 0) p.members = {template_id};
    p.representative = template_id;
    p.representative_vector = vec;
    patterns.push_back(std::move(p));
    return {patterns.back().pattern_id, true};
}

std::string patterns_to_json(const std::vector<LogPattern>& patterns, double theta) {
    json arr = json::array();
    for (const auto& p : patterns) {
        arr.push_back({{"pattern_id", p.pattern_id},
                       {"members", p.members},
                       {"representative", p.representative},
                       {"representative_vector", p.representative_vector},
                       {"average_internal_similarity", p.average_internal_similarity}});
    }
    json j = {{"theta", theta}, {"patterns", arr}};
    return j.dump(1) + "\n";
}

std::pair<std::vector<LogPattern>, double> patterns_from_json(const std::string& text) {
    std::vector<LogPattern> out;
    double theta = 0.0;
    try {
        const json j = json::parse(text);
        theta = j.at("theta").get<double>();
        for (const auto& jp : j.at("patterns")) {
            LogPattern p;
            p.pattern_id = jp.at("pattern_id").get<int>();
            p.members = jp.at("members").get<std::vector<int>>();
            p.representative = jp.at("representative").get<int>();
            p.representative_vector = jp.at("representative_vector").get<Vec>();
            p.average_internal_similarity = jp.at("average_internal_similarity").get<double>();
            out.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed pattern document: ") + e.what());
    }
    return {std::move(out), theta};
}

}  // namespace cloudrca
