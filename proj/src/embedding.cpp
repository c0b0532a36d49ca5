#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cloudrca/data_model.hpp"
#include "cloudrca/logcluster.hpp"

namespace cloudrca {

using nlohmann::json;

namespace {

// Portable uniform draw in [0, 1) from the raw generator output.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double sigmoid(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

Vec EmbeddingTable::lookup(const std::string& token, bool* miss) const {
    auto it = vectors.find(token);
    if (miss) *miss = it == vectors.end();
    if (it == vectors.end()) return Vec(dim, 0.0);
    return it->second;
}

EmbeddingTable train_embeddings(const std::vector<Tokens>& corpus, const EmbeddingOptions& opt) {
    if (opt.dim < 2) throw std::invalid_argument("embedding dimension must be at least 2");
    if (opt.window < 1 || opt.epochs < 1) throw std::invalid_argument("window and epochs must be positive");

    std::map<std::string, std::size_t> counts;
    std::uint64_t fp = 14695981039346656037ULL;
    for (const auto& sentence : corpus) {
        for (const auto& t : sentence) {
            ++counts[t];
            fp = fnv1a(fp, t);
        }
        fp = fnv1a(fp, "\n");
    }
    if (counts.size() < 2) throw std::invalid_argument("embedding corpus needs at least two distinct tokens");

    std::map<std::string, std::size_t> index;
    std::vector<std::string> vocab;
    for (const auto& [tok, c] : counts) {
        index[tok] = vocab.size();
        vocab.push_back(tok);
    }
    const std::size_t V = vocab.size(), D = opt.dim;

    // Negative-sampling table: unigram counts raised to 3/4, as a cumulative distribution.
    std::vector<double> cdf(V);
    double acc = 0.0;
    for (std::size_t i = 0; i < V; ++i) {
        acc += std::pow(static_cast<double>(counts[vocab[i]]), 0.75);
        cdf[i] = acc;
    }
    for (double& c : cdf) c /= acc;

    std::mt19937_64 rng(opt.seed);
    std::vector<double> in(V * D), out(V * D, 0.0);
    for (double& w : in) w = (unit(rng) - 0.5) / static_cast<double>(D);

    std::vector<std::vector<std::size_t>> ids;
    std::size_t total = 0;
    for (const auto& sentence : corpus) {
        std::vector<std::size_t> s;
        for (const auto& t : sentence) s.push_back(index[t]);
        total += s.size();
        ids.push_back(std::move(s));
    }
    const double steps = static_cast<double>(std::max<std::size_t>(1, total * opt.epochs));
    double done = 0.0;
    std::vector<double> grad(D);

    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        for (const auto& s : ids) {
            for (std::size_t pos = 0; pos < s.size(); ++pos, done += 1.0) {
                const double lr = opt.learning_rate * std::max(1e-4, 1.0 - done / steps);
                const std::size_t lo = pos >= opt.window ? pos - opt.window : 0;
                const std::size_t hi = std::min(s.size() - 1, pos + opt.window);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == pos) continue;
                    double* v = &in[s[pos] * D];
                    std::fill(grad.begin(), grad.end(), 0.0);
                    for (std::size_t k = 0; k <= opt.negatives; ++k) {
                        std::size_t target;
                        double label;
                        if (k == 0) {
                            target = s[c];
                            label = 1.0;
                        } else {
                            target = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), unit(rng)) -
                                                              cdf.begin());
                            target = std::min(target, V - 1);
                            if (target == s[c]) continue;
                            label = 0.0;
                        }
                        double* u = &out[target * D];
                        double dot = 0.0;
                        for (std::size_t d = 0; d < D; ++d) dot += v[d] * u[d];
                        const double g = lr * (label - sigmoid(dot));
                        for (std::size_t d = 0; d < D; ++d) {
                            grad[d] += g * u[d];
                            u[d] += g * v[d];
                        }
                    }
                    for (std::size_t d = 0; d < D; ++d) v[d] += grad[d];
                }
            }
        }
    }

    EmbeddingTable table;
    table.dim = D;
    table.fingerprint = fp;
    for (std::size_t i = 0; i < V; ++i) table.vectors[vocab[i]] = Vec(in.begin() + i * D, in.begin() + (i + 1) * D);
    return table;
}

Vec template_vector(const Tokens& tokens, const EmbeddingTable& e) {
    Vec out(e.dim, 0.0);
    std::size_t n = 0;
    for (const auto& t : tokens) {
        if (t == kWildcard) continue;
        ++n;
        auto it = e.vectors.find(t);
        if (it == e.vectors.end()) continue;  // unseen tokens contribute a zero vector
        for (std::size_t d = 0; d < e.dim; ++d) out[d] += it->second[d];
    }
    if (n > 0) {
        for (double& x : out) x /= static_cast<double>(n);
    }
    return out;
}

Vec template_vector(const Template& t, const EmbeddingTable& e) { return template_vector(t.tokens, e); }

std::string EmbeddingTable::to_json() const {
    json j = {{"dim", dim}, {"fingerprint", fingerprint}, {"vectors", vectors}};
    return j.dump() + "\n";
}

EmbeddingTable EmbeddingTable::from_json(const std::string& text) {
    EmbeddingTable t;
    try {
        const json j = json::parse(text);
        t.dim = j.at("dim").get<std::size_t>();
        t.fingerprint = j.at("fingerprint").get<std::uint64_t>();
        t.vectors = j.at("vectors").get<std::map<std::string, Vec>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed embedding document: ") + e.what());
    }
    if (t.dim == 0) throw ValidationError("embedding dimension must be positive");
    for (const auto& [tok, v] : t.vectors) {
        if (v.size() != t.dim) throw ValidationError("embedding for '" + tok + "' has the wrong dimension");
    }
    return t;
}

}  // namespace cloudrca
