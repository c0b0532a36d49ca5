#include "cloudrca/logtpl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cloudrca/data_model.hpp"

namespace cloudrca {

using nlohmann::json;

// ---------------------------------------------------------------- preprocessing

namespace {

bool all_of(std::string_view s, int (*pred)(int)) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [&](char c) { return pred(static_cast<unsigned char>(c)) != 0; });
}

bool is_integer(std::string_view t) {
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) t.remove_prefix(1);
    return all_of(t, ::isdigit);
}

bool is_ipv4(std::string_view t) {
    if (auto colon = t.find(':'); colon != std::string_view::npos) {
        if (!all_of(t.substr(colon + 1), ::isdigit)) return false;
        t = t.substr(0, colon);
    }
    int parts = 0;
    while (true) {
        const auto dot = t.find('.');
        const auto part = t.substr(0, dot);
        if (part.empty() || part.size() > 3 || !all_of(part, ::isdigit) || std::stoi(std::string(part)) > 255) {
            return false;
        }
        ++parts;
        if (dot == std::string_view::npos) break;
        t.remove_prefix(dot + 1);
    }
    return parts == 4;
}

bool is_uuid(std::string_view t) {
    static constexpr std::size_t groups[] = {8, 4, 4, 4, 12};
    if (t.size() != 36) return false;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < 5; ++g) {
        if (!all_of(t.substr(pos, groups[g]), ::isxdigit)) return false;
        pos += groups[g];
        if (g < 4) {
            if (t[pos] != '-') return false;
            ++pos;
        }
    }
    return true;
}

bool is_hex_id(std::string_view t) {
    if (t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X')) return all_of(t.substr(2), ::isxdigit);
    return t.size() >= 8 && all_of(t, ::isxdigit) && std::any_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_path(std::string_view t) { return t.size() > 1 && t.find('/') != std::string_view::npos; }

std::string_view strip_punct(std::string_view t) {
    static constexpr std::string_view lead = "\"'([{<`";
    static constexpr std::string_view trail = "\"'.,;:)]}>!?`";
    while (!t.empty() && lead.find(t.front()) != std::string_view::npos) t.remove_prefix(1);
    while (!t.empty() && trail.find(t.back()) != std::string_view::npos) t.remove_suffix(1);
    return t;
}

bool ends_with(const std::string& s, std::string_view suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace

bool is_variable_token(std::string_view token) {
    return is_integer(token) || is_ipv4(token) || is_uuid(token) || is_hex_id(token) || is_path(token);
}

std::string stem(std::string token) {
    if (!all_of(token, ::isalpha)) return token;
    while (true) {
        if (token.size() >= 5 && ends_with(token, "ing")) {
            token.resize(token.size() - 3);
        } else if (token.size() >= 4 && ends_with(token, "ed")) {
            token.resize(token.size() - 2);
        } else if (token.size() >= 4 && ends_with(token, "s") && !ends_with(token, "ss")) {
            token.resize(token.size() - 1);
        } else {
            return token;
        }
    }
}

std::string join_tokens(const Tokens& t) {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out += ' ';
        out += t[i];
    }
    return out;
}

Preprocessor::Preprocessor(PreprocessOptions opt) : opt_(std::move(opt)) {
    for (const auto& p : opt_.extra_patterns) {
        try {
            extra_.emplace_back(p, std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw ValidationError("invalid masking pattern '" + p + "': " + e.what());
        }
    }
}

std::optional<Tokens> Preprocessor::operator()(std::string_view message) const {
    Tokens out;
    bool any_word = false;
    std::size_t i = 0;
    while (i < message.size()) {
        while (i < message.size() && std::isspace(static_cast<unsigned char>(message[i]))) ++i;
        std::size_t j = i;
        while (j < message.size() && !std::isspace(static_cast<unsigned char>(message[j]))) ++j;
        if (j == i) break;
        const std::string_view raw = message.substr(i, j - i);
        i = j;
        if (raw == kWildcard) {
            out.emplace_back(kWildcard);
            continue;
        }
        std::string_view rest = strip_punct(raw);
        while (true) {
            const auto eq = rest.find('=');
            const std::string_view part = strip_punct(rest.substr(0, eq));
            if (!part.empty()) {
                bool masked = false;
                if (opt_.mask_variables) {
                    masked = part == kWildcard || is_variable_token(part);
                    for (const auto& re : extra_) {
                        if (masked) break;
                        masked = std::regex_match(part.begin(), part.end(), re);
                    }
                }
                if (masked) {
                    out.emplace_back(kWildcard);
                } else if (std::any_of(part.begin(), part.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
                    std::string tok(part);
                    for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                    out.push_back(opt_.stem ? stem(std::move(tok)) : std::move(tok));
                    any_word = true;
                }
            }
            if (eq == std::string_view::npos) break;
            rest = rest.substr(eq + 1);
        }
    }
    if (!any_word) return std::nullopt;
    return out;
}

std::optional<Tokens> preprocess(std::string_view message) {
    static const Preprocessor pre;
    return pre(message);
}

// ---------------------------------------------------------------- tree

struct TemplateTree::Node {
    std::unordered_map<std::string, std::unique_ptr<Node>> children;
    std::size_t leaves = 0;
    int template_id = 0;
    bool collapsed = false;
};

TemplateTree::TemplateTree() : root_(std::make_unique<Node>()) {}
TemplateTree::TemplateTree(TemplateTree&&) noexcept = default;
TemplateTree& TemplateTree::operator=(TemplateTree&&) noexcept = default;
TemplateTree::~TemplateTree() = default;

TemplateTree::TemplateTree(const TemplateTree& other)
    : root_(std::make_unique<Node>()),
      freq_(other.freq_),
      templates_(other.templates_),
      next_id_(other.next_id_),
      max_leaves_(other.max_leaves_) {
    for (const auto& [id, t] : templates_) attach(t);
}

TemplateTree& TemplateTree::operator=(const TemplateTree& other) {
    if (this != &other) {
        TemplateTree copy(other);
        *this = std::move(copy);
    }
    return *this;
}

bool TemplateTree::operator==(const TemplateTree& other) const {
    return freq_ == other.freq_ && templates_ == other.templates_ && next_id_ == other.next_id_ &&
           max_leaves_ == other.max_leaves_;
}

void TemplateTree::set_frequencies(const std::vector<Tokens>& corpus) {
    std::map<std::string, std::size_t> f;
    for (const auto& toks : corpus) {
        for (const auto& t : toks) {
            if (t != kWildcard) ++f[t];
        }
    }
    set_frequencies(std::move(f));
}

void TemplateTree::set_frequencies(std::map<std::string, std::size_t> freq) {
    if (!templates_.empty()) throw std::logic_error("token ranking must be frozen before the first insert");
    freq_ = std::move(freq);
}

Tokens TemplateTree::order(const Tokens& tokens) const {
    Tokens path;
    for (const auto& t : tokens) {
        if (t != kWildcard) path.push_back(t);
    }
    auto f = [&](const std::string& t) {
        auto it = freq_.find(t);
        return it == freq_.end() ? std::size_t{0} : it->second;
    };
    std::stable_sort(path.begin(), path.end(), [&](const std::string& a, const std::string& b) {
        const auto fa = f(a), fb = f(b);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    return path;
}

void TemplateTree::attach(const Template& t) {
    Node* node = root_.get();
    ++node->leaves;
    for (const auto& tok : t.path) {
        auto& child = node->children[tok];
        if (!child) child = std::make_unique<Node>();
        node = child.get();
        ++node->leaves;
    }
    node->template_id = t.template_id;
    node->collapsed = t.truncated;
}

int TemplateTree::insert(const Tokens& tokens) {
    const Tokens path = order(tokens);
    if (path.empty()) return 0;
    std::vector<Node*> trail{root_.get()};
    Node* node = root_.get();
    for (const auto& tok : path) {
        if (node->collapsed) break;
        auto& child = node->children[tok];
        if (!child) child = std::make_unique<Node>();
        node = child.get();
        trail.push_back(node);
    }
    if (node->template_id != 0) {
        ++templates_.at(node->template_id).support;
        return node->template_id;
    }
    const int id = next_id_++;
    node->template_id = id;
    for (Node* n : trail) ++n->leaves;
    templates_[id] = Template{id, tokens, path, 1, false};
    return id;
}

std::map<int, int> TemplateTree::prune(std::size_t max_leaves) {
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be at least 1");
    max_leaves_ = max_leaves;
    std::map<int, int> remap;
    Tokens prefix;

    std::function<void(Node&, std::vector<int>&)> collect = [&](Node& n, std::vector<int>& ids) {
        if (n.template_id) ids.push_back(n.template_id);
        for (auto& [tok, c] : n.children) collect(*c, ids);
    };

    std::function<void(Node&, bool)> visit = [&](Node& n, bool is_root) {
        for (auto& [tok, c] : n.children) {
            prefix.push_back(tok);
            visit(*c, false);
            prefix.pop_back();
        }
        n.leaves = n.template_id ? 1 : 0;
        for (auto& [tok, c] : n.children) n.leaves += c->leaves;
        if (is_root || n.leaves <= max_leaves) return;

        std::vector<int> ids;
        collect(n, ids);
        const int keep = *std::min_element(ids.begin(), ids.end());
        Template merged = templates_.at(keep);
        // The kept path is `prefix` in tree order; mask every other token and fold wildcard runs.
        std::multiset<std::string> on_path(prefix.begin(), prefix.end());
        Tokens display;
        for (const auto& t : merged.tokens) {
            auto it = on_path.find(t);
            if (it != on_path.end()) {
                on_path.erase(it);
                display.push_back(t);
            } else if (display.empty() || display.back() != kWildcard) {
                display.emplace_back(kWildcard);
            }
        }
        merged.tokens = std::move(display);
        merged.path = prefix;
        merged.truncated = true;
        merged.support = 0;
        for (int id : ids) {
            merged.support += templates_.at(id).support;
            if (id != keep) {
                remap[id] = keep;
                templates_.erase(id);
            }
        }
        templates_[keep] = std::move(merged);
        n.children.clear();
        n.template_id = keep;
        n.collapsed = true;
        n.leaves = 1;
    };
    visit(*root_, true);
    // Chains created by nested truncation (a -> b, b -> c) are resolved to their final target.
    for (auto& [from, to] : remap) {
        while (remap.count(to)) to = remap.at(to);
    }
    return remap;
}

int TemplateTree::resolve(const Tokens& path, std::size_t* probes) const {
    const Node* node = root_.get();
    int deepest = 0;
    bool complete = true;
    for (const auto& tok : path) {
        if (node->collapsed) return node->template_id;
        if (probes) ++*probes;
        auto it = node->children.find(tok);
        if (it == node->children.end()) {
            complete = false;
            break;
        }
        node = it->second.get();
        if (node->template_id) deepest = node->template_id;
    }
    if (complete && node->template_id) return node->template_id;
    if (deepest) return deepest;
    if (node == root_.get()) return 0;
    // Nearest template below the deepest matched prefix.
    int best = 0;
    std::function<void(const Node&)> scan = [&](const Node& n) {
        if (n.template_id && (best == 0 || n.template_id < best)) best = n.template_id;
        for (const auto& [tok, c] : n.children) scan(*c);
    };
    scan(*node);
    return best;
}

int TemplateTree::match(const Tokens& tokens, std::size_t* probes) const {
    const Tokens path = order(tokens);
    if (path.empty()) return 0;
    return resolve(path, probes);
}

int TemplateTree::match(const Tokens& tokens, bool incremental, std::size_t* probes) {
    if (!incremental) return static_cast<const TemplateTree&>(*this).match(tokens, probes);
    const Tokens path = order(tokens);
    if (path.empty()) return 0;
    if (probes) *probes += path.size();
    return insert(tokens);
}

int TemplateTree::extract(std::string_view message, const Preprocessor& pre, bool incremental,
                          std::size_t* probes) {
    const auto toks = pre(message);
    if (!toks) return 0;
    return match(*toks, incremental, probes);
}

int TemplateTree::extract(std::string_view message, const Preprocessor& pre, std::size_t* probes) const {
    const auto toks = pre(message);
    if (!toks) return 0;
    return match(*toks, probes);
}

const Template& TemplateTree::at(int template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) throw std::out_of_range("unknown template id " + std::to_string(template_id));
    return it->second;
}

std::vector<const Template*> TemplateTree::templates() const {
    std::vector<const Template*> out;
    out.reserve(templates_.size());
    for (const auto& [id, t] : templates_) out.push_back(&t);
    return out;
}

std::size_t TemplateTree::leaf_count(const Tokens& path) const {
    const Node* node = root_.get();
    for (const auto& tok : path) {
        auto it = node->children.find(tok);
        if (it == node->children.end()) return 0;
        node = it->second.get();
    }
    return node->leaves;
}

std::string TemplateTree::to_json() const {
    json tpls = json::array();
    for (const auto& [id, t] : templates_) {
        tpls.push_back({{"id", id}, {"tokens", t.tokens}, {"path", t.path}, {"support", t.support},
                        {"truncated", t.truncated}});
    }
    json j = {{"max_leaves", max_leaves_}, {"next_id", next_id_}, {"frequencies", freq_}, {"templates", tpls}};
    return j.dump(1) + "\n";
}

TemplateTree TemplateTree::from_json(const std::string& text) {
    TemplateTree tree;
    try {
        const json j = json::parse(text);
        tree.max_leaves_ = j.at("max_leaves").get<std::size_t>();
        tree.next_id_ = j.at("next_id").get<int>();
        tree.freq_ = j.at("frequencies").get<std::map<std::string, std::size_t>>();
        for (const auto& jt : j.at("templates")) {
            Template t;
            t.template_id = jt.at("id").get<int>();
            t.tokens = jt.at("tokens").get<Tokens>();
            t.path = jt.at("path").get<Tokens>();
            t.support = jt.at("support").get<std::size_t>();
            t.truncated = jt.value("truncated", false);
            if (t.template_id <= 0 || t.template_id >= tree.next_id_ || t.path.empty()) {
                throw ValidationError("template tree document has an invalid template entry");
            }
            tree.templates_[t.template_id] = t;
            tree.attach(t);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed template tree document: ") + e.what());
    }
    return tree;
}

TreeBuildResult build_template_tree(const std::vector<std::string>& messages, const TreeBuildOptions& opt) {
    const Preprocessor pre(opt.preprocess);
    std::vector<std::optional<Tokens>> toks;
    toks.reserve(messages.size());
    std::vector<Tokens> corpus;
    for (const auto& m : messages) {
        toks.push_back(pre(m));
        if (toks.back()) corpus.push_back(*toks.back());
    }
    TreeBuildResult out;
    out.tree.set_frequencies(corpus);
    out.assignment.reserve(messages.size());
    for (const auto& t : toks) out.assignment.push_back(t ? out.tree.insert(*t) : 0);
    const auto remap = out.tree.prune(opt.max_leaves);
    for (int& id : out.assignment) {
        if (auto it = remap.find(id); it != remap.end()) id = it->second;
    }
    return out;
}

}  // namespace cloudrca
