#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cloudrca {

inline constexpr const char* kWildcard = "<*>";

using Tokens = std::vector<std::string>;

struct PreprocessOptions {
    bool mask_variables = true;
    bool stem = true;
    /// Additional ECMAScript patterns; a token fully matching any of them is masked.
    std::vector<std::string> extra_patterns;
};

/// Tokenises, case-folds, masks variables and stems a raw log message.
class Preprocessor {
public:
    Preprocessor() : Preprocessor(PreprocessOptions{}) {}
    explicit Preprocessor(PreprocessOptions opt);

    /// nullopt when nothing but variables remain (the empty-template marker).
    std::optional<Tokens> operator()(std::string_view message) const;
    const PreprocessOptions& options() const noexcept { return opt_; }

private:
    PreprocessOptions opt_;
    std::vector<std::regex> extra_;
};

std::optional<Tokens> preprocess(std::string_view message);

bool is_variable_token(std::string_view token);
/// Rule-based suffix stripper (-ing, -ed, -s), applied until stable so it is idempotent.
std::string stem(std::string token);

std::string join_tokens(const Tokens& t);

struct Template {
    int template_id = 0;
    Tokens tokens;  // original token order, wildcards for masked or pruned positions
    Tokens path;    // frequency-ordered non-wildcard tokens identifying the tree path
    std::size_t support = 0;
    bool truncated = false;  // produced by pruning: absorbs any suffix below its path

    bool operator==(const Template&) const = default;
};

/// Frequency-ordered prefix tree of log templates. Template id 0 is reserved for
/// messages that reduce to nothing but variables (or match nothing in frozen mode).
class TemplateTree {
public:
    TemplateTree();
    TemplateTree(TemplateTree&&) noexcept;
    TemplateTree& operator=(TemplateTree&&) noexcept;
    TemplateTree(const TemplateTree& other);
    TemplateTree& operator=(const TemplateTree& other);
    ~TemplateTree();

    /// Freezes the token-frequency ranking from a preprocessed corpus.
    void set_frequencies(const std::vector<Tokens>& corpus);
    void set_frequencies(std::map<std::string, std::size_t> freq);
    const std::map<std::string, std::size_t>& frequencies() const noexcept { return freq_; }

    /// Frequency-ordered path for a token list (wildcards dropped).
    Tokens order(const Tokens& tokens) const;

    /// Adds one occurrence of `tokens`; returns its template id.
    int insert(const Tokens& tokens);

    /// Bottom-up truncation of every non-root node with more than `max_leaves` templates below it.
    /// Returns old id -> new id for every template that changed.
    std::map<int, int> prune(std::size_t max_leaves);

    /// Template id for preprocessed tokens. In incremental mode a miss inserts a new template;
    /// in frozen mode it resolves to the nearest prefix template. `probes` counts child lookups.
    int match(const Tokens& tokens, bool incremental, std::size_t* probes = nullptr);
    int match(const Tokens& tokens, std::size_t* probes = nullptr) const;
    int extract(std::string_view message, const Preprocessor& pre, bool incremental, std::size_t* probes = nullptr);
    int extract(std::string_view message, const Preprocessor& pre, std::size_t* probes = nullptr) const;

    std::size_t size() const noexcept { return templates_.size(); }
    const Template& at(int template_id) const;
    bool contains(int template_id) const { return templates_.count(template_id) > 0; }
    /// Templates ordered by id.
    std::vector<const Template*> templates() const;
    /// Number of templates beneath the node reached by walking `path` (0 if absent).
    std::size_t leaf_count(const Tokens& path) const;
    std::size_t max_leaves() const noexcept { return max_leaves_; }

    std::string to_json() const;
    static TemplateTree from_json(const std::string& text);

    bool operator==(const TemplateTree& other) const;

private:
    struct Node;
    void attach(const Template& t);
    int resolve(const Tokens& path, std::size_t* probes) const;

    std::unique_ptr<Node> root_;
    std::map<std::string, std::size_t> freq_;
    std::map<int, Template> templates_;
    int next_id_ = 1;
    std::size_t max_leaves_ = 0;  // 0 = never pruned
};

struct TreeBuildOptions {
    std::size_t max_leaves = 16;
    PreprocessOptions preprocess;
};

struct TreeBuildResult {
    TemplateTree tree;
    std::vector<int> assignment;  // template id per input message, after pruning
};

/// Preprocesses the corpus, freezes frequencies, inserts every message and prunes.
TreeBuildResult build_template_tree(const std::vector<std::string>& messages, const TreeBuildOptions& opt);

}  // namespace cloudrca
