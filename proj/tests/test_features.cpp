#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "cloudrca/features.hpp"

using namespace cloudrca;

namespace {

PlatformTopology topo() {
    PlatformTopology t;
    t.platform_id = "p";
    t.modules = {"host", "storage"};
    t.metric_owner = {{"host.cpu", "host"}, {"storage.iops", "storage"}};
    t.pattern_owner = {{"log:p1", "storage"}, {"log:p2", "host"}};
    t.cause_types = {{"disk_full", "storage"}, {"oom", "host"}};
    return t;
}

Sample window(Timestamp start, Timestamp end) {
    Sample s;
    s.window_start = start;
    s.window_end = end;
    return s;
}

AnomalyReport report(const std::string& metric, Timestamp ws, Timestamp we, std::vector<Finding> spans) {
    AnomalyReport r;
    r.metric_id = metric;
    r.window_start = ws;
    r.window_end = we;
    for (const auto& f : spans) r.findings.insert(f.kind);
    r.spans = std::move(spans);
    return r;
}

Sample labelled(const std::string& type, std::vector<std::uint8_t> bits) {
    Sample s = window(0, 10);
    s.polarity = Polarity::Negative;
    s.label = Label{"m", type};
    s.bits = std::move(bits);
    return s;
}

}  // namespace

TEST(BuildMatrix, KpiBitFromOverlappingFinding) {
    const std::vector<Sample> windows{window(0, 100), window(100, 200)};
    const std::vector<AnomalyReport> reports{
        report("host.cpu", 0, 100, {{AnomalyKind::SpikeDip, 40, 41}}),
        report("host.cpu", 100, 200, {}),
        report("storage.iops", 0, 200, {{AnomalyKind::MeanChange, 150, 200}})};
    const auto m = build_matrix(reports, {}, windows, topo());
    EXPECT_EQ(m.data.feature_ids, (std::vector<std::string>{"kpi:host.cpu", "kpi:storage.iops", "log:p1", "log:p2"}));
    EXPECT_EQ(m.data.samples[0].bits, (std::vector<std::uint8_t>{1, 0, 0, 0}));
    EXPECT_EQ(m.data.samples[1].bits, (std::vector<std::uint8_t>{0, 1, 0, 0}));
    EXPECT_TRUE(m.uncovered_rows.empty());
}

TEST(BuildMatrix, LogBitOnlyInsideWindow) {
    const std::vector<Sample> windows{window(0, 100), window(100, 200)};
    const std::vector<PatternOccurrence> occ{{"log:p1", 150}, {"log:p2", 500}, {"log:p2", -5}};
    const auto m = build_matrix({}, occ, windows, topo());
    EXPECT_EQ(m.data.samples[0].bits, (std::vector<std::uint8_t>{0, 0, 0, 0}));
    EXPECT_EQ(m.data.samples[1].bits, (std::vector<std::uint8_t>{0, 0, 1, 0}));
    EXPECT_EQ(m.uncovered_rows, std::vector<std::size_t>{0});
}

TEST(BuildMatrix, UnknownSourcesRejected) {
    EXPECT_THROW(build_matrix({report("ghost", 0, 10, {})}, {}, {window(0, 10)}, topo()), ValidationError);
    EXPECT_THROW(build_matrix({}, {{"log:ghost", 1}}, {window(0, 10)}, topo()), ValidationError);
}

TEST(BuildMatrix, Deterministic) {
    const std::vector<Sample> windows{window(0, 100), window(100, 200), window(300, 400)};
    const std::vector<AnomalyReport> reports{report("host.cpu", 0, 400, {{AnomalyKind::LongTrend, 90, 310}})};
    const std::vector<PatternOccurrence> occ{{"log:p1", 320}, {"log:p2", 10}};
    const auto a = build_matrix(reports, occ, windows, topo());
    const auto b = build_matrix(reports, occ, windows, topo());
    EXPECT_EQ(a.data, b.data);
    for (const auto& s : a.data.samples) {
        EXPECT_EQ(s.bits.size(), a.data.feature_ids.size());
        for (auto bit : s.bits) EXPECT_LE(bit, 1);
    }
}

// Three types A, B, C; f0 everywhere, f1 only in A, f2 in A half the time and in B.
TEST(Tfidf, StatedFormulaOnThreeTypes) {
    Dataset d{"p", {"f0", "f1", "f2"}, {}};
    d.samples = {labelled("A", {1, 1, 1}), labelled("A", {1, 1, 0}), labelled("B", {1, 0, 1}),
                 labelled("B", {1, 0, 1}), labelled("C", {1, 0, 0})};
    const auto s = tfidf_scores(d);
    EXPECT_NEAR(s.at("f0"), std::log(3.0 / 4.0) * 1.0, 1e-12);  // max over types of tf*idf, idf < 0
    EXPECT_NEAR(s.at("f1"), 1.0 * std::log(3.0 / 2.0), 1e-12);
    EXPECT_NEAR(s.at("f2"), 1.0 * std::log(3.0 / 3.0), 1e-12);
    EXPECT_GT(s.at("f1"), s.at("f2"));
    EXPECT_GT(s.at("f2"), s.at("f0"));
}

TEST(Tfidf, UbiquitousFeatureNeverAheadOfPositiveOne) {
    Dataset d{"p", {"always", "rare"}, {}};
    d.samples = {labelled("A", {1, 1}), labelled("B", {1, 0}), labelled("C", {1, 0})};
    FeatureMatrix m{d, {}, {}};
    const auto sel = tfidf_select(m, 1);
    EXPECT_EQ(sel.data.feature_ids, std::vector<std::string>{"rare"});
}

TEST(Tfidf, KEqualToOrAboveWidthIsIdentity) {
    Dataset d{"p", {"a", "b", "c"}, {labelled("A", {1, 0, 1}), labelled("B", {0, 1, 1})}};
    FeatureMatrix m{d, {}, {}};
    EXPECT_EQ(tfidf_select(m, 3).data, d);
    EXPECT_EQ(tfidf_select(m, 50).data, d);
    EXPECT_THROW(tfidf_select(m, 0), std::invalid_argument);
}

TEST(Tfidf, SelectionNestedInK) {
    std::mt19937_64 rng(12);
    Dataset d{"p", {}, {}};
    for (int f = 0; f < 40; ++f) d.feature_ids.push_back("f" + std::to_string(f));
    for (int i = 0; i < 120; ++i) {
        std::vector<std::uint8_t> bits(40);
        for (auto& b : bits) b = rng() % 4 == 0;
        d.samples.push_back(labelled("T" + std::to_string(i % 6), bits));
    }
    FeatureMatrix m{d, {}, {}};
    std::set<std::string> prev;
    for (std::size_t k = 1; k <= 40; ++k) {
        const auto ids = tfidf_select(m, k).data.feature_ids;
        const std::set<std::string> cur(ids.begin(), ids.end());
        EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) << "k " << k;
        // order preserved
        for (std::size_t i = 1; i < ids.size(); ++i) EXPECT_LT(*d.feature_index(ids[i - 1]), *d.feature_index(ids[i]));
        prev = cur;
    }
}

TEST(Tfidf, UniqueDiscriminatorsKept) {
    // Five types, each with one private feature, plus shared noise features.
    std::mt19937_64 rng(4);
    Dataset d{"p", {}, {}};
    for (int f = 0; f < 5; ++f) d.feature_ids.push_back("private" + std::to_string(f));
    for (int f = 0; f < 20; ++f) d.feature_ids.push_back("noise" + std::to_string(f));
    for (int i = 0; i < 100; ++i) {
        const int type = i % 5;
        std::vector<std::uint8_t> bits(25, 0);
        bits[type] = 1;
        for (int f = 5; f < 25; ++f) bits[f] = rng() % 2;
        d.samples.push_back(labelled("T" + std::to_string(type), bits));
    }
    const auto ids = tfidf_select(FeatureMatrix{d, {}, {}}, 5).data.feature_ids;
    for (int f = 0; f < 5; ++f) EXPECT_TRUE(std::count(ids.begin(), ids.end(), "private" + std::to_string(f)));
}

TEST(Project, RestrictsAndZeroFills) {
    Dataset d{"p", {"a", "b"}, {labelled("A", {1, 1})}};
    const auto p = project_features(d, {"b", "z"});
    EXPECT_EQ(p.feature_ids, (std::vector<std::string>{"b", "z"}));
    EXPECT_EQ(p.samples[0].bits, (std::vector<std::uint8_t>{1, 0}));
    EXPECT_EQ(p.samples[0].label, d.samples[0].label);
}
