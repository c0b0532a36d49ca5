#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cloudrca/eval.hpp"

using namespace cloudrca;

namespace {

std::vector<Prediction> repeat(const std::string& truth, std::size_t right, std::size_t wrong, const std::string& other) {
    std::vector<Prediction> out(right, Prediction{truth, truth});
    out.insert(out.end(), wrong, Prediction{other, truth});
    return out;
}

Sample fault(const std::string& module, const std::string& type, std::vector<std::uint8_t> bits) {
    Sample s;
    s.window_start = 0;
    s.window_end = 10;
    s.polarity = Polarity::Negative;
    s.label = Label{module, type};
    s.bits = std::move(bits);
    return s;
}

Sample normal(std::vector<std::uint8_t> bits) {
    Sample s;
    s.window_start = 0;
    s.window_end = 10;
    s.bits = std::move(bits);
    return s;
}

PlatformTopology platform(const std::string& id, const std::string& own_metric) {
    PlatformTopology t;
    t.platform_id = id;
    t.modules = {"host", id};
    t.metric_owner = {{"cpu", "host"}, {own_metric, id}};
    t.cause_types = {{"oom", "host"}, {id + "_crash", id}};
    return t;
}

}  // namespace

TEST(Evaluate, WorkedExample) {
    auto p = repeat("A", 3, 1, "B");
    const auto b = repeat("B", 1, 2, "A");
    p.insert(p.end(), b.begin(), b.end());
    const auto r = evaluate(p);
    EXPECT_NEAR(r.per_type_precision.at("A"), 0.75, 1e-12);
    EXPECT_NEAR(r.per_type_precision.at("B"), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.precision, (0.75 + 1.0 / 3.0) / 2.0, 1e-12);
    EXPECT_NEAR(r.cover_rate, 0.5, 1e-12);
    const double f1 = 2 * r.precision * 0.5 / (r.precision + 0.5);
    EXPECT_NEAR(r.f1, f1, 1e-12);
    EXPECT_NEAR(r.f1, 0.52, 1e-12);
    EXPECT_EQ(r.covered, std::set<std::string>{"A"});
    EXPECT_EQ(r.confusion.at("A").at("B"), 1u);
    EXPECT_EQ(r.confusion.at("B").at("A"), 2u);
}

TEST(Evaluate, PerfectPredictions) {
    auto p = repeat("A", 5, 0, "");
    const auto b = repeat("B", 2, 0, "");
    p.insert(p.end(), b.begin(), b.end());
    const auto r = evaluate(p);
    EXPECT_DOUBLE_EQ(r.precision, 1.0);
    EXPECT_DOUBLE_EQ(r.cover_rate, 1.0);
    EXPECT_DOUBLE_EQ(r.f1, 1.0);
}

TEST(Evaluate, CoverThresholdIsInclusive) {
    const auto r = evaluate(repeat("A", 3, 2, "B"));  // exactly 0.6
    EXPECT_TRUE(r.covered.count("A"));
    const auto s = evaluate(repeat("A", 5, 4, "B"));  // 0.5556
    EXPECT_FALSE(s.covered.count("A"));
    EXPECT_DOUBLE_EQ(s.f1, 0.0);
}

TEST(Evaluate, Errors) {
    EXPECT_THROW(evaluate({}), ValidationError);
    const auto t = platform("olap", "olap.qps");
    EXPECT_THROW(evaluate({{"oom", "ghost"}}, &t), ValidationError);
    EXPECT_NO_THROW(evaluate({{"oom", "oom"}}, &t));
}

TEST(Evaluate, OrderInvarianceAndBound) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Prediction> p;
        for (int i = 0; i < 40; ++i) {
            p.push_back({"T" + std::to_string(rng() % 4), "T" + std::to_string(rng() % 4)});
        }
        const auto r = evaluate(p);
        std::shuffle(p.begin(), p.end(), rng);
        EXPECT_EQ(evaluate(p), r);
        EXPECT_LE(r.f1, 2 * std::min(r.precision, r.cover_rate) + 1e-15);
        EXPECT_GE(r.f1, 0.0);
        EXPECT_LE(r.f1, 1.0);
    }
}

TEST(Evaluate, TableAndJsonMentionEveryType) {
    const auto r = evaluate(repeat("alpha", 2, 1, "beta"));
    EXPECT_NE(eval_report_table(r).find("alpha"), std::string::npos);
    EXPECT_NE(eval_report_to_json(r).find("\"f1\""), std::string::npos);
}

TEST(Ablations, StandardSetSwitchesOneStageEach) {
    const auto a = standard_ablations();
    ASSERT_EQ(a.size(), 4u);
    EXPECT_TRUE(a[0].anomaly_detection && a[0].template_extraction && a[0].clustering);
    for (std::size_t i = 1; i < a.size(); ++i) {
        EXPECT_EQ(int(!a[i].anomaly_detection) + int(!a[i].template_extraction) + int(!a[i].clustering), 1);
    }
    std::set<std::string> names;
    for (const auto& t : a) names.insert(t.name());
    EXPECT_EQ(names.size(), a.size());
}

TEST(TransferPool, NoSharedModuleIsNoOp) {
    const std::vector<Dataset> ds{{"a", {"kpi:cpu", "kpi:a.q"}, {fault("host", "oom", {1, 0}), normal({0, 0})}},
                                  {"b", {"kpi:cpu", "kpi:b.q"}, {fault("host", "oom", {1, 1})}}};
    const std::vector<PlatformTopology> ts{platform("a", "a.q"), platform("b", "b.q")};
    const auto out = transfer_pool(ds, ts, {});
    EXPECT_EQ(out, ds);
}

TEST(TransferPool, ImportsSharedFaultsOnly) {
    const std::vector<Dataset> ds{
        {"a", {"kpi:cpu", "kpi:a.q"}, {fault("host", "oom", {1, 0}), normal({0, 0})}},
        {"b", {"kpi:b.q", "kpi:cpu"}, {fault("host", "oom", {0, 1}), fault("b", "b_crash", {1, 0}), normal({1, 1})}}};
    const std::vector<PlatformTopology> ts{platform("a", "a.q"), platform("b", "b.q")};
    std::vector<std::string> warnings;
    const auto out = transfer_pool(ds, ts, {"host"}, &warnings);
    ASSERT_EQ(out.size(), 2u);
    ASSERT_EQ(out[0].samples.size(), 3u);
    EXPECT_EQ(out[0].feature_ids, ds[0].feature_ids);
    const auto& imported = out[0].samples.back();
    EXPECT_EQ(imported.label->type_id, "oom");
    EXPECT_EQ(imported.bits, (std::vector<std::uint8_t>{1, 0}));  // cpu aligned, a.q zero-filled
    EXPECT_EQ(out[1].samples.size(), 4u);
    // Original samples come first and are untouched.
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_TRUE(std::equal(ds[i].samples.begin(), ds[i].samples.end(), out[i].samples.begin()));
    }
}

TEST(TransferPool, GrowsMonotonicallyWithDonors) {
    std::vector<Dataset> ds{{"a", {"kpi:cpu", "kpi:a.q"}, {fault("host", "oom", {1, 0})}},
                            {"b", {"kpi:cpu", "kpi:b.q"}, {fault("host", "oom", {1, 1})}}};
    std::vector<PlatformTopology> ts{platform("a", "a.q"), platform("b", "b.q")};
    const auto two = transfer_pool(ds, ts, {"host"}).front().samples.size();
    ds.push_back({"c", {"kpi:cpu", "kpi:c.q"}, {fault("host", "oom", {1, 0}), fault("host", "oom", {0, 0})}});
    ts.push_back(platform("c", "c.q"));
    const auto three = transfer_pool(ds, ts, {"host"}).front().samples.size();
    EXPECT_EQ(two, 2u);
    EXPECT_EQ(three, 4u);
}

TEST(TransferPool, Errors) {
    EXPECT_THROW(transfer_pool({Dataset{}}, {PlatformTopology{}}, {"host"}), ValidationError);
    EXPECT_THROW(transfer_pool({Dataset{}, Dataset{}}, {PlatformTopology{}}, {"host"}), ValidationError);
}
