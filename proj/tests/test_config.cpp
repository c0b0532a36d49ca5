#include <gtest/gtest.h>

#include "cloudrca/config.hpp"

using namespace cloudrca;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_run_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(RunConfig, EmptyObjectKeepsDefaults) {
    const auto cfg = parse_run_config("{}");
    const PipelineOptions def;
    EXPECT_EQ(cfg.pipeline.k, def.k);
    EXPECT_EQ(cfg.pipeline.seed, def.seed);
    EXPECT_DOUBLE_EQ(cfg.pipeline.detection.alpha_esd, def.detection.alpha_esd);
    EXPECT_EQ(cfg.paths, RunPaths{});
}

TEST(RunConfig, ReadsEverySection) {
    const auto cfg = parse_run_config(R"({
      "seed": 7,
      "paths": {"metrics": "m.jsonl", "output_dir": "out"},
      "detection": {"alpha": 0.05, "lookback_seconds": 600},
      "templates": {"max_leaves": 8, "extra_patterns": ["req-[0-9]+"]},
      "clustering": {"distance_threshold": 0.4, "theta": 0.7},
      "features": {"k": 50},
      "khbn": {"alpha": 0.05, "confidence_floor": 0.3, "learn_causal": false},
      "split": {"train_fraction": 0.7},
      "stages": {"clustering": false}
    })");
    const auto& p = cfg.pipeline;
    EXPECT_EQ(p.seed, 7u);
    EXPECT_EQ(cfg.paths.metrics, "m.jsonl");
    EXPECT_EQ(cfg.paths.output_dir, "out");
    EXPECT_FALSE(cfg.paths.logs.has_value());
    EXPECT_DOUBLE_EQ(p.detection.alpha_esd, 0.05);
    EXPECT_DOUBLE_EQ(p.detection.alpha_mk, 0.05);
    EXPECT_EQ(p.lookback, 600);
    EXPECT_EQ(p.log.tree.max_leaves, 8u);
    EXPECT_EQ(p.log.tree.preprocess.extra_patterns, std::vector<std::string>{"req-[0-9]+"});
    EXPECT_DOUBLE_EQ(p.log.distance_threshold, 0.4);
    EXPECT_DOUBLE_EQ(p.log.theta.value(), 0.7);
    EXPECT_EQ(p.k, 50u);
    EXPECT_DOUBLE_EQ(p.khbn.confidence_floor, 0.3);
    EXPECT_FALSE(p.khbn.learn_causal);
    EXPECT_DOUBLE_EQ(p.train_fraction, 0.7);
    EXPECT_FALSE(p.log.clustering);
    EXPECT_TRUE(p.log.template_extraction);
}

TEST(RunConfig, RoundTrip) {
    const auto cfg = parse_run_config(R"({"seed": 3, "paths": {"logs": "l.txt"}, "features": {"k": 12},
                                          "detection": {"alpha_esd": 0.02}})");
    const auto text = run_config_to_json(cfg);
    const auto back = parse_run_config(text);
    EXPECT_EQ(run_config_to_json(back), text);
    EXPECT_EQ(back.paths, cfg.paths);
    EXPECT_DOUBLE_EQ(back.pipeline.detection.alpha_esd, 0.02);
}

TEST(RunConfig, ErrorsNameTheKeyPath) {
    EXPECT_NE(error_of(R"({"detection": {"alpha_esd": 1.5}})").find("detection.alpha_esd"), std::string::npos);
    EXPECT_NE(error_of(R"({"detection": {"bogus": 1}})").find("detection.bogus"), std::string::npos);
    EXPECT_NE(error_of(R"({"colour": "red"})").find("colour"), std::string::npos);
    EXPECT_NE(error_of(R"({"features": {"k": "many"}})").find("features.k"), std::string::npos);
    EXPECT_NE(error_of(R"({"features": {"k": 0}})").find("features.k"), std::string::npos);
    EXPECT_NE(error_of(R"({"split": {"train_fraction": 1.0}})").find("split.train_fraction"), std::string::npos);
    EXPECT_NE(error_of(R"({"clustering": {"theta": "x"}})").find("clustering.theta"), std::string::npos);
    EXPECT_NE(error_of(R"({"khbn": {"confidence_floor": -0.1}})").find("khbn.confidence_floor"), std::string::npos);
    EXPECT_FALSE(error_of("{not json").empty());
}

TEST(DetectionConfig, RoundTripAndRanges) {
    DetectionConfig d;
    d.alpha_f = 0.03;
    d.esd_max_anomalies = 4;
    const auto back = parse_detection_config(detection_config_to_json(d));
    EXPECT_DOUBLE_EQ(back.alpha_f, 0.03);
    EXPECT_EQ(back.esd_max_anomalies, 4u);
    EXPECT_EQ(detection_config_to_json(back), detection_config_to_json(d));
    EXPECT_THROW(parse_detection_config(R"({"min_length": 3})"), ValidationError);
    EXPECT_THROW(parse_detection_config(R"({"lookback_seconds": 10})"), ValidationError);
}
