#include <gtest/gtest.h>

#include "handsign/config.hpp"
#include "test_support.hpp"

using namespace handsign;
using handsign::testing::spit;
using handsign::testing::TempDir;
using nlohmann::json;

TEST(Config, Defaults)
{
    const RunConfig c;
    EXPECT_EQ(c.preprocess.hand_depth_mm, 120);
    EXPECT_EQ(c.preprocess.layers, 6);
    EXPECT_EQ(c.layer_sizes, (std::vector<int>{1500, 700, 400}));
    EXPECT_EQ(c.feature_kind, features::FeatureKind::combined);
    EXPECT_DOUBLE_EQ(c.supervised.stage2.learning_rate, 0.1);
    EXPECT_DOUBLE_EQ(c.supervised.stage3.learning_rate, 0.01);
    EXPECT_DOUBLE_EQ(c.supervised.stage2.input_noise_sigma, 0.1);
    EXPECT_EQ(c.supervised.stage2.epochs, 200);
    EXPECT_EQ(c.supervised.stage2.early_stopping_patience, 10);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTrip)
{
    RunConfig c;
    c.paths.manifest = "data/manifest.csv";
    c.preprocess.layers = 4;
    c.preprocess.alignment.scale_x = 0.5;
    c.feature_kind = features::FeatureKind::gabor;
    c.layer_sizes = {30, 20};
    c.rbm = {RbmTrainConfig{}, RbmTrainConfig{}};
    c.rbm[1].epochs = 7;
    c.supervised.stage3.epochs = 3;
    c.split.mode = dataset::SplitMode::unseen;
    c.split.test_user = "user2";
    c.workers = 3;
    c.rng_seed = 99;
    const json j = to_json(c);
    const RunConfig back = config_from_json(json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.rbm_configs()[1].epochs, 7);
    EXPECT_EQ(back.split.test_user, "user2");
}

TEST(Config, PartialFileKeepsDefaults)
{
    TempDir dir;
    spit(dir.file("c.json"), R"({"layer_sizes": [8], "rbm": {"epochs": 2}, "rng_seed": 5})");
    const RunConfig c = load_config(dir.file("c.json"));
    EXPECT_EQ(c.layer_sizes, std::vector<int>{8});
    EXPECT_EQ(c.rbm_configs().front().epochs, 2);
    EXPECT_DOUBLE_EQ(c.rbm_configs().front().learning_rate, RbmTrainConfig{}.learning_rate);
    EXPECT_EQ(c.preprocess.hand_depth_mm, 120);
}

TEST(Config, SeedsDeriveFromRunSeed)
{
    RunConfig c;
    c.rng_seed = 4;
    c.workers = 2;
    const auto rbm = c.rbm_configs();
    ASSERT_EQ(rbm.size(), 3U);
    EXPECT_NE(rbm[0].rng_seed, rbm[1].rng_seed);
    EXPECT_EQ(rbm[2].workers, 2);
    EXPECT_EQ(c.split_spec().rng_seed, 4U);
    RunConfig d = c;
    d.rng_seed = 5;
    EXPECT_NE(d.supervised_config().rng_seed, c.supervised_config().rng_seed);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
    for (const char* text : {R"({"layer_size": [8]})", R"({"preprocess": {"depth": 3}})",
                             R"({"supervised": {"stage4": {}}})", R"({"rbm": {"lr": 0.1}})",
                             R"({"layer_sizes": "big"})", R"({"split": {"mode": "sideways"}})",
                             R"({"feature_kind": "sonar"})"}) {
        EXPECT_THROW(config_from_json(json::parse(text)), ConfigError) << text;
    }
    TempDir dir;
    spit(dir.file("broken.json"), "{");
    EXPECT_THROW(load_config(dir.file("broken.json")), ConfigError);
    EXPECT_THROW(load_config(dir.file("absent.json")), ConfigError);
}

TEST(Config, ValidationCatchesInconsistency)
{
    auto invalid = [](auto mutate) {
        RunConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(invalid([](RunConfig& c) { c.layer_sizes.clear(); }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.layer_sizes = {10, 0}; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.rbm = {RbmTrainConfig{}, RbmTrainConfig{}}; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.preprocess.layers = 0; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.preprocess.hand_depth_mm = 0; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.workers = 0; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.supervised.stage3.learning_rate = 0.2; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.split.unseen_valid_fraction = 1.0; }).validate(), ConfigError);
    EXPECT_THROW(invalid([](RunConfig& c) { c.preprocess.alignment.scale_y = 0.0; }).validate(), ConfigError);
}
