#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "handsign/dbn.hpp"

using namespace handsign;
using handsign::testing::max_gradient_error;
using handsign::testing::toy_batch;
using handsign::testing::toy_dbn;

namespace {

double sig(double x)
{
    return 1.0 / (1.0 + std::exp(-x));
}

// Labeled set whose letter is encoded by which block of inputs is active.
LabeledSet block_set(int per_class, std::uint64_t seed)
{
    Rng rng(seed);
    std::uniform_real_distribution<float> noise(0.0F, 0.3F);
    LabeledSet s;
    s.features.resize(per_class * kNumClasses, 2 * kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) {
        for (int i = 0; i < per_class; ++i) {
            const int r = c * per_class + i;
            for (int j = 0; j < 2 * kNumClasses; ++j) {
                s.features(r, j) = noise(rng);
            }
            s.features(r, 2 * c) = 1.0F;
            s.features(r, 2 * c + 1) = 1.0F;
            s.labels.push_back(Letter::from_index(c));
        }
    }
    return s;
}

SupervisedTrainConfig quick_config()
{
    SupervisedTrainConfig cfg;
    cfg.stage2.epochs = 15;
    cfg.stage3.epochs = 10;
    cfg.stage2.batch_size = 16;
    cfg.stage3.batch_size = 16;
    return cfg;
}

std::string serialize(const Dbn& dbn)
{
    std::ostringstream out;
    write_model(out, dbn);
    return out.str();
}

}  // namespace

TEST(Softmax, UniformAndShiftInvariant)
{
    const Matrix z = Matrix::Constant(2, kNumClasses, 3.0);
    EXPECT_TRUE(softmax(z).isApprox(Matrix::Constant(2, kNumClasses, 1.0 / kNumClasses)));
    const Matrix r = Matrix::Random(3, kNumClasses) * 5.0;
    const Matrix shifted = (r.array() + 1000.0).matrix();
    EXPECT_TRUE(softmax(r).isApprox(softmax(shifted), 1e-12));
    EXPECT_TRUE(softmax(r).rowwise().sum().isApprox(Vector::Ones(3)));
}

TEST(Argmax, TiesGoToLowestIndex)
{
    RowVector row = RowVector::Zero(5);
    EXPECT_EQ(argmax(row), 0);
    row(2) = 1.0;
    row(4) = 1.0;
    EXPECT_EQ(argmax(row), 2);
}

TEST(Forward, MatchesHandComputation)
{
    Rbm layer(2, 1);
    layer.weights << 1.0, -2.0;
    layer.hidden_bias << 0.5;
    Rng rng(1);
    Dbn dbn = make_dbn({layer}, 1, 0.0, rng);
    dbn.translation(0, 3) = 2.0;
    dbn.translation_bias(7) = 1.0;

    const double h = sig(0.5 + 1.0 * 0.25 - 2.0 * 0.5);
    std::vector<double> z(kNumClasses, 0.0);
    z[3] = 2.0 * h;
    z[7] = 1.0;
    double denom = 0.0;
    for (double v : z) {
        denom += std::exp(v);
    }
    const Prediction p = forward(dbn, {0.25F, 0.5F});
    for (int c = 0; c < kNumClasses; ++c) {
        EXPECT_NEAR(p.scores[static_cast<std::size_t>(c)], std::exp(z[static_cast<std::size_t>(c)]) / denom, 1e-12);
    }
    EXPECT_EQ(p.label, Letter::from_index(7));
    EXPECT_THROW(forward(dbn, {0.25F}), DimensionMismatch);
}

TEST(Gradient, TranslationStageMatchesFiniteDifferences)
{
    const Dbn dbn = toy_dbn({6, 4, 3}, 11);
    EXPECT_LT(max_gradient_error(dbn, toy_batch(5, 6, 12), true, 1e-4), 1e-5);
}

TEST(Gradient, FineTuneStageMatchesFiniteDifferences)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Dbn dbn = toy_dbn({6, 4, 3}, 20 + seed);
        EXPECT_LT(max_gradient_error(dbn, toy_batch(5, 6, 30 + seed), false, 1e-4), 1e-5);
    }
}

TEST(Gradient, TranslationOnlyLeavesLayerEntriesEmpty)
{
    const Dbn dbn = toy_dbn({6, 4, 3}, 1);
    const auto batch = toy_batch(4, 6, 2);
    const DbnGradient g = backprop(dbn, batch.x, batch.y, true);
    EXPECT_TRUE(g.weights.empty());
    EXPECT_EQ(g.translation.rows(), 3);
}

TEST(TranslationStage, FrozenLayersStayByteIdentical)
{
    const LabeledSet train = block_set(6, 1);
    Rng rng(3);
    RbmTrainConfig rc;
    rc.epochs = 3;
    Dbn start = make_dbn(pretrain(train.features, {20, 10}, {rc, rc}), 0, 0.01, rng);
    const Dbn trained = train_translation_layer(start, train, {}, quick_config());
    ASSERT_EQ(trained.layers.size(), 2U);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(trained.layers[k], start.layers[k]);
    }
    EXPECT_FALSE(trained.translation == start.translation);
}

TEST(Supervised, ZeroLearningRateChangesNothing)
{
    const LabeledSet train = block_set(3, 1);
    const Dbn start = toy_dbn({48, 8}, 4);
    SupervisedTrainConfig cfg = quick_config();
    cfg.stage3.learning_rate = 0.0;
    Rng rng(1);
    EXPECT_EQ(train_supervised(start, train, {}, cfg.stage3, false, rng, 1), start);
}

TEST(Supervised, FineTuneNeverValidatesWorseAndIsDeterministic)
{
    const LabeledSet train = block_set(8, 5);
    const LabeledSet valid = block_set(3, 6);
    const Dbn start = toy_dbn({48, 16}, 7, 0.1);
    const auto cfg = quick_config();
    const Dbn stage2 = train_translation_layer(start, train, valid, cfg);
    const Dbn tuned = fine_tune(stage2, train, valid, cfg);
    EXPECT_LE(mean_cross_entropy(tuned, valid), mean_cross_entropy(stage2, valid));
    EXPECT_LT(mean_cross_entropy(stage2, valid), mean_cross_entropy(start, valid));
    EXPECT_EQ(fine_tune(stage2, train, valid, cfg), tuned);
    cfg.validate();
}

TEST(Supervised, WorkersAgreeUpToReductionOrder)
{
    const LabeledSet train = block_set(4, 8);
    const Dbn start = toy_dbn({48, 16}, 9, 0.1);
    auto cfg = quick_config();
    cfg.stage3.epochs = 3;
    const Dbn one = fine_tune(start, train, {}, cfg);
    cfg.workers = 3;
    const Dbn three = fine_tune(start, train, {}, cfg);
    EXPECT_LT((one.translation - three.translation).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((one.layers[0].weights - three.layers[0].weights).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Supervised, RejectsBadInput)
{
    const Dbn start = toy_dbn({48, 16}, 9);
    const auto cfg = quick_config();
    EXPECT_THROW(fine_tune(start, {}, {}, cfg), EmptyData);
    LabeledSet ragged = block_set(1, 1);
    ragged.labels.pop_back();
    EXPECT_ANY_THROW(fine_tune(start, ragged, {}, cfg));
    auto bad = cfg;
    bad.stage3.learning_rate = bad.stage2.learning_rate;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Pretrain, SingleLayerEqualsTrainRbm)
{
    const LabeledSet s = block_set(3, 1);
    RbmTrainConfig rc;
    rc.epochs = 4;
    const auto layers = pretrain(s.features, {12}, {rc});
    ASSERT_EQ(layers.size(), 1U);
    EXPECT_EQ(layers[0], train_rbm(s.features, 12, rc));
}

TEST(Pretrain, SecondLayerTrainsOnFirstLayerProbabilities)
{
    const LabeledSet s = block_set(3, 1);
    RbmTrainConfig rc;
    rc.epochs = 2;
    std::vector<std::size_t> seen;
    const auto layers = pretrain(s.features, {12, 5}, {rc, rc}, [&](std::size_t k, int, double) { seen.push_back(k); });
    EXPECT_EQ(layers[1], train_rbm(transform(layers[0], s.features), 5, rc));
    EXPECT_EQ(seen, (std::vector<std::size_t>{0, 0, 1, 1}));
    EXPECT_THROW(pretrain(s.features, {12, 5}, {rc}), ConfigError);
}

TEST(ModelFile, RoundTripIsExact)
{
    const Dbn dbn = toy_dbn({7, 5, 3}, 13);
    const std::string bytes = serialize(dbn);
    EXPECT_EQ(bytes.substr(0, 6), "HSDBN1");
    std::istringstream in(bytes);
    const Dbn back = read_model(in);
    EXPECT_EQ(back, dbn);
    EXPECT_EQ(serialize(back), bytes);
}

TEST(ModelFile, RejectsCorruption)
{
    const std::string bytes = serialize(toy_dbn({7, 5, 3}, 13));
    {
        std::string bad = bytes;
        bad[0] = 'X';
        std::istringstream in(bad);
        EXPECT_THROW(read_model(in), FormatError);
    }
    {
        std::istringstream in(bytes.substr(0, bytes.size() - 8 * 24 - 3));
        try {
            read_model(in);
            FAIL() << "truncated model accepted";
        } catch (const FormatError& e) {
            EXPECT_NE(std::string(e.what()).find("translation.weights"), std::string::npos) << e.what();
        }
    }
    {
        std::istringstream in(bytes + "x");
        EXPECT_THROW(read_model(in), FormatError);
    }
}
