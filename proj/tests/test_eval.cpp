#include <gtest/gtest.h>

#include <random>

#include "handsign/eval.hpp"

using namespace handsign;
using namespace handsign::eval;

namespace {

ConfusionMatrix two_class()
{
    ConfusionMatrix cm;
    cm.at(0, 0) = 8;
    cm.at(0, 1) = 2;
    cm.at(1, 0) = 4;
    cm.at(1, 1) = 6;
    return cm;
}

}  // namespace

TEST(Confusion, CountsPairs)
{
    const Letter a = Letter::from_index(0);
    const Letter b = Letter::from_index(1);
    const auto cm = confusion({a, a, b, a}, {a, b, b, b});
    EXPECT_EQ(cm.at(0, 0), 1U);
    EXPECT_EQ(cm.at(1, 0), 2U);
    EXPECT_EQ(cm.at(1, 1), 1U);
    EXPECT_EQ(cm.total(), 4U);
    EXPECT_THROW(confusion({a}, {a, b}), LengthMismatch);
    EXPECT_THROW(confusion({}, {}), EmptyInput);
}

TEST(PrecisionRecall, TwoClassExample)
{
    const auto r = precision_recall(two_class());
    EXPECT_DOUBLE_EQ(*r.letters[0].precision, 8.0 / 12.0);
    EXPECT_DOUBLE_EQ(*r.letters[0].recall, 0.8);
    EXPECT_DOUBLE_EQ(*r.letters[1].precision, 0.75);
    EXPECT_DOUBLE_EQ(*r.letters[1].recall, 0.6);
    for (int l = 2; l < kNumClasses; ++l) {
        EXPECT_FALSE(r.letters[static_cast<std::size_t>(l)].precision.has_value());
        EXPECT_FALSE(r.letters[static_cast<std::size_t>(l)].recall.has_value());
    }
    EXPECT_DOUBLE_EQ(*r.macro_precision, (8.0 / 12.0 + 0.75) / 2.0);
    EXPECT_DOUBLE_EQ(*r.macro_recall, 0.7);
    EXPECT_DOUBLE_EQ(*r.micro_recall, 0.7);
    EXPECT_EQ(r.total, 20U);
    ASSERT_EQ(r.most_confused.size(), 2U);
    EXPECT_EQ(r.most_confused[0].truth, Letter::from_index(1));
    EXPECT_EQ(r.most_confused[0].count, 4U);
}

TEST(PrecisionRecall, PredictedButAbsentLetterHasPrecisionOnly)
{
    ConfusionMatrix cm;
    cm.at(0, 2) = 3;
    const auto r = precision_recall(cm);
    EXPECT_DOUBLE_EQ(*r.letters[2].precision, 0.0);
    EXPECT_FALSE(r.letters[2].recall.has_value());
    EXPECT_DOUBLE_EQ(*r.letters[0].recall, 0.0);
    EXPECT_FALSE(r.letters[0].precision.has_value());
}

TEST(PrecisionRecall, RandomMatricesMatchPerSampleCounting)
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> cls(0, kNumClasses - 1);
    std::uniform_int_distribution<int> len(1, 300);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Letter> preds;
        std::vector<Letter> truths;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            truths.push_back(Letter::from_index(cls(rng)));
            preds.push_back(trial % 2 == 0 ? Letter::from_index(cls(rng)) : truths.back());
        }
        const auto r = precision_recall(confusion(preds, truths));
        double psum = 0.0;
        double rsum = 0.0;
        int pn = 0;
        int rn = 0;
        for (int l = 0; l < kNumClasses; ++l) {
            int tp = 0;
            int predicted = 0;
            int actual = 0;
            for (int i = 0; i < n; ++i) {
                const bool p = preds[static_cast<std::size_t>(i)].index() == l;
                const bool t = truths[static_cast<std::size_t>(i)].index() == l;
                tp += (p && t) ? 1 : 0;
                predicted += p ? 1 : 0;
                actual += t ? 1 : 0;
            }
            const auto& m = r.letters[static_cast<std::size_t>(l)];
            ASSERT_EQ(m.precision.has_value(), predicted > 0);
            ASSERT_EQ(m.recall.has_value(), actual > 0);
            if (predicted > 0) {
                EXPECT_NEAR(*m.precision, static_cast<double>(tp) / predicted, 1e-12);
                psum += static_cast<double>(tp) / predicted;
                ++pn;
            }
            if (actual > 0) {
                EXPECT_NEAR(*m.recall, static_cast<double>(tp) / actual, 1e-12);
                rsum += static_cast<double>(tp) / actual;
                ++rn;
            }
        }
        EXPECT_NEAR(*r.macro_precision, psum / pn, 1e-12);
        EXPECT_NEAR(*r.macro_recall, rsum / rn, 1e-12);
    }
}

TEST(Report, JsonRoundTrip)
{
    const auto r = precision_recall(two_class(), "allseen");
    EXPECT_EQ(report_from_json(nlohmann::json::parse(to_json(r).dump())), r);
    EXPECT_TRUE(to_json(r)["letters"][5]["precision"].is_null());
    EXPECT_THROW(report_from_json(nlohmann::json::object()), FormatError);
}

TEST(Report, CsvLeavesUndefinedCellsEmpty)
{
    const std::string csv = report_csv(precision_recall(two_class()));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "letter,precision,recall,support");
    EXPECT_NE(csv.find("\nB,0.75,0.59999999999999998,10\n"), std::string::npos) << csv;
    EXPECT_NE(csv.find("\nC,,,0\n"), std::string::npos);
    const std::string conf = confusion_csv(two_class());
    EXPECT_NE(conf.find("\nB,4,6,0"), std::string::npos);
}

TEST(Average, UnweightedOverDefinedValues)
{
    ConfusionMatrix other;
    other.at(0, 0) = 1;
    other.at(2, 2) = 1;
    const auto avg = average_reports({precision_recall(two_class()), precision_recall(other)}, "unseen");
    EXPECT_DOUBLE_EQ(*avg.letters[0].recall, (0.8 + 1.0) / 2.0);
    EXPECT_DOUBLE_EQ(*avg.letters[1].recall, 0.6);
    EXPECT_DOUBLE_EQ(*avg.letters[2].recall, 1.0);
    EXPECT_DOUBLE_EQ(*avg.macro_recall, (0.7 + 1.0) / 2.0);
    EXPECT_EQ(avg.total, 22U);
    EXPECT_EQ(avg.split, "unseen");
    EXPECT_THROW(average_reports({}, "x"), EmptyInput);
}

TEST(Compare, KeepsRunOrder)
{
    const auto a = precision_recall(two_class());
    ConfusionMatrix perfect;
    perfect.at(0, 0) = 5;
    const auto t = compare_reports({{"raw", precision_recall(perfect)}, {"combined", a}});
    const std::string csv = t.csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "letter,raw_precision,raw_recall,combined_precision,combined_recall");
    EXPECT_NE(csv.find("\nA,1,1,0.66666666666666663,0.80000000000000004\n"), std::string::npos) << csv;
    EXPECT_EQ(t.json()[1]["run"], "combined");
    EXPECT_THROW(compare_reports({}), EmptyInput);
}
