#include <gtest/gtest.h>

#include <random>

#include "handsign/imaging.hpp"

using namespace handsign;
using namespace handsign::imaging;

namespace {

DepthImage depth2x2(std::uint16_t a, std::uint16_t b, std::uint16_t c, std::uint16_t d)
{
    return DepthImage(2, 2, {a, b, c, d});
}

DepthImage random_depth(std::mt19937_64& rng, int w, int h)
{
    std::uniform_int_distribution<int> v(400, 3000);
    std::bernoulli_distribution zero(0.2);
    DepthImage img(w, h);
    for (auto& p : img.data()) {
        p = zero(rng) ? 0 : static_cast<std::uint16_t>(v(rng));
    }
    return img;
}

}  // namespace

TEST(MinNonzeroDepth, Examples)
{
    EXPECT_EQ(min_nonzero_depth(depth2x2(0, 1520, 1503, 1600)), 1503);
    EXPECT_EQ(min_nonzero_depth(DepthImage(1, 1, {7})), 7);
    EXPECT_THROW(min_nonzero_depth(depth2x2(0, 0, 0, 0)), AllZeroImage);
}

TEST(RemoveBackground, Examples)
{
    EXPECT_EQ(remove_background(depth2x2(1503, 1640, 0, 1610), 120, 1503), depth2x2(1503, 0, 0, 1610));
    const auto within = depth2x2(1503, 1623, 0, 1510);
    EXPECT_EQ(remove_background(within, 120, 1503), within);
    EXPECT_EQ(kDefaultHandDepthMm, 120);
}

TEST(NormalizeDepth, Examples)
{
    EXPECT_EQ(normalize_depth(depth2x2(1503, 0, 1523, 1601), 1503), depth2x2(1, 0, 21, 99));
    EXPECT_EQ(normalize_depth(depth2x2(0, 0, 0, 913), 913), depth2x2(0, 0, 0, 1));
}

TEST(DepthPipeline, OffsetAndBackgroundInvariance)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto img = random_depth(rng, 9, 7);
        const int t = 120;
        auto run = [&](const DepthImage& in) {
            const int d = min_nonzero_depth(in);
            return normalize_depth(remove_background(in, t, d), d);
        };
        const auto base = run(img);

        DepthImage shifted = img;
        const auto c = static_cast<std::uint16_t>(1 + trial * 7);
        for (auto& v : shifted.data()) {
            if (v > 0) {
                v = static_cast<std::uint16_t>(v + c);
            }
        }
        EXPECT_EQ(run(shifted), base);

        DepthImage altered = img;
        const int limit = min_nonzero_depth(img) + t;
        for (auto& v : altered.data()) {
            if (v > limit) {
                v = static_cast<std::uint16_t>(v % 2 == 0 ? 0 : v + 500);
            }
        }
        EXPECT_EQ(run(altered), base);

        int lowest = 1 << 30;
        for (const auto v : base.data()) {
            if (v > 0) {
                lowest = std::min<int>(lowest, v);
            }
        }
        EXPECT_EQ(lowest, 1);
    }
}

TEST(MakeMask, Examples)
{
    const auto m = make_mask(depth2x2(1, 0, 21, 99));
    EXPECT_EQ(m, BinaryImage(2, 2, {1, 0, 1, 1}));
    EXPECT_EQ(make_mask(depth2x2(0, 0, 0, 0)), BinaryImage(2, 2, {0, 0, 0, 0}));
    EXPECT_EQ(make_mask(m), m);
}

TEST(AlignMask, IdentityAndOutOfBounds)
{
    BinaryImage m(5, 4, {1, 0, 1, 1, 0, 0, 1, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 0});
    EXPECT_EQ(align_mask(m, MaskAlignment{}, 5, 4), m);
    MaskAlignment away;
    away.offset_x = 5;
    EXPECT_EQ(align_mask(m, away, 5, 4), BinaryImage(5, 4));
    MaskAlignment bad;
    bad.scale_x = 0.0;
    EXPECT_THROW(align_mask(m, bad, 5, 4), DataError);
}

TEST(AlignMask, HalfScaleCheckerboardMatchesHandMapping)
{
    // 4x4 checkerboard, value (x + y) % 2 == 0.
    BinaryImage board(4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            board.at(x, y) = (x + y) % 2 == 0 ? 1 : 0;
        }
    }
    MaskAlignment half;
    half.scale_x = 0.5;
    half.scale_y = 0.5;
    // Output coordinate 0,1,2,3 maps to round-half-up of 0, 0.5, 1, 1.5:
    // source columns 0, 1, 1, 2.
    const std::array<int, 4> src{0, 1, 1, 2};
    const auto out = align_mask(board, half, 4, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            EXPECT_EQ(out.at(x, y), (src[x] + src[y]) % 2 == 0 ? 1 : 0) << x << "," << y;
        }
    }
}

TEST(ApplyMask, Examples)
{
    const IntensityImage img(2, 2, {10, 20, 30, 40});
    EXPECT_EQ(apply_mask(img, BinaryImage(2, 2, 1)), img);
    EXPECT_EQ(apply_mask(img, BinaryImage(2, 2, 0)), IntensityImage(2, 2, 0.0F));
    EXPECT_EQ(apply_mask(img, BinaryImage(2, 2, {1, 0, 0, 1})), IntensityImage(2, 2, {10, 0, 0, 40}));
    EXPECT_THROW(apply_mask(img, BinaryImage(3, 2)), DimensionMismatch);
}

TEST(ApplyMask, ZeroesExactlyTheDepthHoles)
{
    std::mt19937_64 rng(3);
    const auto depth = random_depth(rng, 12, 10);
    IntensityImage img(12, 10, 77.0F);
    const auto out = apply_mask(img, align_mask(make_mask(depth), MaskAlignment{}, 12, 10));
    for (std::size_t i = 0; i < depth.size(); ++i) {
        EXPECT_EQ(out[i] == 0.0F, depth[i] == 0);
    }
}

TEST(BoundingBoxCenter, SinglePixelLandsAtFloorCenter)
{
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            BinaryImage img(8, 8);
            img.at(x, y) = 1;
            BinaryImage expected(8, 8);
            expected.at(3, 3) = 1;
            EXPECT_EQ(bounding_box_center(img, 8, 8), expected);
        }
    }
}

TEST(BoundingBoxCenter, FixpointEmptyAndIdempotent)
{
    BinaryImage centered(6, 6);
    centered.at(2, 2) = centered.at(3, 3) = 1;
    EXPECT_EQ(bounding_box_center(centered, 6, 6), centered);
    EXPECT_EQ(bounding_box_center(BinaryImage(5, 5), 7, 3), BinaryImage(7, 3));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto img = random_depth(rng, 11, 9);
        const auto once = bounding_box_center(img, 11, 9);
        EXPECT_EQ(bounding_box_center(once, 11, 9), once);
    }
}

TEST(BoundingBoxCenter, OddMarginGoesRightAndBottom)
{
    BinaryImage img(5, 4);
    img.at(0, 0) = img.at(1, 0) = 1;  // 2x1 box
    const auto out = bounding_box_center(img, 5, 4);
    EXPECT_EQ(out.at(1, 1), 1);
    EXPECT_EQ(out.at(2, 1), 1);
    EXPECT_EQ(bounding_box(out), (BoundingBox{1, 1, 2, 1}));
}

TEST(BoundingBoxCenter, ContentLargerThanTarget)
{
    EXPECT_THROW(bounding_box_center(BinaryImage(4, 4, 1), 3, 4), ContentLargerThanTarget);
}

TEST(Resize, IdentityAndNearestOracle)
{
    std::mt19937_64 rng(9);
    const auto img = random_depth(rng, 7, 5);
    EXPECT_EQ(resize(img, 7, 5, ResizeMode::bilinear), img);
    EXPECT_EQ(resize(img, 7, 5, ResizeMode::nearest), img);

    const BinaryImage tiny(2, 2, {1, 0, 0, 0});
    const auto big = resize(tiny, 4, 4, ResizeMode::nearest);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            EXPECT_EQ(big.at(x, y), (x < 2 && y < 2) ? 1 : 0);
        }
    }
}

TEST(Resize, ConstantStaysConstantAndBinaryStaysBinary)
{
    for (const auto mode : {ResizeMode::bilinear, ResizeMode::nearest}) {
        const auto up = resize(IntensityImage(5, 3, 42.0F), 17, 11, mode);
        for (const auto v : up.data()) {
            EXPECT_EQ(v, 42.0F);
        }
        const auto down = resize(DepthImage(40, 30, 1234), 7, 9, mode);
        for (const auto v : down.data()) {
            EXPECT_EQ(v, 1234);
        }
    }
    std::mt19937_64 rng(1);
    const auto mask = make_mask(random_depth(rng, 23, 19));
    const auto big = resize(mask, 32, 32, ResizeMode::nearest);
    for (const auto v : big.data()) {
        EXPECT_TRUE(v == 0 || v == 1);
    }
}

TEST(Resize, BilinearMidpoint)
{
    // 2x1 -> 4x1: centers at source 0.25-0.5 = -0.25 (clamped 0), 0.25, 0.75, 1.25 (clamped 1).
    const IntensityImage img(2, 1, {0.0F, 1.0F}, IntensityDomain::normalized);
    const auto out = resize(img, 4, 1, ResizeMode::bilinear);
    EXPECT_FLOAT_EQ(out[0], 0.0F);
    EXPECT_FLOAT_EQ(out[1], 0.25F);
    EXPECT_FLOAT_EQ(out[2], 0.75F);
    EXPECT_FLOAT_EQ(out[3], 1.0F);
}

TEST(Deinterlace, Examples)
{
    const auto constant = deinterlace(IntensityImage(128, 128, 90.0F));
    EXPECT_EQ(constant.width(), 64);
    EXPECT_EQ(constant.height(), 64);
    for (const auto v : constant.data()) {
        EXPECT_EQ(v, 90.0F);
    }
    IntensityImage striped(128, 128);
    for (int y = 0; y < 128; y += 2) {
        for (int x = 0; x < 128; ++x) {
            striped.at(x, y) = 1.0F;
        }
    }
    const auto kept = deinterlace(striped);
    for (const auto v : kept.data()) {
        EXPECT_EQ(v, 1.0F);
    }
    EXPECT_THROW(deinterlace(IntensityImage(128, 64)), WrongInputSize);
}

TEST(EqualizeHistogram, SingleValueHandMapsTo255)
{
    IntensityImage img(4, 4);
    img.at(1, 1) = img.at(2, 1) = img.at(2, 2) = 37.0F;
    const auto out = equalize_histogram(img);
    for (std::size_t i = 0; i < img.size(); ++i) {
        EXPECT_EQ(out[i], img[i] == 0.0F ? 0.0F : 255.0F);
    }
    EXPECT_EQ(equalize_histogram(IntensityImage(3, 3)), IntensityImage(3, 3));
}

TEST(EqualizeHistogram, UniformHistogramIsMonotoneOntoFullRange)
{
    IntensityImage img(16, 16);
    for (int i = 0; i < 255; ++i) {
        img[static_cast<std::size_t>(i)] = static_cast<float>(i + 1);  // every nonzero value once
    }
    const auto out = equalize_histogram(img);
    for (int i = 1; i < 255; ++i) {
        EXPECT_GE(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(i - 1)]);
        // Value v = i + 1 has cdf(v) = v, cdf_min = 1, N = 255.
        const double expected = std::max(1.0, std::round(255.0 * i / 254.0));
        EXPECT_EQ(out[static_cast<std::size_t>(i)], static_cast<float>(expected));
    }
    EXPECT_EQ(out[0], 1.0F);
    EXPECT_EQ(out[254], 255.0F);
}

TEST(EqualizeHistogram, NeverChangesTheZeroPattern)
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> v(0, 255);
    for (int trial = 0; trial < 200; ++trial) {
        IntensityImage img(13, 11);
        for (auto& p : img.data()) {
            p = static_cast<float>(v(rng) < 80 ? 0 : v(rng));
        }
        const auto out = equalize_histogram(img);
        for (std::size_t i = 0; i < img.size(); ++i) {
            EXPECT_EQ(out[i] == 0.0F, img[i] == 0.0F);
            EXPECT_LE(out[i], 255.0F);
        }
    }
}

TEST(NormalizeUnit, Examples)
{
    const auto out = normalize_unit(IntensityImage(3, 1, {255, 0, 51}));
    EXPECT_FLOAT_EQ(out[0], 1.0F);
    EXPECT_FLOAT_EQ(out[1], 0.0F);
    EXPECT_FLOAT_EQ(out[2], 0.2F);
    EXPECT_EQ(out.domain(), IntensityDomain::normalized);
    EXPECT_EQ(normalize_unit(out), out);
}
