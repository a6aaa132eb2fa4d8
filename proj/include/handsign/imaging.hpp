#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "handsign/error.hpp"
#include "handsign/image.hpp"

// Pure image operations used by the preprocessing pipeline. Nothing here holds
// state; every function returns a new image.

namespace handsign::imaging {

/// Default maximum hand depth in millimeters.
inline constexpr int kDefaultHandDepthMm = 120;

enum class ResizeMode { bilinear, nearest };

namespace detail {

template <typename Img>
Img blank_like(const Img& img, int width, int height)
{
    if constexpr (std::is_same_v<Img, IntensityImage>) {
        return IntensityImage(width, height, 0.0F, img.domain());
    } else {
        return Img(width, height);
    }
}

template <typename T>
T round_to(double v)
{
    if constexpr (std::is_integral_v<T>) {
        const double lo = static_cast<double>(std::numeric_limits<T>::min());
        const double hi = static_cast<double>(std::numeric_limits<T>::max());
        return static_cast<T>(std::clamp(std::round(v), lo, hi));
    } else {
        return static_cast<T>(v);
    }
}

// Pixel-center convention: destination pixel x covers source coordinate
// (x + 0.5) * src/dst - 0.5.
template <typename T>
std::vector<T> resample(const std::vector<T>& src, int sw, int sh, int tw, int th, ResizeMode mode,
                        bool round_result)
{
    std::vector<T> out(static_cast<std::size_t>(tw) * static_cast<std::size_t>(th));
    if (sw == 0 || sh == 0) {
        return out;
    }
    const double rx = static_cast<double>(sw) / tw;
    const double ry = static_cast<double>(sh) / th;
    auto src_at = [&](int x, int y) {
        return static_cast<double>(
            src[static_cast<std::size_t>(y) * static_cast<std::size_t>(sw) + static_cast<std::size_t>(x)]);
    };
    for (int y = 0; y < th; ++y) {
        for (int x = 0; x < tw; ++x) {
            double v = 0.0;
            if (mode == ResizeMode::nearest) {
                const int sx = std::min(sw - 1, static_cast<int>(std::floor((x + 0.5) * rx)));
                const int sy = std::min(sh - 1, static_cast<int>(std::floor((y + 0.5) * ry)));
                v = src_at(sx, sy);
            } else {
                const double fx = std::clamp((x + 0.5) * rx - 0.5, 0.0, static_cast<double>(sw - 1));
                const double fy = std::clamp((y + 0.5) * ry - 0.5, 0.0, static_cast<double>(sh - 1));
                const int x0 = static_cast<int>(std::floor(fx));
                const int y0 = static_cast<int>(std::floor(fy));
                const int x1 = std::min(x0 + 1, sw - 1);
                const int y1 = std::min(y0 + 1, sh - 1);
                const double ax = fx - x0;
                const double ay = fy - y0;
                const double top = src_at(x0, y0) * (1.0 - ax) + src_at(x1, y0) * ax;
                const double bottom = src_at(x0, y1) * (1.0 - ax) + src_at(x1, y1) * ax;
                v = top * (1.0 - ay) + bottom * ay;
            }
            T& dst = out[static_cast<std::size_t>(y) * static_cast<std::size_t>(tw) + static_cast<std::size_t>(x)];
            if constexpr (std::is_integral_v<T>) {
                dst = round_to<T>(v);
            } else {
                dst = round_result ? static_cast<T>(std::round(v)) : static_cast<T>(v);
            }
        }
    }
    return out;
}

}  // namespace detail

/// Smallest nonzero depth, i.e. the distance of the closest hand surface.
inline int min_nonzero_depth(const DepthImage& img)
{
    int best = std::numeric_limits<int>::max();
    for (const auto v : img.data()) {
        if (v > 0 && v < best) {
            best = v;
        }
    }
    if (best == std::numeric_limits<int>::max()) {
        throw AllZeroImage();
    }
    return best;
}

/// Zeroes every pixel deeper than t + d.
inline DepthImage remove_background(const DepthImage& img, int t, int d)
{
    if (t <= 0) {
        throw DataError("maximum hand depth must be positive");
    }
    DepthImage out = img;
    const long limit = static_cast<long>(t) + d;
    for (auto& v : out.data()) {
        if (static_cast<long>(v) > limit) {
            v = 0;
        }
    }
    return out;
}

/// Shifts nonzero pixels by -(d - 1) so the closest surface reads 1.
inline DepthImage normalize_depth(const DepthImage& img, int d)
{
    DepthImage out = img;
    const int shift = d - 1;
    for (auto& v : out.data()) {
        if (v > 0) {
            v = static_cast<std::uint16_t>(static_cast<int>(v) - shift);
        }
    }
    return out;
}

template <typename T>
BinaryImage make_mask(const Grid<T>& img)
{
    BinaryImage mask(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i) {
        mask[i] = img[i] > T{} ? 1 : 0;
    }
    return mask;
}

/// Nearest-neighbor warp: output (x, y) reads the mask at
/// round(x * scale + offset) per axis, with halves rounding up. Samples
/// outside the mask read 0.
inline BinaryImage align_mask(const BinaryImage& mask, const MaskAlignment& a, int target_w, int target_h)
{
    if (!a.valid()) {
        throw DataError("mask alignment scales must be positive");
    }
    BinaryImage out(target_w, target_h);
    for (int y = 0; y < target_h; ++y) {
        const auto sy = static_cast<long>(std::floor(y * a.scale_y + a.offset_y + 0.5));
        if (sy < 0 || sy >= mask.height()) {
            continue;
        }
        for (int x = 0; x < target_w; ++x) {
            const auto sx = static_cast<long>(std::floor(x * a.scale_x + a.offset_x + 0.5));
            if (sx < 0 || sx >= mask.width()) {
                continue;
            }
            out.at(x, y) = mask.at(static_cast<int>(sx), static_cast<int>(sy));
        }
    }
    return out;
}

inline IntensityImage apply_mask(const IntensityImage& img, const BinaryImage& mask)
{
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw DimensionMismatch("mask " + std::to_string(mask.width()) + "x" +
                                std::to_string(mask.height()) + " does not match image " +
                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
    IntensityImage out = img;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = mask[i] != 0 ? img[i] : 0.0F;
    }
    return out;
}

/// Inclusive pixel bounds of the nonzero content.
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = -1;
    int y1 = -1;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

template <typename Img>
std::optional<BoundingBox> bounding_box(const Img& img)
{
    BoundingBox box{img.width(), img.height(), -1, -1};
    using V = typename Img::value_type;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.at(x, y) != V{}) {
                box.x0 = std::min(box.x0, x);
                box.y0 = std::min(box.y0, y);
                box.x1 = std::max(box.x1, x);
                box.y1 = std::max(box.y1, y);
            }
        }
    }
    if (box.x1 < 0) {
        return std::nullopt;
    }
    return box;
}

/// Copies `box` out of `img` and pastes it centered on a zero canvas. Odd
/// margins put the extra pixel on the right/bottom, so the crop's top-left
/// lands at ((target_w - box_w) / 2, (target_h - box_h) / 2) rounded down.
template <typename Img>
Img center_box(const Img& img, const std::optional<BoundingBox>& box, int target_w, int target_h)
{
    Img out = detail::blank_like(img, target_w, target_h);
    if (!box) {
        return out;
    }
    if (box->width() > target_w || box->height() > target_h) {
        throw ContentLargerThanTarget("content " + std::to_string(box->width()) + "x" +
                                      std::to_string(box->height()) + " exceeds target " +
                                      std::to_string(target_w) + "x" + std::to_string(target_h));
    }
    const int left = (target_w - box->width()) / 2;
    const int top = (target_h - box->height()) / 2;
    for (int y = box->y0; y <= box->y1; ++y) {
        for (int x = box->x0; x <= box->x1; ++x) {
            out.at(left + x - box->x0, top + y - box->y0) = img.at(x, y);
        }
    }
    return out;
}

template <typename Img>
Img bounding_box_center(const Img& img, int target_w, int target_h)
{
    return center_box(img, bounding_box(img), target_w, target_h);
}

template <typename T>
Grid<T> resize(const Grid<T>& img, int target_w, int target_h, ResizeMode mode)
{
    if (target_w <= 0 || target_h <= 0) {
        throw DataError("resize target must be positive");
    }
    return Grid<T>(target_w, target_h,
                   detail::resample(img.data(), img.width(), img.height(), target_w, target_h, mode, false));
}

/// Integer-domain images stay integral: interpolated values are rounded.
inline IntensityImage resize(const IntensityImage& img, int target_w, int target_h, ResizeMode mode)
{
    if (target_w <= 0 || target_h <= 0) {
        throw DataError("resize target must be positive");
    }
    const bool round_result = img.domain() == IntensityDomain::integer;
    return IntensityImage(target_w, target_h,
                          detail::resample(img.data(), img.width(), img.height(), target_w, target_h,
                                           mode, round_result),
                          img.domain());
}

/// Keeps the even rows of a 128x128 frame (128x64), then resizes to 64x64.
inline IntensityImage deinterlace(const IntensityImage& img)
{
    if (img.width() != 128 || img.height() != 128) {
        throw WrongInputSize("deinterlace expects 128x128, got " + std::to_string(img.width()) + "x" +
                             std::to_string(img.height()));
    }
    IntensityImage half(128, 64, 0.0F, img.domain());
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 128; ++x) {
            half.at(x, y) = img.at(x, 2 * y);
        }
    }
    return resize(half, 64, 64, ResizeMode::bilinear);
}

/// 256-bin equalization over the nonzero (hand) pixels only. Background stays
/// 0 and hand pixels map into [1, 255]: the lowest occupied bin would map to
/// 0 under the plain formula, so it is lifted to 1 to keep it in the hand.
inline IntensityImage equalize_histogram(const IntensityImage& img)
{
    std::array<long, 256> hist{};
    long hand = 0;
    auto bin_of = [](float v) { return std::clamp(static_cast<int>(std::lround(v)), 0, 255); };
    for (const auto v : img.data()) {
        if (v != 0.0F) {
            ++hist[static_cast<std::size_t>(bin_of(v))];
            ++hand;
        }
    }
    if (hand == 0) {
        return img;
    }
    std::array<long, 256> cdf{};
    long running = 0;
    long cdf_min = 0;
    for (std::size_t i = 0; i < 256; ++i) {
        running += hist[i];
        cdf[i] = running;
        if (cdf_min == 0 && running > 0) {
            cdf_min = running;
        }
    }
    std::array<float, 256> lut{};
    for (std::size_t i = 0; i < 256; ++i) {
        double mapped = 255.0;
        if (hand != cdf_min) {
            mapped = std::round(255.0 * static_cast<double>(cdf[i] - cdf_min) /
                                static_cast<double>(hand - cdf_min));
        }
        lut[i] = static_cast<float>(std::max(1.0, mapped));
    }
    IntensityImage out = img;
    for (auto& v : out.data()) {
        if (v != 0.0F) {
            v = lut[static_cast<std::size_t>(bin_of(v))];
        }
    }
    return out;
}

inline IntensityImage normalize_unit(const IntensityImage& img)
{
    IntensityImage out = img;
    if (img.domain() == IntensityDomain::normalized) {
        return out;
    }
    for (auto& v : out.data()) {
        v /= 255.0F;
    }
    out.set_domain(IntensityDomain::normalized);
    return out;
}

}  // namespace handsign::imaging
