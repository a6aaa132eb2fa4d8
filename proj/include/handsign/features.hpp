#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "handsign/error.hpp"
#include "handsign/image.hpp"
#include "handsign/imaging.hpp"

namespace handsign::features {

inline constexpr int kFrameSize = 128;
inline constexpr int kLayerSide = 32;
inline constexpr int kDefaultLayers = 6;
inline constexpr std::size_t kIntensityDim = 64 * 64;
inline constexpr std::size_t kLayerDim = kLayerSide * kLayerSide;

enum class FeatureKind { intensity, depth, combined, raw, gabor, bar };

inline std::string to_string(FeatureKind k)
{
    switch (k) {
    case FeatureKind::intensity: return "intensity";
    case FeatureKind::depth: return "depth";
    case FeatureKind::combined: return "combined";
    case FeatureKind::raw: return "raw";
    case FeatureKind::gabor: return "gabor";
    case FeatureKind::bar: return "bar";
    }
    return "unknown";
}

inline FeatureKind parse_kind(std::string_view s)
{
    for (const auto k : {FeatureKind::intensity, FeatureKind::depth, FeatureKind::combined,
                         FeatureKind::raw, FeatureKind::gabor, FeatureKind::bar}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw ConfigError("unknown feature kind '" + std::string(s) + "'");
}

struct FeatureVector {
    FeatureKind kind = FeatureKind::combined;
    std::vector<float> values;

    std::size_t size() const { return values.size(); }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Binary depth slices. Layer l (0-based here) holds hand pixels no deeper than
/// l * t / n + 1 millimeters behind the closest surface.
struct LayerStack {
    std::vector<BinaryImage> layers;

    int count() const { return static_cast<int>(layers.size()); }
};

struct GaborConfig {
    std::array<double, 4> wavelengths{4.0, 8.0, 12.0, 16.0};
    std::array<double, 4> orientations{0.0, std::numbers::pi / 4, std::numbers::pi / 2,
                                       3 * std::numbers::pi / 4};
    int kernel_size = 31;
    double sigma_per_wavelength = 0.56;
    double aspect = 0.5;
    int output_side = 28;
};

struct BarConfig {
    int kernel_size = 9;
    double sigma_across = 1.5;
    double sigma_along = 3.0;
    int output_side = 64;
};

struct FilterBankConfig {
    GaborConfig gabor;
    BarConfig bar;
};

struct PreprocessConfig {
    int hand_depth_mm = imaging::kDefaultHandDepthMm;
    int layers = kDefaultLayers;
    MaskAlignment alignment;
    FilterBankConfig filters;
};

/// Depth and intensity frames after background removal, masking, resizing to
/// 128x128 and bounding-box centering.
struct PreprocessedPair {
    DepthImage depth;
    IntensityImage intensity;
};

// ---------------------------------------------------------------------------
// Layered depth features

/// Membership is the integer form of depth <= (l - 1) * t / n + 1 (l 1-based),
/// restricted to nonzero pixels.
inline LayerStack depth_layers(const DepthImage& depth, int n, int t)
{
    if (n < 1 || t <= 0) {
        throw DataError("depth_layers needs n >= 1 and t > 0");
    }
    LayerStack stack;
    stack.layers.reserve(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
        BinaryImage layer(depth.width(), depth.height());
        const long bound = static_cast<long>(l) * t + n;
        for (std::size_t i = 0; i < depth.size(); ++i) {
            const long v = depth[i];
            layer[i] = (v > 0 && v * n <= bound) ? 1 : 0;
        }
        stack.layers.push_back(std::move(layer));
    }
    return stack;
}

/// Each layer is centered on its own bounding box, shrunk to 32x32 and
/// unrolled; blocks are concatenated in layer order.
inline FeatureVector depth_feature_vector(const LayerStack& stack)
{
    FeatureVector out{FeatureKind::depth, {}};
    out.values.reserve(stack.layers.size() * kLayerDim);
    for (const auto& layer : stack.layers) {
        const auto centered = imaging::bounding_box_center(layer, layer.width(), layer.height());
        const auto small = imaging::resize(centered, kLayerSide, kLayerSide, imaging::ResizeMode::nearest);
        for (const auto v : small.data()) {
            out.values.push_back(static_cast<float>(v));
        }
    }
    return out;
}

inline FeatureVector intensity_feature_vector(const IntensityImage& img)
{
    const auto unit = imaging::normalize_unit(imaging::equalize_histogram(imaging::deinterlace(img)));
    return FeatureVector{FeatureKind::intensity, unit.data()};
}

/// Intensity block first, then depth.
inline FeatureVector combined_features(const FeatureVector& fi, const FeatureVector& fd)
{
    if (fi.kind != FeatureKind::intensity || fd.kind != FeatureKind::depth || fi.size() != kIntensityDim ||
        fd.size() == 0 || fd.size() % kLayerDim != 0) {
        throw DimensionMismatch("combined features need a 4096 intensity block and a depth block of "
                                "whole 1024-element layers, got " +
                                std::to_string(fi.size()) + " and " + std::to_string(fd.size()));
    }
    FeatureVector out{FeatureKind::combined, fi.values};
    out.values.insert(out.values.end(), fd.values.begin(), fd.values.end());
    return out;
}

// ---------------------------------------------------------------------------
// Baselines

namespace detail {

inline std::vector<double> scaled_depth(const DepthImage& depth, int t)
{
    std::vector<double> out(depth.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::min(1.0, static_cast<double>(depth[i]) / t);
    }
    return out;
}

inline std::vector<double> scaled_intensity(const IntensityImage& img)
{
    const double scale = img.domain() == IntensityDomain::integer ? 255.0 : 1.0;
    std::vector<double> out(img.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(static_cast<double>(img[i]) / scale, 0.0, 1.0);
    }
    return out;
}

struct Kernel {
    int size = 0;
    std::vector<double> taps;

    double at(int x, int y) const
    {
        return taps[static_cast<std::size_t>(y) * static_cast<std::size_t>(size) + static_cast<std::size_t>(x)];
    }
};

inline void remove_mean(Kernel& k)
{
    double mean = 0.0;
    for (const auto v : k.taps) {
        mean += v;
    }
    mean /= static_cast<double>(k.taps.size());
    for (auto& v : k.taps) {
        v -= mean;
    }
}

// Clamp-to-edge correlation at one pixel. Both kernel families are point
// symmetric, so this equals convolution.
inline double filter_at(const std::vector<double>& img, int w, int h, const Kernel& k, int x, int y)
{
    const int r = k.size / 2;
    double acc = 0.0;
    for (int j = 0; j < k.size; ++j) {
        const int sy = std::clamp(y + j - r, 0, h - 1);
        const std::size_t row = static_cast<std::size_t>(sy) * static_cast<std::size_t>(w);
        for (int i = 0; i < k.size; ++i) {
            const int sx = std::clamp(x + i - r, 0, w - 1);
            acc += k.at(i, j) * img[row + static_cast<std::size_t>(sx)];
        }
    }
    return acc;
}

// |filter response| resampled bilinearly to side x side. Only the source
// pixels the bilinear taps touch are filtered.
inline std::vector<double> rectified_response(const std::vector<double>& img, int w, int h, const Kernel& k,
                                              int side)
{
    const double rx = static_cast<double>(w) / side;
    const double ry = static_cast<double>(h) / side;
    std::vector<double> cache(img.size(), -1.0);
    auto response = [&](int x, int y) {
        double& c = cache[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
        if (c < 0.0) {
            c = std::abs(filter_at(img, w, h, k, x, y));
        }
        return c;
    };
    std::vector<double> out(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (int y = 0; y < side; ++y) {
        const double fy = std::clamp((y + 0.5) * ry - 0.5, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, h - 1);
        const double ay = fy - y0;
        for (int x = 0; x < side; ++x) {
            const double fx = std::clamp((x + 0.5) * rx - 0.5, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, w - 1);
            const double ax = fx - x0;
            // Skip taps with zero weight so they are never filtered.
            auto tap = [&](int xx, int yy, double wgt) { return wgt == 0.0 ? 0.0 : wgt * response(xx, yy); };
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(side) + static_cast<std::size_t>(x)] =
                tap(x0, y0, (1 - ax) * (1 - ay)) + tap(x1, y0, ax * (1 - ay)) + tap(x0, y1, (1 - ax) * ay) +
                tap(x1, y1, ax * ay);
        }
    }
    return out;
}

// A map whose range is (numerically) zero scales to all zeros.
inline void min_max_append(const std::vector<double>& map, std::vector<float>& out)
{
    const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
    const double range = *hi - *lo;
    const bool flat = range <= 1e-9 * std::max(1.0, std::abs(*hi));
    for (const auto v : map) {
        out.push_back(flat ? 0.0F : static_cast<float>((v - *lo) / range));
    }
}

}  // namespace detail

inline detail::Kernel gabor_kernel(const GaborConfig& cfg, double wavelength, double theta)
{
    detail::Kernel k{cfg.kernel_size, std::vector<double>(static_cast<std::size_t>(cfg.kernel_size * cfg.kernel_size))};
    const int r = cfg.kernel_size / 2;
    const double sigma = cfg.sigma_per_wavelength * wavelength;
    for (int j = 0; j < cfg.kernel_size; ++j) {
        for (int i = 0; i < cfg.kernel_size; ++i) {
            const double x = i - r;
            const double y = j - r;
            const double xr = x * std::cos(theta) + y * std::sin(theta);
            const double yr = -x * std::sin(theta) + y * std::cos(theta);
            k.taps[static_cast<std::size_t>(j * cfg.kernel_size + i)] =
                std::exp(-(xr * xr + cfg.aspect * cfg.aspect * yr * yr) / (2 * sigma * sigma)) *
                std::cos(2 * std::numbers::pi * xr / wavelength);
        }
    }
    detail::remove_mean(k);
    return k;
}

/// Zero-sum second-derivative-of-Gaussian bar detector. `theta` is the bar
/// direction: 0 horizontal, pi/4 diagonal, pi/2 vertical.
inline detail::Kernel bar_kernel(const BarConfig& cfg, double theta)
{
    detail::Kernel k{cfg.kernel_size, std::vector<double>(static_cast<std::size_t>(cfg.kernel_size * cfg.kernel_size))};
    const int r = cfg.kernel_size / 2;
    const double sa = cfg.sigma_across;
    const double sl = cfg.sigma_along;
    for (int j = 0; j < cfg.kernel_size; ++j) {
        for (int i = 0; i < cfg.kernel_size; ++i) {
            const double x = i - r;
            const double y = j - r;
            const double along = x * std::cos(theta) + y * std::sin(theta);
            const double across = -x * std::sin(theta) + y * std::cos(theta);
            k.taps[static_cast<std::size_t>(j * cfg.kernel_size + i)] =
                (1.0 - across * across / (sa * sa)) * std::exp(-across * across / (2 * sa * sa)) *
                std::exp(-along * along / (2 * sl * sl));
        }
    }
    detail::remove_mean(k);
    return k;
}

inline std::array<double, 3> bar_orientations()
{
    return {0.0, std::numbers::pi / 4, std::numbers::pi / 2};
}

/// Gabor maps for one normalized image, ordered wavelength-major then
/// orientation, each min-max scaled.
inline std::vector<float> gabor_maps(const std::vector<double>& img, int w, int h, const GaborConfig& cfg)
{
    std::vector<float> out;
    const int side = cfg.output_side;
    out.reserve(16 * static_cast<std::size_t>(side * side));
    for (const double lambda : cfg.wavelengths) {
        for (const double theta : cfg.orientations) {
            const auto k = gabor_kernel(cfg, lambda, theta);
            detail::min_max_append(detail::rectified_response(img, w, h, k, side), out);
        }
    }
    return out;
}

inline std::vector<float> bar_maps(const std::vector<double>& img, int w, int h, const BarConfig& cfg)
{
    std::vector<float> out;
    for (const double theta : bar_orientations()) {
        const auto k = bar_kernel(cfg, theta);
        detail::min_max_append(detail::rectified_response(img, w, h, k, cfg.output_side), out);
    }
    return out;
}

/// Depth block (scaled by 1/t, clamped to 1) then intensity block (/255).
inline FeatureVector raw_features(const DepthImage& depth, const IntensityImage& intensity,
                                  int t = imaging::kDefaultHandDepthMm)
{
    if (!(depth.width() == intensity.width() && depth.height() == intensity.height())) {
        throw DimensionMismatch("raw features need equally sized depth and intensity frames");
    }
    FeatureVector out{FeatureKind::raw, {}};
    out.values.reserve(depth.size() * 2);
    for (const auto v : detail::scaled_depth(depth, t)) {
        out.values.push_back(static_cast<float>(v));
    }
    for (const auto v : detail::scaled_intensity(intensity)) {
        out.values.push_back(static_cast<float>(v));
    }
    return out;
}

inline FeatureVector gabor_features(const DepthImage& depth, const IntensityImage& intensity,
                                    const FilterBankConfig& cfg, int t = imaging::kDefaultHandDepthMm)
{
    FeatureVector out{FeatureKind::gabor, gabor_maps(detail::scaled_depth(depth, t), depth.width(), depth.height(), cfg.gabor)};
    const auto im = gabor_maps(detail::scaled_intensity(intensity), intensity.width(), intensity.height(), cfg.gabor);
    out.values.insert(out.values.end(), im.begin(), im.end());
    return out;
}

inline FeatureVector bar_features(const DepthImage& depth, const IntensityImage& intensity,
                                  const FilterBankConfig& cfg, int t = imaging::kDefaultHandDepthMm)
{
    FeatureVector out{FeatureKind::bar, bar_maps(detail::scaled_depth(depth, t), depth.width(), depth.height(), cfg.bar)};
    const auto im = bar_maps(detail::scaled_intensity(intensity), intensity.width(), intensity.height(), cfg.bar);
    out.values.insert(out.values.end(), im.begin(), im.end());
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

/// Background removal, depth renormalization, masking of the intensity frame,
/// resizing to 128x128 and centering. Depth is resized with nearest sampling
/// so no depth value is interpolated against the zero "no reading" marker.
/// The intensity frame is centered on the box of its (aligned) hand mask so
/// both frames move together.
inline PreprocessedPair preprocess(const DepthImage& depth, const IntensityImage& intensity,
                                   const PreprocessConfig& cfg)
{
    const int d = imaging::min_nonzero_depth(depth);
    const auto normalized = imaging::normalize_depth(imaging::remove_background(depth, cfg.hand_depth_mm, d), d);
    const auto mask = imaging::align_mask(imaging::make_mask(normalized), cfg.alignment, intensity.width(),
                                          intensity.height());
    const auto masked = imaging::apply_mask(intensity, mask);

    using imaging::ResizeMode;
    const auto depth_sq = imaging::resize(normalized, kFrameSize, kFrameSize, ResizeMode::nearest);
    const auto intensity_sq = imaging::resize(masked, kFrameSize, kFrameSize, ResizeMode::bilinear);
    const auto mask_sq = imaging::resize(mask, kFrameSize, kFrameSize, ResizeMode::nearest);

    PreprocessedPair out;
    out.depth = imaging::bounding_box_center(depth_sq, kFrameSize, kFrameSize);
    out.intensity = imaging::center_box(intensity_sq, imaging::bounding_box(mask_sq), kFrameSize, kFrameSize);
    return out;
}

inline std::size_t feature_dimension(FeatureKind kind, const PreprocessConfig& cfg)
{
    const std::size_t frame = static_cast<std::size_t>(kFrameSize) * kFrameSize;
    const auto gabor_side = static_cast<std::size_t>(cfg.filters.gabor.output_side);
    const auto bar_side = static_cast<std::size_t>(cfg.filters.bar.output_side);
    switch (kind) {
    case FeatureKind::intensity: return kIntensityDim;
    case FeatureKind::depth: return static_cast<std::size_t>(cfg.layers) * kLayerDim;
    case FeatureKind::combined: return kIntensityDim + static_cast<std::size_t>(cfg.layers) * kLayerDim;
    case FeatureKind::raw: return 2 * frame;
    case FeatureKind::gabor: return 2 * 16 * gabor_side * gabor_side;
    case FeatureKind::bar: return 2 * 3 * bar_side * bar_side;
    }
    return 0;
}

inline FeatureVector extract(FeatureKind kind, const PreprocessedPair& p, const PreprocessConfig& cfg)
{
    switch (kind) {
    case FeatureKind::intensity: return intensity_feature_vector(p.intensity);
    case FeatureKind::depth:
        return depth_feature_vector(depth_layers(p.depth, cfg.layers, cfg.hand_depth_mm));
    case FeatureKind::combined:
        return combined_features(intensity_feature_vector(p.intensity),
                                 depth_feature_vector(depth_layers(p.depth, cfg.layers, cfg.hand_depth_mm)));
    case FeatureKind::raw: return raw_features(p.depth, p.intensity, cfg.hand_depth_mm);
    case FeatureKind::gabor: return gabor_features(p.depth, p.intensity, cfg.filters, cfg.hand_depth_mm);
    case FeatureKind::bar: return bar_features(p.depth, p.intensity, cfg.filters, cfg.hand_depth_mm);
    }
    throw ConfigError("unhandled feature kind");
}

/// Full pipeline from a raw frame pair.
inline FeatureVector extract(FeatureKind kind, const DepthImage& depth, const IntensityImage& intensity,
                             const PreprocessConfig& cfg)
{
    return extract(kind, preprocess(depth, intensity, cfg), cfg);
}

}  // namespace handsign::features
