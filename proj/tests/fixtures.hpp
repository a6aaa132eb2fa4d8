#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "handsign/image.hpp"
#include "handsign/rbm.hpp"

namespace handsign::testing {

struct Frame {
    DepthImage depth;
    IntensityImage intensity;
};

/// A random hand-like frame: an elliptical blob whose depth spans up to
/// `t` millimeters behind its closest point, a background at least 50 mm past
/// the t envelope, and scattered zero readings.
inline Frame random_frame(std::mt19937_64& rng, int w, int h, int t = 120)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int base = 500 + static_cast<int>(u(rng) * 2000);
    const double cx = w * (0.3 + 0.4 * u(rng));
    const double cy = h * (0.3 + 0.4 * u(rng));
    const double rx = w * (0.1 + 0.25 * u(rng));
    const double ry = h * (0.1 + 0.25 * u(rng));
    const double gx = (u(rng) - 0.5) * 2.0 * t / rx;
    const double gy = (u(rng) - 0.5) * 2.0 * t / ry;
    Frame f{DepthImage(w, h), IntensityImage(w, h)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double ex = (x - cx) / rx;
            const double ey = (y - cy) / ry;
            double d = 0.0;
            if (ex * ex + ey * ey <= 1.0) {
                d = base + std::clamp(t / 2.0 + gx * (x - cx) + gy * (y - cy) + 8.0 * u(rng), 0.0, t * 1.0);
            } else {
                d = base + t + 50 + 400 * u(rng);
            }
            if (u(rng) < 0.03) {
                d = 0.0;
            }
            f.depth.at(x, y) = static_cast<std::uint16_t>(d);
            f.intensity.at(x, y) = static_cast<float>(1 + static_cast<int>(u(rng) * 255));
        }
    }
    f.depth.at(static_cast<int>(cx), static_cast<int>(cy)) = static_cast<std::uint16_t>(base);
    return f;
}

/// 16 random binary templates over 64 units; each sample copies one template
/// and flips every bit with probability 0.05.
inline FeatureMatrix template_data(int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution bit(0.5);
    std::bernoulli_distribution flip(0.05);
    std::uniform_int_distribution<int> pick(0, 15);
    std::vector<std::array<bool, 64>> templates(16);
    for (auto& t : templates) {
        for (auto& b : t) {
            b = bit(rng);
        }
    }
    FeatureMatrix data(samples, 64);
    for (int r = 0; r < samples; ++r) {
        const auto& t = templates[static_cast<std::size_t>(pick(rng))];
        for (int c = 0; c < 64; ++c) {
            data(r, c) = (t[static_cast<std::size_t>(c)] != flip(rng)) ? 1.0F : 0.0F;
        }
    }
    return data;
}

}  // namespace handsign::testing
