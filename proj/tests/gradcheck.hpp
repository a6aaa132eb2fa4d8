#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "handsign/dbn.hpp"

namespace handsign::testing {

/// Small sigmoid stack with 24 softmax outputs and N(0, stddev) parameters.
inline Dbn toy_dbn(const std::vector<int>& sizes, std::uint64_t seed, double stddev = 0.5)
{
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, stddev);
    std::vector<Rbm> layers;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        Rbm r(sizes[k], sizes[k + 1]);
        r.weights = r.weights.unaryExpr([&](double) { return n(rng); });
        r.visible_bias = r.visible_bias.unaryExpr([&](double) { return n(rng); });
        r.hidden_bias = r.hidden_bias.unaryExpr([&](double) { return n(rng); });
        layers.push_back(std::move(r));
    }
    Dbn dbn = make_dbn(std::move(layers), sizes.back(), stddev, rng);
    dbn.translation_bias = dbn.translation_bias.unaryExpr([&](double) { return n(rng); });
    return dbn;
}

struct ToyBatch {
    Matrix x;
    Matrix y;
};

inline ToyBatch toy_batch(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, kNumClasses - 1);
    ToyBatch b{Matrix(rows, cols), Matrix::Zero(rows, kNumClasses)};
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            b.x(r, c) = u(rng);
        }
        b.y(r, cls(rng)) = 1.0;
    }
    return b;
}

/// Largest |analytic - numeric| / max(1, |analytic| + |numeric|) over every
/// trainable parameter, using central differences of the summed
/// cross-entropy. Frozen parameters are skipped when translation_only.
inline double max_gradient_error(const Dbn& dbn, const ToyBatch& batch, bool translation_only, double eps)
{
    const DbnGradient g = backprop(dbn, batch.x, batch.y, translation_only);
    double worst = 0.0;
    auto probe = [&](auto pick, double analytic) {
        Dbn plus = dbn;
        Dbn minus = dbn;
        pick(plus) += eps;
        pick(minus) -= eps;
        const double numeric =
            (cross_entropy_sum(plus, batch.x, batch.y) - cross_entropy_sum(minus, batch.x, batch.y)) / (2.0 * eps);
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic) + std::abs(numeric)));
    };
    for (Eigen::Index r = 0; r < dbn.translation.rows(); ++r) {
        for (Eigen::Index c = 0; c < dbn.translation.cols(); ++c) {
            probe([=](Dbn& d) -> double& { return d.translation(r, c); }, g.translation(r, c));
        }
    }
    for (Eigen::Index c = 0; c < dbn.translation_bias.size(); ++c) {
        probe([=](Dbn& d) -> double& { return d.translation_bias(c); }, g.translation_bias(c));
    }
    if (translation_only) {
        return worst;
    }
    for (std::size_t k = 0; k < dbn.layers.size(); ++k) {
        for (Eigen::Index r = 0; r < dbn.layers[k].weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < dbn.layers[k].weights.cols(); ++c) {
                probe([=](Dbn& d) -> double& { return d.layers[k].weights(r, c); }, g.weights[k](r, c));
            }
        }
        for (Eigen::Index c = 0; c < dbn.layers[k].hidden_bias.size(); ++c) {
            probe([=](Dbn& d) -> double& { return d.layers[k].hidden_bias(c); }, g.hidden_bias[k](c));
        }
    }
    return worst;
}

}  // namespace handsign::testing
