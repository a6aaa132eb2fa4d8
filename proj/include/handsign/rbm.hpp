#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "handsign/error.hpp"
#include "handsign/parallel.hpp"

namespace handsign {

using Rng = std::mt19937_64;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Samples as rows, single precision. Feature sets are large; training
/// promotes one mini-batch at a time to double.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Matrix sigmoid(const Matrix& x)
{
    return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

inline Matrix gather_rows(const FeatureMatrix& data, const std::vector<std::size_t>& rows, std::size_t begin,
                          std::size_t end)
{
    Matrix out(static_cast<Eigen::Index>(end - begin), data.cols());
    for (std::size_t r = begin; r < end; ++r) {
        out.row(static_cast<Eigen::Index>(r - begin)) =
            data.row(static_cast<Eigen::Index>(rows[r])).cast<double>();
    }
    return out;
}

inline Matrix row_block(const FeatureMatrix& data, Eigen::Index begin, Eigen::Index count)
{
    return data.middleRows(begin, count).cast<double>();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
    return m.allFinite();
}

struct Rbm {
    Matrix weights;       // n_visible x n_hidden
    Vector visible_bias;  // n_visible
    Vector hidden_bias;   // n_hidden

    Rbm() = default;
    Rbm(Eigen::Index n_visible, Eigen::Index n_hidden)
        : weights(Matrix::Zero(n_visible, n_hidden)), visible_bias(Vector::Zero(n_visible)),
          hidden_bias(Vector::Zero(n_hidden))
    {
    }

    Eigen::Index n_visible() const { return weights.rows(); }
    Eigen::Index n_hidden() const { return weights.cols(); }

    bool finite() const { return weights.allFinite() && visible_bias.allFinite() && hidden_bias.allFinite(); }

    friend bool operator==(const Rbm& a, const Rbm& b)
    {
        return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
               a.weights == b.weights && a.visible_bias == b.visible_bias && a.hidden_bias == b.hidden_bias;
    }
};

struct RbmTrainConfig {
    double learning_rate = 0.1;
    int epochs = 60;
    int batch_size = 100;
    double initial_momentum = 0.5;
    double momentum = 0.9;
    int momentum_switch_epoch = 5;
    double l1_coeff = 1e-5;
    double l2_coeff = 2e-4;
    double convergence_tol = 1e-4;
    int convergence_window = 5;
    double init_stddev = 0.01;
    // Start visible biases at log(p / (1 - p)) of each unit's mean over the
    // training data instead of 0.
    bool data_visible_bias = true;
    std::uint64_t rng_seed = 1;
    int workers = 1;

    void validate() const
    {
        if (!(learning_rate > 0.0) || batch_size < 1 || epochs < 0 || momentum < 0.0 || momentum >= 1.0 ||
            initial_momentum < 0.0 || initial_momentum >= 1.0 || l1_coeff < 0.0 || l2_coeff < 0.0 ||
            convergence_window < 1) {
            throw ConfigError("invalid RBM training configuration");
        }
    }

    double momentum_for_epoch(int epoch) const { return epoch < momentum_switch_epoch ? initial_momentum : momentum; }
};

/// Velocity buffers carried between CD-1 updates.
struct RbmMomentum {
    Matrix weights;
    Vector visible_bias;
    Vector hidden_bias;

    explicit RbmMomentum(const Rbm& rbm)
        : weights(Matrix::Zero(rbm.n_visible(), rbm.n_hidden())), visible_bias(Vector::Zero(rbm.n_visible())),
          hidden_bias(Vector::Zero(rbm.n_hidden()))
    {
    }
};

/// P(h = 1 | v) for each row of `v`.
inline Matrix hidden_probabilities(const Rbm& rbm, const Matrix& v)
{
    if (v.cols() != rbm.n_visible()) {
        throw DimensionMismatch("visible input has " + std::to_string(v.cols()) + " columns, RBM expects " +
                                std::to_string(rbm.n_visible()));
    }
    Matrix pre = v * rbm.weights;
    pre.rowwise() += rbm.hidden_bias.transpose();
    return sigmoid(pre);
}

/// P(v = 1 | h) for each row of `h`.
inline Matrix visible_probabilities(const Rbm& rbm, const Matrix& h)
{
    if (h.cols() != rbm.n_hidden()) {
        throw DimensionMismatch("hidden input has " + std::to_string(h.cols()) + " columns, RBM expects " +
                                std::to_string(rbm.n_hidden()));
    }
    Matrix pre = h * rbm.weights.transpose();
    pre.rowwise() += rbm.visible_bias.transpose();
    return sigmoid(pre);
}

inline Vector hidden_probabilities(const Rbm& rbm, const Vector& v)
{
    return hidden_probabilities(rbm, Matrix(v.transpose())).row(0).transpose();
}

inline Vector visible_probabilities(const Rbm& rbm, const Vector& h)
{
    return visible_probabilities(rbm, Matrix(h.transpose())).row(0).transpose();
}

/// Independent Bernoulli draws, consumed from `rng` in row-major order.
inline Matrix sample_bernoulli(const Matrix& p, Rng& rng)
{
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Matrix out(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            out(r, c) = uniform(rng) < p(r, c) ? 1.0 : 0.0;
        }
    }
    return out;
}

/// Positive-minus-negative CD-1 statistics, summed (not averaged) over rows.
struct Cd1Statistics {
    Matrix weights;
    Vector visible_bias;
    Vector hidden_bias;
    double squared_error = 0.0;
};

namespace detail {

inline Cd1Statistics cd1_statistics(const Rbm& rbm, const Matrix& v0, const Matrix& uniforms)
{
    const Matrix h0 = hidden_probabilities(rbm, v0);
    const Matrix h0_sample = (uniforms.array() < h0.array()).cast<double>().matrix();
    const Matrix v1 = visible_probabilities(rbm, h0_sample);
    const Matrix h1 = hidden_probabilities(rbm, v1);
    Cd1Statistics s;
    s.weights = v0.transpose() * h0 - v1.transpose() * h1;
    s.visible_bias = (v0 - v1).colwise().sum().transpose();
    s.hidden_bias = (h0 - h1).colwise().sum().transpose();
    s.squared_error = (v0 - v1).squaredNorm();
    return s;
}

}  // namespace detail

/// One CD-1 step on a mini-batch: sampled hidden states in the positive phase,
/// probabilities for the reconstruction and the negative hidden phase.
/// Weights get L2 and L1 decay; biases do not. Returns the batch's summed
/// squared reconstruction error (of the sampled-hidden reconstruction).
inline double cd1_batch_update(Rbm& rbm, const Matrix& batch, const RbmTrainConfig& cfg, double momentum,
                               RbmMomentum& velocity, Rng& rng)
{
    if (batch.cols() != rbm.n_visible()) {
        throw DimensionMismatch("batch has " + std::to_string(batch.cols()) + " columns, RBM expects " +
                                std::to_string(rbm.n_visible()));
    }
    const Eigen::Index rows = batch.rows();
    if (rows == 0) {
        return 0.0;
    }
    // All randomness is drawn up front so the result is independent of how
    // the rows are split across workers.
    Matrix uniforms(rows, rbm.n_hidden());
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < uniforms.cols(); ++c) {
            uniforms(r, c) = uniform(rng);
        }
    }

    const auto ranges = split_ranges(static_cast<std::size_t>(rows), cfg.workers);
    std::vector<Cd1Statistics> parts(ranges.size());
    parallel_for(ranges.size(), cfg.workers, [&](std::size_t i) {
        const auto begin = static_cast<Eigen::Index>(ranges[i].first);
        const auto count = static_cast<Eigen::Index>(ranges[i].second - ranges[i].first);
        parts[i] = detail::cd1_statistics(rbm, batch.middleRows(begin, count), uniforms.middleRows(begin, count));
    });
    Cd1Statistics total = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        total.weights += parts[i].weights;
        total.visible_bias += parts[i].visible_bias;
        total.hidden_bias += parts[i].hidden_bias;
        total.squared_error += parts[i].squared_error;
    }

    const double inv = 1.0 / static_cast<double>(rows);
    const Matrix sign = rbm.weights.unaryExpr([](double w) { return static_cast<double>((w > 0.0) - (w < 0.0)); });
    velocity.weights = momentum * velocity.weights +
                       cfg.learning_rate * (total.weights * inv - cfg.l2_coeff * rbm.weights - cfg.l1_coeff * sign);
    velocity.visible_bias = momentum * velocity.visible_bias + cfg.learning_rate * total.visible_bias * inv;
    velocity.hidden_bias = momentum * velocity.hidden_bias + cfg.learning_rate * total.hidden_bias * inv;
    rbm.weights += velocity.weights;
    rbm.visible_bias += velocity.visible_bias;
    rbm.hidden_bias += velocity.hidden_bias;
    if (!rbm.finite()) {
        throw NumericFailure("non-finite RBM parameters after CD-1 update");
    }
    return total.squared_error;
}

inline constexpr Eigen::Index kEvalBlock = 512;

/// Mean squared error between data and its deterministic one-step
/// reconstruction, over every row and element.
inline double reconstruction_error(const Rbm& rbm, const FeatureMatrix& data)
{
    if (data.rows() == 0) {
        return 0.0;
    }
    if (data.cols() != rbm.n_visible()) {
        throw DimensionMismatch("data width does not match RBM visible units");
    }
    double sum = 0.0;
    for (Eigen::Index begin = 0; begin < data.rows(); begin += kEvalBlock) {
        const Eigen::Index count = std::min(kEvalBlock, data.rows() - begin);
        const Matrix v0 = row_block(data, begin, count);
        const Matrix v1 = visible_probabilities(rbm, hidden_probabilities(rbm, v0));
        sum += (v0 - v1).squaredNorm();
    }
    return sum / (static_cast<double>(data.rows()) * static_cast<double>(data.cols()));
}

/// Hidden activation probabilities for every row, used as the next RBM's data.
inline FeatureMatrix transform(const Rbm& rbm, const FeatureMatrix& data)
{
    FeatureMatrix out(data.rows(), rbm.n_hidden());
    for (Eigen::Index begin = 0; begin < data.rows(); begin += kEvalBlock) {
        const Eigen::Index count = std::min(kEvalBlock, data.rows() - begin);
        out.middleRows(begin, count) = hidden_probabilities(rbm, row_block(data, begin, count)).cast<float>();
    }
    return out;
}

inline Rbm init_rbm(Eigen::Index n_visible, Eigen::Index n_hidden, double stddev, Rng& rng)
{
    Rbm rbm(n_visible, n_hidden);
    std::normal_distribution<double> normal(0.0, stddev);
    for (Eigen::Index r = 0; r < n_visible; ++r) {
        for (Eigen::Index c = 0; c < n_hidden; ++c) {
            rbm.weights(r, c) = normal(rng);
        }
    }
    return rbm;
}

/// logit of each column mean, with the mean clamped to [0.01, 0.99].
inline Vector data_visible_bias(const FeatureMatrix& data)
{
    Vector out(data.cols());
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        const double p = std::clamp(data.col(c).cast<double>().mean(), 0.01, 0.99);
        out(c) = std::log(p / (1.0 - p));
    }
    return out;
}

/// Called after each epoch with the 0-based epoch and the full-data
/// reconstruction error.
using EpochCallback = std::function<void(int epoch, double reconstruction_error)>;

/// Relative-improvement stop rule: true once each of the last `window`
/// epochs improved the error by less than `tol` (relative).
inline bool converged(const std::vector<double>& history, double tol, int window)
{
    const auto w = static_cast<std::size_t>(window);
    if (history.size() < w + 1) {
        return false;
    }
    for (std::size_t i = history.size() - w; i < history.size(); ++i) {
        const double prev = history[i - 1];
        const double rel = prev > 0.0 ? (prev - history[i]) / prev : 0.0;
        if (rel >= tol) {
            return false;
        }
    }
    return true;
}

/// Trains a binary RBM with CD-1 on the rows of `data` (values in [0,1]).
/// Rows are reshuffled every epoch from the seeded generator.
inline Rbm train_rbm(const FeatureMatrix& data, Eigen::Index n_hidden, const RbmTrainConfig& cfg,
                     const EpochCallback& on_epoch = {})
{
    cfg.validate();
    if (data.rows() == 0 || data.cols() == 0) {
        throw EmptyData("cannot train an RBM on empty data");
    }
    Rng rng(cfg.rng_seed);
    Rbm rbm = init_rbm(data.cols(), n_hidden, cfg.init_stddev, rng);
    if (cfg.data_visible_bias) {
        rbm.visible_bias = data_visible_bias(data);
    }
    RbmMomentum velocity(rbm);
    std::vector<std::size_t> order(static_cast<std::size_t>(data.rows()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> history;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double m = cfg.momentum_for_epoch(epoch);
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(order.size(), begin + batch);
            cd1_batch_update(rbm, gather_rows(data, order, begin, end), cfg, m, velocity, rng);
        }
        history.push_back(reconstruction_error(rbm, data));
        if (on_epoch) {
            on_epoch(epoch, history.back());
        }
        if (converged(history, cfg.convergence_tol, cfg.convergence_window)) {
            break;
        }
    }
    return rbm;
}

}  // namespace handsign
