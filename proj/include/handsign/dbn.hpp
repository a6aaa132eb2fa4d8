#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "handsign/error.hpp"
#include "handsign/letters.hpp"
#include "handsign/parallel.hpp"
#include "handsign/rbm.hpp"

namespace handsign {

/// Stacked RBMs used as a sigmoid feed-forward network, topped by a softmax
/// translation layer over the 24 letters.
struct Dbn {
    std::vector<Rbm> layers;
    Matrix translation;        // top hidden size x 24
    Vector translation_bias;   // 24
    std::vector<Letter> class_labels;

    Eigen::Index input_size() const { return layers.empty() ? translation.rows() : layers.front().n_visible(); }
    Eigen::Index top_size() const { return layers.empty() ? translation.rows() : layers.back().n_hidden(); }

    void validate() const
    {
        for (std::size_t k = 1; k < layers.size(); ++k) {
            if (layers[k - 1].n_hidden() != layers[k].n_visible()) {
                throw DimensionMismatch("layer " + std::to_string(k - 1) + " output size does not feed layer " +
                                        std::to_string(k));
            }
        }
        if (translation.cols() != kNumClasses || translation_bias.size() != kNumClasses ||
            class_labels.size() != static_cast<std::size_t>(kNumClasses)) {
            throw DimensionMismatch("translation layer must have exactly 24 outputs");
        }
        if (!layers.empty() && translation.rows() != layers.back().n_hidden()) {
            throw DimensionMismatch("translation layer input does not match the top RBM");
        }
    }

    bool finite() const
    {
        return std::all_of(layers.begin(), layers.end(), [](const Rbm& r) { return r.finite(); }) &&
               translation.allFinite() && translation_bias.allFinite();
    }

    friend bool operator==(const Dbn& a, const Dbn& b)
    {
        return a.layers == b.layers && a.translation.rows() == b.translation.rows() &&
               a.translation.cols() == b.translation.cols() && a.translation == b.translation &&
               a.translation_bias == b.translation_bias && a.class_labels == b.class_labels;
    }
};

struct Prediction {
    std::array<double, kNumClasses> scores{};
    Letter label;
};

/// Row-wise softmax, shifted by the row maximum.
inline Matrix softmax(const Matrix& logits)
{
    Matrix out = logits;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double m = out.row(r).maxCoeff();
        out.row(r) = (out.row(r).array() - m).exp().matrix();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

/// Lowest index wins ties.
inline int argmax(const Eigen::Ref<const RowVector>& row)
{
    int best = 0;
    for (int c = 1; c < row.size(); ++c) {
        if (row(c) > row(best)) {
            best = c;
        }
    }
    return best;
}

inline Dbn make_dbn(std::vector<Rbm> layers, Eigen::Index top_size, double init_stddev, Rng& rng)
{
    Dbn dbn;
    dbn.layers = std::move(layers);
    if (!dbn.layers.empty()) {
        top_size = dbn.layers.back().n_hidden();
    }
    dbn.translation = Matrix::Zero(top_size, kNumClasses);
    std::normal_distribution<double> normal(0.0, init_stddev);
    for (Eigen::Index r = 0; r < dbn.translation.rows(); ++r) {
        for (Eigen::Index c = 0; c < kNumClasses; ++c) {
            dbn.translation(r, c) = normal(rng);
        }
    }
    dbn.translation_bias = Vector::Zero(kNumClasses);
    const auto letters = all_letters();
    dbn.class_labels.assign(letters.begin(), letters.end());
    dbn.validate();
    return dbn;
}

/// Activations of every layer, input included: acts[0] = x, acts.back() = top.
inline std::vector<Matrix> layer_activations(const Dbn& dbn, const Matrix& x)
{
    if (x.cols() != dbn.input_size()) {
        throw DimensionMismatch("input has " + std::to_string(x.cols()) + " features, network expects " +
                                std::to_string(dbn.input_size()));
    }
    std::vector<Matrix> acts;
    acts.reserve(dbn.layers.size() + 1);
    acts.push_back(x);
    for (const auto& rbm : dbn.layers) {
        acts.push_back(hidden_probabilities(rbm, acts.back()));
    }
    return acts;
}

inline Matrix logits(const Dbn& dbn, const Matrix& top)
{
    Matrix z = top * dbn.translation;
    z.rowwise() += dbn.translation_bias.transpose();
    return z;
}

/// Class probabilities for every row of `x`.
inline Matrix predict_proba(const Dbn& dbn, const Matrix& x)
{
    return softmax(logits(dbn, layer_activations(dbn, x).back()));
}

inline Matrix predict_proba(const Dbn& dbn, const FeatureMatrix& data)
{
    Matrix out(data.rows(), kNumClasses);
    for (Eigen::Index begin = 0; begin < data.rows(); begin += kEvalBlock) {
        const Eigen::Index count = std::min(kEvalBlock, data.rows() - begin);
        out.middleRows(begin, count) = predict_proba(dbn, row_block(data, begin, count));
    }
    return out;
}

inline Prediction to_prediction(const Eigen::Ref<const RowVector>& probs)
{
    Prediction p;
    for (int c = 0; c < kNumClasses; ++c) {
        p.scores[static_cast<std::size_t>(c)] = probs(c);
    }
    p.label = Letter::from_index(argmax(probs));
    return p;
}

inline Prediction forward(const Dbn& dbn, const std::vector<float>& x)
{
    Matrix row(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        row(0, static_cast<Eigen::Index>(i)) = x[i];
    }
    return to_prediction(predict_proba(dbn, row).row(0));
}

inline std::vector<Letter> predict_labels(const Dbn& dbn, const FeatureMatrix& data)
{
    const Matrix p = predict_proba(dbn, data);
    std::vector<Letter> out;
    out.reserve(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        out.push_back(Letter::from_index(argmax(p.row(r))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Greedy pretraining

using PretrainCallback = std::function<void(std::size_t layer, int epoch, double reconstruction_error)>;

/// Trains RBM k on the hidden probabilities of RBM k-1 (the data for k = 0).
inline std::vector<Rbm> pretrain(const FeatureMatrix& features, const std::vector<int>& layer_sizes,
                                 const std::vector<RbmTrainConfig>& configs, const PretrainCallback& on_epoch = {})
{
    if (features.rows() == 0) {
        throw EmptyData("no pretraining data");
    }
    if (configs.size() != layer_sizes.size()) {
        throw ConfigError("need one RBM configuration per layer");
    }
    std::vector<Rbm> out;
    FeatureMatrix current = features;
    for (std::size_t k = 0; k < layer_sizes.size(); ++k) {
        EpochCallback cb;
        if (on_epoch) {
            cb = [&, k](int epoch, double err) { on_epoch(k, epoch, err); };
        }
        out.push_back(train_rbm(current, layer_sizes[k], configs[k], cb));
        if (k + 1 < layer_sizes.size()) {
            current = transform(out.back(), current);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Supervised stages

struct SupervisedStageConfig {
    double learning_rate = 0.1;
    int epochs = 200;
    int batch_size = 50;
    double l2_coeff = 1e-4;
    double momentum = 0.9;
    double input_noise_sigma = 0.0;
    int early_stopping_patience = 10;
};

struct SupervisedTrainConfig {
    SupervisedStageConfig stage2{0.1, 200, 50, 1e-4, 0.9, 0.1, 10};
    SupervisedStageConfig stage3{0.01, 50, 50, 5e-5, 0.9, 0.0, 10};
    std::uint64_t rng_seed = 1;
    int workers = 1;

    void validate() const
    {
        for (const auto* s : {&stage2, &stage3}) {
            if (s->learning_rate < 0.0 || s->epochs < 0 || s->batch_size < 1 || s->l2_coeff < 0.0 ||
                s->momentum < 0.0 || s->momentum >= 1.0 || s->input_noise_sigma < 0.0 ||
                s->early_stopping_patience < 1) {
                throw ConfigError("invalid supervised training configuration");
            }
        }
        if (!(stage3.learning_rate < stage2.learning_rate)) {
            throw ConfigError("fine-tuning learning rate must be below the translation-layer rate");
        }
    }
};

struct LabeledSet {
    FeatureMatrix features;
    std::vector<Letter> labels;

    std::size_t size() const { return labels.size(); }
};

/// Gradient of the summed cross-entropy over a batch. Entries for frozen
/// layers stay empty when only the translation layer is requested.
struct DbnGradient {
    std::vector<Matrix> weights;
    std::vector<Vector> hidden_bias;
    Matrix translation;
    Vector translation_bias;
    double loss = 0.0;

    DbnGradient& operator+=(const DbnGradient& o)
    {
        for (std::size_t k = 0; k < weights.size(); ++k) {
            weights[k] += o.weights[k];
            hidden_bias[k] += o.hidden_bias[k];
        }
        translation += o.translation;
        translation_bias += o.translation_bias;
        loss += o.loss;
        return *this;
    }
};

inline Matrix one_hot(const std::vector<Letter>& labels, std::size_t begin, std::size_t end)
{
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(end - begin), kNumClasses);
    for (std::size_t i = begin; i < end; ++i) {
        y(static_cast<Eigen::Index>(i - begin), labels[i].index()) = 1.0;
    }
    return y;
}

/// Summed cross-entropy of the rows of `x` against one-hot targets `y`.
inline double cross_entropy_sum(const Dbn& dbn, const Matrix& x, const Matrix& y)
{
    const Matrix z = logits(dbn, layer_activations(dbn, x).back());
    double loss = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        const double lse = m + std::log((z.row(r).array() - m).exp().sum());
        loss += lse - z.row(r).dot(y.row(r));
    }
    return loss;
}

/// Backpropagation through the sigmoid stack. dL/dlogits = softmax - onehot.
inline DbnGradient backprop(const Dbn& dbn, const Matrix& x, const Matrix& y, bool translation_only)
{
    const auto acts = layer_activations(dbn, x);
    const Matrix& top = acts.back();
    const Matrix z = logits(dbn, top);
    const Matrix p = softmax(z);

    DbnGradient g;
    g.loss = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        g.loss += m + std::log((z.row(r).array() - m).exp().sum()) - z.row(r).dot(y.row(r));
    }
    Matrix delta = p - y;
    g.translation = top.transpose() * delta;
    g.translation_bias = delta.colwise().sum().transpose();
    if (translation_only) {
        return g;
    }
    const std::size_t n = dbn.layers.size();
    g.weights.resize(n);
    g.hidden_bias.resize(n);
    Matrix back = delta * dbn.translation.transpose();
    for (std::size_t k = n; k-- > 0;) {
        const Matrix& a = acts[k + 1];
        const Matrix local = (back.array() * a.array() * (1.0 - a.array())).matrix();
        g.weights[k] = acts[k].transpose() * local;
        g.hidden_bias[k] = local.colwise().sum().transpose();
        if (k > 0) {
            back = local * dbn.layers[k].weights.transpose();
        }
    }
    return g;
}

/// Mean cross-entropy over a labeled set, evaluated in blocks.
inline double mean_cross_entropy(const Dbn& dbn, const LabeledSet& set)
{
    if (set.size() == 0) {
        return 0.0;
    }
    double sum = 0.0;
    const auto rows = static_cast<Eigen::Index>(set.size());
    for (Eigen::Index begin = 0; begin < rows; begin += kEvalBlock) {
        const Eigen::Index count = std::min(kEvalBlock, rows - begin);
        sum += cross_entropy_sum(dbn, row_block(set.features, begin, count),
                                 one_hot(set.labels, static_cast<std::size_t>(begin),
                                         static_cast<std::size_t>(begin + count)));
    }
    return sum / static_cast<double>(set.size());
}

struct SupervisedEpoch {
    int epoch = 0;
    double train_loss = 0.0;
    double valid_loss = 0.0;
};

using SupervisedCallback = std::function<void(const SupervisedEpoch&)>;

namespace detail {

inline void check_labels(const LabeledSet& set, const char* what)
{
    if (static_cast<std::size_t>(set.features.rows()) != set.labels.size()) {
        throw LengthMismatch(std::string(what) + ": feature rows and labels differ in count");
    }
    for (const auto& l : set.labels) {
        if (l.index() < 0 || l.index() >= kNumClasses) {
            throw LabelOutOfRange(std::string(what) + ": label outside the 24-letter set");
        }
    }
}

struct Velocity {
    std::vector<Matrix> weights;
    std::vector<Vector> hidden_bias;
    Matrix translation;
    Vector translation_bias;

    Velocity(const Dbn& dbn, bool translation_only)
        : translation(Matrix::Zero(dbn.translation.rows(), dbn.translation.cols())),
          translation_bias(Vector::Zero(dbn.translation_bias.size()))
    {
        if (!translation_only) {
            for (const auto& l : dbn.layers) {
                weights.push_back(Matrix::Zero(l.n_visible(), l.n_hidden()));
                hidden_bias.push_back(Vector::Zero(l.n_hidden()));
            }
        }
    }
};

inline DbnGradient batch_gradient(const Dbn& dbn, const Matrix& x, const Matrix& y, bool translation_only,
                                  int workers)
{
    const auto ranges = split_ranges(static_cast<std::size_t>(x.rows()), workers);
    std::vector<DbnGradient> parts(ranges.size());
    parallel_for(ranges.size(), workers, [&](std::size_t i) {
        const auto begin = static_cast<Eigen::Index>(ranges[i].first);
        const auto count = static_cast<Eigen::Index>(ranges[i].second - ranges[i].first);
        parts[i] = backprop(dbn, x.middleRows(begin, count), y.middleRows(begin, count), translation_only);
    });
    DbnGradient total = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) {
        total += parts[i];
    }
    return total;
}

}  // namespace detail

/// Mini-batch gradient descent with momentum and L2 decay on weights, early
/// stopping on validation cross-entropy. The starting model counts as the
/// first checkpoint, so the result never validates worse than the input.
inline Dbn train_supervised(const Dbn& start, const LabeledSet& train, const LabeledSet& valid,
                            const SupervisedStageConfig& cfg, bool translation_only, Rng& rng, int workers,
                            const SupervisedCallback& on_epoch = {})
{
    if (train.size() == 0) {
        throw EmptyData("no training samples");
    }
    detail::check_labels(train, "training set");
    detail::check_labels(valid, "validation set");
    start.validate();

    Dbn model = start;
    Dbn best = start;
    const bool use_valid = valid.size() > 0;
    double best_loss = use_valid ? mean_cross_entropy(start, valid) : 0.0;
    int since_best = 0;
    detail::Velocity vel(model, translation_only);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::normal_distribution<double> noise(0.0, cfg.input_noise_sigma > 0.0 ? cfg.input_noise_sigma : 1.0);
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double train_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += batch) {
            const std::size_t end = std::min(order.size(), begin + batch);
            Matrix x = gather_rows(train.features, order, begin, end);
            Matrix y = Matrix::Zero(x.rows(), kNumClasses);
            for (std::size_t i = begin; i < end; ++i) {
                y(static_cast<Eigen::Index>(i - begin), train.labels[order[i]].index()) = 1.0;
            }
            if (cfg.input_noise_sigma > 0.0) {
                for (Eigen::Index r = 0; r < x.rows(); ++r) {
                    for (Eigen::Index c = 0; c < x.cols(); ++c) {
                        x(r, c) = std::clamp(x(r, c) + noise(rng), 0.0, 1.0);
                    }
                }
            }
            const DbnGradient g = detail::batch_gradient(model, x, y, translation_only, workers);
            train_loss += g.loss;
            const double inv = 1.0 / static_cast<double>(x.rows());
            const double lr = cfg.learning_rate;
            vel.translation = cfg.momentum * vel.translation -
                              lr * (g.translation * inv + cfg.l2_coeff * model.translation);
            vel.translation_bias = cfg.momentum * vel.translation_bias - lr * g.translation_bias * inv;
            model.translation += vel.translation;
            model.translation_bias += vel.translation_bias;
            if (!translation_only) {
                for (std::size_t k = 0; k < model.layers.size(); ++k) {
                    auto& layer = model.layers[k];
                    vel.weights[k] = cfg.momentum * vel.weights[k] -
                                     lr * (g.weights[k] * inv + cfg.l2_coeff * layer.weights);
                    vel.hidden_bias[k] = cfg.momentum * vel.hidden_bias[k] - lr * g.hidden_bias[k] * inv;
                    layer.weights += vel.weights[k];
                    layer.hidden_bias += vel.hidden_bias[k];
                }
            }
        }
        if (!model.finite()) {
            throw NumericFailure("non-finite network parameters in supervised training");
        }
        SupervisedEpoch rec{epoch, train_loss / static_cast<double>(train.size()), 0.0};
        if (use_valid) {
            rec.valid_loss = mean_cross_entropy(model, valid);
            if (!std::isfinite(rec.valid_loss)) {
                throw NumericFailure("non-finite validation loss");
            }
        }
        if (on_epoch) {
            on_epoch(rec);
        }
        if (!use_valid) {
            best = model;
            continue;
        }
        if (rec.valid_loss < best_loss) {
            best_loss = rec.valid_loss;
            best = model;
            since_best = 0;
        } else if (++since_best >= cfg.early_stopping_patience) {
            break;
        }
    }
    return best;
}

/// Second stage: only the translation layer learns; inputs get fresh
/// Gaussian noise on every presentation.
inline Dbn train_translation_layer(const Dbn& dbn, const LabeledSet& train, const LabeledSet& valid,
                                   const SupervisedTrainConfig& cfg, const SupervisedCallback& on_epoch = {})
{
    cfg.validate();
    Rng rng(cfg.rng_seed);
    return train_supervised(dbn, train, valid, cfg.stage2, true, rng, cfg.workers, on_epoch);
}

/// Third stage: every weight and hidden bias learns, at the lower rate.
inline Dbn fine_tune(const Dbn& dbn, const LabeledSet& train, const LabeledSet& valid,
                     const SupervisedTrainConfig& cfg, const SupervisedCallback& on_epoch = {})
{
    cfg.validate();
    Rng rng(cfg.rng_seed + 1);
    return train_supervised(dbn, train, valid, cfg.stage3, false, rng, cfg.workers, on_epoch);
}

// ---------------------------------------------------------------------------
// Model file
//
//   "HSDBN1"
//   u64 little-endian header length, then that many bytes of UTF-8 JSON:
//     {"layers":[{"visible":V,"hidden":H},...],"classes":["A",...],
//      "translation":{"rows":R,"cols":24}}
//   tensors as little-endian float64, row-major, in this order:
//     per RBM: weights (V x H), visible_bias (V), hidden_bias (H)
//     translation weights (R x 24), translation bias (24)

inline constexpr std::string_view kModelMagic = "HSDBN1";

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline bool get_u64(std::istream& in, std::uint64_t& v)
{
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (in.gcount() != 8) {
        return false;
    }
    v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return true;
}

inline void put_f64(std::ostream& out, double d)
{
    put_u64(out, std::bit_cast<std::uint64_t>(d));
}

template <typename Derived>
void put_tensor(std::ostream& out, const Eigen::MatrixBase<Derived>& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_f64(out, m(r, c));
        }
    }
}

template <typename Derived>
void get_tensor(std::istream& in, Eigen::MatrixBase<Derived>& m, const std::string& name)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::uint64_t bits = 0;
            if (!get_u64(in, bits)) {
                throw FormatError("model file truncated in tensor '" + name + "'");
            }
            m(r, c) = std::bit_cast<double>(bits);
        }
    }
}

}  // namespace detail

inline void write_model(std::ostream& out, const Dbn& dbn)
{
    dbn.validate();
    nlohmann::json header;
    header["layers"] = nlohmann::json::array();
    for (const auto& l : dbn.layers) {
        header["layers"].push_back({{"visible", l.n_visible()}, {"hidden", l.n_hidden()}});
    }
    header["classes"] = nlohmann::json::array();
    for (const auto& c : dbn.class_labels) {
        header["classes"].push_back(c.str());
    }
    header["translation"] = {{"rows", dbn.translation.rows()}, {"cols", dbn.translation.cols()}};
    const std::string text = header.dump();

    out.write(kModelMagic.data(), static_cast<std::streamsize>(kModelMagic.size()));
    detail::put_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& l : dbn.layers) {
        detail::put_tensor(out, l.weights);
        detail::put_tensor(out, l.visible_bias);
        detail::put_tensor(out, l.hidden_bias);
    }
    detail::put_tensor(out, dbn.translation);
    detail::put_tensor(out, dbn.translation_bias);
}

inline Dbn read_model(std::istream& in)
{
    std::string magic(kModelMagic.size(), '\0');
    in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kModelMagic) {
        throw FormatError("bad model magic; expected HSDBN1");
    }
    std::uint64_t len = 0;
    if (!detail::get_u64(in, len) || len > (1U << 24)) {
        throw FormatError("bad model header length");
    }
    std::string text(static_cast<std::size_t>(len), '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::uint64_t>(in.gcount()) != len) {
        throw FormatError("model header truncated");
    }
    Dbn dbn;
    try {
        const auto header = nlohmann::json::parse(text);
        for (const auto& l : header.at("layers")) {
            const auto v = l.at("visible").get<Eigen::Index>();
            const auto h = l.at("hidden").get<Eigen::Index>();
            if (v <= 0 || h <= 0) {
                throw FormatError("non-positive layer size in model header");
            }
            dbn.layers.emplace_back(v, h);
        }
        for (const auto& c : header.at("classes")) {
            dbn.class_labels.push_back(Letter::parse(c.get<std::string>()));
        }
        const auto rows = header.at("translation").at("rows").get<Eigen::Index>();
        const auto cols = header.at("translation").at("cols").get<Eigen::Index>();
        if (rows <= 0 || cols != kNumClasses) {
            throw FormatError("bad translation layer shape in model header");
        }
        dbn.translation = Matrix::Zero(rows, cols);
        dbn.translation_bias = Vector::Zero(cols);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model header: ") + e.what());
    } catch (const UnknownLetter& e) {
        throw FormatError(std::string("malformed model header: ") + e.what());
    }
    try {
        dbn.validate();
    } catch (const DimensionMismatch& e) {
        throw FormatError(std::string("inconsistent model header: ") + e.what());
    }
    for (std::size_t k = 0; k < dbn.layers.size(); ++k) {
        const std::string prefix = "rbm[" + std::to_string(k) + "].";
        detail::get_tensor(in, dbn.layers[k].weights, prefix + "weights");
        detail::get_tensor(in, dbn.layers[k].visible_bias, prefix + "visible_bias");
        detail::get_tensor(in, dbn.layers[k].hidden_bias, prefix + "hidden_bias");
    }
    detail::get_tensor(in, dbn.translation, "translation.weights");
    detail::get_tensor(in, dbn.translation_bias, "translation.bias");
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after model tensors");
    }
    return dbn;
}

inline void save_model(const Dbn& dbn, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write model " + path);
    }
    write_model(out, dbn);
    if (!out) {
        throw IoError("write failed for model " + path);
    }
}

inline Dbn load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model " + path);
    }
    return read_model(in);
}

}  // namespace handsign
