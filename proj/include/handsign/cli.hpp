#pragma once

#include <algorithm>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "handsign/config.hpp"
#include "handsign/dataset.hpp"
#include "handsign/dbn.hpp"
#include "handsign/error.hpp"
#include "handsign/eval.hpp"
#include "handsign/feature_file.hpp"
#include "handsign/features.hpp"
#include "handsign/parallel.hpp"
#include "handsign/pgm.hpp"

// Command-line driver. Subcommands compose as
//   gen-synthetic -> extract -> train -> eval
// with predict for single frame pairs and compare for side-by-side reports.

namespace handsign::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kNumericFailure = 4 };

inline constexpr const char* kFeatureFile = "features.bin";
inline constexpr const char* kLabelFile = "labels.csv";
inline constexpr const char* kEffectiveConfig = "effective_config.json";

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> feature_kind;
    std::optional<std::string> split;
    std::optional<std::string> test_user;
    std::optional<std::string> manifest;
    std::optional<std::string> out;
    std::optional<std::string> model;
    std::optional<std::string> features;
};

inline RunConfig effective_config(const Overrides& o)
{
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.seed) {
        c.rng_seed = *o.seed;
    }
    if (o.workers) {
        c.workers = *o.workers;
    }
    if (o.feature_kind) {
        c.feature_kind = features::parse_kind(*o.feature_kind);
    }
    if (o.split) {
        c.split.mode = parse_split_mode(*o.split);
    }
    if (o.test_user) {
        c.split.test_user = *o.test_user;
    }
    if (o.manifest) {
        c.paths.manifest = *o.manifest;
    }
    if (o.out) {
        c.paths.output_dir = *o.out;
    }
    if (o.model) {
        c.paths.model = *o.model;
    }
    if (o.features) {
        c.paths.features = *o.features;
    }
    c.validate();
    return c;
}

inline void echo_config(const RunConfig& c)
{
    fs::create_directories(c.paths.output_dir);
    save_config((fs::path(c.paths.output_dir) / kEffectiveConfig).string(), c);
}

inline std::string model_path(const RunConfig& c)
{
    return c.paths.model.empty() ? (fs::path(c.paths.output_dir) / "model.hsdbn").string() : c.paths.model;
}

/// model.hsdbn -> model_<user>.hsdbn for per-hold-out models.
inline std::string holdout_model_path(const std::string& base, const std::string& user)
{
    const fs::path p(base);
    return (p.parent_path() / (p.stem().string() + "_" + user + p.extension().string())).string();
}

inline std::string features_dir(const RunConfig& c)
{
    return c.paths.features.empty() ? c.paths.output_dir : c.paths.features;
}

// ---------------------------------------------------------------------------

inline int cmd_gen_synthetic(const RunConfig& c, int users, int per_class, std::ostream& out)
{
    const auto samples = dataset::gen_synthetic(users, per_class, c.rng_seed);
    const auto manifest = dataset::write_dataset(samples, c.paths.output_dir);
    echo_config(c);
    out << "wrote " << samples.size() << " sample pairs and " << manifest << '\n';
    for (const auto& [user, counts] : dataset::count_table(samples)) {
        out << user << ": " << std::accumulate(counts.begin(), counts.end(), 0) << " samples\n";
    }
    return kOk;
}

inline feature_file::FeatureSet extract_all(const std::vector<dataset::Sample>& samples, const RunConfig& c)
{
    const std::size_t dim = features::feature_dimension(c.feature_kind, c.preprocess);
    feature_file::FeatureSet set{c.feature_kind, FeatureMatrix(static_cast<Eigen::Index>(samples.size()),
                                                               static_cast<Eigen::Index>(dim))};
    std::vector<std::exception_ptr> errors(samples.size());
    parallel_for(samples.size(), c.workers, [&](std::size_t i) {
        try {
            const auto fv = features::extract(c.feature_kind, samples[i].depth, samples[i].intensity, c.preprocess);
            if (fv.size() != dim) {
                throw DimensionMismatch("feature length " + std::to_string(fv.size()) + " != " + std::to_string(dim));
            }
            for (std::size_t k = 0; k < dim; ++k) {
                set.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = fv.values[k];
            }
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) {
            continue;
        }
        const std::string where = "manifest row " + std::to_string(i + 1) + " (" + samples[i].user_id + ", " +
                                  samples[i].letter.str() + "): ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const AllZeroImage& e) {
            throw AllZeroImage(where + e.what());
        } catch (const std::exception& e) {
            throw DataError(where + e.what());
        }
    }
    return set;
}

inline int cmd_extract(const RunConfig& c, std::ostream& out)
{
    if (c.paths.manifest.empty()) {
        throw ConfigError("extract needs --manifest");
    }
    const auto samples = dataset::load_dataset(c.paths.manifest);
    const auto set = extract_all(samples, c);
    fs::create_directories(c.paths.output_dir);
    feature_file::save((fs::path(c.paths.output_dir) / kFeatureFile).string(), set);
    std::vector<dataset::SampleLabel> labels;
    for (const auto& s : samples) {
        labels.push_back({s.user_id, s.letter});
    }
    feature_file::save_labels((fs::path(c.paths.output_dir) / kLabelFile).string(), labels);
    echo_config(c);
    out << "extracted " << set.values.rows() << " x " << set.values.cols() << ' ' << features::to_string(set.kind)
        << " features into " << c.paths.output_dir << '\n';
    return kOk;
}

struct LoadedFeatures {
    feature_file::FeatureSet set;
    std::vector<dataset::SampleLabel> labels;
};

inline LoadedFeatures load_features(const std::string& dir)
{
    LoadedFeatures f{feature_file::load((fs::path(dir) / kFeatureFile).string()),
                     feature_file::load_labels((fs::path(dir) / kLabelFile).string())};
    if (static_cast<std::size_t>(f.set.values.rows()) != f.labels.size()) {
        throw FormatError(dir + ": feature rows and labels differ in count");
    }
    return f;
}

inline LabeledSet subset(const LoadedFeatures& f, const std::vector<std::size_t>& idx)
{
    LabeledSet s;
    s.features.resize(static_cast<Eigen::Index>(idx.size()), f.set.values.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        s.features.row(static_cast<Eigen::Index>(i)) = f.set.values.row(static_cast<Eigen::Index>(idx[i]));
        s.labels.push_back(f.labels[idx[i]].letter);
    }
    return s;
}

inline std::string join_sizes(const std::vector<int>& sizes)
{
    std::string s;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        s += (i ? "/" : "") + std::to_string(sizes[i]);
    }
    return s;
}

inline std::string split_name(const dataset::SplitSpec& s)
{
    return s.mode == dataset::SplitMode::allseen ? "allseen" : "unseen:" + s.test_user;
}

/// Three-stage training on one split; returns the trained network.
inline Dbn train_one(const LoadedFeatures& f, const RunConfig& c, const dataset::SplitSpec& spec,
                     const std::string& log_path, std::ostream& out)
{
    const auto idx = dataset::split(f.labels, spec);
    const LabeledSet train = subset(f, idx.train);
    const LabeledSet valid = subset(f, idx.valid);

    std::ofstream log(log_path);
    if (!log) {
        throw IoError("cannot write " + log_path);
    }
    log << "# layer_sizes=" << join_sizes(c.layer_sizes) << '\n';
    log << "# feature_kind=" << features::to_string(f.set.kind) << " input_dim=" << f.set.values.cols() << '\n';
    log << "# split=" << split_name(spec);
    if (spec.mode == dataset::SplitMode::unseen) {
        log << " held_out_user=" << spec.test_user;
    }
    log << " train=" << train.size() << " valid=" << valid.size() << " test=" << idx.test.size() << '\n';
    log << "stage,layer,epoch,train_loss,valid_loss,reconstruction_error\n";
    log << std::setprecision(10);
    out << "training " << split_name(spec) << " (" << train.size() << " train / " << valid.size() << " valid), layers "
        << join_sizes(c.layer_sizes) << '\n';

    const auto rbms = pretrain(train.features, c.layer_sizes, c.rbm_configs(), [&](std::size_t layer, int epoch, double err) {
        log << "pretrain," << layer << ',' << epoch << ",,," << err << std::endl;
    });
    const auto sup = c.supervised_config();
    Rng rng(sup.rng_seed ^ 0xD1B54A32D192ED03ULL);
    Dbn dbn = make_dbn(rbms, train.features.cols(), 0.01, rng);
    dbn = train_translation_layer(dbn, train, valid, sup, [&](const SupervisedEpoch& e) {
        log << "translation,," << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << ',' << std::endl;
    });
    dbn = fine_tune(dbn, train, valid, sup, [&](const SupervisedEpoch& e) {
        log << "fine_tune,," << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << ',' << std::endl;
    });
    return dbn;
}

inline int cmd_train(const RunConfig& c, std::ostream& out)
{
    const auto f = load_features(features_dir(c));
    fs::create_directories(c.paths.output_dir);
    echo_config(c);
    const auto spec = c.split_spec();
    const std::string base = model_path(c);
    if (spec.mode == dataset::SplitMode::unseen && spec.test_user.empty()) {
        for (const auto& user : dataset::users(f.labels)) {
            auto s = spec;
            s.test_user = user;
            const auto log = (fs::path(c.paths.output_dir) / ("train_log_" + user + ".csv")).string();
            save_model(train_one(f, c, s, log, out), holdout_model_path(base, user));
            out << "wrote " << holdout_model_path(base, user) << '\n';
        }
        return kOk;
    }
    const auto log = (fs::path(c.paths.output_dir) / "train_log.csv").string();
    save_model(train_one(f, c, spec, log, out), base);
    out << "wrote " << base << '\n';
    return kOk;
}

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream o(path);
    if (!o) {
        throw IoError("cannot write " + path.string());
    }
    o << text;
}

inline void write_report(const fs::path& dir, const eval::EvalReport& r, const eval::ConfusionMatrix* cm)
{
    fs::create_directories(dir);
    write_text(dir / "report.json", eval::to_json(r).dump(2) + "\n");
    write_text(dir / "report.csv", eval::report_csv(r));
    if (cm != nullptr) {
        write_text(dir / "confusion.csv", eval::confusion_csv(*cm));
    }
}

struct EvalOutcome {
    eval::EvalReport report;
    eval::ConfusionMatrix confusion;
};

inline EvalOutcome evaluate_split(const LoadedFeatures& f, const Dbn& dbn, const dataset::SplitSpec& spec)
{
    const auto idx = dataset::split(f.labels, spec);
    const LabeledSet test = subset(f, idx.test);
    if (test.size() == 0) {
        throw EmptyInput("test split is empty");
    }
    const auto preds = predict_labels(dbn, test.features);
    EvalOutcome o;
    o.confusion = eval::confusion(preds, test.labels);
    o.report = eval::precision_recall(o.confusion, split_name(spec));
    return o;
}

inline std::string percent(const std::optional<double>& v)
{
    if (!v) {
        return "n/a";
    }
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * *v << '%';
    return os.str();
}

inline int cmd_eval(const RunConfig& c, std::ostream& out)
{
    const auto f = load_features(features_dir(c));
    echo_config(c);
    const auto spec = c.split_spec();
    const fs::path dir(c.paths.output_dir);
    const std::string base = model_path(c);
    if (spec.mode == dataset::SplitMode::unseen && spec.test_user.empty()) {
        std::vector<eval::EvalReport> reports;
        eval::ConfusionMatrix total;
        for (const auto& user : dataset::users(f.labels)) {
            auto s = spec;
            s.test_user = user;
            const auto o = evaluate_split(f, load_model(holdout_model_path(base, user)), s);
            write_report(dir / user, o.report, &o.confusion);
            for (int t = 0; t < kNumClasses; ++t) {
                for (int p = 0; p < kNumClasses; ++p) {
                    total.at(t, p) += o.confusion.at(t, p);
                }
            }
            out << user << ": macro recall " << percent(o.report.macro_recall) << ", macro precision "
                << percent(o.report.macro_precision) << '\n';
            reports.push_back(o.report);
        }
        const auto avg = eval::average_reports(reports, "unseen:average");
        write_report(dir, avg, &total);
        out << "average: macro recall " << percent(avg.macro_recall) << ", macro precision "
            << percent(avg.macro_precision) << '\n';
        return kOk;
    }
    const auto o = evaluate_split(f, load_model(base), spec);
    write_report(dir, o.report, &o.confusion);
    out << o.report.split << ": macro recall " << percent(o.report.macro_recall) << ", macro precision "
        << percent(o.report.macro_precision) << " over " << o.report.total << " samples\n";
    return kOk;
}

/// The configured kind if it fits the network input, else the only kind that does.
inline features::FeatureKind kind_for_model(const Dbn& dbn, const RunConfig& c)
{
    const auto dim = static_cast<std::size_t>(dbn.input_size());
    if (features::feature_dimension(c.feature_kind, c.preprocess) == dim) {
        return c.feature_kind;
    }
    std::vector<features::FeatureKind> fits;
    for (const auto k : {features::FeatureKind::combined, features::FeatureKind::raw, features::FeatureKind::gabor,
                         features::FeatureKind::bar, features::FeatureKind::intensity, features::FeatureKind::depth}) {
        if (features::feature_dimension(k, c.preprocess) == dim) {
            fits.push_back(k);
        }
    }
    if (fits.size() != 1) {
        throw DimensionMismatch("cannot match model input size " + std::to_string(dim) + " to a feature kind");
    }
    return fits.front();
}

inline int cmd_predict(const RunConfig& c, const std::string& depth_path, const std::string& intensity_path,
                       std::ostream& out)
{
    const Dbn dbn = load_model(model_path(c));
    const auto depth = pgm::read_depth(depth_path);
    const auto intensity = pgm::read_intensity(intensity_path);
    const auto kind = kind_for_model(dbn, c);
    const auto fv = features::extract(kind, depth, intensity, c.preprocess);
    const Prediction p = forward(dbn, fv.values);
    std::vector<int> order(kNumClasses);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return p.scores[static_cast<std::size_t>(a)] > p.scores[static_cast<std::size_t>(b)];
    });
    out << "label " << p.label.symbol() << '\n';
    out << std::setprecision(17);
    for (const int k : order) {
        out << kLetterSymbols[static_cast<std::size_t>(k)] << ' ' << p.scores[static_cast<std::size_t>(k)] << '\n';
    }
    return kOk;
}

inline int cmd_compare(const std::vector<std::string>& specs, const std::string& out_dir, std::ostream& out)
{
    std::vector<std::pair<std::string, eval::EvalReport>> named;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("--report expects name=path, got '" + s + "'");
        }
        std::ifstream in(s.substr(eq + 1));
        if (!in) {
            throw MissingFile("cannot open report " + s.substr(eq + 1));
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(s.substr(eq + 1) + ": " + e.what());
        }
        named.emplace_back(s.substr(0, eq), eval::report_from_json(j));
    }
    const auto table = eval::compare_reports(named);
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "comparison.csv", table.csv());
    write_text(fs::path(out_dir) / "comparison.json", table.json().dump(2) + "\n");
    for (std::size_t i = 0; i < table.runs.size(); ++i) {
        out << table.runs[i] << ": macro recall " << percent(table.reports[i].macro_recall) << ", macro precision "
            << percent(table.reports[i].macro_precision) << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Hand-pose fingerspelling toolkit: layered depth features and a deep belief network"};
    app.require_subcommand(1);
    Overrides o;
    int users = 5;
    int per_class = 10;
    std::string depth_path;
    std::string intensity_path;
    std::vector<std::string> report_specs;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--workers", o.workers, "worker threads (1 = bit-reproducible)")
            ->check(CLI::PositiveNumber);
    };
    auto* gen = app.add_subcommand("gen-synthetic", "write a procedurally generated dataset");
    common(gen);
    gen->add_option("--out", o.out, "output directory");
    gen->add_option("--users", users, "number of users")->check(CLI::PositiveNumber);
    gen->add_option("--per-class", per_class, "samples per user and letter")->check(CLI::PositiveNumber);

    auto* ext = app.add_subcommand("extract", "preprocess a dataset and write feature vectors");
    common(ext);
    ext->add_option("--manifest", o.manifest, "dataset manifest CSV");
    ext->add_option("--out", o.out, "output directory");
    ext->add_option("--feature-kind", o.feature_kind, "combined|raw|gabor|bar|intensity|depth")
        ->check(CLI::IsMember({"combined", "raw", "gabor", "bar", "intensity", "depth"}));

    auto* trn = app.add_subcommand("train", "pretrain, train the translation layer, fine-tune");
    common(trn);
    trn->add_option("--features", o.features, "directory holding features.bin and labels.csv");
    trn->add_option("--out", o.out, "output directory");
    trn->add_option("--model", o.model, "model file to write");
    trn->add_option("--split", o.split, "allseen|unseen")->check(CLI::IsMember({"allseen", "unseen"}));
    trn->add_option("--test-user", o.test_user, "held-out user for the unseen split");

    auto* evl = app.add_subcommand("eval", "evaluate on the test split and write reports");
    common(evl);
    evl->add_option("--features", o.features, "directory holding features.bin and labels.csv");
    evl->add_option("--out", o.out, "output directory");
    evl->add_option("--model", o.model, "model file");
    evl->add_option("--split", o.split, "allseen|unseen")->check(CLI::IsMember({"allseen", "unseen"}));
    evl->add_option("--test-user", o.test_user, "held-out user for the unseen split");

    auto* prd = app.add_subcommand("predict", "classify one depth/intensity pair");
    common(prd);
    prd->add_option("--model", o.model, "model file")->required();
    prd->add_option("--depth", depth_path, "16-bit depth PGM")->required();
    prd->add_option("--intensity", intensity_path, "8-bit intensity PGM")->required();
    prd->add_option("--feature-kind", o.feature_kind, "feature kind the model was trained on")
        ->check(CLI::IsMember({"combined", "raw", "gabor", "bar", "intensity", "depth"}));

    auto* cmp = app.add_subcommand("compare", "tabulate several report.json files side by side");
    cmp->add_option("--report", report_specs, "name=path/to/report.json (repeatable)")->required();
    cmp->add_option("--out", o.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (cmp->parsed()) {
            return cmd_compare(report_specs, *o.out, out);
        }
        const RunConfig c = effective_config(o);
        if (gen->parsed()) {
            return cmd_gen_synthetic(c, users, per_class, out);
        }
        if (ext->parsed()) {
            return cmd_extract(c, out);
        }
        if (trn->parsed()) {
            return cmd_train(c, out);
        }
        if (evl->parsed()) {
            return cmd_eval(c, out);
        }
        if (prd->parsed()) {
            return cmd_predict(c, depth_path, intensity_path, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const AllZeroImage& e) {
        err << "AllZeroImage: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    std::vector<const char*> argv{"handsign"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace handsign::cli
