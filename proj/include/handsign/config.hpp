#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "handsign/dataset.hpp"
#include "handsign/dbn.hpp"
#include "handsign/error.hpp"
#include "handsign/features.hpp"
#include "handsign/rbm.hpp"

// Run configuration: every pipeline hyperparameter with its default, loaded
// from JSON. Missing keys keep their defaults; unknown keys are rejected.

namespace handsign {

struct RunPaths {
    std::string manifest;
    std::string output_dir = "out";
    std::string model;
    std::string features;
};

struct RunConfig {
    RunPaths paths;
    features::PreprocessConfig preprocess;
    features::FeatureKind feature_kind = features::FeatureKind::combined;
    std::vector<int> layer_sizes{1500, 700, 400};
    std::vector<RbmTrainConfig> rbm{RbmTrainConfig{}};
    SupervisedTrainConfig supervised;
    dataset::SplitSpec split;
    int workers = 1;
    std::uint64_t rng_seed = 1;

    /// Per-layer RBM settings; a single entry applies to every layer. Seeds
    /// and worker counts come from the run-level values.
    std::vector<RbmTrainConfig> rbm_configs() const
    {
        if (rbm.size() != 1 && rbm.size() != layer_sizes.size()) {
            throw ConfigError("rbm settings must be one object or one per layer");
        }
        std::vector<RbmTrainConfig> out;
        for (std::size_t k = 0; k < layer_sizes.size(); ++k) {
            RbmTrainConfig c = rbm.size() == 1 ? rbm.front() : rbm[k];
            c.rng_seed = rng_seed * 1000003ULL + k + 1;
            c.workers = workers;
            out.push_back(c);
        }
        return out;
    }

    SupervisedTrainConfig supervised_config() const
    {
        SupervisedTrainConfig c = supervised;
        c.rng_seed = rng_seed * 7919ULL + 17;
        c.workers = workers;
        return c;
    }

    dataset::SplitSpec split_spec() const
    {
        dataset::SplitSpec s = split;
        s.rng_seed = rng_seed;
        return s;
    }

    void validate() const
    {
        if (preprocess.hand_depth_mm <= 0 || preprocess.layers < 1) {
            throw ConfigError("hand_depth_mm and layers must be positive");
        }
        if (!preprocess.alignment.valid()) {
            throw ConfigError("mask alignment scales must be positive");
        }
        if (layer_sizes.empty()) {
            throw ConfigError("need at least one hidden layer");
        }
        for (const int s : layer_sizes) {
            if (s < 1) {
                throw ConfigError("layer sizes must be positive");
            }
        }
        for (const auto& c : rbm_configs()) {
            c.validate();
        }
        supervised.validate();
        if (workers < 1) {
            throw ConfigError("workers must be at least 1");
        }
        if (split.unseen_valid_fraction < 0.0 || split.unseen_valid_fraction >= 1.0) {
            throw ConfigError("unseen_valid_fraction must lie in [0,1)");
        }
    }
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!ok.contains(k)) {
            throw ConfigError("unknown config key '" + where + "." + k + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& field)
{
    if (j.contains(key)) {
        field = j.at(key).get<T>();
    }
}

inline json rbm_json(const RbmTrainConfig& c)
{
    return {{"learning_rate", c.learning_rate},       {"epochs", c.epochs},
            {"batch_size", c.batch_size},             {"initial_momentum", c.initial_momentum},
            {"momentum", c.momentum},                 {"momentum_switch_epoch", c.momentum_switch_epoch},
            {"l1_coeff", c.l1_coeff},                 {"l2_coeff", c.l2_coeff},
            {"convergence_tol", c.convergence_tol},   {"convergence_window", c.convergence_window},
            {"init_stddev", c.init_stddev},           {"data_visible_bias", c.data_visible_bias}};
}

inline RbmTrainConfig rbm_from(const json& j, RbmTrainConfig c)
{
    check_keys(j,
               {"learning_rate", "epochs", "batch_size", "initial_momentum", "momentum", "momentum_switch_epoch",
                "l1_coeff", "l2_coeff", "convergence_tol", "convergence_window", "init_stddev", "data_visible_bias"},
               "rbm");
    read(j, "learning_rate", c.learning_rate);
    read(j, "epochs", c.epochs);
    read(j, "batch_size", c.batch_size);
    read(j, "initial_momentum", c.initial_momentum);
    read(j, "momentum", c.momentum);
    read(j, "momentum_switch_epoch", c.momentum_switch_epoch);
    read(j, "l1_coeff", c.l1_coeff);
    read(j, "l2_coeff", c.l2_coeff);
    read(j, "convergence_tol", c.convergence_tol);
    read(j, "convergence_window", c.convergence_window);
    read(j, "init_stddev", c.init_stddev);
    read(j, "data_visible_bias", c.data_visible_bias);
    return c;
}

inline json stage_json(const SupervisedStageConfig& s)
{
    return {{"learning_rate", s.learning_rate},
            {"epochs", s.epochs},
            {"batch_size", s.batch_size},
            {"l2_coeff", s.l2_coeff},
            {"momentum", s.momentum},
            {"input_noise_sigma", s.input_noise_sigma},
            {"early_stopping_patience", s.early_stopping_patience}};
}

inline SupervisedStageConfig stage_from(const json& j, SupervisedStageConfig s, const std::string& where)
{
    check_keys(j,
               {"learning_rate", "epochs", "batch_size", "l2_coeff", "momentum", "input_noise_sigma",
                "early_stopping_patience"},
               where);
    read(j, "learning_rate", s.learning_rate);
    read(j, "epochs", s.epochs);
    read(j, "batch_size", s.batch_size);
    read(j, "l2_coeff", s.l2_coeff);
    read(j, "momentum", s.momentum);
    read(j, "input_noise_sigma", s.input_noise_sigma);
    read(j, "early_stopping_patience", s.early_stopping_patience);
    return s;
}

}  // namespace config_detail

inline nlohmann::json to_json(const RunConfig& c)
{
    using config_detail::json;
    const auto& g = c.preprocess.filters.gabor;
    const auto& b = c.preprocess.filters.bar;
    const auto& a = c.preprocess.alignment;
    json rbm = json::array();
    for (const auto& r : c.rbm) {
        rbm.push_back(config_detail::rbm_json(r));
    }
    return {
        {"paths",
         {{"manifest", c.paths.manifest},
          {"output_dir", c.paths.output_dir},
          {"model", c.paths.model},
          {"features", c.paths.features}}},
        {"preprocess",
         {{"hand_depth_mm", c.preprocess.hand_depth_mm},
          {"layers", c.preprocess.layers},
          {"mask_alignment", {{"scale_x", a.scale_x}, {"scale_y", a.scale_y}, {"offset_x", a.offset_x}, {"offset_y", a.offset_y}}},
          {"gabor",
           {{"wavelengths", g.wavelengths},
            {"orientations", g.orientations},
            {"kernel_size", g.kernel_size},
            {"sigma_per_wavelength", g.sigma_per_wavelength},
            {"aspect", g.aspect},
            {"output_side", g.output_side}}},
          {"bar",
           {{"kernel_size", b.kernel_size},
            {"sigma_across", b.sigma_across},
            {"sigma_along", b.sigma_along},
            {"output_side", b.output_side}}}}},
        {"feature_kind", features::to_string(c.feature_kind)},
        {"layer_sizes", c.layer_sizes},
        {"rbm", rbm},
        {"supervised",
         {{"stage2", config_detail::stage_json(c.supervised.stage2)},
          {"stage3", config_detail::stage_json(c.supervised.stage3)}}},
        {"split",
         {{"mode", c.split.mode == dataset::SplitMode::allseen ? "allseen" : "unseen"},
          {"test_user", c.split.test_user},
          {"unseen_valid_fraction", c.split.unseen_valid_fraction}}},
        {"workers", c.workers},
        {"rng_seed", c.rng_seed},
    };
}

inline dataset::SplitMode parse_split_mode(const std::string& s)
{
    if (s == "allseen") {
        return dataset::SplitMode::allseen;
    }
    if (s == "unseen") {
        return dataset::SplitMode::unseen;
    }
    throw ConfigError("split mode must be allseen or unseen, got '" + s + "'");
}

inline RunConfig config_from_json(const nlohmann::json& j)
{
    using namespace config_detail;
    RunConfig c;
    try {
        check_keys(j,
                   {"paths", "preprocess", "feature_kind", "layer_sizes", "rbm", "supervised", "split", "workers",
                    "rng_seed"},
                   "config");
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            check_keys(p, {"manifest", "output_dir", "model", "features"}, "paths");
            read(p, "manifest", c.paths.manifest);
            read(p, "output_dir", c.paths.output_dir);
            read(p, "model", c.paths.model);
            read(p, "features", c.paths.features);
        }
        if (j.contains("preprocess")) {
            const auto& p = j.at("preprocess");
            check_keys(p, {"hand_depth_mm", "layers", "mask_alignment", "gabor", "bar"}, "preprocess");
            read(p, "hand_depth_mm", c.preprocess.hand_depth_mm);
            read(p, "layers", c.preprocess.layers);
            if (p.contains("mask_alignment")) {
                const auto& a = p.at("mask_alignment");
                check_keys(a, {"scale_x", "scale_y", "offset_x", "offset_y"}, "mask_alignment");
                read(a, "scale_x", c.preprocess.alignment.scale_x);
                read(a, "scale_y", c.preprocess.alignment.scale_y);
                read(a, "offset_x", c.preprocess.alignment.offset_x);
                read(a, "offset_y", c.preprocess.alignment.offset_y);
            }
            if (p.contains("gabor")) {
                const auto& g = p.at("gabor");
                auto& gc = c.preprocess.filters.gabor;
                check_keys(g, {"wavelengths", "orientations", "kernel_size", "sigma_per_wavelength", "aspect", "output_side"},
                           "gabor");
                read(g, "wavelengths", gc.wavelengths);
                read(g, "orientations", gc.orientations);
                read(g, "kernel_size", gc.kernel_size);
                read(g, "sigma_per_wavelength", gc.sigma_per_wavelength);
                read(g, "aspect", gc.aspect);
                read(g, "output_side", gc.output_side);
            }
            if (p.contains("bar")) {
                const auto& b = p.at("bar");
                auto& bc = c.preprocess.filters.bar;
                check_keys(b, {"kernel_size", "sigma_across", "sigma_along", "output_side"}, "bar");
                read(b, "kernel_size", bc.kernel_size);
                read(b, "sigma_across", bc.sigma_across);
                read(b, "sigma_along", bc.sigma_along);
                read(b, "output_side", bc.output_side);
            }
        }
        if (j.contains("feature_kind")) {
            c.feature_kind = features::parse_kind(j.at("feature_kind").get<std::string>());
        }
        read(j, "layer_sizes", c.layer_sizes);
        if (j.contains("rbm")) {
            const auto& r = j.at("rbm");
            c.rbm.clear();
            if (r.is_array()) {
                for (const auto& e : r) {
                    c.rbm.push_back(rbm_from(e, RbmTrainConfig{}));
                }
            } else {
                c.rbm.push_back(rbm_from(r, RbmTrainConfig{}));
            }
        }
        if (j.contains("supervised")) {
            const auto& s = j.at("supervised");
            check_keys(s, {"stage2", "stage3"}, "supervised");
            if (s.contains("stage2")) {
                c.supervised.stage2 = stage_from(s.at("stage2"), c.supervised.stage2, "stage2");
            }
            if (s.contains("stage3")) {
                c.supervised.stage3 = stage_from(s.at("stage3"), c.supervised.stage3, "stage3");
            }
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            check_keys(s, {"mode", "test_user", "unseen_valid_fraction"}, "split");
            if (s.contains("mode")) {
                c.split.mode = parse_split_mode(s.at("mode").get<std::string>());
            }
            read(s, "test_user", c.split.test_user);
            read(s, "unseen_valid_fraction", c.split.unseen_valid_fraction);
        }
        read(j, "workers", c.workers);
        read(j, "rng_seed", c.rng_seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

inline void save_config(const std::string& path, const RunConfig& c)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << to_json(c).dump(2) << '\n';
}

}  // namespace handsign
