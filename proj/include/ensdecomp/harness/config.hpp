#pragma once

// Experiment configuration: one flat JSON object. Unknown keys are rejected.
//
//   task                 "regression" | "classification-probabilistic" | "classification-vote"
//   loss                 regression: "squared" (default), "poisson", "itakura-saito";
//                        probabilistic: "kl"; vote: "zero-one"
//   combiner             "centroid" (default) | "arithmetic" (probabilistic only)
//   learner              "tree" | "stump" | "bagging" | "random-forest" | "adaboost" | "logitboost"
//   max_depth            integer or null (unconstrained); stumps and boosting default to 1
//   min_samples_split, laplace_alpha
//   trials, ensemble_size, subsample_fraction, bootstrap, seed
//   csv_path, target_column, test_fraction            dataset from a CSV file
//   synthetic, n_train, n_test                        or a synthetic generator
//   features, noise, flip_probability, relevant, classes, separation   synthetic options
//   analytic_noise       use the generator's P(Y|x) as the target distribution (vote task)
//   m_values             ascending ensemble sizes (default 1..ensemble_size)
//   depths               max_depth sweep at M = ensemble_size; -1 means unconstrained
//   split_fractions      [train, validation, test] for the scatter command
//   disparity_replicates bootstrap replicates for the disparity SE (Bregman tasks)
//   tensor_csv           also write the prediction tensor
//   out_dir              output directory (default ".")

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "ensdecomp/errors.hpp"
#include "ensdecomp/learners/synthetic.hpp"

namespace ensdecomp {

enum class Task { Regression, Probabilistic, Vote };

enum class LearnerKind { Tree, Stump, Bagging, RandomForest, AdaBoost, LogitBoost };

struct ExperimentConfig {
    Task task = Task::Regression;
    std::string loss = "squared";
    std::string combiner = "centroid";
    LearnerKind learner = LearnerKind::Bagging;
    std::optional<int> max_depth;
    int min_samples_split = 2;
    double laplace_alpha = 1.0;

    std::size_t trials = 10;
    std::size_t ensemble_size = 10;
    double subsample_fraction = 0.9;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    std::string csv_path;
    std::string target_column;
    double test_fraction = 0.25;
    std::optional<SyntheticKind> synthetic;
    std::size_t n_train = 500;
    std::size_t n_test = 200;
    SyntheticOptions synthetic_options;
    bool analytic_noise = true;

    std::vector<std::size_t> m_values;
    std::vector<int> depths;
    std::vector<double> split_fractions{0.6, 0.2, 0.2};
    std::size_t disparity_replicates = 200;
    bool tensor_csv = false;
    std::string out_dir = ".";

    nlohmann::json raw;  // the document as given, echoed into summaries
};

inline std::string to_string(Task t) {
    switch (t) {
        case Task::Regression: return "regression";
        case Task::Probabilistic: return "classification-probabilistic";
        case Task::Vote: return "classification-vote";
    }
    return "?";
}

inline std::string to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::Tree: return "tree";
        case LearnerKind::Stump: return "stump";
        case LearnerKind::Bagging: return "bagging";
        case LearnerKind::RandomForest: return "random-forest";
        case LearnerKind::AdaBoost: return "adaboost";
        case LearnerKind::LogitBoost: return "logitboost";
    }
    return "?";
}

namespace detail {

template <class T>
T config_value(const nlohmann::json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

inline std::size_t config_count(const nlohmann::json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError("config key '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

inline Task parse_task(const std::string& s) {
    if (s == "regression") return Task::Regression;
    if (s == "classification-probabilistic") return Task::Probabilistic;
    if (s == "classification-vote") return Task::Vote;
    throw ConfigError("config key 'task': unknown task '" + s + "'");
}

inline LearnerKind parse_learner(const std::string& s) {
    if (s == "tree") return LearnerKind::Tree;
    if (s == "stump") return LearnerKind::Stump;
    if (s == "bagging") return LearnerKind::Bagging;
    if (s == "random-forest" || s == "rf") return LearnerKind::RandomForest;
    if (s == "adaboost") return LearnerKind::AdaBoost;
    if (s == "logitboost") return LearnerKind::LogitBoost;
    if (s == "mlp") {
        throw ConfigError("config key 'learner': neural-network learners are not supported; use a tree-based learner");
    }
    throw ConfigError("config key 'learner': unknown learner '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{
        "task", "loss", "combiner", "learner", "max_depth", "min_samples_split", "laplace_alpha", "trials",
        "ensemble_size", "subsample_fraction", "bootstrap", "seed", "csv_path", "target_column", "test_fraction",
        "synthetic", "n_train", "n_test", "features", "noise", "flip_probability", "relevant", "classes",
        "separation", "analytic_noise", "m_values", "depths", "split_fractions", "disparity_replicates",
        "tensor_csv", "out_dir"};
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
    }
    using detail::config_count;
    using detail::config_value;
    ExperimentConfig c;
    c.raw = j;
    if (j.contains("task")) c.task = detail::parse_task(config_value<std::string>(j, "task"));
    c.loss = c.task == Task::Regression ? "squared" : c.task == Task::Probabilistic ? "kl" : "zero-one";
    if (j.contains("loss")) c.loss = config_value<std::string>(j, "loss");
    if (j.contains("combiner")) c.combiner = config_value<std::string>(j, "combiner");
    if (j.contains("learner")) c.learner = detail::parse_learner(config_value<std::string>(j, "learner"));
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) c.max_depth = config_value<int>(j, "max_depth");
    if (j.contains("min_samples_split")) c.min_samples_split = config_value<int>(j, "min_samples_split");
    if (j.contains("laplace_alpha")) c.laplace_alpha = config_value<double>(j, "laplace_alpha");
    if (j.contains("trials")) c.trials = config_count(j, "trials");
    if (j.contains("ensemble_size")) c.ensemble_size = config_count(j, "ensemble_size");
    if (j.contains("subsample_fraction")) c.subsample_fraction = config_value<double>(j, "subsample_fraction");
    if (j.contains("bootstrap")) c.bootstrap = config_value<bool>(j, "bootstrap");
    if (j.contains("seed")) c.seed = config_value<std::uint64_t>(j, "seed");
    if (j.contains("csv_path")) c.csv_path = config_value<std::string>(j, "csv_path");
    if (j.contains("target_column")) c.target_column = config_value<std::string>(j, "target_column");
    if (j.contains("test_fraction")) c.test_fraction = config_value<double>(j, "test_fraction");
    if (j.contains("synthetic")) {
        try {
            c.synthetic = parse_synthetic_kind(config_value<std::string>(j, "synthetic"));
        } catch (const SchemaError& e) {
            throw ConfigError(std::string("config key 'synthetic': ") + e.what());
        }
    }
    if (j.contains("n_train")) c.n_train = config_count(j, "n_train");
    if (j.contains("n_test")) c.n_test = config_count(j, "n_test");
    auto& so = c.synthetic_options;
    if (j.contains("features")) so.features = config_count(j, "features");
    if (j.contains("noise")) so.noise = config_value<double>(j, "noise");
    if (j.contains("flip_probability")) so.flip_probability = config_value<double>(j, "flip_probability");
    if (j.contains("relevant")) so.relevant = config_count(j, "relevant");
    if (j.contains("classes")) so.classes = config_value<int>(j, "classes");
    if (j.contains("separation")) so.separation = config_value<double>(j, "separation");
    if (j.contains("analytic_noise")) c.analytic_noise = config_value<bool>(j, "analytic_noise");
    if (j.contains("m_values")) c.m_values = config_value<std::vector<std::size_t>>(j, "m_values");
    if (j.contains("depths")) c.depths = config_value<std::vector<int>>(j, "depths");
    if (j.contains("split_fractions")) c.split_fractions = config_value<std::vector<double>>(j, "split_fractions");
    if (j.contains("disparity_replicates")) c.disparity_replicates = config_count(j, "disparity_replicates");
    if (j.contains("tensor_csv")) c.tensor_csv = config_value<bool>(j, "tensor_csv");
    if (j.contains("out_dir")) c.out_dir = config_value<std::string>(j, "out_dir");

    const bool boosting = c.learner == LearnerKind::AdaBoost || c.learner == LearnerKind::LogitBoost;
    if (!c.max_depth && (c.learner == LearnerKind::Stump || boosting)) c.max_depth = 1;
    if (c.learner == LearnerKind::Stump && c.max_depth != 1) {
        throw ConfigError("config key 'max_depth': stumps have depth 1");
    }

    switch (c.task) {
        case Task::Regression:
            if (c.loss != "squared" && c.loss != "poisson" && c.loss != "itakura-saito") {
                throw ConfigError("config key 'loss': '" + c.loss + "' does not apply to regression");
            }
            if (boosting) throw ConfigError("config key 'learner': boosting needs the classification-vote task");
            break;
        case Task::Probabilistic:
            if (c.loss != "kl") throw ConfigError("config key 'loss': probabilistic classification uses 'kl'");
            if (boosting) throw ConfigError("config key 'learner': boosting needs the classification-vote task");
            break;
        case Task::Vote:
            if (c.loss != "zero-one") throw ConfigError("config key 'loss': vote classification uses 'zero-one'");
            break;
    }
    if (c.combiner != "centroid" && c.combiner != "arithmetic") {
        throw ConfigError("config key 'combiner': unknown combiner '" + c.combiner + "'");
    }
    if (c.combiner == "arithmetic" && c.task != Task::Probabilistic) {
        throw ConfigError("config key 'combiner': the arithmetic combiner needs classification-probabilistic");
    }
    if (c.trials == 0) throw ConfigError("config key 'trials' must be positive");
    if (c.ensemble_size == 0) throw ConfigError("config key 'ensemble_size' must be positive");
    if (!(c.subsample_fraction > 0.0 && c.subsample_fraction <= 1.0)) {
        throw ConfigError("config key 'subsample_fraction' must lie in (0, 1]");
    }
    if (c.csv_path.empty() == !c.synthetic) {
        throw ConfigError("config needs exactly one of 'csv_path' and 'synthetic'");
    }
    if (!c.csv_path.empty() && c.target_column.empty()) {
        throw ConfigError("config key 'target_column' is required with 'csv_path'");
    }
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("config key 'test_fraction' must lie in (0, 1)");
    if (c.m_values.empty()) {
        for (std::size_t m = 1; m <= c.ensemble_size; ++m) c.m_values.push_back(m);
    }
    for (std::size_t k = 0; k < c.m_values.size(); ++k) {
        if (c.m_values[k] == 0 || c.m_values[k] > c.ensemble_size) {
            throw ConfigError("config key 'm_values': sizes must lie in [1, ensemble_size]");
        }
        if (k > 0 && c.m_values[k] <= c.m_values[k - 1]) throw ConfigError("config key 'm_values' must be ascending");
    }
    for (int d : c.depths) {
        if (d < -1) throw ConfigError("config key 'depths': use -1 for unconstrained depth");
    }
    if (c.split_fractions.size() != 3) throw ConfigError("config key 'split_fractions' needs three entries");
    double total = 0.0;
    for (double f : c.split_fractions) {
        if (!(f >= 0.0)) throw ConfigError("config key 'split_fractions' entries must be nonnegative");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("config key 'split_fractions' must sum to one");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace ensdecomp
