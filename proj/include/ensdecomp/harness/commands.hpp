#pragma once

// The four harness commands. Each writes its files under the output directory
// and returns the process exit code: 0 when every residual check passes, 1
// otherwise. Configuration and data errors propagate as exceptions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/decomp.hpp"
#include "ensdecomp/estimators.hpp"
#include "ensdecomp/harness/config.hpp"
#include "ensdecomp/harness/report.hpp"
#include "ensdecomp/harness/verify.hpp"
#include "ensdecomp/learners/boosting.hpp"
#include "ensdecomp/learners/csv.hpp"
#include "ensdecomp/learners/factories.hpp"
#include "ensdecomp/learners/synthetic.hpp"
#include "ensdecomp/tensor.hpp"
#include "ensdecomp/theory.hpp"

namespace ensdecomp {

struct CommandOptions {
    std::optional<std::uint64_t> seed;  // overrides the config seed
    std::optional<std::string> out_dir;  // overrides the config out_dir
    bool svg = false;
};

inline constexpr double kBregmanResidualTolerance = 1e-9;  // relative: |r| <= tol * (1 + |loss|)
inline constexpr double kEffectResidualTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Data and learners

/// Shuffles rows with derive_seed(seed, streams::split) and cuts them by
/// `fractions`; the last part takes the remainder.
inline std::vector<Dataset> split_dataset(const Dataset& data, std::span<const double> fractions, std::uint64_t seed) {
    Rng rng(derive_seed(seed, streams::split));
    std::vector<std::size_t> order(data.rows);
    for (std::size_t r = 0; r < data.rows; ++r) order[r] = r;
    for (std::size_t r = data.rows; r > 1; --r) std::swap(order[r - 1], order[uniform_index(rng, r)]);
    std::vector<Dataset> parts;
    std::size_t start = 0;
    for (std::size_t p = 0; p < fractions.size(); ++p) {
        const std::size_t count = p + 1 == fractions.size()
                                      ? data.rows - start
                                      : std::min(data.rows - start, static_cast<std::size_t>(std::llround(
                                                                        fractions[p] * static_cast<double>(data.rows))));
        if (count == 0) throw SplitError("split " + std::to_string(p) + " of the dataset is empty");
        std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(start + count));
        std::sort(idx.begin(), idx.end());
        parts.push_back(data.subset(idx));
        start += count;
    }
    return parts;
}

inline Dataset load_config_dataset(const ExperimentConfig& c, std::size_t n, std::uint64_t stream) {
    if (c.synthetic) return make_synthetic(*c.synthetic, n, derive_seed(c.seed, streams::split, stream), c.synthetic_options);
    return load_csv(c.csv_path, {c.target_column, c.task == Task::Regression ? TaskKind::Regression
                                                                             : TaskKind::Classification});
}

/// Train and test sets: two independent synthetic draws, or a shuffled split
/// of the CSV.
inline std::pair<Dataset, Dataset> train_test_data(const ExperimentConfig& c) {
    if (c.synthetic) return {load_config_dataset(c, c.n_train, 0), load_config_dataset(c, c.n_test, 1)};
    const Dataset all = load_config_dataset(c, 0, 0);
    const std::vector<double> f{1.0 - c.test_fraction, c.test_fraction};
    auto parts = split_dataset(all, f, c.seed);
    return {std::move(parts[0]), std::move(parts[1])};
}

inline void check_task_data(const ExperimentConfig& c, const Dataset& d) {
    if ((c.task == Task::Regression) == d.is_classification()) {
        throw ConfigError("config key 'task': dataset does not match task '" + to_string(c.task) + "'");
    }
}

inline TreeParams tree_params(const ExperimentConfig& c) {
    TreeParams p;
    p.max_depth = c.max_depth;
    p.min_samples_split = c.min_samples_split;
    p.laplace_alpha = c.laplace_alpha;
    return p;
}

inline bool is_boosting(LearnerKind k) { return k == LearnerKind::AdaBoost || k == LearnerKind::LogitBoost; }

inline LearnerFactory learner_factory(const ExperimentConfig& c, const TreeParams& p) {
    switch (c.learner) {
        case LearnerKind::Tree:
        case LearnerKind::Stump: return tree_factory(p);
        case LearnerKind::Bagging: return bagging_member_factory(p, c.bootstrap);
        case LearnerKind::RandomForest: return random_forest_member_factory(p);
        default: throw ConfigError("config key 'learner': boosting has no per-member factory");
    }
}

inline BoostingFit boosting_fit(const ExperimentConfig& c, const TreeParams& p) {
    const std::size_t rounds = c.ensemble_size;
    if (c.learner == LearnerKind::AdaBoost) {
        return [p, rounds](const Dataset& d, std::uint64_t seed) {
            TreeParams q = p;
            q.seed = seed;
            return fit_adaboost(d, rounds, q);
        };
    }
    return [p, rounds](const Dataset& d, std::uint64_t seed) {
        TreeParams q = p;
        q.seed = seed;
        return fit_logitboost(d, rounds, q);
    };
}

inline TrialPlan trial_plan(const ExperimentConfig& c) {
    TrialPlan plan;
    plan.trials = c.trials;
    plan.ensemble_size = c.ensemble_size;
    plan.subsample_fraction = c.subsample_fraction;
    plan.bootstrap = c.bootstrap;
    plan.master_seed = c.seed;
    return plan;
}

inline Generator regression_generator(const std::string& loss) {
    if (loss == "squared") return Generator::squared();
    if (loss == "poisson") return Generator::poisson();
    if (loss == "itakura-saito") return Generator::itakura_saito();
    throw ConfigError("config key 'loss': unknown regression loss '" + loss + "'");
}

// ---------------------------------------------------------------------------
// decompose

struct RowResult {
    std::vector<double> terms;           // in header order after the key column
    std::vector<double> standard_errors;
    double max_residual = 0.0;           // worst pointwise residual, scaled as the tolerance
};

namespace detail {

template <class Report>
RowResult summarise_row(std::span<const Report> points, bool relative) {
    const auto s = summarize<Report>(points);
    RowResult row;
    Report mean = s.mean, se = s.standard_error;
    for (double* f : report_fields(mean)) row.terms.push_back(*f);
    for (double* f : report_fields(se)) row.standard_errors.push_back(*f);
    auto scaled = [&](Report r) {
        const auto f = report_fields(r);
        return relative ? std::abs(*f.back()) / (1.0 + std::abs(*f.front())) : std::abs(*f.back());
    };
    row.max_residual = scaled(mean);
    for (const Report& p : points) row.max_residual = std::max(row.max_residual, scaled(p));
    return row;
}

inline std::vector<std::string> decomposition_columns(const ExperimentConfig& c) {
    if (c.task == Task::Vote) return {"expected_loss", "noise", "bias_effect", "variance_effect", "diversity_effect", "residual"};
    if (c.combiner == "arithmetic") return {"expected_ce", "average_bias", "average_variance", "dependency", "residual"};
    return {"expected_loss", "noise", "average_bias", "average_variance", "diversity", "residual"};
}

inline std::string render_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Builds the tensor for one configuration and evaluates every requested
/// ensemble size.
class DecomposeRun {
public:
    DecomposeRun(const ExperimentConfig& c, const Dataset& train, const Dataset& test, const TreeParams& params)
        : c_(c), test_(test) {
        const TrialPlan plan = trial_plan(c);
        if (c.task == Task::Vote) {
            labels_ = is_boosting(c.learner) ? collect_boosted(boosting_fit(c, params), train, test, plan)
                                             : collect_labels(learner_factory(c, params), train, test, plan);
            const int k = train.classes;
            if (c.analytic_noise && test.conditional.size() == test.rows) {
                for (const auto& p : test.conditional) targets_01_.emplace_back(p);
            } else {
                targets_01_ = point_masses(test.labels, k);
            }
        } else if (c.task == Task::Probabilistic) {
            probs_ = collect_probabilities(learner_factory(c, params), train, test, plan);
        } else {
            gen_ = regression_generator(c.loss);
            for (double y : test.targets) targets_.push_back(gen_.make(y));
            probs_ = collect_regression(learner_factory(c, params), train, test, plan, gen_);
        }
    }

    RowResult row(std::size_t m) const {
        if (c_.task == Task::Vote) {
            const LabelTensor t = m == labels_.members() ? labels_ : labels_.prefix(m);
            const auto pts = estimate_effects_01_pointwise(t, targets_01_, c_.seed);
            return detail::summarise_row<EffectReport>(pts, false);
        }
        const PredictionTensor t = m == probs_.members() ? probs_ : probs_.prefix(m);
        if (c_.task == Task::Probabilistic) {
            if (c_.combiner == "arithmetic") {
                const auto pts = estimate_dependency_pointwise(t, test_.labels);
                return detail::summarise_row<DependencyReport>(pts, true);
            }
            const auto pts = estimate_cross_entropy_pointwise(t, test_.labels);
            return detail::summarise_row<DecompositionReport>(pts, true);
        }
        const auto pts = estimate_bvd_pointwise(t, gen_, targets_);
        return detail::summarise_row<DecompositionReport>(pts, true);
    }

    std::optional<DisparityEstimate> disparity(std::size_t replicates) const {
        if (c_.task == Task::Vote || replicates == 0) return std::nullopt;
        const Generator g = c_.task == Task::Probabilistic ? Generator::kl(test_.classes) : gen_;
        return estimate_disparity(probs_, g, replicates, c_.seed);
    }

    void write_tensor(std::ostream& out) const {
        if (c_.task == Task::Vote) {
            write_tensor_csv(out, labels_);
        } else {
            write_tensor_csv(out, probs_);
        }
    }

private:
    const ExperimentConfig& c_;
    const Dataset& test_;
    Generator gen_ = Generator::squared();
    std::vector<Prediction> targets_;
    std::vector<LabelDistribution> targets_01_;
    PredictionTensor probs_;
    LabelTensor labels_;
};

inline int cmd_decompose(ExperimentConfig c, const CommandOptions& opt, std::ostream& log) {
    if (opt.seed) c.seed = *opt.seed;
    if (opt.out_dir) c.out_dir = *opt.out_dir;
    const auto [train, test] = train_test_data(c);
    check_task_data(c, train);
    check_task_data(c, test);
    if (is_boosting(c.learner) && train.classes != 2) throw ConfigError("config key 'learner': boosting needs two classes");

    const bool relative = c.task != Task::Vote;
    const double tolerance = relative ? kBregmanResidualTolerance : kEffectResidualTolerance;
    const bool depth_sweep = !c.depths.empty();
    const auto columns = detail::decomposition_columns(c);

    ReportTable table;
    table.header.push_back(depth_sweep ? "max_depth" : "M");
    table.header.insert(table.header.end(), columns.begin(), columns.end());

    nlohmann::json summary;
    summary["command"] = "decompose";
    summary["task"] = to_string(c.task);
    summary["loss"] = c.loss;
    summary["learner"] = to_string(c.learner);
    summary["seed"] = c.seed;
    summary["config"] = c.raw;
    summary["residual_tolerance"] = tolerance;
    summary["residual_scale"] = relative ? "relative" : "absolute";
    summary["rows"] = nlohmann::json::array();

    bool passed = true;
    auto record = [&](double key, const RowResult& r) {
        std::vector<double> values{key};
        values.insert(values.end(), r.terms.begin(), r.terms.end());
        table.add(values);
        nlohmann::json row;
        row[table.header.front()] = key;
        nlohmann::json terms, ses;
        for (std::size_t k = 0; k < columns.size(); ++k) {
            terms[columns[k]] = r.terms[k];
            ses[columns[k]] = r.standard_errors[k];
        }
        row["terms"] = terms;
        row["standard_errors"] = ses;
        row["max_residual"] = r.max_residual;
        summary["rows"].push_back(row);
        if (!(r.max_residual <= tolerance)) {
            passed = false;
            log << "residual check failed at " << table.header.front() << "=" << key << ": " << r.max_residual
                << " > " << tolerance << "\n";
        }
    };

    const std::filesystem::path out_dir = c.out_dir;
    if (depth_sweep) {
        for (int depth : c.depths) {
            TreeParams p = tree_params(c);
            p.max_depth = depth < 0 ? std::nullopt : std::optional<int>(depth);
            DecomposeRun run(c, train, test, p);
            record(depth, run.row(c.ensemble_size));
            if (c.tensor_csv) {
                std::ostringstream t;
                run.write_tensor(t);
                write_file(out_dir / ("tensor_depth" + std::to_string(depth) + ".csv"), t.str());
            }
        }
    } else {
        DecomposeRun run(c, train, test, tree_params(c));
        for (std::size_t m : c.m_values) record(static_cast<double>(m), run.row(m));
        if (const auto d = run.disparity(c.disparity_replicates)) {
            summary["disparity"] = {{"M", c.ensemble_size},
                                    {"estimate", d->disparity},
                                    {"bias_corrected", d->bias_corrected},
                                    {"bootstrap_standard_error", d->standard_error},
                                    {"replicates", c.disparity_replicates}};
        }
        if (c.tensor_csv) {
            std::ostringstream t;
            run.write_tensor(t);
            write_file(out_dir / "tensor.csv", t.str());
        }
    }
    summary["passed"] = passed;

    std::ostringstream csv;
    write_report_csv(csv, table);
    write_file(out_dir / "decompose.csv", csv.str());
    write_file(out_dir / "decompose.json", detail::render_json(summary));
    if (opt.svg) {
        std::vector<Series> series;
        for (std::size_t col = 1; col < table.header.size(); ++col) {
            if (table.header[col] == "residual") continue;
            Series s{table.header[col], {}, {}};
            for (const auto& row : table.rows) {
                s.x.push_back(row[0]);
                s.y.push_back(row[col]);
            }
            series.push_back(std::move(s));
        }
        write_file(out_dir / "decompose.svg",
                   render_svg(series, {to_string(c.learner) + " (" + c.loss + ")", table.header.front(), "value", false}));
    }
    log << "decompose: " << table.rows.size() << " rows written to " << (out_dir / "decompose.csv").string()
        << (passed ? "" : " (residual check FAILED)") << "\n";
    return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// theory

struct TheoryConfig {
    std::vector<double> epsilons;
    std::vector<int> m_values{1, 3, 5, 11, 21, 51, 101};
    std::optional<int> simulate_k;
    double simulate_p = 0.6;
    std::vector<int> simulate_m_values{3, 11, 21};
    std::size_t replicates = 10000;
    std::uint64_t seed = 0;
    std::string out_dir = ".";

    TheoryConfig() {
        for (int k = 0; k <= 100; ++k) epsilons.push_back(k / 100.0);
    }
};

/// Flat JSON keys: epsilons, m_values, simulate_k, simulate_p,
/// simulate_m_values, replicates, seed, out_dir.
inline TheoryConfig parse_theory_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("theory config must be a JSON object");
    static const std::set<std::string> known{"epsilons", "m_values", "simulate_k", "simulate_p",
                                             "simulate_m_values", "replicates", "seed", "out_dir"};
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
    }
    using detail::config_value;
    TheoryConfig t;
    if (j.contains("epsilons")) t.epsilons = config_value<std::vector<double>>(j, "epsilons");
    if (j.contains("m_values")) t.m_values = config_value<std::vector<int>>(j, "m_values");
    if (j.contains("simulate_k")) t.simulate_k = config_value<int>(j, "simulate_k");
    if (j.contains("simulate_p")) t.simulate_p = config_value<double>(j, "simulate_p");
    if (j.contains("simulate_m_values")) t.simulate_m_values = config_value<std::vector<int>>(j, "simulate_m_values");
    if (j.contains("replicates")) t.replicates = detail::config_count(j, "replicates");
    if (j.contains("seed")) t.seed = config_value<std::uint64_t>(j, "seed");
    if (j.contains("out_dir")) t.out_dir = config_value<std::string>(j, "out_dir");
    return t;
}

inline int cmd_theory(TheoryConfig t, const CommandOptions& opt, std::ostream& log) {
    if (opt.seed) t.seed = *opt.seed;
    if (opt.out_dir) t.out_dir = *opt.out_dir;
    ReportTable table{{"epsilon", "M", "majority_error", "diversity_effect"}, {}};
    for (int m : t.m_values) {
        for (double eps : t.epsilons) {
            try {
                table.add({eps, static_cast<double>(m), majority_error_independent(eps, m),
                           diversity_effect_independent(eps, m)});
            } catch (const ParityError& e) {
                throw ConfigError(std::string("config key 'm_values': ") + e.what());
            } catch (const DomainError& e) {
                throw ConfigError(std::string("config key 'epsilons': ") + e.what());
            }
        }
    }
    const std::filesystem::path out_dir = t.out_dir;
    std::ostringstream csv;
    write_report_csv(csv, table);
    write_file(out_dir / "theory.csv", csv.str());
    if (t.simulate_k) {
        ReportTable sim{{"k", "p", "M", "replicates", "mean", "standard_error"}, {}};
        for (int m : t.simulate_m_values) {
            const auto r = simulate_diversity_effect(*t.simulate_k, t.simulate_p, m, t.replicates,
                                                     derive_seed(t.seed, streams::simulation, static_cast<std::uint64_t>(m)));
            sim.add({static_cast<double>(*t.simulate_k), t.simulate_p, static_cast<double>(m),
                     static_cast<double>(t.replicates), r.mean, r.standard_error});
        }
        std::ostringstream s;
        write_report_csv(s, sim);
        write_file(out_dir / "theory_simulation.csv", s.str());
    }
    if (opt.svg) {
        std::vector<Series> series;
        for (int m : t.m_values) {
            Series s{"M=" + std::to_string(m), {}, {}};
            for (const auto& row : table.rows) {
                if (row[1] == m) {
                    s.x.push_back(row[0]);
                    s.y.push_back(row[3]);
                }
            }
            series.push_back(std::move(s));
        }
        write_file(out_dir / "theory.svg",
                   render_svg(series, {"Diversity-effect of independent voters", "epsilon", "diversity effect", false}));
    }
    log << "theory: " << table.rows.size() << " rows written to " << (out_dir / "theory.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify

inline int cmd_verify(const VerifyOptions& v, std::ostream& out) {
    const auto results = run_identity_suites(v);
    bool passed = true;
    out << std::left << std::setw(40) << "identity" << std::setw(10) << "instances" << std::setw(14) << "max_residual"
        << std::setw(10) << "tolerance" << "status\n";
    for (const auto& r : results) {
        std::ostringstream res, tol;
        res << std::scientific << std::setprecision(2) << r.max_residual;
        tol << std::scientific << std::setprecision(0) << r.tolerance;
        out << std::left << std::setw(40) << r.name << std::setw(10) << r.instances << std::setw(14) << res.str()
            << std::setw(10) << tol.str() << (r.passed() ? "ok" : "FAIL") << "\n";
        passed = passed && r.passed();
    }
    for (const auto& r : results) {
        if (!r.passed()) out << "failing identity: " << r.name << "\n";
    }
    return passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// scatter

struct ScatterRow {
    std::size_t m = 0;
    double validation_diversity = 0.0;
    double test_gain = 0.0;
};

inline std::size_t argmax_class(const Prediction& q) {
    const auto p = extend_simplex(q);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

/// Diversity of the cross-entropy decomposition on the first `n_val` points
/// and the 0-1 gain (average member error - ensemble error) on the rest.
inline ScatterRow scatter_row(const PredictionTensor& t, std::span<const int> labels, std::size_t n_val) {
    ScatterRow row;
    row.m = t.members();
    const Generator gen = Generator::kl(t.classes);
    for (std::size_t j = 0; j < n_val; ++j) {
        row.validation_diversity += cross_entropy_decomp(labels[j], t.grid_at(j)).diversity / static_cast<double>(n_val);
    }
    const std::size_t n_test = t.points() - n_val;
    std::vector<Prediction> members(t.members());
    for (std::size_t j = n_val; j < t.points(); ++j) {
        const auto y = static_cast<std::size_t>(labels[j]);
        for (std::size_t d = 0; d < t.trials(); ++d) {
            std::size_t wrong = 0;
            for (std::size_t i = 0; i < t.members(); ++i) {
                members[i] = t(d, i, j);
                wrong += argmax_class(members[i]) != y;
            }
            const double ens = argmax_class(left_centroid(gen, members)) != y ? 1.0 : 0.0;
            row.test_gain += static_cast<double>(wrong) / static_cast<double>(t.members()) - ens;
        }
    }
    row.test_gain /= static_cast<double>(t.trials() * n_test);
    return row;
}

inline int cmd_scatter(ExperimentConfig c, const CommandOptions& opt, std::ostream& log) {
    if (opt.seed) c.seed = *opt.seed;
    if (opt.out_dir) c.out_dir = *opt.out_dir;
    if (c.task != Task::Probabilistic) throw ConfigError("config key 'task': scatter needs classification-probabilistic");
    const Dataset pool = load_config_dataset(c, c.n_train, 0);
    check_task_data(c, pool);
    const auto parts = split_dataset(pool, c.split_fractions, c.seed);
    const Dataset& train = parts[0];
    // validation rows first, then test rows, so one tensor serves both
    Dataset eval = parts[1];
    eval.rows += parts[2].rows;
    eval.features.insert(eval.features.end(), parts[2].features.begin(), parts[2].features.end());
    eval.labels.insert(eval.labels.end(), parts[2].labels.begin(), parts[2].labels.end());
    eval.conditional.clear();
    eval.classes = pool.classes;

    const PredictionTensor full = collect_probabilities(learner_factory(c, tree_params(c)), train, eval, trial_plan(c));
    ReportTable table{{"M", "validation_diversity", "test_gain"}, {}};
    for (std::size_t m : c.m_values) {
        const auto r = scatter_row(m == full.members() ? full : full.prefix(m), eval.labels, parts[1].rows);
        table.add({static_cast<double>(m), r.validation_diversity, r.test_gain});
    }
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
        xs.push_back(row[1]);
        ys.push_back(row[2]);
    }
    const double r2 = pearson_r2(xs, ys);

    const std::filesystem::path out_dir = c.out_dir;
    std::ostringstream csv;
    write_report_csv(csv, table);
    write_file(out_dir / "scatter.csv", csv.str());
    nlohmann::json summary{{"command", "scatter"},
                           {"seed", c.seed},
                           {"config", c.raw},
                           {"r2", r2},
                           {"rows", table.rows.size()},
                           {"split_sizes", {train.rows, parts[1].rows, parts[2].rows}}};
    write_file(out_dir / "scatter.json", detail::render_json(summary));
    if (opt.svg) {
        write_file(out_dir / "scatter.svg", render_svg({{"M", xs, ys}}, {"Validation diversity vs test gain",
                                                                      "validation diversity", "0-1 gain", true}));
    }
    log << "scatter: " << table.rows.size() << " rows, r^2 = " << r2 << "\n";
    return 0;
}

}  // namespace ensdecomp
