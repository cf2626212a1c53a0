#pragma once

// Building prediction tensors over repeated trials and averaging the exact
// per-point decompositions over test points.
//
// Trial d trains on a subsample (without replacement) of the training data;
// each member i of the trial is produced by the learner factory from that
// subsample with seed derive_seed(master, streams::member, d, i). Every
// member is trained once and predicts all test points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/decomp.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/grid.hpp"
#include "ensdecomp/learners/boosting.hpp"
#include "ensdecomp/learners/dataset.hpp"
#include "ensdecomp/learners/factories.hpp"
#include "ensdecomp/learners/tree.hpp"
#include "ensdecomp/random.hpp"
#include "ensdecomp/tensor.hpp"

namespace ensdecomp {

struct TrialPlan {
    std::size_t trials = 1;
    std::size_t ensemble_size = 1;
    double subsample_fraction = 0.9;
    bool bootstrap = true;  // members resample their trial data (consumed by the learner factory)
    std::uint64_t master_seed = 0;

    void validate() const {
        if (trials == 0 || ensemble_size == 0) throw SizeError("plan needs at least one trial and one member");
        if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
            throw SizeError("subsample fraction must lie in (0, 1]");
        }
    }

    std::uint64_t member_seed(std::size_t d, std::size_t i) const {
        return derive_seed(master_seed, streams::member, d, i);
    }
};

/// Number of worker threads: ENSDECOMP_THREADS when set, else the hardware
/// concurrency.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("ENSDECOMP_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(t) for t in [0, count) on up to worker_count() threads. The
/// exception of the lowest failing index is rethrown.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(worker_count(), count);
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t t = 0; t < count; ++t) {
            try {
                body(t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < count; t += workers) {
                    try {
                        body(t);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// Subsample used by trial d.
inline Dataset trial_data(const Dataset& train, const TrialPlan& plan, std::size_t d) {
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(plan.subsample_fraction * static_cast<double>(train.rows))));
    Rng rng(derive_seed(plan.master_seed, streams::trial_subsample, d));
    const auto idx = sample_without_replacement(train.rows, std::min(count, train.rows), rng);
    return train.subset(idx);
}

/// Builds the D x M x N tensor extract(member, x_j) for every trial d and
/// member i.
template <class T, class Extract>
Tensor3<T> collect_predictions(const LearnerFactory& factory, const Dataset& train, const Dataset& test,
                               const TrialPlan& plan, Extract extract) {
    plan.validate();
    train.validate();
    test.validate();
    if (train.cols != test.cols) throw SchemaError("train and test have different feature counts");
    Tensor3<T> out(plan.trials, plan.ensemble_size, test.rows);
    parallel_for(plan.trials, [&](std::size_t d) {
        const Dataset data = trial_data(train, plan, d);
        for (std::size_t i = 0; i < plan.ensemble_size; ++i) {
            try {
                const DecisionTree member = factory(data, plan.member_seed(d, i));
                for (std::size_t j = 0; j < test.rows; ++j) out(d, i, j) = extract(member, test.row(j));
            } catch (const std::exception& e) {
                throw LearnerError(e.what(), d, i);
            }
        }
    });
    return out;
}

/// Regression predictions tagged for `gen` (positive losses reject
/// non-positive predictions).
inline PredictionTensor collect_regression(const LearnerFactory& factory, const Dataset& train, const Dataset& test,
                                           const TrialPlan& plan, const Generator& gen) {
    auto t = collect_predictions<Prediction>(factory, train, test, plan, [&](const DecisionTree& m, auto x) {
        return gen.make(m.predict(x));
    });
    t.loss = std::string(to_string(gen.kind()));
    return t;
}

/// Leaf class probabilities in minimal KL form.
inline PredictionTensor collect_probabilities(const LearnerFactory& factory, const Dataset& train,
                                              const Dataset& test, const TrialPlan& plan) {
    auto t = collect_predictions<Prediction>(factory, train, test, plan,
                                             [](const DecisionTree& m, auto x) { return m.predict_proba(x); });
    t.loss = "kl";
    t.classes = train.classes;
    return t;
}

inline LabelTensor collect_labels(const LearnerFactory& factory, const Dataset& train, const Dataset& test,
                                  const TrialPlan& plan) {
    auto t = collect_predictions<int>(factory, train, test, plan,
                                      [](const DecisionTree& m, auto x) { return m.predict_label(x); });
    t.loss = "zero-one";
    t.classes = train.classes;
    return t;
}

using BoostingFit = std::function<BoostedEnsemble(const Dataset& trial_data, std::uint64_t seed)>;

/// Label tensor of a boosted ensemble: one boosting run per trial, member i is
/// round i, entry weights are the member's vote weight at x_j. Runs that stop
/// early are padded with zero-weight copies of their last round.
inline LabelTensor collect_boosted(const BoostingFit& fit, const Dataset& train, const Dataset& test,
                                   const TrialPlan& plan) {
    plan.validate();
    train.validate();
    test.validate();
    LabelTensor out(plan.trials, plan.ensemble_size, test.rows);
    out.loss = "zero-one";
    out.classes = 2;
    for (std::size_t d = 0; d < plan.trials; ++d) {
        for (std::size_t i = 0; i < plan.ensemble_size; ++i) {
            for (std::size_t j = 0; j < test.rows; ++j) out.set_weight(d, i, j, 0.0);
        }
    }
    parallel_for(plan.trials, [&](std::size_t d) {
        BoostedEnsemble ens;
        try {
            ens = fit(trial_data(train, plan, d), plan.member_seed(d, 0));
        } catch (const std::exception& e) {
            throw LearnerError(e.what(), d, 0);
        }
        if (ens.size() == 0) throw LearnerError("boosting produced no members", d, 0);
        for (std::size_t i = 0; i < plan.ensemble_size; ++i) {
            const std::size_t src = std::min(i, ens.size() - 1);
            for (std::size_t j = 0; j < test.rows; ++j) {
                const MemberVote v = ens.vote(src, test.row(j));
                out(d, i, j) = v.label;
                out.set_weight(d, i, j, i < ens.size() ? v.weight : 0.0);
            }
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Estimators

template <class Report>
struct Summary {
    Report mean;
    Report standard_error;  // sample sd over test points / sqrt(N)
};

inline std::array<double*, 6> report_fields(DecompositionReport& r) {
    return {&r.expected_loss, &r.noise, &r.average_bias, &r.average_variance, &r.diversity, &r.residual};
}
inline std::array<double*, 6> report_fields(EffectReport& r) {
    return {&r.expected_loss, &r.noise, &r.bias_effect, &r.variance_effect, &r.diversity_effect, &r.residual};
}
inline std::array<double*, 5> report_fields(DependencyReport& r) {
    return {&r.expected_ce, &r.average_bias, &r.average_variance, &r.dependency, &r.residual};
}

/// Mean and standard error of each term over test points. The mean's
/// residual is recomputed from the averaged terms.
template <class Report>
Summary<Report> summarize(std::span<const Report> points) {
    Summary<Report> s;
    if (points.empty()) return s;
    const double n = static_cast<double>(points.size());
    auto mean_fields = report_fields(s.mean);
    auto se_fields = report_fields(s.standard_error);
    for (std::size_t f = 0; f < mean_fields.size(); ++f) {
        double m = 0.0;
        for (Report p : points) m += *report_fields(p)[f];
        m /= n;
        double ss = 0.0;
        for (Report p : points) {
            const double dv = *report_fields(p)[f] - m;
            ss += dv * dv;
        }
        *mean_fields[f] = m;
        *se_fields[f] = points.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    }
    if constexpr (requires { s.mean.close(); }) {
        s.mean.close();
    } else {
        s.mean.residual = s.mean.expected_ce - (s.mean.average_bias + s.mean.average_variance - s.mean.dependency);
    }
    return s;
}

/// q_i*(x_j) = grad_inverse((1/D) sum_d grad(q_{d,i,j})), indexed [i][j].
inline std::vector<std::vector<Prediction>> estimate_member_centroids(const PredictionTensor& t, const Generator& gen) {
    std::vector<std::vector<Prediction>> out(t.members(), std::vector<Prediction>(t.points()));
    std::vector<Prediction> column(t.trials());
    for (std::size_t i = 0; i < t.members(); ++i) {
        for (std::size_t j = 0; j < t.points(); ++j) {
            for (std::size_t d = 0; d < t.trials(); ++d) column[d] = t(d, i, j);
            out[i][j] = left_centroid(gen, column);
        }
    }
    return out;
}

inline std::vector<DecompositionReport> estimate_bvd_pointwise(const PredictionTensor& t, const Generator& gen,
                                                               std::span<const Prediction> targets) {
    if (targets.size() != t.points()) throw SizeError("one target per test point is required");
    std::vector<DecompositionReport> out(t.points());
    for (std::size_t j = 0; j < t.points(); ++j) out[j] = bvd_terms(gen, targets[j], t.grid_at(j));
    return out;
}

/// Bregman bias/variance/diversity averaged over test points.
inline DecompositionReport estimate_bvd(const PredictionTensor& t, const Generator& gen,
                                        std::span<const Prediction> targets) {
    const auto points = estimate_bvd_pointwise(t, gen, targets);
    return summarize<DecompositionReport>(points).mean;
}

/// Cross-entropy decomposition (normalised geometric mean combiner) per test point.
inline std::vector<DecompositionReport> estimate_cross_entropy_pointwise(const PredictionTensor& t,
                                                                         std::span<const int> labels) {
    if (labels.size() != t.points()) throw SizeError("one label per test point is required");
    std::vector<DecompositionReport> out(t.points());
    for (std::size_t j = 0; j < t.points(); ++j) out[j] = cross_entropy_decomp(labels[j], t.grid_at(j));
    return out;
}

/// Arithmetic-mean combiner decomposition per test point.
inline std::vector<DependencyReport> estimate_dependency_pointwise(const PredictionTensor& t,
                                                                   std::span<const int> labels) {
    if (labels.size() != t.points()) throw SizeError("one label per test point is required");
    std::vector<DependencyReport> out(t.points());
    for (std::size_t j = 0; j < t.points(); ++j) out[j] = dependency_decomp(labels[j], t.grid_at(j));
    return out;
}

/// 0-1 effect decomposition per test point; vote ties use
/// derive_seed(tiebreak_seed, streams::tiebreak, j).
inline std::vector<EffectReport> estimate_effects_01_pointwise(const LabelTensor& t,
                                                               std::span<const LabelDistribution> targets,
                                                               std::uint64_t tiebreak_seed) {
    if (targets.size() != t.points()) throw SizeError("one target per test point is required");
    std::vector<EffectReport> out(t.points());
    for (std::size_t j = 0; j < t.points(); ++j) {
        Rng rng(derive_seed(tiebreak_seed, streams::tiebreak, j));
        out[j] = bvd_effect_01(targets[j], t.grid_at(j), rng);
    }
    return out;
}

inline std::vector<LabelDistribution> point_masses(std::span<const int> labels, int k) {
    std::vector<LabelDistribution> out;
    out.reserve(labels.size());
    for (int y : labels) out.push_back(LabelDistribution::point_mass(y, k));
    return out;
}

inline EffectReport estimate_effects_01(const LabelTensor& t, std::span<const LabelDistribution> targets,
                                        std::uint64_t tiebreak_seed) {
    const auto points = estimate_effects_01_pointwise(t, targets, tiebreak_seed);
    return summarize<EffectReport>(points).mean;
}

/// Noise-free form with one observed label per test point.
inline EffectReport estimate_effects_01(const LabelTensor& t, std::span<const int> labels, int k,
                                        std::uint64_t tiebreak_seed) {
    const auto targets = point_masses(labels, k);
    return estimate_effects_01(t, targets, tiebreak_seed);
}

/// Applies `estimate` to the nested prefix ensembles of sizes m_values
/// (ascending, each <= M).
template <class T, class Estimate>
auto sweep_ensemble_size(const Tensor3<T>& t, std::span<const std::size_t> m_values, Estimate&& estimate) {
    using Result = decltype(estimate(t));
    std::vector<Result> out;
    std::size_t last = 0;
    for (std::size_t m : m_values) {
        if (m == 0 || m > t.members()) throw SizeError("ensemble size " + std::to_string(m) + " exceeds the tensor");
        if (m <= last) throw SizeError("ensemble sizes must be strictly ascending");
        last = m;
        out.push_back(m == t.members() ? estimate(t) : estimate(t.prefix(m)));
    }
    return out;
}

inline std::vector<DecompositionReport> sweep_bvd(const PredictionTensor& t, const Generator& gen,
                                                  std::span<const Prediction> targets,
                                                  std::span<const std::size_t> m_values) {
    return sweep_ensemble_size(t, m_values, [&](const PredictionTensor& p) { return estimate_bvd(p, gen, targets); });
}

inline std::vector<EffectReport> sweep_effects_01(const LabelTensor& t, std::span<const LabelDistribution> targets,
                                                  std::uint64_t tiebreak_seed,
                                                  std::span<const std::size_t> m_values) {
    return sweep_ensemble_size(
        t, m_values, [&](const LabelTensor& p) { return estimate_effects_01(p, targets, tiebreak_seed); });
}

// ---------------------------------------------------------------------------
// Disparity

struct DisparityEstimate {
    double disparity = 0.0;       // plug-in estimate, >= 0
    double bias_corrected = 0.0;  // 2 * plug-in - bootstrap mean
    double standard_error = 0.0;  // sd of bootstrap replicates
};

/// Disparity (1/N) sum_j (1/M) sum_i B(qbar*_j, q_i*(x_j)) with a trial
/// bootstrap (resampling the D trials) for its standard error and bias.
inline DisparityEstimate estimate_disparity(const PredictionTensor& t, const Generator& gen, std::size_t replicates,
                                            std::uint64_t seed) {
    const std::size_t nd = t.trials(), m = t.members(), n = t.points();
    if (nd * m * n == 0) throw EmptyGridError("empty tensor");
    const std::size_t dim = gen.dimension();
    // duals[(d * m + i) * n + j][c]
    std::vector<double> duals(nd * m * n * dim);
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const auto eta = grad(gen, t(d, i, j));
                std::copy(eta.values.begin(), eta.values.end(), duals.begin() + static_cast<std::ptrdiff_t>(((d * m + i) * n + j) * dim));
            }
        }
    }
    auto disparity_for = [&](std::span<const std::size_t> trial_idx) {
        const double inv = 1.0 / static_cast<double>(trial_idx.size());
        double total = 0.0;
        std::vector<Prediction> centroids(m);
        DualPoint mean_eta{std::vector<double>(dim)};
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> ens(dim, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                std::fill(mean_eta.values.begin(), mean_eta.values.end(), 0.0);
                for (std::size_t d : trial_idx) {
                    for (std::size_t c = 0; c < dim; ++c) mean_eta.values[c] += inv * duals[((d * m + i) * n + j) * dim + c];
                }
                for (std::size_t c = 0; c < dim; ++c) ens[c] += mean_eta.values[c] / static_cast<double>(m);
                centroids[i] = grad_inverse(gen, mean_eta);
            }
            const Prediction ens_centroid = grad_inverse(gen, DualPoint{ens});
            for (std::size_t i = 0; i < m; ++i) total += divergence(gen, ens_centroid, centroids[i]) / static_cast<double>(m);
        }
        return total / static_cast<double>(n);
    };

    std::vector<std::size_t> all(nd);
    for (std::size_t d = 0; d < nd; ++d) all[d] = d;
    DisparityEstimate est;
    est.disparity = disparity_for(all);
    if (replicates < 2) {
        est.bias_corrected = est.disparity;
        return est;
    }
    Rng rng(derive_seed(seed, streams::bootstrap));
    std::vector<double> reps(replicates);
    for (auto& r : reps) r = disparity_for(bootstrap_indices(nd, rng));
    double mean = 0.0;
    for (double r : reps) mean += r;
    mean /= static_cast<double>(replicates);
    double ss = 0.0;
    for (double r : reps) ss += (r - mean) * (r - mean);
    est.standard_error = std::sqrt(ss / static_cast<double>(replicates - 1));
    est.bias_corrected = 2.0 * est.disparity - mean;
    return est;
}

}  // namespace ensdecomp
