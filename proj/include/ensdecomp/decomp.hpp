#pragma once

// Exact finite-sample decompositions. Every expectation over training
// conditions is a uniform average over the trials of a grid, which makes each
// identity hold exactly; the reported residual measures floating-point error.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/combiners.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/grid.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

struct AmbiguityReport {
    double ensemble_loss = 0.0;
    double average_loss = 0.0;
    double ambiguity = 0.0;
    double residual = 0.0;
};

/// Bias-variance-diversity terms of an expected ensemble loss.
struct DecompositionReport {
    double expected_loss = 0.0;
    double noise = 0.0;
    double average_bias = 0.0;
    double average_variance = 0.0;
    double diversity = 0.0;
    double residual = 0.0;

    void close() { residual = expected_loss - (noise + average_bias + average_variance - diversity); }
};

/// 0-1 loss analogue: effects rather than terms.
struct EffectReport {
    double expected_loss = 0.0;
    double noise = 0.0;
    double bias_effect = 0.0;
    double variance_effect = 0.0;
    double diversity_effect = 0.0;
    double residual = 0.0;

    void close() { residual = expected_loss - (noise + bias_effect + variance_effect - diversity_effect); }
};

struct SquaredBvcReport {
    double expected_loss = 0.0;
    double ensemble_bias = 0.0;
    double average_variance = 0.0;
    double average_covariance = 0.0;
    double variance_term = 0.0;    // (1/M) * average variance
    double covariance_term = 0.0;  // (1 - 1/M) * average covariance
    double residual = 0.0;
};

struct EnsembleBiasVarianceReport {
    double expected_loss = 0.0;
    double ensemble_bias = 0.0;
    double ensemble_variance = 0.0;
    double average_bias = 0.0;
    double average_variance = 0.0;
    double diversity = 0.0;
    double disparity = 0.0;
    double bias_residual = 0.0;      // ensemble_bias - (average_bias - disparity)
    double variance_residual = 0.0;  // ensemble_variance - (disparity + average_variance - diversity)
    double loss_residual = 0.0;      // expected_loss - (ensemble_bias + ensemble_variance)
};

struct ArithmeticAmbiguityReport {
    double ensemble_ce = 0.0;
    double average_ce = 0.0;
    double ambiguity = 0.0;
    double residual = 0.0;
};

struct DependencyReport {
    double expected_ce = 0.0;
    double average_bias = 0.0;
    double average_variance = 0.0;
    double dependency = 0.0;
    double residual = 0.0;
};

struct BiasVarianceEffectReport {
    int centroid = 0;  // q*, modal class of the member
    int bayes = 0;     // Y*, modal class of Y
    double expected_loss = 0.0;
    double noise = 0.0;
    double bias_effect = 0.0;
    double variance_effect = 0.0;
    double residual = 0.0;
};

struct AmbiguityEffectReport {
    double ensemble_loss = 0.0;
    double average_loss = 0.0;
    double ambiguity_effect = 0.0;
    double residual = 0.0;
};

struct GoodBadReport {
    double ensemble_loss = 0.0;
    double average_loss = 0.0;
    double signed_diversity = 0.0;
    double residual = 0.0;
};

namespace detail {

inline void require_nonempty(const MemberGrid& grid) {
    if (grid.trials() == 0 || grid.members() == 0) throw EmptyGridError("grid has no trials or no members");
}

template <class T>
void require_nonempty(const Grid<T>& grid) {
    if (grid.trials() == 0 || grid.members() == 0) throw EmptyGridError("grid has no trials or no members");
}

/// Per-member weights a_i for Bregman grids. Weights must not vary across
/// trials; unweighted grids give 1/M.
inline std::vector<double> member_weights(const MemberGrid& grid) {
    const std::size_t m = grid.members();
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    if (!grid.weighted()) return w;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        w[i] = grid.weight(0, i);
        for (std::size_t d = 1; d < grid.trials(); ++d) {
            if (grid.weight(d, i) != w[i]) {
                throw DomainError("Bregman decompositions need member weights that are constant across trials");
            }
        }
        total += w[i];
    }
    if (total <= 0.0) throw ZeroWeightError("member weights sum to zero");
    for (double& v : w) v /= total;
    return w;
}

inline Generator kl_for(const Prediction& q) {
    if (q.domain != Domain::Simplex) throw DomainError("expected KL (simplex) predictions");
    return Generator::kl(static_cast<int>(q.size()) + 1);
}

inline void check_class(int y, const Generator& gen) {
    if (y < 0 || y >= gen.classes()) throw DomainError("target class out of range");
}

}  // namespace detail

/// Left centroid of each member's column over trials, q_i*.
inline std::vector<Prediction> member_centroids(const Generator& gen, const MemberGrid& grid) {
    detail::require_nonempty(grid);
    std::vector<Prediction> out;
    out.reserve(grid.members());
    std::vector<Prediction> column(grid.trials());
    for (std::size_t i = 0; i < grid.members(); ++i) {
        for (std::size_t d = 0; d < grid.trials(); ++d) column[d] = grid(d, i);
        out.push_back(left_centroid(gen, column));
    }
    return out;
}

/// Centroid combination of each trial's members, qbar_d.
inline std::vector<Prediction> trial_ensembles(const Generator& gen, const MemberGrid& grid,
                                               std::span<const double> weights) {
    std::vector<Prediction> out;
    out.reserve(grid.trials());
    for (std::size_t d = 0; d < grid.trials(); ++d) out.push_back(left_centroid(gen, grid.row(d), weights));
    return out;
}

/// B(y, qbar) = sum_i w_i B(y, q_i) - sum_i w_i B(qbar, q_i) for the
/// (weighted) centroid combiner qbar.
inline AmbiguityReport ambiguity_decomposition(const Generator& gen, const Prediction& y,
                                               std::span<const Prediction> preds,
                                               std::span<const double> weights = {}) {
    if (preds.empty()) throw EmptyGridError("no predictions");
    const double uniform = 1.0 / static_cast<double>(preds.size());
    const Prediction ens = left_centroid(gen, preds, weights);
    AmbiguityReport r;
    r.ensemble_loss = divergence(gen, y, ens);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double w = weights.empty() ? uniform : weights[i];
        r.average_loss += w * divergence(gen, y, preds[i]);
        r.ambiguity += w * divergence(gen, ens, preds[i]);
    }
    r.residual = r.ensemble_loss - (r.average_loss - r.ambiguity);
    return r;
}

/// Bias-variance-diversity decomposition with Y sampled as `targets`
/// (equally likely). Ybar is their arithmetic mean.
inline DecompositionReport bvd_terms(const Generator& gen, std::span<const Prediction> targets,
                                     const MemberGrid& grid) {
    detail::require_nonempty(grid);
    if (targets.empty()) throw EmptyGridError("no targets");
    const std::vector<double> w = detail::member_weights(grid);
    const auto centroids = member_centroids(gen, grid);
    const auto ensembles = trial_ensembles(gen, grid, w);
    const double inv_d = 1.0 / static_cast<double>(grid.trials());
    const double inv_t = 1.0 / static_cast<double>(targets.size());

    Prediction ybar = targets.size() == 1 ? targets.front() : arithmetic_combine(targets);
    gen.check(ybar);

    DecompositionReport r;
    for (const Prediction& y : targets) r.noise += inv_t * divergence(gen, y, ybar);
    for (const Prediction& ens : ensembles) {
        for (const Prediction& y : targets) r.expected_loss += inv_d * inv_t * divergence(gen, y, ens);
    }
    for (std::size_t i = 0; i < grid.members(); ++i) {
        r.average_bias += w[i] * divergence(gen, ybar, centroids[i]);
        double var = 0.0;
        for (std::size_t d = 0; d < grid.trials(); ++d) var += divergence(gen, centroids[i], grid(d, i));
        r.average_variance += w[i] * inv_d * var;
    }
    for (std::size_t d = 0; d < grid.trials(); ++d) {
        double amb = 0.0;
        for (std::size_t i = 0; i < grid.members(); ++i) amb += w[i] * divergence(gen, ensembles[d], grid(d, i));
        r.diversity += inv_d * amb;
    }
    r.close();
    return r;
}

/// Noise-free form: a single observed target, noise = 0.
inline DecompositionReport bvd_terms(const Generator& gen, const Prediction& y, const MemberGrid& grid) {
    return bvd_terms(gen, std::span<const Prediction>(&y, 1), grid);
}

/// Ueda-Nakano bias-variance-covariance decomposition of the arithmetic-mean
/// ensemble under squared loss. Moments use 1/D normalisation.
inline SquaredBvcReport squared_bvc(double y, const MemberGrid& grid) {
    detail::require_nonempty(grid);
    const std::size_t nd = grid.trials();
    const std::size_t m = grid.members();
    const double inv_d = 1.0 / static_cast<double>(nd);
    const double md = static_cast<double>(m);

    std::vector<double> mean(m, 0.0);
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t i = 0; i < m; ++i) {
            if (grid(d, i).domain != Domain::Reals || grid(d, i).size() != 1) {
                throw DomainError("squared_bvc needs real scalar predictions");
            }
            mean[i] += inv_d * grid(d, i).scalar();
        }
    }
    SquaredBvcReport r;
    double ens_mean = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
        double qbar = 0.0;
        for (std::size_t i = 0; i < m; ++i) qbar += grid(d, i).scalar() / md;
        r.expected_loss += inv_d * (qbar - y) * (qbar - y);
        ens_mean += inv_d * qbar;
    }
    r.ensemble_bias = (ens_mean - y) * (ens_mean - y);

    double var_sum = 0.0;
    double cov_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double c = 0.0;
            for (std::size_t d = 0; d < nd; ++d) {
                c += inv_d * (grid(d, i).scalar() - mean[i]) * (grid(d, j).scalar() - mean[j]);
            }
            if (i == j) {
                var_sum += c;
            } else {
                cov_sum += c;
            }
        }
    }
    r.average_variance = var_sum / md;
    r.average_covariance = m > 1 ? cov_sum / (md * (md - 1.0)) : 0.0;
    r.variance_term = r.average_variance / md;
    r.covariance_term = (1.0 - 1.0 / md) * r.average_covariance;
    r.residual = r.expected_loss - (r.ensemble_bias + r.variance_term + r.covariance_term);
    return r;
}

/// Ensemble bias/variance rewritten through the disparity
/// Delta = (1/M) sum_i B(qbar*, q_i*).
inline EnsembleBiasVarianceReport ensemble_bias_variance(const Generator& gen, const Prediction& y,
                                                         const MemberGrid& grid) {
    detail::require_nonempty(grid);
    const std::vector<double> w = detail::member_weights(grid);
    const auto centroids = member_centroids(gen, grid);
    const auto ensembles = trial_ensembles(gen, grid, w);
    const Prediction ens_centroid = left_centroid(gen, centroids, w);
    const double inv_d = 1.0 / static_cast<double>(grid.trials());

    EnsembleBiasVarianceReport r;
    r.ensemble_bias = divergence(gen, y, ens_centroid);
    for (const Prediction& e : ensembles) {
        r.ensemble_variance += inv_d * divergence(gen, ens_centroid, e);
        r.expected_loss += inv_d * divergence(gen, y, e);
    }
    for (std::size_t i = 0; i < grid.members(); ++i) {
        r.average_bias += w[i] * divergence(gen, y, centroids[i]);
        r.disparity += w[i] * divergence(gen, ens_centroid, centroids[i]);
        for (std::size_t d = 0; d < grid.trials(); ++d) {
            r.average_variance += w[i] * inv_d * divergence(gen, centroids[i], grid(d, i));
            r.diversity += w[i] * inv_d * divergence(gen, ensembles[d], grid(d, i));
        }
    }
    r.bias_residual = r.ensemble_bias - (r.average_bias - r.disparity);
    r.variance_residual = r.ensemble_variance - (r.disparity + r.average_variance - r.diversity);
    r.loss_residual = r.expected_loss - (r.ensemble_bias + r.ensemble_variance);
    return r;
}

/// Cross-entropy against a one-hot class `y` for the normalised geometric
/// mean ensemble of KL predictions.
inline DecompositionReport cross_entropy_decomp(int y, const MemberGrid& grid) {
    detail::require_nonempty(grid);
    const Generator gen = detail::kl_for(grid(0, 0));
    detail::check_class(y, gen);
    const auto c = static_cast<std::size_t>(y);
    const std::vector<double> w = detail::member_weights(grid);
    const auto centroids = member_centroids(gen, grid);
    const auto ensembles = trial_ensembles(gen, grid, w);
    const double inv_d = 1.0 / static_cast<double>(grid.trials());

    DecompositionReport r;
    for (const Prediction& e : ensembles) r.expected_loss -= inv_d * std::log(class_probability(e, c));
    for (std::size_t i = 0; i < grid.members(); ++i) {
        r.average_bias -= w[i] * std::log(class_probability(centroids[i], c));
        for (std::size_t d = 0; d < grid.trials(); ++d) {
            r.average_variance += w[i] * inv_d * divergence(gen, centroids[i], grid(d, i));
            r.diversity += w[i] * inv_d * divergence(gen, ensembles[d], grid(d, i));
        }
    }
    r.close();
    return r;
}

/// Cross-entropy of the arithmetic-mean ensemble; the ambiguity is
/// ln(AM / GM) of the target-class probabilities.
inline ArithmeticAmbiguityReport arithmetic_ce_ambiguity(int y, std::span<const Prediction> preds) {
    if (preds.empty()) throw EmptyGridError("no predictions");
    const Generator gen = detail::kl_for(preds.front());
    detail::check_class(y, gen);
    const auto c = static_cast<std::size_t>(y);
    const double inv_m = 1.0 / static_cast<double>(preds.size());
    double am = 0.0;
    double mean_log = 0.0;
    for (const Prediction& q : preds) {
        gen.check(q);
        const double p = class_probability(q, c);
        am += inv_m * p;
        mean_log += inv_m * std::log(p);
    }
    ArithmeticAmbiguityReport r;
    r.ensemble_ce = -std::log(am);
    r.average_ce = -mean_log;
    r.ambiguity = std::log(am) - mean_log;
    r.residual = r.ensemble_ce - (r.average_ce - r.ambiguity);
    return r;
}

/// Expected cross-entropy of the arithmetic-mean ensemble with the
/// target-dependent "dependency" term in place of diversity.
inline DependencyReport dependency_decomp(int y, const MemberGrid& grid) {
    detail::require_nonempty(grid);
    if (grid.weighted()) throw DomainError("dependency decomposition is defined for uniform averaging");
    const Generator gen = detail::kl_for(grid(0, 0));
    detail::check_class(y, gen);
    const auto c = static_cast<std::size_t>(y);
    const auto centroids = member_centroids(gen, grid);
    const double inv_d = 1.0 / static_cast<double>(grid.trials());
    const double inv_m = 1.0 / static_cast<double>(grid.members());

    DependencyReport r;
    for (std::size_t d = 0; d < grid.trials(); ++d) {
        const auto amb = arithmetic_ce_ambiguity(y, grid.row(d));
        r.expected_ce += inv_d * amb.ensemble_ce;
        r.dependency += inv_d * amb.ambiguity;
    }
    for (std::size_t i = 0; i < grid.members(); ++i) {
        r.average_bias -= inv_m * std::log(class_probability(centroids[i], c));
        for (std::size_t d = 0; d < grid.trials(); ++d) {
            r.average_variance += inv_m * inv_d * divergence(gen, centroids[i], grid(d, i));
        }
    }
    r.residual = r.expected_ce - (r.average_bias + r.average_variance - r.dependency);
    return r;
}

/// James & Hastie bias/variance effects for one model whose prediction has
/// class distribution `member` over training conditions.
inline BiasVarianceEffectReport effect_bv_01(const LabelDistribution& y, const LabelDistribution& member) {
    if (y.classes() != member.classes()) throw DomainError("distributions have different class counts");
    BiasVarianceEffectReport r;
    r.bayes = y.mode();
    r.centroid = member.mode();
    for (int c = 0; c < y.classes(); ++c) r.expected_loss += member[static_cast<std::size_t>(c)] * y.expected_zero_one(c);
    r.noise = y.expected_zero_one(r.bayes);
    const double centroid_loss = y.expected_zero_one(r.centroid);
    r.bias_effect = centroid_loss - r.noise;
    r.variance_effect = r.expected_loss - centroid_loss;
    r.residual = r.expected_loss - (r.noise + r.bias_effect + r.variance_effect);
    return r;
}

/// L(y, qbar) = average loss - ambiguity-effect; weights (if any) are
/// normalised to sum to one.
inline AmbiguityEffectReport ambiguity_effect(int y, std::span<const int> labels, int winner,
                                              std::span<const double> weights = {}) {
    if (labels.empty()) throw EmptyGridError("no member labels");
    if (!weights.empty() && weights.size() != labels.size()) throw SizeError("label and weight counts differ");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!weights.empty() && total <= 0.0) throw ZeroWeightError("member weights sum to zero");
    AmbiguityEffectReport r;
    r.ensemble_loss = winner == y ? 0.0 : 1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double a = weights.empty() ? 1.0 / static_cast<double>(labels.size()) : weights[i] / total;
        r.average_loss += a * (labels[i] == y ? 0.0 : 1.0);
    }
    r.ambiguity_effect = r.average_loss - r.ensemble_loss;
    r.residual = r.ensemble_loss - (r.average_loss - r.ambiguity_effect);
    return r;
}

namespace detail {

/// argmax_c sum_d w_{d,i} [label_{d,i} = c], lowest class on ties.
inline int modal_label(const LabelGrid& grid, std::size_t member, int k) {
    std::vector<double> tally(static_cast<std::size_t>(k), 0.0);
    for (std::size_t d = 0; d < grid.trials(); ++d) {
        tally[static_cast<std::size_t>(grid(d, member))] += grid.weight(d, member);
    }
    return static_cast<int>(std::max_element(tally.begin(), tally.end()) - tally.begin());
}

}  // namespace detail

/// Bias-variance-diversity effect decomposition for a (weighted) plurality
/// vote, given the winning label of every trial.
inline EffectReport bvd_effect_01(const LabelDistribution& y, const LabelGrid& grid, std::span<const int> winners) {
    detail::require_nonempty(grid);
    if (winners.size() != grid.trials()) throw SizeError("one winner per trial is required");
    const int k = y.classes();
    const std::size_t nd = grid.trials();
    const std::size_t m = grid.members();
    const double inv_d = 1.0 / static_cast<double>(nd);

    // a_{d,i}: per-trial normalised weights
    std::vector<double> a(nd * m);
    for (std::size_t d = 0; d < nd; ++d) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            detail::check_label(grid(d, i), k);
            total += grid.weight(d, i);
        }
        if (total <= 0.0) throw ZeroWeightError("all member weights of a trial are zero");
        for (std::size_t i = 0; i < m; ++i) a[d * m + i] = grid.weight(d, i) / total;
    }

    EffectReport r;
    r.noise = y.expected_zero_one(y.mode());
    for (std::size_t d = 0; d < nd; ++d) {
        detail::check_label(winners[d], k);
        const double ens_loss = y.expected_zero_one(winners[d]);
        r.expected_loss += inv_d * ens_loss;
        double avg = 0.0;
        for (std::size_t i = 0; i < m; ++i) avg += a[d * m + i] * y.expected_zero_one(grid(d, i));
        r.diversity_effect += inv_d * (avg - ens_loss);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double centroid_loss = y.expected_zero_one(detail::modal_label(grid, i, k));
        double mean_a = 0.0;
        double var = 0.0;
        for (std::size_t d = 0; d < nd; ++d) {
            mean_a += inv_d * a[d * m + i];
            var += inv_d * a[d * m + i] * (y.expected_zero_one(grid(d, i)) - centroid_loss);
        }
        r.bias_effect += mean_a * (centroid_loss - r.noise);
        r.variance_effect += var;
    }
    r.close();
    return r;
}

/// Winners of each trial's (weighted) plurality vote.
inline std::vector<int> trial_winners(const LabelGrid& grid, int k, Rng& tiebreak) {
    std::vector<int> winners;
    winners.reserve(grid.trials());
    for (std::size_t d = 0; d < grid.trials(); ++d) {
        const VoteOutcome v = grid.weighted() ? weighted_plurality_vote(grid.row(d), grid.weight_row(d), k, tiebreak)
                                              : plurality_vote(grid.row(d), k, tiebreak);
        winners.push_back(v.winner);
    }
    return winners;
}

inline EffectReport bvd_effect_01(const LabelDistribution& y, const LabelGrid& grid, Rng& tiebreak) {
    detail::require_nonempty(grid);
    const auto winners = trial_winners(grid, y.classes(), tiebreak);
    return bvd_effect_01(y, grid, winners);
}

/// Good/bad diversity for binary +-1 labels and a majority vote winner.
inline GoodBadReport good_bad_diversity(int y, std::span<const int> labels, int winner) {
    auto check = [](int v) {
        if (v != 1 && v != -1) throw DomainError("good/bad diversity needs +-1 labels");
    };
    check(y);
    check(winner);
    if (labels.empty()) throw EmptyGridError("no member labels");
    const double inv_m = 1.0 / static_cast<double>(labels.size());
    GoodBadReport r;
    double disagreement = 0.0;
    for (int q : labels) {
        check(q);
        r.average_loss += inv_m * (q != y ? 1.0 : 0.0);
        disagreement += inv_m * (q != winner ? 1.0 : 0.0);
    }
    r.ensemble_loss = winner != y ? 1.0 : 0.0;
    r.signed_diversity = static_cast<double>(y * winner) * disagreement;
    r.residual = r.ensemble_loss - (r.average_loss - r.signed_diversity);
    return r;
}

/// Mean discrepancy over all ordered pairs i != j.
template <class T, class Delta>
double pairwise_diversity(Delta&& delta, std::span<const T> preds) {
    const std::size_t m = preds.size();
    if (m < 2) throw SizeError("pairwise diversity needs at least two members");
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) sum += delta(preds[i], preds[j]);
        }
    }
    return sum / (static_cast<double>(m) * static_cast<double>(m - 1));
}

}  // namespace ensdecomp
