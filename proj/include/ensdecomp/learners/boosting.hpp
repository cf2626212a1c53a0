#pragma once

// Discrete AdaBoost and binary LogitBoost over depth-limited trees. Both
// expose every member as a (class label, weight) vote at a point so that the
// weighted 0-1 effect decomposition applies directly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ensdecomp/errors.hpp"
#include "ensdecomp/learners/dataset.hpp"
#include "ensdecomp/learners/tree.hpp"

namespace ensdecomp {

/// Largest AdaBoost member weight, reached when a round has zero error.
inline const double kMaxAdaBoostAlpha = 0.5 * std::log(1e8);
inline constexpr double kLogitBoostMinWeight = 1e-8;
inline constexpr double kLogitBoostMaxResponse = 4.0;

struct MemberVote {
    int label = 0;  // class in {0, 1}
    double weight = 0.0;
};

class BoostedEnsemble {
public:
    enum class Kind { AdaBoost, LogitBoost };

    Kind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return members_.size(); }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    /// Weighted training error of each AdaBoost round.
    const std::vector<double>& weighted_errors() const noexcept { return errors_; }
    const DecisionTree& member(std::size_t i) const { return members_[i]; }

    /// LogitBoost additive component g_i(x); for AdaBoost alpha_i * h_i(x) with h in {-1, +1}.
    double component(std::size_t i, std::span<const double> x) const {
        if (kind_ == Kind::AdaBoost) return alphas_[i] * (members_[i].predict_label(x) == 1 ? 1.0 : -1.0);
        return 0.5 * members_[i].predict(x);
    }

    /// Member i as a classifier/weight pair: sign and magnitude of g_i for
    /// LogitBoost, (h_i, alpha_i) for AdaBoost.
    MemberVote vote(std::size_t i, std::span<const double> x) const {
        if (kind_ == Kind::AdaBoost) return {members_[i].predict_label(x), alphas_[i]};
        return split_sign_magnitude(component(i, x));
    }

    static MemberVote split_sign_magnitude(double g) { return {g >= 0.0 ? 1 : 0, std::abs(g)}; }

    /// Ensemble decision sign(sum_i g_i(x)), class 1 when the sum is zero.
    int predict(std::span<const double> x, std::size_t members = static_cast<std::size_t>(-1)) const {
        double f = 0.0;
        const std::size_t m = std::min(members, members_.size());
        for (std::size_t i = 0; i < m; ++i) f += component(i, x);
        return f >= 0.0 ? 1 : 0;
    }

private:
    friend BoostedEnsemble fit_adaboost(const Dataset&, std::size_t, const TreeParams&);
    friend BoostedEnsemble fit_logitboost(const Dataset&, std::size_t, const TreeParams&);

    Kind kind_ = Kind::AdaBoost;
    std::vector<DecisionTree> members_;
    std::vector<double> alphas_;
    std::vector<double> errors_;
};

namespace detail {
inline void require_binary(const Dataset& data) {
    if (data.rows == 0) throw EmptyDataError("cannot boost on an empty dataset");
    if (!data.is_classification() || data.classes != 2) throw SchemaError("boosting needs binary class labels");
}
}  // namespace detail

/// Discrete AdaBoost with weighted trees (stumps by default). Stops after a
/// round with weighted error >= 0.5 (kept with alpha 0) or error 0 (alpha
/// capped at kMaxAdaBoostAlpha).
inline BoostedEnsemble fit_adaboost(const Dataset& data, std::size_t rounds, const TreeParams& params) {
    detail::require_binary(data);
    TreeParams p = params;
    if (!p.max_depth) p.max_depth = 1;
    BoostedEnsemble ens;
    ens.kind_ = BoostedEnsemble::Kind::AdaBoost;
    const std::size_t n = data.rows;
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    for (std::size_t t = 0; t < rounds; ++t) {
        DecisionTree h = DecisionTree::fit_classification(data, p, w);
        std::vector<int> pred(n);
        double err = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            pred[r] = h.predict_label(data.row(r));
            if (pred[r] != data.labels[r]) err += w[r];
        }
        double alpha;
        if (err >= 0.5) {
            alpha = 0.0;
        } else if (err <= 0.0) {
            alpha = kMaxAdaBoostAlpha;
        } else {
            alpha = std::min(0.5 * std::log((1.0 - err) / err), kMaxAdaBoostAlpha);
        }
        ens.members_.push_back(std::move(h));
        ens.alphas_.push_back(alpha);
        ens.errors_.push_back(err);
        if (err >= 0.5 || err <= 0.0) break;
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            w[r] *= std::exp(pred[r] == data.labels[r] ? -alpha : alpha);
            total += w[r];
        }
        for (double& v : w) v /= total;
    }
    return ens;
}

/// Binary LogitBoost (Newton steps on the logistic loss) with weighted
/// regression trees fitted to clipped working responses.
inline BoostedEnsemble fit_logitboost(const Dataset& data, std::size_t rounds, const TreeParams& params) {
    detail::require_binary(data);
    TreeParams p = params;
    if (!p.max_depth) p.max_depth = 1;
    BoostedEnsemble ens;
    ens.kind_ = BoostedEnsemble::Kind::LogitBoost;
    const std::size_t n = data.rows;
    std::vector<double> f(n, 0.0);
    Dataset work;
    work.rows = n;
    work.cols = data.cols;
    work.features = data.features;
    work.targets.assign(n, 0.0);
    std::vector<double> w(n);
    for (std::size_t t = 0; t < rounds; ++t) {
        for (std::size_t r = 0; r < n; ++r) {
            const double prob = 1.0 / (1.0 + std::exp(-2.0 * f[r]));
            const double pq = prob * (1.0 - prob);
            w[r] = std::max(pq, kLogitBoostMinWeight);
            const double y = data.labels[r] == 1 ? 1.0 : 0.0;
            work.targets[r] = std::clamp((y - prob) / w[r], -kLogitBoostMaxResponse, kLogitBoostMaxResponse);
        }
        DecisionTree g = DecisionTree::fit_regression(work, p, w);
        for (std::size_t r = 0; r < n; ++r) f[r] += 0.5 * g.predict(data.row(r));
        ens.members_.push_back(std::move(g));
        ens.alphas_.push_back(0.0);
    }
    // alphas_ hold the mean |g_i| over the training data as a summary
    for (std::size_t i = 0; i < ens.members_.size(); ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += std::abs(ens.component(i, data.row(r)));
        ens.alphas_[i] = s / static_cast<double>(n);
    }
    return ens;
}

}  // namespace ensdecomp
