#pragma once

// Greedy CART for regression (squared error) and classification (Gini), with
// optional per-sample weights and per-split feature subsampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/learners/dataset.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

/// Leaf probabilities are clamped into (eps, 1 - eps) so KL terms stay finite.
inline constexpr double kProbabilityClamp = 1e-9;

struct TreeParams {
    std::optional<int> max_depth;        // unconstrained when empty
    int min_samples_split = 2;
    std::optional<int> feature_subsample;  // features tried per split
    double laplace_alpha = 1.0;
    std::uint64_t seed = 0;
};

class DecisionTree {
public:
    static DecisionTree fit_regression(const Dataset& data, const TreeParams& params,
                                       std::span<const double> sample_weights = {}) {
        if (data.rows == 0) throw EmptyDataError("cannot fit a tree on an empty dataset");
        if (data.is_classification()) throw SchemaError("regression tree needs regression targets");
        DecisionTree tree;
        tree.classes_ = 0;
        Builder(tree, data, params, sample_weights).run();
        return tree;
    }

    static DecisionTree fit_classification(const Dataset& data, const TreeParams& params,
                                           std::span<const double> sample_weights = {}) {
        if (data.rows == 0) throw EmptyDataError("cannot fit a tree on an empty dataset");
        if (!data.is_classification()) throw SchemaError("classification tree needs class labels");
        if (params.laplace_alpha < 0.0) throw DomainError("laplace_alpha must be nonnegative");
        DecisionTree tree;
        tree.classes_ = data.classes;
        Builder(tree, data, params, sample_weights).run();
        return tree;
    }

    bool is_classifier() const noexcept { return classes_ > 0; }
    int classes() const noexcept { return classes_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }

    std::size_t leaf_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
    }

    int depth() const { return depth_from(0); }

    /// Regression output (leaf mean).
    double predict(std::span<const double> x) const { return leaf_for(x).value; }

    /// Full length-k leaf probabilities.
    std::span<const double> class_probabilities(std::span<const double> x) const { return leaf_for(x).probs; }

    /// Minimal (k-1) KL parameterisation of the leaf probabilities.
    Prediction predict_proba(std::span<const double> x) const {
        return restrict_simplex(class_probabilities(x));
    }

    int predict_label(std::span<const double> x) const { return leaf_for(x).label; }

    /// Split feature of the root, -1 for a single-leaf tree.
    int root_feature() const noexcept { return nodes_.front().feature; }
    double root_threshold() const noexcept { return nodes_.front().threshold; }

private:
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        double value = 0.0;
        std::vector<double> probs;
        int label = 0;
    };

    const Node& leaf_for(std::span<const double> x) const {
        std::size_t n = 0;
        while (nodes_[n].feature >= 0) {
            n = x[static_cast<std::size_t>(nodes_[n].feature)] <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
        }
        return nodes_[n];
    }

    int depth_from(std::size_t n) const {
        if (nodes_[n].feature < 0) return 0;
        return 1 + std::max(depth_from(nodes_[n].left), depth_from(nodes_[n].right));
    }

    class Builder {
    public:
        Builder(DecisionTree& tree, const Dataset& data, const TreeParams& params, std::span<const double> weights)
            : tree_(tree), data_(data), params_(params), rng_(params.seed), weights_(data.rows, 1.0) {
            if (params.min_samples_split < 1) throw DomainError("min_samples_split must be positive");
            if (params.max_depth && *params.max_depth < 0) throw DomainError("max_depth must be nonnegative");
            if (params.feature_subsample &&
                (*params.feature_subsample < 1 || static_cast<std::size_t>(*params.feature_subsample) > data.cols)) {
                throw DomainError("feature_subsample must lie in [1, F]");
            }
            if (!weights.empty()) {
                if (weights.size() != data.rows) throw SizeError("sample weight count does not match rows");
                double total = 0.0;
                for (double w : weights) {
                    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("sample weights must be finite and nonnegative");
                    total += w;
                }
                if (total <= 0.0) throw ZeroWeightError("sample weights sum to zero");
                // rescale to mean one so leaf smoothing sees count-like totals
                const double scale = static_cast<double>(data.rows) / total;
                for (std::size_t r = 0; r < data.rows; ++r) weights_[r] = weights[r] * scale;
            }
        }

        void run() {
            std::vector<std::size_t> idx(data_.rows);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            tree_.nodes_.clear();
            build(idx, 0);
        }

    private:
        struct Split {
            int feature = -1;
            double threshold = 0.0;
            double gain = 0.0;
        };

        bool classification() const { return tree_.classes_ > 0; }

        // Weighted impurity mass: SSE for regression, W * gini for classification.
        double impurity(std::span<const std::size_t> idx) const {
            if (classification()) {
                std::vector<double> counts(static_cast<std::size_t>(tree_.classes_), 0.0);
                double total = 0.0;
                for (std::size_t r : idx) {
                    counts[static_cast<std::size_t>(data_.labels[r])] += weights_[r];
                    total += weights_[r];
                }
                return gini_mass(counts, total);
            }
            double w = 0.0, s = 0.0, s2 = 0.0;
            for (std::size_t r : idx) {
                w += weights_[r];
                s += weights_[r] * data_.targets[r];
                s2 += weights_[r] * data_.targets[r] * data_.targets[r];
            }
            return w > 0.0 ? std::max(0.0, s2 - s * s / w) : 0.0;
        }

        static double gini_mass(std::span<const double> counts, double total) {
            if (total <= 0.0) return 0.0;
            double sq = 0.0;
            for (double c : counts) sq += c * c;
            return total - sq / total;
        }

        std::vector<int> candidate_features() {
            std::vector<int> feats(data_.cols);
            std::iota(feats.begin(), feats.end(), 0);
            if (!params_.feature_subsample || static_cast<std::size_t>(*params_.feature_subsample) >= data_.cols) {
                return feats;
            }
            const auto chosen = sample_without_replacement(data_.cols, static_cast<std::size_t>(*params_.feature_subsample), rng_);
            return std::vector<int>(chosen.begin(), chosen.end());
        }

        Split best_split(std::vector<std::size_t>& idx, double parent) {
            Split best;
            const std::size_t n = idx.size();
            const auto k = static_cast<std::size_t>(tree_.classes_);
            for (int f : candidate_features()) {
                const auto fu = static_cast<std::size_t>(f);
                std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                    const double va = data_.at(a, fu), vb = data_.at(b, fu);
                    return va < vb || (va == vb && a < b);
                });
                // running left-side statistics
                std::vector<double> left_counts(k, 0.0), total_counts(k, 0.0);
                double lw = 0.0, ls = 0.0, ls2 = 0.0, tw = 0.0, ts = 0.0, ts2 = 0.0;
                for (std::size_t r : idx) {
                    const double w = weights_[r];
                    tw += w;
                    if (classification()) {
                        total_counts[static_cast<std::size_t>(data_.labels[r])] += w;
                    } else {
                        ts += w * data_.targets[r];
                        ts2 += w * data_.targets[r] * data_.targets[r];
                    }
                }
                for (std::size_t p = 0; p + 1 < n; ++p) {
                    const std::size_t r = idx[p];
                    const double w = weights_[r];
                    lw += w;
                    if (classification()) {
                        left_counts[static_cast<std::size_t>(data_.labels[r])] += w;
                    } else {
                        ls += w * data_.targets[r];
                        ls2 += w * data_.targets[r] * data_.targets[r];
                    }
                    const double v = data_.at(r, fu);
                    const double next = data_.at(idx[p + 1], fu);
                    if (!(v < next)) continue;
                    double child;
                    if (classification()) {
                        std::vector<double> right_counts(k);
                        for (std::size_t c = 0; c < k; ++c) right_counts[c] = total_counts[c] - left_counts[c];
                        child = gini_mass(left_counts, lw) + gini_mass(right_counts, tw - lw);
                    } else {
                        const double rw = tw - lw, rs = ts - ls, rs2 = ts2 - ls2;
                        const double lsse = lw > 0.0 ? std::max(0.0, ls2 - ls * ls / lw) : 0.0;
                        const double rsse = rw > 0.0 ? std::max(0.0, rs2 - rs * rs / rw) : 0.0;
                        child = lsse + rsse;
                    }
                    const double gain = parent - child;
                    if (gain > best.gain) {
                        best.feature = f;
                        best.threshold = v + (next - v) / 2.0;
                        best.gain = gain;
                    }
                }
            }
            return best;
        }

        void make_leaf(Node& node, std::span<const std::size_t> idx) const {
            if (classification()) {
                const auto k = static_cast<std::size_t>(tree_.classes_);
                std::vector<double> counts(k, 0.0);
                double total = 0.0;
                for (std::size_t r : idx) {
                    counts[static_cast<std::size_t>(data_.labels[r])] += weights_[r];
                    total += weights_[r];
                }
                const double alpha = params_.laplace_alpha;
                const double denom = total + static_cast<double>(k) * alpha;
                std::vector<double> probs(k);
                for (std::size_t c = 0; c < k; ++c) {
                    probs[c] = denom > 0.0 ? (counts[c] + alpha) / denom : 1.0 / static_cast<double>(k);
                }
                double s = 0.0;
                for (double& p : probs) {
                    p = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
                    s += p;
                }
                for (double& p : probs) p /= s;
                node.label = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
                node.probs = std::move(probs);
            } else {
                double w = 0.0, s = 0.0;
                for (std::size_t r : idx) {
                    w += weights_[r];
                    s += weights_[r] * data_.targets[r];
                }
                node.value = w > 0.0 ? s / w : 0.0;
            }
        }

        std::size_t build(std::vector<std::size_t>& idx, int depth) {
            const std::size_t id = tree_.nodes_.size();
            tree_.nodes_.emplace_back();
            const double parent = impurity(idx);
            const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
            const bool size_ok = idx.size() >= static_cast<std::size_t>(params_.min_samples_split) && idx.size() >= 2;
            // gains below this are treated as no improvement
            const double min_gain = 1e-12 * std::max(1.0, parent);
            Split split;
            if (depth_ok && size_ok && parent > min_gain) split = best_split(idx, parent);
            if (split.feature < 0 || split.gain <= min_gain) {
                make_leaf(tree_.nodes_[id], idx);
                return id;
            }
            std::vector<std::size_t> left, right;
            const auto fu = static_cast<std::size_t>(split.feature);
            for (std::size_t r : idx) (data_.at(r, fu) <= split.threshold ? left : right).push_back(r);
            std::sort(left.begin(), left.end());
            std::sort(right.begin(), right.end());
            tree_.nodes_[id].feature = split.feature;
            tree_.nodes_[id].threshold = split.threshold;
            const std::size_t l = build(left, depth + 1);
            const std::size_t r = build(right, depth + 1);
            tree_.nodes_[id].left = l;
            tree_.nodes_[id].right = r;
            return id;
        }

        DecisionTree& tree_;
        const Dataset& data_;
        const TreeParams& params_;
        Rng rng_;
        std::vector<double> weights_;
    };

    int classes_ = 0;
    std::vector<Node> nodes_;
};

inline DecisionTree fit_regression_tree(const Dataset& data, const TreeParams& params) {
    return DecisionTree::fit_regression(data, params);
}

inline DecisionTree fit_classification_tree(const Dataset& data, const TreeParams& params) {
    return DecisionTree::fit_classification(data, params);
}

/// Depth-1 classification tree.
inline DecisionTree fit_stump(const Dataset& data, TreeParams params, std::span<const double> sample_weights = {}) {
    params.max_depth = 1;
    return DecisionTree::fit_classification(data, params, sample_weights);
}

}  // namespace ensdecomp
