#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "ensdecomp/learners/dataset.hpp"
#include "ensdecomp/learners/tree.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

/// Trains one ensemble member on a trial's data with the member's derived
/// seed. Must be callable concurrently.
using LearnerFactory = std::function<DecisionTree(const Dataset& trial_data, std::uint64_t seed)>;

namespace detail {
inline DecisionTree fit_tree(const Dataset& data, const TreeParams& params) {
    return data.is_classification() ? DecisionTree::fit_classification(data, params)
                                    : DecisionTree::fit_regression(data, params);
}
}  // namespace detail

/// Single tree trained on the trial data as given.
inline LearnerFactory tree_factory(TreeParams params) {
    return [params](const Dataset& data, std::uint64_t seed) {
        TreeParams p = params;
        p.seed = seed;
        return detail::fit_tree(data, p);
    };
}

/// Bagging: each member is a tree trained on an n-sample bootstrap of the
/// trial data, drawn with the member seed.
inline LearnerFactory bagging_member_factory(TreeParams params, bool bootstrap = true) {
    return [params, bootstrap](const Dataset& data, std::uint64_t seed) {
        TreeParams p = params;
        p.seed = derive_seed(seed, streams::member);
        if (!bootstrap) return detail::fit_tree(data, p);
        Rng rng(derive_seed(seed, streams::bootstrap));
        const auto idx = bootstrap_indices(data.rows, rng);
        return detail::fit_tree(data.subset(idx), p);
    };
}

/// ceil(sqrt(F)) features per split.
inline int random_forest_features(std::size_t features) {
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(features)) - 1e-12));
}

/// Bagging plus per-split subsampling of ceil(sqrt(F)) features.
inline LearnerFactory random_forest_member_factory(TreeParams params) {
    return [params](const Dataset& data, std::uint64_t seed) {
        TreeParams p = params;
        p.feature_subsample = random_forest_features(data.cols);
        return bagging_member_factory(p, true)(data, seed);
    };
}

}  // namespace ensdecomp
