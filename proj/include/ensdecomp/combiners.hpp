#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

/// Result of a (weighted) plurality vote.
struct VoteOutcome {
    int winner = 0;
    std::vector<double> tally;  // per-class weighted counts
    bool tie = false;
};

/// Centroid combiner: the uniform left Bregman centroid of the members.
inline Prediction centroid_combine(const Generator& gen, std::span<const Prediction> preds) {
    return left_centroid(gen, preds);
}

/// Componentwise arithmetic mean of same-domain predictions.
inline Prediction arithmetic_combine(std::span<const Prediction> preds) {
    if (preds.empty()) throw DomainError("arithmetic mean of an empty set");
    const Prediction& first = preds.front();
    std::vector<double> mean(first.size(), 0.0);
    for (const Prediction& p : preds) {
        if (p.domain != first.domain || p.size() != first.size()) {
            throw DomainError("arithmetic mean over mixed domains");
        }
        for (std::size_t c = 0; c < p.size(); ++c) mean[c] += p[c];
    }
    for (double& v : mean) v /= static_cast<double>(preds.size());
    return Prediction(std::move(mean), first.domain);
}

namespace detail {

inline VoteOutcome resolve_tally(std::vector<double> tally, Rng& tiebreak) {
    double best = tally.front();
    for (double t : tally) best = std::max(best, t);
    std::vector<int> tied;
    for (std::size_t c = 0; c < tally.size(); ++c) {
        if (tally[c] == best) tied.push_back(static_cast<int>(c));
    }
    VoteOutcome out;
    out.tally = std::move(tally);
    out.tie = tied.size() > 1;
    out.winner = out.tie ? tied[uniform_index(tiebreak, tied.size())] : tied.front();
    return out;
}

inline void check_label(int label, int k) {
    if (label < 0 || label >= k) throw DomainError("class label out of range");
}

}  // namespace detail

/// Plurality vote over class labels in [0, k). Ties are broken uniformly at
/// random with `tiebreak`; a draw is consumed only when a tie occurs.
inline VoteOutcome plurality_vote(std::span<const int> labels, int k, Rng& tiebreak) {
    if (labels.empty()) throw DomainError("vote over no labels");
    if (k < 1) throw DomainError("class count must be positive");
    std::vector<double> tally(static_cast<std::size_t>(k), 0.0);
    for (int label : labels) {
        detail::check_label(label, k);
        tally[static_cast<std::size_t>(label)] += 1.0;
    }
    return detail::resolve_tally(std::move(tally), tiebreak);
}

inline VoteOutcome weighted_plurality_vote(std::span<const int> labels, std::span<const double> weights,
                                           int k, Rng& tiebreak) {
    if (labels.empty()) throw DomainError("vote over no labels");
    if (labels.size() != weights.size()) throw DomainError("label and weight counts differ");
    if (k < 1) throw DomainError("class count must be positive");
    std::vector<double> tally(static_cast<std::size_t>(k), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        detail::check_label(labels[i], k);
        if (!(weights[i] >= 0.0)) throw DomainError("vote weights must be nonnegative");
        tally[static_cast<std::size_t>(labels[i])] += weights[i];
        total += weights[i];
    }
    if (total <= 0.0) throw ZeroWeightError("vote weights sum to zero");
    return detail::resolve_tally(std::move(tally), tiebreak);
}

}  // namespace ensdecomp
