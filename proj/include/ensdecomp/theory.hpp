#pragma once

// Independent-voter majority error, diversity-effect curves and the 0-1
// counterexample table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ensdecomp/combiners.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/grid.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

namespace detail {
inline void check_voter_model(double epsilon, int m) {
    if (m < 1 || m % 2 == 0) throw ParityError("majority error needs an odd number of voters, got " + std::to_string(m));
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("error probability must lie in [0, 1]");
}
}  // namespace detail

/// P(majority of M independent voters is wrong) = sum_{i <= (M-1)/2} C(M,i) eps^(M-i) (1-eps)^i,
/// summed in log space.
inline double majority_error_independent(double epsilon, int m) {
    detail::check_voter_model(epsilon, m);
    if (epsilon == 0.0) return 0.0;
    if (epsilon == 1.0) return 1.0;
    const double le = std::log(epsilon), lc = std::log1p(-epsilon);
    double total = 0.0;
    for (int i = 0; i <= (m - 1) / 2; ++i) {
        const double log_binom = std::lgamma(m + 1.0) - std::lgamma(i + 1.0) - std::lgamma(m - i + 1.0);
        total += std::exp(log_binom + (m - i) * le + i * lc);
    }
    return std::min(total, 1.0);
}

inline double diversity_effect_independent(double epsilon, int m) {
    return epsilon - majority_error_independent(epsilon, m);
}

struct SimulationResult {
    double mean = 0.0;
    double standard_error = 0.0;  // sample sd / sqrt(replicates)
};

/// Monte-Carlo diversity-effect of M i.i.d. voters over k classes under
/// plurality voting. Each voter is correct with probability p_correct, else
/// picks one of the k-1 wrong classes uniformly. Replicate r draws from
/// derive_seed(seed, streams::simulation, r).
inline SimulationResult simulate_diversity_effect(int k, double p_correct, int m, std::size_t replicates,
                                                  std::uint64_t seed) {
    if (k < 2) throw DomainError("simulation needs at least two classes");
    if (m < 1) throw SizeError("simulation needs at least one voter");
    if (replicates == 0) throw SizeError("simulation needs at least one replicate");
    if (!(p_correct >= 0.0 && p_correct <= 1.0)) throw DomainError("p_correct must lie in [0, 1]");
    constexpr int truth = 0;
    std::vector<int> votes(static_cast<std::size_t>(m));
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        Rng rng(derive_seed(seed, streams::simulation, r));
        int wrong = 0;
        for (int& v : votes) {
            v = uniform01(rng) < p_correct ? truth : 1 + static_cast<int>(uniform_index(rng, k - 1));
            wrong += v != truth;
        }
        const int winner = plurality_vote(votes, k, rng).winner;
        const double de = static_cast<double>(wrong) / m - (winner != truth ? 1.0 : 0.0);
        sum += de;
        sum_sq += de * de;
    }
    const double n = static_cast<double>(replicates);
    SimulationResult out;
    out.mean = sum / n;
    if (replicates > 1) {
        const double var = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
        out.standard_error = std::sqrt(var / n);
    }
    return out;
}

/// table[q*][y] = E[L(y, q)] - L(y, q*) for a member whose label has
/// distribution `member`. A bias-variance split with a deterministic bias term
/// would need every row to be constant in y.
inline std::vector<std::vector<double>> nonexistence_counterexample(const LabelDistribution& member) {
    const int k = member.classes();
    std::vector<std::vector<double>> table(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
    for (int star = 0; star < k; ++star) {
        for (int y = 0; y < k; ++y) {
            table[star][y] = member.expected_zero_one(y) - (y != star ? 1.0 : 0.0);
        }
    }
    return table;
}

}  // namespace ensdecomp
