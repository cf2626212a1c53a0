#pragma once

// Hand-rolled random generators and brute-force oracles shared by the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/grid.hpp"
#include "ensdecomp/learners/tree.hpp"
#include "ensdecomp/random.hpp"

namespace testsupport {

using namespace ensdecomp;

inline TreeParams depth(int max_depth) {
    TreeParams p;
    p.max_depth = max_depth;
    return p;
}

inline std::size_t draw_size(Rng& rng, std::size_t max) { return 1 + static_cast<std::size_t>(uniform_index(rng, max)); }

inline std::vector<double> random_probs(int k, Rng& rng, double spread = 1.5) {
    std::vector<double> p(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& v : p) total += v = std::exp(spread * standard_normal(rng));
    for (double& v : p) v /= total;
    return p;
}

inline Prediction random_point(const Generator& gen, Rng& rng) {
    switch (gen.kind()) {
        case LossKind::Squared: return Prediction::real(4.0 * standard_normal(rng));
        case LossKind::Poisson:
        case LossKind::ItakuraSaito: return Prediction::positive(std::exp(1.2 * standard_normal(rng)));
        case LossKind::KLMinimal: return restrict_simplex(random_probs(gen.classes(), rng));
    }
    return {};
}

inline MemberGrid random_grid(const Generator& gen, Rng& rng, std::size_t d, std::size_t m) {
    MemberGrid g(d, m);
    for (std::size_t t = 0; t < d; ++t) {
        for (std::size_t i = 0; i < m; ++i) g(t, i) = random_point(gen, rng);
    }
    return g;
}

inline std::vector<Generator> all_generators() {
    return {Generator::squared(), Generator::poisson(), Generator::itakura_saito(),
            Generator::kl(2),     Generator::kl(3),      Generator::kl(5)};
}

/// KL(p || q) summed over the full k-class vectors.
inline double kl_sum(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] > 0.0) s += p[c] * std::log(p[c] / q[c]);
    }
    return s;
}

/// Divergence straight from the definition phi(p) - phi(q) - <grad phi(q), p - q>.
inline double divergence_from_definition(const Generator& gen, const Prediction& p, const Prediction& q) {
    const DualPoint g = grad(gen, q);
    double inner = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) inner += g.values[c] * (p[c] - q[c]);
    return phi(gen, p) - phi(gen, q) - inner;
}

}  // namespace testsupport
