#pragma once

// Randomised residual suites over every loss and decomposition. Each
// identity is re-assembled here from the reported terms, so a wrong term
// shows up as a residual.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/combiners.hpp"
#include "ensdecomp/decomp.hpp"
#include "ensdecomp/grid.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

struct IdentityResult {
    std::string name;
    std::size_t instances = 0;
    double max_residual = 0.0;  // relative for Bregman identities, absolute for 0-1 effects
    double tolerance = 0.0;
    bool passed() const { return max_residual <= tolerance; }
};

struct VerifyOptions {
    std::size_t counts = 1000;
    std::uint64_t seed = 0;
    bool inject_fault = false;  // negative control: flips the sign of one diversity term
};

namespace detail {

inline constexpr double kBregmanTolerance = 1e-9;
inline constexpr double kEffectTolerance = 1e-12;

inline Prediction random_prediction(const Generator& gen, Rng& rng) {
    switch (gen.kind()) {
        case LossKind::Squared: return Prediction::real(3.0 * standard_normal(rng));
        case LossKind::Poisson:
        case LossKind::ItakuraSaito: return Prediction::positive(std::exp(standard_normal(rng)));
        case LossKind::KLMinimal: {
            std::vector<double> p(static_cast<std::size_t>(gen.classes()));
            double total = 0.0;
            for (double& v : p) total += v = std::exp(1.5 * standard_normal(rng));
            for (double& v : p) v /= total;
            return restrict_simplex(p);
        }
    }
    return {};
}

inline std::size_t random_size(Rng& rng, std::size_t max) { return 1 + static_cast<std::size_t>(uniform_index(rng, max)); }

inline MemberGrid random_grid(const Generator& gen, Rng& rng, bool weighted) {
    const std::size_t nd = random_size(rng, 5), m = random_size(rng, 7);
    MemberGrid g(nd, m);
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t i = 0; i < m; ++i) g(d, i) = random_prediction(gen, rng);
    }
    if (weighted) {
        std::vector<double> w(m);
        for (double& v : w) v = 0.1 + uniform01(rng);
        for (std::size_t d = 0; d < nd; ++d) {
            for (std::size_t i = 0; i < m; ++i) g.set_weight(d, i, w[i]);
        }
    }
    return g;
}

inline LabelGrid random_label_grid(int k, Rng& rng, bool weighted) {
    const std::size_t nd = random_size(rng, 5), m = random_size(rng, 7);
    LabelGrid g(nd, m);
    for (std::size_t d = 0; d < nd; ++d) {
        for (std::size_t i = 0; i < m; ++i) {
            g(d, i) = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
            if (weighted) g.set_weight(d, i, 0.05 + uniform01(rng));
        }
    }
    return g;
}

inline LabelDistribution random_distribution(int k, Rng& rng) {
    std::vector<double> p(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& v : p) total += v = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng);
    if (total == 0.0) {
        p[0] = total = 1.0;
    }
    for (double& v : p) v /= total;
    // absorb rounding so the distribution sums to one within 1e-12
    double s = 0.0;
    for (std::size_t c = 1; c < p.size(); ++c) s += p[c];
    p[0] = std::max(0.0, 1.0 - s);
    return LabelDistribution(std::move(p));
}

inline double relative(double residual, double loss) { return std::abs(residual) / (1.0 + std::abs(loss)); }

}  // namespace detail

/// Runs every identity suite; one result per (identity, loss).
inline std::vector<IdentityResult> run_identity_suites(const VerifyOptions& opt) {
    using namespace detail;
    std::vector<IdentityResult> results;
    std::uint64_t suite = 0;
    auto run = [&](std::string name, double tolerance, const std::function<double(Rng&)>& instance) {
        IdentityResult r{std::move(name), opt.counts, 0.0, tolerance};
        Rng rng(derive_seed(opt.seed, streams::verify, suite++));
        for (std::size_t n = 0; n < opt.counts; ++n) r.max_residual = std::max(r.max_residual, instance(rng));
        results.push_back(std::move(r));
    };

    const std::vector<Generator> losses{Generator::squared(), Generator::poisson(), Generator::itakura_saito(),
                                        Generator::kl(2),        Generator::kl(3),      Generator::kl(5)};
    bool fault_pending = opt.inject_fault;
    for (const Generator& gen : losses) {
        const std::string tag = gen.kind() == LossKind::KLMinimal
                                    ? "kl" + std::to_string(gen.classes())
                                    : std::string(to_string(gen.kind()));
        run("ambiguity/" + tag, kBregmanTolerance, [&](Rng& rng) {
            const std::size_t m = random_size(rng, 7);
            std::vector<Prediction> preds(m);
            for (auto& q : preds) q = random_prediction(gen, rng);
            std::vector<double> w;
            if (uniform01(rng) < 0.5) {
                double total = 0.0;
                for (std::size_t i = 0; i < m; ++i) total += w.emplace_back(0.1 + uniform01(rng));
                for (double& v : w) v /= total;
            }
            const auto r = ambiguity_decomposition(gen, random_prediction(gen, rng), preds, w);
            return relative(r.ensemble_loss - (r.average_loss - r.ambiguity), r.ensemble_loss);
        });
        const bool fault_here = fault_pending;
        fault_pending = false;
        run("bias-variance-diversity/" + tag, kBregmanTolerance, [&, fault_here](Rng& rng) {
            const MemberGrid g = random_grid(gen, rng, uniform01(rng) < 0.5);
            std::vector<Prediction> targets(random_size(rng, 3));
            for (auto& y : targets) y = random_prediction(gen, rng);
            const auto r = bvd_terms(gen, targets, g);
            const double diversity = fault_here ? -r.diversity : r.diversity;
            return relative(r.expected_loss - (r.noise + r.average_bias + r.average_variance - diversity),
                            r.expected_loss);
        });
        run("ensemble-bias-variance/" + tag, kBregmanTolerance, [&](Rng& rng) {
            const MemberGrid g = random_grid(gen, rng, uniform01(rng) < 0.5);
            const auto r = ensemble_bias_variance(gen, random_prediction(gen, rng), g);
            const double bias = r.ensemble_bias - (r.average_bias - r.disparity);
            const double var = r.ensemble_variance - (r.disparity + r.average_variance - r.diversity);
            const double loss = r.expected_loss - (r.ensemble_bias + r.ensemble_variance);
            return relative(std::max({std::abs(bias), std::abs(var), std::abs(loss)}), r.expected_loss);
        });
        if (gen.kind() == LossKind::Squared) {
            run("bias-variance-covariance/squared", kBregmanTolerance, [&](Rng& rng) {
                const MemberGrid g = random_grid(gen, rng, false);
                const double y = 3.0 * standard_normal(rng);
                const auto r = squared_bvc(y, g);
                const auto b = bvd_terms(gen, Prediction::real(y), g);
                const double identity = r.expected_loss - (r.ensemble_bias + r.variance_term + r.covariance_term);
                return relative(std::max(std::abs(identity), std::abs(r.expected_loss - b.expected_loss)),
                                r.expected_loss);
            });
        }
        if (gen.kind() != LossKind::KLMinimal) continue;
        const int k = gen.classes();
        run("cross-entropy/" + tag, kBregmanTolerance, [&](Rng& rng) {
            const MemberGrid g = random_grid(gen, rng, uniform01(rng) < 0.5);
            const int y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
            const auto r = cross_entropy_decomp(y, g);
            return relative(r.expected_loss - (r.noise + r.average_bias + r.average_variance - r.diversity),
                            r.expected_loss);
        });
        run("dependency/" + tag, kBregmanTolerance, [&](Rng& rng) {
            const MemberGrid g = random_grid(gen, rng, false);
            const int y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
            const auto r = dependency_decomp(y, g);
            return relative(r.expected_ce - (r.average_bias + r.average_variance - r.dependency), r.expected_ce);
        });
        run("arithmetic-ambiguity/" + tag, kEffectTolerance, [&](Rng& rng) {
            std::vector<Prediction> preds(random_size(rng, 9));
            for (auto& q : preds) q = random_prediction(gen, rng);
            const int y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
            const auto r = arithmetic_ce_ambiguity(y, preds);
            // the ambiguity is ln(AM/GM) >= 0
            return std::max(relative(r.ensemble_ce - (r.average_ce - r.ambiguity), r.ensemble_ce),
                            std::max(0.0, -r.ambiguity));
        });
    }

    for (int k : {2, 3, 5}) {
        const std::string tag = "k" + std::to_string(k);
        run("effect-bias-variance/" + tag, kEffectTolerance, [&](Rng& rng) {
            const auto r = effect_bv_01(random_distribution(k, rng), random_distribution(k, rng));
            return std::abs(r.expected_loss - (r.noise + r.bias_effect + r.variance_effect));
        });
        for (bool weighted : {false, true}) {
            run(std::string(weighted ? "effect-bvd-weighted/" : "effect-bvd/") + tag, kEffectTolerance, [&, weighted](Rng& rng) {
                const LabelGrid g = random_label_grid(k, rng, weighted);
                const auto r = bvd_effect_01(random_distribution(k, rng), g, rng);
                return std::abs(r.expected_loss -
                                (r.noise + r.bias_effect + r.variance_effect - r.diversity_effect));
            });
        }
        run("ambiguity-effect/" + tag, kEffectTolerance, [&](Rng& rng) {
            std::vector<int> labels(random_size(rng, 7));
            for (int& l : labels) l = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
            std::vector<double> w;
            if (uniform01(rng) < 0.5) {
                for (std::size_t i = 0; i < labels.size(); ++i) w.push_back(0.05 + uniform01(rng));
            }
            const int winner = w.empty() ? plurality_vote(labels, k, rng).winner
                                         : weighted_plurality_vote(labels, w, k, rng).winner;
            const int y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(k)));
            const auto r = ambiguity_effect(y, labels, winner, w);
            return std::abs(r.ensemble_loss - (r.average_loss - r.ambiguity_effect));
        });
    }
    run("good-bad-diversity", kEffectTolerance, [&](Rng& rng) {
        std::vector<int> labels(2 * random_size(rng, 4) - 1);
        std::vector<int> classes(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            classes[i] = static_cast<int>(uniform_index(rng, 2));
            labels[i] = classes[i] == 1 ? 1 : -1;
        }
        const int winner = plurality_vote(classes, 2, rng).winner == 1 ? 1 : -1;
        const int y = uniform01(rng) < 0.5 ? 1 : -1;
        const auto r = good_bad_diversity(y, labels, winner);
        return std::abs(r.ensemble_loss - (r.average_loss - r.signed_diversity));
    });
    return results;
}

}  // namespace ensdecomp
