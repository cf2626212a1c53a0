#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ensdecomp/bregman.hpp"
#include "support.hpp"

using namespace ensdecomp;
using testsupport::random_point;

TEST(Phi, ClosedForms) {
    EXPECT_DOUBLE_EQ(phi(Generator::squared(), Prediction::real(0.3)), 0.09);
    EXPECT_DOUBLE_EQ(phi(Generator::poisson(), Prediction::positive(1.0)), -1.0);
    EXPECT_NEAR(phi(Generator::kl(2), Prediction::simplex({0.5})), 0.5 * std::log(0.5) * 2.0, 1e-15);
    EXPECT_NEAR(phi(Generator::kl(2), Prediction::simplex({0.5})), -0.6931, 1e-4);
    EXPECT_DOUBLE_EQ(phi(Generator::itakura_saito(), Prediction::positive(std::exp(1.0))), -1.0);
}

TEST(Phi, RejectsOutOfDomain) {
    EXPECT_THROW(phi(Generator::poisson(), Prediction::positive(0.0)), DomainError);
    EXPECT_THROW(phi(Generator::itakura_saito(), Prediction::positive(-1.0)), DomainError);
    EXPECT_THROW(phi(Generator::kl(3), Prediction::simplex({0.6, 0.4})), DomainError);
    EXPECT_THROW(phi(Generator::kl(3), Prediction::simplex({0.5})), DomainError);
    EXPECT_THROW(phi(Generator::squared(), Prediction::positive(1.0)), DomainError);
    EXPECT_THROW(phi(Generator::squared(), Prediction::real(std::numeric_limits<double>::infinity())), DomainError);
}

TEST(Generator, KlNeedsTwoClasses) {
    EXPECT_THROW(Generator::kl(1), DomainError);
    EXPECT_EQ(Generator::kl(4).dimension(), 3u);
}

TEST(Grad, ClosedForms) {
    EXPECT_NEAR(grad(Generator::kl(2), Prediction::simplex({0.7})).values[0], 0.8473, 1e-4);
    EXPECT_DOUBLE_EQ(grad(Generator::squared(), Prediction::real(0.3)).values[0], 0.6);
    EXPECT_DOUBLE_EQ(grad(Generator::itakura_saito(), Prediction::positive(2.0)).values[0], -0.5);
    EXPECT_DOUBLE_EQ(grad(Generator::poisson(), Prediction::positive(1.0)).values[0], 0.0);
}

TEST(Grad, MatchesFiniteDifferences) {
    Rng rng(11);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 50; ++n) {
            const Prediction q = random_point(gen, rng);
            if (gen.kind() == LossKind::KLMinimal) {
                bool interior = true;
                for (double v : q.values) interior = interior && v > 1e-4;
                interior = interior && detail::last_mass(q.values) > 1e-4;
                if (!interior) continue;
            }
            const DualPoint g = grad(gen, q);
            for (std::size_t c = 0; c < q.size(); ++c) {
                const double h = 1e-6 * std::max(1e-3, std::abs(q[c]));
                Prediction up = q, down = q;
                up.values[c] += h;
                down.values[c] -= h;
                const double fd = (phi(gen, up) - phi(gen, down)) / (2.0 * h);
                EXPECT_NEAR(fd, g.values[c], 1e-6 * (1.0 + std::abs(g.values[c]))) << to_string(gen.kind());
            }
        }
    }
}

TEST(GradInverse, ClosedForms) {
    EXPECT_NEAR(grad_inverse(Generator::kl(2), DualPoint{{2.16}}).values[0], 0.8966, 1e-4);
    EXPECT_DOUBLE_EQ(grad_inverse(Generator::squared(), DualPoint{{0.6}}).scalar(), 0.3);
    EXPECT_DOUBLE_EQ(grad_inverse(Generator::poisson(), DualPoint{{0.0}}).scalar(), 1.0);
    EXPECT_DOUBLE_EQ(grad_inverse(Generator::itakura_saito(), DualPoint{{-0.5}}).scalar(), 2.0);
}

TEST(GradInverse, Errors) {
    EXPECT_THROW(grad_inverse(Generator::itakura_saito(), DualPoint{{0.0}}), DomainError);
    EXPECT_THROW(grad_inverse(Generator::itakura_saito(), DualPoint{{0.3}}), DomainError);
    EXPECT_THROW(grad_inverse(Generator::squared(), DualPoint{{1.0, 2.0}}), DomainError);
    EXPECT_THROW(grad_inverse(Generator::poisson(), DualPoint{{1000.0}}), DomainError);
    EXPECT_THROW(grad_inverse(Generator::kl(2), DualPoint{{800.0}}), DomainError);
    EXPECT_THROW(grad_inverse(Generator::squared(), DualPoint{{std::nan("")}}), DomainError);
}

TEST(GradInverse, RoundTripProperty) {
    Rng rng(5);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 1000; ++n) {
            const Prediction q = random_point(gen, rng);
            const Prediction back = grad_inverse(gen, grad(gen, q));
            double err = 0.0, norm = 0.0;
            for (std::size_t c = 0; c < q.size(); ++c) {
                err += (back[c] - q[c]) * (back[c] - q[c]);
                norm += q[c] * q[c];
            }
            ASSERT_LE(std::sqrt(err), 1e-10 * (1.0 + std::sqrt(norm))) << to_string(gen.kind());
        }
    }
}

TEST(GradInverse, DualRoundTrip) {
    Rng rng(6);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 200; ++n) {
            const DualPoint eta = grad(gen, random_point(gen, rng));
            const DualPoint again = grad(gen, grad_inverse(gen, eta));
            for (std::size_t c = 0; c < eta.values.size(); ++c) {
                ASSERT_NEAR(again.values[c], eta.values[c], 1e-10 * (1.0 + std::abs(eta.values[c])));
            }
        }
    }
}

TEST(Phi, StrictConvexityProperty) {
    Rng rng(7);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 300; ++n) {
            const Prediction x = random_point(gen, rng), y = random_point(gen, rng);
            if (x == y) continue;
            std::vector<double> mid(x.size());
            for (std::size_t c = 0; c < x.size(); ++c) mid[c] = 0.5 * (x[c] + y[c]);
            const double lhs = phi(gen, Prediction(mid, x.domain));
            EXPECT_LT(lhs, 0.5 * phi(gen, x) + 0.5 * phi(gen, y)) << to_string(gen.kind());
        }
    }
}

TEST(Divergence, PointValues) {
    EXPECT_DOUBLE_EQ(divergence(Generator::squared(), Prediction::real(1.0), Prediction::real(0.3)), 0.49);
    EXPECT_NEAR(divergence(Generator::kl(2), Prediction::simplex({0.5}), Prediction::simplex({0.25})),
                0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
    EXPECT_NEAR(divergence(Generator::kl(2), Prediction::simplex({0.5}), Prediction::simplex({0.25})), 0.1438, 1e-4);
    // p/q - ln(p/q) - 1
    EXPECT_NEAR(divergence(Generator::itakura_saito(), Prediction::positive(2.0), Prediction::positive(1.0)),
                2.0 - std::log(2.0) - 1.0, 1e-15);
    // p ln(p/q) - p + q
    EXPECT_NEAR(divergence(Generator::poisson(), Prediction::positive(2.0), Prediction::positive(1.0)),
                2.0 * std::log(2.0) - 1.0, 1e-15);
}

TEST(Divergence, ZeroOnDiagonal) {
    Rng rng(8);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 100; ++n) {
            const Prediction q = random_point(gen, rng);
            EXPECT_EQ(divergence(gen, q, q), 0.0);
        }
    }
}

TEST(Divergence, NonnegativeAndMatchesDefinition) {
    Rng rng(9);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 1000; ++n) {
            const Prediction p = random_point(gen, rng), q = random_point(gen, rng);
            const double b = divergence(gen, p, q);
            ASSERT_GE(b, -1e-12);
            if (!(p == q)) {
                ASSERT_GT(b, 0.0);
            }
            const double def = testsupport::divergence_from_definition(gen, p, q);
            ASSERT_NEAR(b, def, 1e-9 * (1.0 + std::abs(phi(gen, p)) + std::abs(phi(gen, q))));
        }
    }
}

TEST(Divergence, KlEqualsFullKlSum) {
    Rng rng(10);
    for (int k : {2, 3, 5}) {
        const auto gen = Generator::kl(k);
        for (int n = 0; n < 500; ++n) {
            const Prediction p = random_point(gen, rng), q = random_point(gen, rng);
            ASSERT_NEAR(divergence(gen, p, q), testsupport::kl_sum(extend_simplex(p), extend_simplex(q)), 1e-10);
        }
    }
}

TEST(Divergence, RejectsBadArguments) {
    EXPECT_THROW(divergence(Generator::poisson(), Prediction::positive(1.0), Prediction::positive(0.0)), DomainError);
    EXPECT_THROW(divergence(Generator::kl(2), Prediction::simplex({1.0}), Prediction::simplex({0.5})), DomainError);
}

TEST(LeftCentroid, PointValues) {
    const auto kl2 = Generator::kl(2);
    const std::vector<Prediction> pts{Prediction::simplex({0.7}), Prediction::simplex({0.97})};
    EXPECT_NEAR(left_centroid(kl2, pts)[0], 0.896, 1e-3);
    const std::vector<Prediction> is{Prediction::positive(1.0), Prediction::positive(3.0)};
    EXPECT_NEAR(left_centroid(Generator::itakura_saito(), is).scalar(), 1.5, 1e-15);
    const std::vector<Prediction> po{Prediction::positive(1.0), Prediction::positive(4.0)};
    EXPECT_NEAR(left_centroid(Generator::poisson(), po).scalar(), 2.0, 1e-15);
    const std::vector<Prediction> same(4, Prediction::simplex({0.2, 0.3}));
    EXPECT_EQ(left_centroid(Generator::kl(3), same), same.front());
}

TEST(LeftCentroid, Weighted) {
    const std::vector<Prediction> pts{Prediction::real(0.0), Prediction::real(4.0)};
    const std::vector<double> w{0.75, 0.25};
    EXPECT_DOUBLE_EQ(left_centroid(Generator::squared(), pts, w).scalar(), 1.0);
    const std::vector<double> bad{0.5};
    EXPECT_THROW(left_centroid(Generator::squared(), pts, bad), DomainError);
    const std::vector<double> negative{1.5, -0.5};
    EXPECT_THROW(left_centroid(Generator::squared(), pts, negative), DomainError);
    EXPECT_THROW(left_centroid(Generator::squared(), std::span<const Prediction>{}), DomainError);
}

TEST(LeftCentroid, MinimisesAverageDivergence) {
    Rng rng(12);
    for (const auto& gen : testsupport::all_generators()) {
        for (int n = 0; n < 20; ++n) {
            std::vector<Prediction> pts(testsupport::draw_size(rng, 5));
            for (auto& p : pts) p = random_point(gen, rng);
            const Prediction z = left_centroid(gen, pts);
            auto avg = [&](const Prediction& c) {
                double s = 0.0;
                for (const auto& p : pts) s += divergence(gen, c, p);
                return s / static_cast<double>(pts.size());
            };
            const double best = avg(z);
            for (const auto& p : pts) ASSERT_LE(best, avg(p) + 1e-12);
            for (int c = 0; c < 10000; ++c) ASSERT_LE(best, avg(random_point(gen, rng)) + 1e-12);
        }
    }
}

TEST(LeftCentroid, KlIsNormalisedGeometricMean) {
    Rng rng(13);
    for (int k : {2, 3, 5}) {
        const auto gen = Generator::kl(k);
        for (int n = 0; n < 200; ++n) {
            std::vector<Prediction> pts(testsupport::draw_size(rng, 6));
            for (auto& p : pts) p = random_point(gen, rng);
            std::vector<double> geo(static_cast<std::size_t>(k), 0.0);
            for (const auto& p : pts) {
                const auto full = extend_simplex(p);
                for (std::size_t c = 0; c < geo.size(); ++c) geo[c] += std::log(full[c]) / static_cast<double>(pts.size());
            }
            double z = 0.0;
            for (double& v : geo) z += v = std::exp(v);
            const auto centroid = extend_simplex(left_centroid(gen, pts));
            for (std::size_t c = 0; c < geo.size(); ++c) ASSERT_NEAR(centroid[c], geo[c] / z, 1e-10);
        }
    }
}

TEST(Simplex, ExtendAndRestrict) {
    const auto full = extend_simplex(Prediction::simplex({0.2, 0.3}));
    ASSERT_EQ(full.size(), 3u);
    EXPECT_DOUBLE_EQ(full[2], 0.5);
    const auto two = extend_simplex(Prediction::simplex({0.7}));
    EXPECT_NEAR(two[1], 0.3, 1e-15);
    EXPECT_THROW(extend_simplex(Prediction::simplex({1.0})), DomainError);
    EXPECT_THROW(extend_simplex(Prediction::real(0.5)), DomainError);
    EXPECT_EQ(restrict_simplex(std::vector<double>{0.2, 0.3, 0.5}), Prediction::simplex({0.2, 0.3}));
    EXPECT_DOUBLE_EQ(class_probability(Prediction::simplex({0.2, 0.3}), 2), 0.5);
    EXPECT_DOUBLE_EQ(class_probability(Prediction::simplex({0.2, 0.3}), 1), 0.3);
}
