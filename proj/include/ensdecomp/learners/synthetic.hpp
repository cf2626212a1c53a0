#pragma once

// Synthetic data generators with known structure.
//
// friedman_regression: x ~ U[0,1]^F (F >= 5),
//   y = 10 sin(pi x0 x1) + 20 (x2 - 0.5)^2 + 10 x3 + 5 x4 + noise * N(0, 1).
// mease_binary: x ~ U[0,1]^F, P(Y = 1 | x) = 1 - p if sum_{j<J} x_j > J/2,
//   else p. The Bayes error is exactly p.
// gaussian_blobs: class c ~ U{0..k-1}, x = mu_c + N(0, I), mu_c = (c * sep, 0, ...).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

#include "ensdecomp/errors.hpp"
#include "ensdecomp/learners/dataset.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

enum class SyntheticKind { FriedmanRegression, MeaseBinary, GaussianBlobs };

struct SyntheticOptions {
    std::size_t features = 0;   // 0 picks the generator default (10, 20, 2)
    double noise = 1.0;         // friedman: noise sd
    double flip_probability = 0.1;  // mease: p
    std::size_t relevant = 5;   // mease: J
    int classes = 3;            // blobs: k
    double separation = 10.0;   // blobs: centre spacing in units of sd
};

inline SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "friedman_regression") return SyntheticKind::FriedmanRegression;
    if (name == "mease_binary") return SyntheticKind::MeaseBinary;
    if (name == "gaussian_blobs" || name == "gaussian_blobs_k") return SyntheticKind::GaussianBlobs;
    throw SchemaError("unknown synthetic dataset '" + std::string(name) + "'");
}

/// P(Y = 1 | x) of the Mease generator.
inline double mease_probability(std::span<const double> x, const SyntheticOptions& opt) {
    double s = 0.0;
    for (std::size_t j = 0; j < opt.relevant; ++j) s += x[j];
    return s > static_cast<double>(opt.relevant) / 2.0 ? 1.0 - opt.flip_probability : opt.flip_probability;
}

inline Dataset make_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed, SyntheticOptions opt = {}) {
    if (n == 0) throw EmptyDataError("synthetic dataset needs n >= 1");
    Rng rng(seed);
    Dataset data;
    data.rows = n;
    switch (kind) {
        case SyntheticKind::FriedmanRegression: {
            data.cols = opt.features ? opt.features : 10;
            if (data.cols < 5) throw SchemaError("friedman_regression needs at least 5 features");
            data.features.resize(n * data.cols);
            for (std::size_t r = 0; r < n; ++r) {
                double* x = &data.features[r * data.cols];
                for (std::size_t c = 0; c < data.cols; ++c) x[c] = uniform01(rng);
                const double y = 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                                 10.0 * x[3] + 5.0 * x[4];
                data.targets.push_back(y + opt.noise * standard_normal(rng));
            }
            break;
        }
        case SyntheticKind::MeaseBinary: {
            data.cols = opt.features ? opt.features : 20;
            if (opt.relevant == 0 || opt.relevant > data.cols) throw SchemaError("mease_binary needs 1 <= J <= F");
            if (!(opt.flip_probability >= 0.0 && opt.flip_probability <= 0.5)) {
                throw SchemaError("mease_binary flip probability must lie in [0, 0.5]");
            }
            data.classes = 2;
            data.features.resize(n * data.cols);
            for (std::size_t r = 0; r < n; ++r) {
                double* x = &data.features[r * data.cols];
                for (std::size_t c = 0; c < data.cols; ++c) x[c] = uniform01(rng);
                const double p1 = mease_probability(std::span<const double>(x, data.cols), opt);
                data.labels.push_back(uniform01(rng) < p1 ? 1 : 0);
                data.conditional.push_back({1.0 - p1, p1});
            }
            break;
        }
        case SyntheticKind::GaussianBlobs: {
            data.cols = opt.features ? opt.features : 2;
            if (opt.classes < 2) throw SchemaError("gaussian_blobs needs at least two classes");
            data.classes = opt.classes;
            data.features.resize(n * data.cols);
            for (std::size_t r = 0; r < n; ++r) {
                const int c = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(opt.classes)));
                double* x = &data.features[r * data.cols];
                for (std::size_t j = 0; j < data.cols; ++j) x[j] = standard_normal(rng);
                x[0] += static_cast<double>(c) * opt.separation;
                data.labels.push_back(c);
            }
            break;
        }
    }
    data.validate();
    return data;
}

}  // namespace ensdecomp
