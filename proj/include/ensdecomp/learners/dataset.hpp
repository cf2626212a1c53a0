#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ensdecomp/errors.hpp"
#include "ensdecomp/random.hpp"

namespace ensdecomp {

/// Row-major feature matrix with either regression targets or class labels.
struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> features;
    std::vector<double> targets;  // regression
    std::vector<int> labels;      // classification, in [0, classes)
    int classes = 0;              // 0 for regression
    // P(Y | x) per row, when the generating process is known
    std::vector<std::vector<double>> conditional;

    bool is_classification() const noexcept { return classes > 0; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(features).subspan(r * cols, cols);
    }
    double at(std::size_t r, std::size_t c) const { return features[r * cols + c]; }

    void validate() const {
        if (rows == 0 || cols == 0) throw EmptyDataError("dataset needs at least one row and one feature");
        if (features.size() != rows * cols) throw SchemaError("feature matrix has the wrong size");
        for (double v : features) {
            if (!std::isfinite(v)) throw SchemaError("non-finite feature value");
        }
        if (is_classification()) {
            if (labels.size() != rows) throw SchemaError("label count does not match rows");
            for (int l : labels) {
                if (l < 0 || l >= classes) throw SchemaError("class label out of range");
            }
        } else {
            if (targets.size() != rows) throw SchemaError("target count does not match rows");
            for (double v : targets) {
                if (!std::isfinite(v)) throw SchemaError("non-finite target value");
            }
        }
    }

    /// Rows picked by index (repeats allowed).
    Dataset subset(std::span<const std::size_t> idx) const {
        Dataset out;
        out.rows = idx.size();
        out.cols = cols;
        out.classes = classes;
        out.features.reserve(idx.size() * cols);
        for (std::size_t r : idx) {
            const auto src = row(r);
            out.features.insert(out.features.end(), src.begin(), src.end());
            if (is_classification()) {
                out.labels.push_back(labels[r]);
            } else {
                out.targets.push_back(targets[r]);
            }
            if (!conditional.empty()) out.conditional.push_back(conditional[r]);
        }
        return out;
    }
};

/// `count` distinct indices from [0, n), in ascending order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// n indices drawn from [0, n) with replacement.
inline std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(uniform_index(rng, n));
    return idx;
}

}  // namespace ensdecomp
