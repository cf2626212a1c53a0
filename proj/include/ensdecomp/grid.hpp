#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/errors.hpp"

namespace ensdecomp {

/// Rectangular trials x members table of `T` at a single test point, with
/// optional nonnegative weights of the same shape.
template <class T>
class Grid {
public:
    Grid() = default;

    Grid(std::size_t trials, std::size_t members, T fill = T{})
        : trials_(trials), members_(members), cells_(trials * members, std::move(fill)) {}

    /// From nested rows; all rows must have the same length.
    explicit Grid(const std::vector<std::vector<T>>& rows) {
        trials_ = rows.size();
        members_ = rows.empty() ? 0 : rows.front().size();
        cells_.reserve(trials_ * members_);
        for (const auto& row : rows) {
            if (row.size() != members_) throw SizeError("grid rows differ in length");
            cells_.insert(cells_.end(), row.begin(), row.end());
        }
    }

    std::size_t trials() const noexcept { return trials_; }
    std::size_t members() const noexcept { return members_; }
    bool empty() const noexcept { return cells_.empty(); }

    T& operator()(std::size_t d, std::size_t i) { return cells_[d * members_ + i]; }
    const T& operator()(std::size_t d, std::size_t i) const { return cells_[d * members_ + i]; }

    std::span<const T> row(std::size_t d) const {
        return std::span<const T>(cells_).subspan(d * members_, members_);
    }

    bool weighted() const noexcept { return weights_.has_value(); }

    void set_weights(std::vector<std::vector<double>> rows) {
        if (rows.size() != trials_) throw SizeError("weight rows do not match trials");
        std::vector<double> flat;
        flat.reserve(trials_ * members_);
        for (const auto& row : rows) {
            if (row.size() != members_) throw SizeError("weight row length does not match members");
            for (double w : row) {
                if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("grid weights must be finite and nonnegative");
                flat.push_back(w);
            }
        }
        weights_ = std::move(flat);
    }

    void set_weight(std::size_t d, std::size_t i, double w) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("grid weights must be finite and nonnegative");
        if (!weights_) weights_.emplace(trials_ * members_, 1.0);
        (*weights_)[d * members_ + i] = w;
    }

    /// Weight of cell (d, i); 1 when the grid is unweighted.
    double weight(std::size_t d, std::size_t i) const {
        return weights_ ? (*weights_)[d * members_ + i] : 1.0;
    }

    std::span<const double> weight_row(std::size_t d) const {
        return std::span<const double>(*weights_).subspan(d * members_, members_);
    }

    /// Copy holding only the first `m` members.
    Grid prefix(std::size_t m) const {
        if (m == 0 || m > members_) throw SizeError("member prefix out of range");
        Grid out(trials_, m);
        for (std::size_t d = 0; d < trials_; ++d) {
            for (std::size_t i = 0; i < m; ++i) out(d, i) = (*this)(d, i);
        }
        if (weights_) {
            out.weights_.emplace();
            for (std::size_t d = 0; d < trials_; ++d) {
                for (std::size_t i = 0; i < m; ++i) out.weights_->push_back(weight(d, i));
            }
        }
        return out;
    }

private:
    std::size_t trials_ = 0;
    std::size_t members_ = 0;
    std::vector<T> cells_;
    std::optional<std::vector<double>> weights_;
};

using MemberGrid = Grid<Prediction>;
using LabelGrid = Grid<int>;

/// Distribution of the label Y at one test point.
class LabelDistribution {
public:
    explicit LabelDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw DomainError("empty label distribution");
        double s = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0)) throw DomainError("label probabilities must be nonnegative");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw DomainError("label probabilities must sum to one");
    }

    static LabelDistribution point_mass(int label, int k) {
        if (label < 0 || label >= k) throw DomainError("class label out of range");
        std::vector<double> p(static_cast<std::size_t>(k), 0.0);
        p[static_cast<std::size_t>(label)] = 1.0;
        return LabelDistribution(std::move(p));
    }

    int classes() const noexcept { return static_cast<int>(probs_.size()); }
    double operator[](std::size_t c) const { return probs_[c]; }
    std::span<const double> probs() const noexcept { return probs_; }

    /// Most probable class, lowest index on ties.
    int mode() const {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs_.size(); ++c) {
            if (probs_[c] > probs_[best]) best = c;
        }
        return static_cast<int>(best);
    }

    /// E_Y[L01(Y, c)] = 1 - P(Y = c).
    double expected_zero_one(int c) const {
        if (c < 0 || c >= classes()) throw DomainError("class label out of range");
        return 1.0 - probs_[static_cast<std::size_t>(c)];
    }

private:
    std::vector<double> probs_;
};

}  // namespace ensdecomp
