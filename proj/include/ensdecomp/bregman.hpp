#pragma once

// Bregman generators, divergences, the primal/dual maps and left centroids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ensdecomp/errors.hpp"

namespace ensdecomp {

enum class LossKind { Squared, ItakuraSaito, Poisson, KLMinimal };

enum class Domain {
    Reals,          // R
    PositiveReals,  // (0, inf)
    Simplex,        // open probability sub-simplex, k-1 coordinates
};

/// Domain-tagged prediction. Scalars have one value; KL predictions carry the
/// first k-1 class probabilities.
struct Prediction {
    std::vector<double> values;
    Domain domain = Domain::Reals;

    Prediction() = default;
    Prediction(std::vector<double> v, Domain d) : values(std::move(v)), domain(d) {}

    static Prediction real(double x) { return {{x}, Domain::Reals}; }
    static Prediction positive(double x) { return {{x}, Domain::PositiveReals}; }
    static Prediction simplex(std::vector<double> v) { return {std::move(v), Domain::Simplex}; }

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t c) const { return values[c]; }
    double scalar() const { return values.front(); }

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Point in the dual (gradient) coordinate system.
struct DualPoint {
    std::vector<double> values;
    friend bool operator==(const DualPoint&, const DualPoint&) = default;
};

inline std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Squared: return "squared";
        case LossKind::ItakuraSaito: return "itakura-saito";
        case LossKind::Poisson: return "poisson";
        case LossKind::KLMinimal: return "kl";
    }
    return "?";
}

/// A Bregman loss: generator phi together with its valid domain.
class Generator {
public:
    static Generator squared() { return Generator(LossKind::Squared, 0); }
    static Generator itakura_saito() { return Generator(LossKind::ItakuraSaito, 0); }
    static Generator poisson() { return Generator(LossKind::Poisson, 0); }
    static Generator kl(int classes) {
        if (classes < 2) {
            throw DomainError("KL generator needs at least two classes");
        }
        return Generator(LossKind::KLMinimal, classes);
    }

    LossKind kind() const noexcept { return kind_; }
    /// Class count for KL, 0 otherwise.
    int classes() const noexcept { return classes_; }
    std::size_t dimension() const noexcept {
        return kind_ == LossKind::KLMinimal ? static_cast<std::size_t>(classes_ - 1) : 1;
    }
    Domain domain() const noexcept {
        switch (kind_) {
            case LossKind::Squared: return Domain::Reals;
            case LossKind::KLMinimal: return Domain::Simplex;
            default: return Domain::PositiveReals;
        }
    }

    /// Builds a validated prediction from raw values.
    Prediction make(std::vector<double> values) const {
        Prediction p(std::move(values), domain());
        check(p);
        return p;
    }
    Prediction make(double x) const { return make(std::vector<double>{x}); }

    bool contains(const Prediction& q) const noexcept {
        if (q.domain != domain() || q.size() != dimension()) {
            return false;
        }
        switch (kind_) {
            case LossKind::Squared:
                return std::isfinite(q[0]);
            case LossKind::ItakuraSaito:
            case LossKind::Poisson:
                return std::isfinite(q[0]) && q[0] > 0.0;
            case LossKind::KLMinimal: {
                double sum = 0.0;
                for (double v : q.values) {
                    if (!(v > 0.0 && v < 1.0)) {
                        return false;
                    }
                    sum += v;
                }
                return sum < 1.0;
            }
        }
        return false;
    }

    void check(const Prediction& q) const {
        if (!contains(q)) {
            throw DomainError("prediction outside the domain of the " +
                              std::string(to_string(kind_)) + " generator");
        }
    }

    friend bool operator==(const Generator&, const Generator&) = default;

private:
    Generator(LossKind kind, int classes) : kind_(kind), classes_(classes) {}

    LossKind kind_;
    int classes_;
};

namespace detail {

/// 1 - sum(q): the implicit last class probability.
inline double last_mass(std::span<const double> q) {
    return 1.0 - std::accumulate(q.begin(), q.end(), 0.0);
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

inline double phi(const Generator& gen, const Prediction& q) {
    gen.check(q);
    switch (gen.kind()) {
        case LossKind::Squared: return q[0] * q[0];
        case LossKind::ItakuraSaito: return -std::log(q[0]);
        case LossKind::Poisson: return q[0] * std::log(q[0]) - q[0];
        case LossKind::KLMinimal: {
            double s = detail::xlogx(detail::last_mass(q.values));
            for (double v : q.values) s += detail::xlogx(v);
            return s;
        }
    }
    return 0.0;
}

inline DualPoint grad(const Generator& gen, const Prediction& q) {
    gen.check(q);
    switch (gen.kind()) {
        case LossKind::Squared: return {{2.0 * q[0]}};
        case LossKind::ItakuraSaito: return {{-1.0 / q[0]}};
        case LossKind::Poisson: return {{std::log(q[0])}};
        case LossKind::KLMinimal: {
            const double log_last = std::log(detail::last_mass(q.values));
            DualPoint eta;
            eta.values.reserve(q.size());
            for (double v : q.values) eta.values.push_back(std::log(v) - log_last);
            return eta;
        }
    }
    return {};
}

inline Prediction grad_inverse(const Generator& gen, const DualPoint& eta) {
    if (eta.values.size() != gen.dimension()) {
        throw DomainError("dual point has wrong dimension");
    }
    for (double v : eta.values) {
        if (!std::isfinite(v)) throw DomainError("dual point is not finite");
    }
    const double e0 = eta.values.front();
    switch (gen.kind()) {
        case LossKind::Squared: return Prediction::real(e0 / 2.0);
        case LossKind::ItakuraSaito:
            if (!(e0 < 0.0)) throw DomainError("Itakura-Saito dual coordinate must be negative");
            return Prediction::positive(-1.0 / e0);
        case LossKind::Poisson: {
            const double q = std::exp(e0);
            if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("Poisson inverse gradient overflow");
            return Prediction::positive(q);
        }
        case LossKind::KLMinimal: {
            // softmax over (eta, 0), shifted by the max for stability
            double shift = 0.0;
            for (double v : eta.values) shift = std::max(shift, v);
            double z = std::exp(-shift);
            std::vector<double> q;
            q.reserve(eta.values.size());
            for (double v : eta.values) {
                q.push_back(std::exp(v - shift));
                z += q.back();
            }
            for (double& v : q) v /= z;
            Prediction p = Prediction::simplex(std::move(q));
            if (!gen.contains(p)) throw DomainError("KL inverse gradient reached the simplex boundary");
            return p;
        }
    }
    return {};
}

/// B_phi(p, q) = phi(p) - phi(q) - <grad phi(q), p - q>, evaluated in its
/// closed form for each generator.
inline double divergence(const Generator& gen, const Prediction& p, const Prediction& q) {
    gen.check(p);
    gen.check(q);
    switch (gen.kind()) {
        case LossKind::Squared: {
            const double d = p[0] - q[0];
            return d * d;
        }
        case LossKind::ItakuraSaito: {
            const double r = p[0] / q[0];
            return r - std::log(r) - 1.0;
        }
        case LossKind::Poisson:
            return p[0] * std::log(p[0] / q[0]) - p[0] + q[0];
        case LossKind::KLMinimal: {
            const double pk = detail::last_mass(p.values);
            const double qk = detail::last_mass(q.values);
            double s = pk * std::log(pk / qk);
            for (std::size_t c = 0; c < p.size(); ++c) s += p[c] * std::log(p[c] / q[c]);
            return s;
        }
    }
    return 0.0;
}

/// Left Bregman centroid grad_inverse(sum_i w_i grad(q_i)). Weights must
/// already sum to one; an empty span means uniform 1/M.
inline Prediction left_centroid(const Generator& gen, std::span<const Prediction> points,
                                std::span<const double> weights = {}) {
    if (points.empty()) throw DomainError("left centroid of an empty set");
    if (!weights.empty() && weights.size() != points.size()) {
        throw DomainError("weight count does not match point count");
    }
    // the centroid of identical points is that point, without a dual round trip
    if (std::all_of(points.begin() + 1, points.end(), [&](const Prediction& q) { return q == points.front(); })) {
        gen.check(points.front());
        for (double w : weights) {
            if (w < 0.0) throw DomainError("negative centroid weight");
        }
        return points.front();
    }
    const double uniform = 1.0 / static_cast<double>(points.size());
    DualPoint mean{std::vector<double>(gen.dimension(), 0.0)};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double w = weights.empty() ? uniform : weights[i];
        if (w < 0.0) throw DomainError("negative centroid weight");
        const DualPoint eta = grad(gen, points[i]);
        for (std::size_t c = 0; c < eta.values.size(); ++c) mean.values[c] += w * eta.values[c];
    }
    return grad_inverse(gen, mean);
}

/// Full length-k probability vector from a minimal (k-1) KL prediction.
inline std::vector<double> extend_simplex(const Prediction& q) {
    if (q.domain != Domain::Simplex || q.size() == 0) {
        throw DomainError("extend_simplex needs a simplex prediction");
    }
    const Generator gen = Generator::kl(static_cast<int>(q.size()) + 1);
    gen.check(q);
    std::vector<double> full = q.values;
    full.push_back(detail::last_mass(q.values));
    return full;
}

/// Minimal parameterisation of a full probability vector (drops the last entry).
inline Prediction restrict_simplex(std::span<const double> full) {
    if (full.size() < 2) throw DomainError("probability vector needs at least two classes");
    return Prediction::simplex(std::vector<double>(full.begin(), full.end() - 1));
}

/// Probability of class `c` (0-based, c == k-1 is the implicit class).
inline double class_probability(const Prediction& q, std::size_t c) {
    if (c < q.size()) return q[c];
    if (c == q.size()) return detail::last_mass(q.values);
    throw DomainError("class index out of range");
}

}  // namespace ensdecomp
