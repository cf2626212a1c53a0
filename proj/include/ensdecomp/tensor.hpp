#pragma once

// D x M x N tables of member predictions (trials x members x test points) and
// their CSV serialisation.
//
// CSV layout:
//   # ensdecomp-tensor D=<D> M=<M> N=<N> k=<k> loss=<tag> weighted=<0|1>
//   d,i,j,v0,...,v{dim-1}[,weight]
//   one row per entry, d outermost, then i, then j.
// KL predictions are written in their minimal k-1 parameterisation; labels as
// a single unsigned integer column "label". Values use shortest round-trip
// formatting.

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ensdecomp/bregman.hpp"
#include "ensdecomp/errors.hpp"
#include "ensdecomp/grid.hpp"

namespace ensdecomp {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <class T>
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t trials, std::size_t members, std::size_t points, T fill = T{})
        : d_(trials), m_(members), n_(points), cells_(trials * members * points, std::move(fill)) {}

    std::size_t trials() const noexcept { return d_; }
    std::size_t members() const noexcept { return m_; }
    std::size_t points() const noexcept { return n_; }

    T& operator()(std::size_t d, std::size_t i, std::size_t j) { return cells_[index(d, i, j)]; }
    const T& operator()(std::size_t d, std::size_t i, std::size_t j) const { return cells_[index(d, i, j)]; }

    bool weighted() const noexcept { return weights_.has_value(); }
    double weight(std::size_t d, std::size_t i, std::size_t j) const {
        return weights_ ? (*weights_)[index(d, i, j)] : 1.0;
    }
    void set_weight(std::size_t d, std::size_t i, std::size_t j, double w) {
        if (!(w >= 0.0)) throw DomainError("tensor weights must be nonnegative");
        if (!weights_) weights_.emplace(cells_.size(), 1.0);
        (*weights_)[index(d, i, j)] = w;
    }

    /// D x M slice at test point j.
    Grid<T> grid_at(std::size_t j) const {
        Grid<T> g(d_, m_);
        for (std::size_t d = 0; d < d_; ++d) {
            for (std::size_t i = 0; i < m_; ++i) {
                g(d, i) = (*this)(d, i, j);
                if (weights_) g.set_weight(d, i, weight(d, i, j));
            }
        }
        return g;
    }

    /// Members 0..m-1 only (nested ensembles).
    Tensor3 prefix(std::size_t m) const {
        if (m == 0 || m > m_) throw SizeError("ensemble size exceeds the tensor's member count");
        Tensor3 out(d_, m, n_);
        out.loss = loss;
        out.classes = classes;
        for (std::size_t d = 0; d < d_; ++d) {
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n_; ++j) {
                    out(d, i, j) = (*this)(d, i, j);
                    if (weights_) out.set_weight(d, i, j, weight(d, i, j));
                }
            }
        }
        return out;
    }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

    std::string loss;  // tag written to the CSV header
    int classes = 0;

private:
    std::size_t index(std::size_t d, std::size_t i, std::size_t j) const { return (d * m_ + i) * n_ + j; }

    std::size_t d_ = 0, m_ = 0, n_ = 0;
    std::vector<T> cells_;
    std::optional<std::vector<double>> weights_;
};

using PredictionTensor = Tensor3<Prediction>;
using LabelTensor = Tensor3<int>;

template <class T>
void write_tensor_csv(std::ostream& out, const Tensor3<T>& t) {
    static_assert(std::is_same_v<T, Prediction> || std::is_same_v<T, int>);
    std::size_t dim = 1;
    if constexpr (std::is_same_v<T, Prediction>) {
        if (t.trials() * t.members() * t.points() > 0) dim = t(0, 0, 0).size();
    }
    out << "# ensdecomp-tensor D=" << t.trials() << " M=" << t.members() << " N=" << t.points()
        << " k=" << t.classes << " loss=" << (t.loss.empty() ? "none" : t.loss) << " weighted=" << (t.weighted() ? 1 : 0)
        << "\n";
    out << "d,i,j";
    if constexpr (std::is_same_v<T, int>) {
        out << ",label";
    } else {
        for (std::size_t c = 0; c < dim; ++c) out << ",v" << c;
    }
    if (t.weighted()) out << ",weight";
    out << "\n";
    for (std::size_t d = 0; d < t.trials(); ++d) {
        for (std::size_t i = 0; i < t.members(); ++i) {
            for (std::size_t j = 0; j < t.points(); ++j) {
                out << d << ',' << i << ',' << j;
                if constexpr (std::is_same_v<T, int>) {
                    out << ',' << t(d, i, j);
                } else {
                    for (double v : t(d, i, j).values) out << ',' << format_double(v);
                }
                if (t.weighted()) out << ',' << format_double(t.weight(d, i, j));
                out << "\n";
            }
        }
    }
}

namespace detail {

struct TensorHeader {
    std::size_t d = 0, m = 0, n = 0;
    int k = 0;
    std::string loss;
    bool weighted = false;
};

inline TensorHeader parse_tensor_header(const std::string& line) {
    std::istringstream in(line);
    std::string hash, magic, tok;
    in >> hash >> magic;
    if (hash != "#" || magic != "ensdecomp-tensor") throw ParseError("missing tensor header", 1, 1);
    TensorHeader h;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("malformed header field '" + tok + "'", 1, 1);
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "D") h.d = std::stoul(val);
        else if (key == "M") h.m = std::stoul(val);
        else if (key == "N") h.n = std::stoul(val);
        else if (key == "k") h.k = std::stoi(val);
        else if (key == "loss") h.loss = val == "none" ? std::string{} : val;
        else if (key == "weighted") h.weighted = val == "1";
        else throw ParseError("unknown header field '" + key + "'", 1, 1);
    }
    return h;
}

inline double parse_field(const std::string& s, std::size_t row, std::size_t col) {
    double v;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ParseError("bad number '" + s + "'", row, col);
    return v;
}

}  // namespace detail

/// Reads a tensor written by write_tensor_csv. `domain` tags the predictions
/// (ignored for label tensors).
template <class T>
Tensor3<T> read_tensor_csv(std::istream& in, Domain domain = Domain::Reals) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty tensor file", 1, 1);
    const auto h = detail::parse_tensor_header(line);
    if (!std::getline(in, line)) throw ParseError("missing column header", 2, 1);
    std::size_t columns = 1;
    for (char c : line) columns += c == ',' ? 1 : 0;
    const std::size_t dim = columns - 3 - (h.weighted ? 1 : 0);
    Tensor3<T> t(h.d, h.m, h.n);
    t.loss = h.loss;
    t.classes = h.k;
    std::size_t row = 2;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) f.push_back(field);
        if (f.size() != columns) throw ParseError("wrong number of fields", row, f.size());
        const auto d = static_cast<std::size_t>(detail::parse_field(f[0], row, 1));
        const auto i = static_cast<std::size_t>(detail::parse_field(f[1], row, 2));
        const auto j = static_cast<std::size_t>(detail::parse_field(f[2], row, 3));
        if (d >= h.d || i >= h.m || j >= h.n) throw ParseError("index out of range", row, 1);
        if constexpr (std::is_same_v<T, int>) {
            t(d, i, j) = static_cast<int>(detail::parse_field(f[3], row, 4));
        } else {
            std::vector<double> v(dim);
            for (std::size_t c = 0; c < dim; ++c) v[c] = detail::parse_field(f[3 + c], row, 4 + c);
            t(d, i, j) = Prediction(std::move(v), domain);
        }
        if (h.weighted) t.set_weight(d, i, j, detail::parse_field(f.back(), row, columns));
        ++seen;
    }
    if (seen != h.d * h.m * h.n) throw ParseError("tensor has missing entries", row, 1);
    return t;
}

}  // namespace ensdecomp
