#pragma once

// Report tables (CSV, shortest round-trip floats) and a small SVG line chart.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ensdecomp/errors.hpp"
#include "ensdecomp/tensor.hpp"

namespace ensdecomp {

/// Named numeric columns; the CSV is the authoritative output of every command.
struct ReportTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != header.size()) throw SizeError("report row does not match the header");
        rows.push_back(std::move(row));
    }

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("report has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }

    friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

inline void write_report_csv(std::ostream& out, const ReportTable& t) {
    for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << "\n";
    }
}

inline ReportTable read_report_csv(std::istream& in) {
    ReportTable t;
    std::string line, field;
    if (!std::getline(in, line)) throw ParseError("empty report", 1, 1);
    std::istringstream hs(line);
    while (std::getline(hs, field, ',')) t.header.push_back(field);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<double> values;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) values.push_back(detail::parse_field(field, row, values.size() + 1));
        if (values.size() != t.header.size()) throw ParseError("wrong number of fields", row, values.size());
        t.rows.push_back(std::move(values));
    }
    return t;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool points_only = false;  // scatter plot
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string svg_number(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

}  // namespace detail

/// Self-contained SVG chart of one or more series.
inline std::string render_svg(const std::vector<Series>& series, const ChartOptions& opt) {
    constexpr double width = 720, height = 440, left = 70, right = 170, top = 40, bottom = 55;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            y0 = std::min(y0, s.y[k]);
            y1 = std::max(y1, s.y[k]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::svg_escape(opt.title) << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = x0 + (x1 - x0) * t / 5.0, yv = y0 + (y1 - y0) * t / 5.0;
        o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << detail::svg_number(xv) << "</text>\n";
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
          << detail::svg_number(yv) << "</text>\n";
        o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
          << "\" stroke=\"#e0e0e0\"/>\n";
    }
    if (y0 < 0 && y1 > 0) {
        o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
          << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
      << detail::svg_escape(opt.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << detail::svg_escape(opt.y_label) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* colour = palette[s % std::size(palette)];
        const auto& sr = series[s];
        if (opt.points_only) {
            for (std::size_t k = 0; k < sr.x.size() && k < sr.y.size(); ++k) {
                if (!std::isfinite(sr.x[k]) || !std::isfinite(sr.y[k])) continue;
                o << "<circle cx=\"" << px(sr.x[k]) << "\" cy=\"" << py(sr.y[k]) << "\" r=\"3\" fill=\"" << colour
                  << "\"/>\n";
            }
        } else {
            o << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colour << "\" points=\"";
            for (std::size_t k = 0; k < sr.x.size() && k < sr.y.size(); ++k) {
                if (!std::isfinite(sr.x[k]) || !std::isfinite(sr.y[k])) continue;
                o << px(sr.x[k]) << ',' << py(sr.y[k]) << ' ';
            }
            o << "\"/>\n";
        }
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        o << "<rect x=\"" << left + pw + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\"" << colour
          << "\"/>\n";
        o << "<text x=\"" << left + pw + 30 << "\" y=\"" << ly + 1 << "\">" << detail::svg_escape(sr.name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Pearson r^2 of paired samples; 0 when either side is constant.
inline double pearson_r2(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < n; ++k) mx += x[k], my += y[k];
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
}

}  // namespace ensdecomp
