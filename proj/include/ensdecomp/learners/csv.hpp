#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ensdecomp/errors.hpp"
#include "ensdecomp/learners/dataset.hpp"

namespace ensdecomp {

enum class TaskKind { Regression, Classification };

struct CsvSchema {
    std::string target_column;
    TaskKind task = TaskKind::Regression;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses a dataset from CSV text: a header row, then numeric feature
/// columns plus the target column named in the schema. Classification labels
/// may be arbitrary strings; they are mapped to classes in sorted order
/// (numerically when every label is an integer).
inline Dataset parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("CSV input is empty");
    const auto header = detail::split_csv_line(line);
    const auto target_it = std::find(header.begin(), header.end(), schema.target_column);
    if (target_it == header.end()) throw SchemaError("target column '" + schema.target_column + "' not found");
    const auto target_col = static_cast<std::size_t>(target_it - header.begin());
    if (header.size() < 2) throw SchemaError("CSV needs at least one feature column");

    Dataset data;
    data.cols = header.size() - 1;
    std::vector<std::string> raw_labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             row, std::min(fields.size(), header.size()) + 1);
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (fields[c].empty()) throw ParseError("missing value", row, c + 1);
            if (c == target_col) {
                if (schema.task == TaskKind::Regression) {
                    double v;
                    if (!detail::parse_double(fields[c], v)) {
                        throw SchemaError("non-numeric regression target '" + fields[c] + "' at row " +
                                          std::to_string(row));
                    }
                    data.targets.push_back(v);
                } else {
                    raw_labels.push_back(fields[c]);
                }
                continue;
            }
            double v;
            if (!detail::parse_double(fields[c], v)) throw ParseError("non-numeric value '" + fields[c] + "'", row, c + 1);
            data.features.push_back(v);
        }
        ++data.rows;
    }
    if (schema.task == TaskKind::Classification) {
        std::vector<std::string> names = raw_labels;
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        const bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& s) {
            long long v;
            const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            return ec == std::errc{} && p == s.data() + s.size();
        });
        if (numeric) {
            std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
                return std::stoll(a) < std::stoll(b);
            });
        }
        std::map<std::string, int> index;
        for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
        for (const auto& l : raw_labels) data.labels.push_back(index.at(l));
        data.classes = static_cast<int>(names.size());
        if (data.classes < 2 && data.rows > 0) data.classes = 2;
    }
    data.validate();
    return data;
}

inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open CSV file '" + path + "'");
    return parse_csv(in, schema);
}

}  // namespace ensdecomp
