#pragma once

#include <stdexcept>
#include <string>

namespace ensdecomp {

/// Argument outside the generator's domain (or its relative interior).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct EmptyGridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// All voting weights of a trial (or of a whole vote) sum to zero.
struct ZeroWeightError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SizeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyDataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A base learner failed while building the prediction tensor.
struct LearnerError : std::runtime_error {
    LearnerError(const std::string& what, std::size_t trial, std::size_t member)
        : std::runtime_error("trial " + std::to_string(trial) + ", member " +
                             std::to_string(member) + ": " + what),
          trial(trial), member(member) {}
    std::size_t trial;
    std::size_t member;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : std::runtime_error("row " + std::to_string(row) + ", column " +
                             std::to_string(column) + ": " + what),
          row(row), column(column) {}
    std::size_t row;
    std::size_t column;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SplitError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace ensdecomp
