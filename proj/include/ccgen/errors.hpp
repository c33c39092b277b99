#pragma once

#include <stdexcept>
#include <string>

namespace ccgen {

// Malformed or unusable input data (bad CSV cell, header mismatch, empty
// table). CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public DataError {
public:
    ParseError(const std::string& msg, long row, long column)
        : DataError(msg + " (row " + std::to_string(row) + ", column " +
                    std::to_string(column) + ")"),
          row(row),
          column(column) {}
    long row;
    long column;
};

class EmptyTable : public DataError {
public:
    explicit EmptyTable(const std::string& msg) : DataError(msg) {}
};

// Numeric failure or generation degeneracy. CLI maps this family to exit
// code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// The prior sampler exhausted its retry budget without producing a
// non-degenerate generating process.
class PriorExhausted : public NumericError {
public:
    explicit PriorExhausted(const std::string& msg) : NumericError(msg) {}
};

namespace detail {

// Internal signal: the current DGP draw is unusable (non-finite values,
// zero-variance treatment or outcome). Callers resample, never patch.
struct DegenerateDgp {
    enum class Reason {
        non_finite,
        degenerate_treatment,
        degenerate_outcome,
        degenerate_eta,
        too_few_nodes,
    };
    Reason reason;
};

} // namespace detail

} // namespace ccgen
