#ifndef MRCT_ERRORS_HPP
#define MRCT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace mrct {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched sizes between related inputs (curve lengths, matrix shapes, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside its admissible range (a <= 0, q outside (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Numerical failure (factorization breakdown, singular system, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Subset with no usable variation: every eigenvalue fell below the rank threshold.
class DegenerateSubsetError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Iteration produced a non-finite or non-positive scale factor; keeps the iterates seen so far.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& msg, std::vector<double> history)
        : NumericalError(msg), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Every candidate chain failed; no estimate is available.
class EstimationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A curve has fewer observations than basis functions; carries the curve id.
class UnderdeterminedCurveError : public Error {
public:
    UnderdeterminedCurveError(const std::string& msg, std::string curve_id)
        : Error(msg), curve_id_(std::move(curve_id)) {}
    const std::string& curve_id() const { return curve_id_; }

private:
    std::string curve_id_;
};

}  // namespace mrct

#endif
