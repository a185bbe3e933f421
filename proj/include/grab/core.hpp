#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ============================================================
// Error hierarchy
// ============================================================

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. K(t), t < 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid tuning parameter (bandwidth, embedding dimension, percentile, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Inconsistent matrix or dataset shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A construction that would divide by zero or produce a zero bandwidth.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Eigensolver or other numerical routine failed.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Synthetic data generator hit an invalid draw.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// Bad experiment configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw ParameterError(msg);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace detail

}  // namespace grab
