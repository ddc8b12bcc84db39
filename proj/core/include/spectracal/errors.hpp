#pragma once

#include <stdexcept>
#include <string>

namespace spectracal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or wavelength grids of two operands disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A value lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A file does not follow its on-disk format.
class FormatError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// No optimizer start converged; carries the best residual seen.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_rmse)
        : Error(what), best_rmse_(best_rmse) {}

    double best_rmse() const noexcept { return best_rmse_; }

private:
    double best_rmse_;
};

}  // namespace spectracal
