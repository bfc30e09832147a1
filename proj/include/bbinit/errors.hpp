#pragma once

#include <stdexcept>
#include <string>

namespace bbinit {

/// Precondition or argument violation.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver hit its iteration cap. Carries the final residual
/// (KKT violation for SMO, relative residual for CG).
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Too few background superpixels to train or compare against.
class InsufficientBackground : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The object scribble rasterised to an empty region.
class DegenerateScribble : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset or file ingestion failure; the message names the offending file.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bbinit
