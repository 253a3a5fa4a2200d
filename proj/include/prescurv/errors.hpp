#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace prescurv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (index range,
/// warping interval, table coverage).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Induced metric or pencil could not be reduced at a node.
class GeometryError : public Error {
public:
    GeometryError(std::string what, std::size_t node)
        : Error(std::move(what)), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// Principal curvatures left the admissible cone Gamma_{k-1}; ellipticity is lost.
class ConeExitError : public Error {
public:
    ConeExitError(std::string what, std::size_t node, std::vector<double> lambda)
        : Error(std::move(what)), node_(node), lambda_(std::move(lambda)) {}
    std::size_t node() const noexcept { return node_; }
    const std::vector<double>& lambda() const noexcept { return lambda_; }

private:
    std::size_t node_;
    std::vector<double> lambda_;
};

/// Problem or run configuration is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A structural hypothesis (as-1..as-3, phi-a..phi-d, ...) was violated.
class HypothesisError : public Error {
public:
    HypothesisError(std::string what, std::string hypothesis, double u, std::size_t node, int l)
        : Error(std::move(what)), hypothesis_(std::move(hypothesis)), u_(u), node_(node), l_(l) {}
    const std::string& hypothesis() const noexcept { return hypothesis_; }
    double u() const noexcept { return u_; }
    std::size_t node() const noexcept { return node_; }
    int coefficient() const noexcept { return l_; }

private:
    std::string hypothesis_;
    double u_;
    std::size_t node_;
    int l_;
};

/// Newton iteration exhausted its iteration budget.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// Line search could not find an admissible step.
class StepFailure : public Error {
public:
    using Error::Error;
};

} // namespace prescurv
