#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imave {

// Base class for everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: wrong shape, asymmetric matrix, non-tangent vector, ...
class ValidationError : public Error {
public:
    using Error::Error;
};

// A matrix that should be positive definite is not (numerically).
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double eigenvalue)
        : Error(what), eigenvalue_(eigenvalue) {}
    [[nodiscard]] double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

// Argument outside the domain of a map (log of a nonpositive number, antipodal points).
class DomainError : public Error {
public:
    using Error::Error;
};

// Every kernel weight at an anchor vanished.
class DegenerateNeighborhoodError : public Error {
public:
    DegenerateNeighborhoodError(const std::string& what, std::size_t anchor)
        : Error(what), anchor_(anchor) {}
    [[nodiscard]] std::size_t anchor() const noexcept { return anchor_; }

private:
    std::size_t anchor_;
};

// Local Gram matrix could not be factorized even after the ridge was added.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, std::size_t anchor)
        : Error(what), anchor_(anchor) {}
    [[nodiscard]] std::size_t anchor() const noexcept { return anchor_; }

private:
    std::size_t anchor_;
};

// An estimator gave up (too many degenerate anchors, singular systems).
class EstimationError : public Error {
public:
    using Error::Error;
};

// Fixed-point iteration did not settle; carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, Eigen::Vector3d last_iterate)
        : Error(what), last_iterate_(std::move(last_iterate)) {}
    [[nodiscard]] const Eigen::Vector3d& last_iterate() const noexcept { return last_iterate_; }

private:
    Eigen::Vector3d last_iterate_;
};

// Simulation generator could not produce a valid draw.
class GenerationError : public Error {
public:
    using Error::Error;
};

// Problems reading a dataset file; row is 1-based, 0 when not row-specific.
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t row = 0) : Error(what), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Problems parsing a run configuration; line is 1-based, 0 for command-line flags.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key, std::size_t line = 0)
        : Error(what), key_(std::move(key)), line_(line) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

}  // namespace imave
