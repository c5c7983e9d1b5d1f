#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace momentfit {

// Bad user input: malformed files, invalid configuration, out-of-domain points.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: ill-conditioned systems, quadrature that does not settle.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateRegionError : public InputError {
public:
    DegenerateRegionError() : InputError("degenerate region: lower bound must be below upper bound") {}
};

class OutOfDomainError : public InputError {
public:
    using InputError::InputError;
};

// A raw function that is (numerically) a combination of its predecessors.
class DependenceError : public NumericError {
public:
    explicit DependenceError(std::size_t index)
        : NumericError("linearly dependent function at index " + std::to_string(index)),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class IllConditionedError : public NumericError {
public:
    explicit IllConditionedError(double condition)
        : NumericError("ill-conditioned Gram matrix (condition estimate " +
                       std::to_string(condition) + ")"),
          condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class SingularCovarianceError : public NumericError {
public:
    SingularCovarianceError(double eigenvalue, std::vector<double> eigenvector)
        : NumericError("singular covariance: eigenvalue " + std::to_string(eigenvalue) +
                       " along direction " + describe(eigenvector)),
          eigenvalue_(eigenvalue),
          eigenvector_(std::move(eigenvector)) {}
    double eigenvalue() const noexcept { return eigenvalue_; }
    const std::vector<double>& eigenvector() const noexcept { return eigenvector_; }

private:
    static std::string describe(const std::vector<double>& v) {
        std::string s = "(";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(v[i]);
        }
        return s + ")";
    }
    double eigenvalue_;
    std::vector<double> eigenvector_;
};

class QuadratureError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace momentfit
