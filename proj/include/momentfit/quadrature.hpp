#pragma once

#include "momentfit/error.hpp"
#include "momentfit/region.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace momentfit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
Rule1D gauss_legendre(std::size_t n);
// n-point Gauss-Legendre rule mapped onto [lower, upper].
Rule1D gauss_legendre(std::size_t n, double lower, double upper);

// n-point Gauss-Hermite rule for plain integrals over R: the e^{-u^2} weight is
// folded into the returned weights, and nodes are x = scale * u. Exact for
// polynomial * e^{-x^2 / scale^2} of degree < 2n.
Rule1D gauss_hermite(std::size_t n, double scale = 1.0);

// Composite rule: `panels` equal panels of an order-`order` Gauss-Legendre rule.
Rule1D composite_gauss_legendre(std::size_t panels, std::size_t order, double lower, double upper);

// Tensor-product rule; nodes are rows of an N x D matrix.
struct TensorRule {
    RowMatrix nodes;
    Eigen::VectorXd weights;

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights.size()); }
    std::span<const double> node(std::size_t i) const {
        return {nodes.data() + i * static_cast<std::size_t>(nodes.cols()),
                static_cast<std::size_t>(nodes.cols())};
    }
};

TensorRule tensor_rule(std::span<const Rule1D> rules);

struct QuadratureOptions {
    std::size_t initial_nodes = 64;  // per dimension
    // Accept once successive estimates agree to this, relative to max(1, |estimate|).
    double tolerance = 1e-10;
    double failure_threshold = 1e-6; // at the node cap, larger disagreement is an error
    double hermite_scale = 1.0;      // node scale on unbounded domains
    std::size_t max_total_nodes = std::size_t{1} << 21;
};

// Gauss-Legendre on a box, Gauss-Hermite on R^D.
TensorRule domain_rule(const Domain& domain, std::size_t nodes_per_dim, double hermite_scale = 1.0);

// Largest per-dimension node count the refinement loop may reach.
std::size_t max_nodes_per_dim(const Domain& domain, const QuadratureOptions& opts);

// Evaluates `compute(rule)` on successively doubled rules until two estimates
// agree within opts.tolerance (max over entries). Returns the finer estimate.
template <class Compute>
auto refine_until_stable(const Domain& domain, const QuadratureOptions& opts, Compute&& compute) {
    std::size_t n = opts.initial_nodes;
    const std::size_t cap = max_nodes_per_dim(domain, opts);
    auto previous = compute(domain_rule(domain, n, opts.hermite_scale));
    double change = 0.0;
    while (true) {
        if (2 * n > cap) break;
        n *= 2;
        auto current = compute(domain_rule(domain, n, opts.hermite_scale));
        change = (current - previous).cwiseAbs().maxCoeff() /
                 std::max(1.0, static_cast<double>(current.cwiseAbs().maxCoeff()));
        previous = std::move(current);
        if (!(change > opts.tolerance)) return previous;
    }
    if (!(change <= opts.failure_threshold))
        throw QuadratureError("quadrature did not converge (change " + std::to_string(change) +
                              " at " + std::to_string(n) + " nodes per dimension)");
    return previous;
}

// Integral of a scalar function over the domain with node doubling.
double integrate(const Domain& domain, const std::function<double(std::span<const double>)>& f,
                 const QuadratureOptions& opts = {});

}  // namespace momentfit
