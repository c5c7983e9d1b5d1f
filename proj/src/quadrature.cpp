#include "momentfit/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace momentfit {

namespace {

// Eigenvalues of a symmetric tridiagonal Jacobi matrix with zero diagonal.
std::vector<double> jacobi_eigenvalues(std::size_t n, const std::function<double(std::size_t)>& offdiag) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 0 ? n - 1 : 0));
    for (std::size_t k = 1; k < n; ++k) sub[static_cast<Eigen::Index>(k - 1)] = offdiag(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(std::size_t n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2 * kk + 1) * x * p1 - kk * p0) / (kk + 1);
        p0 = p1;
        p1 = p2;
    }
    const double dn = static_cast<double>(n);
    const double dp = dn * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

// Normalized Hermite functions psi_n(x), psi_{n-1}(x).
std::pair<double, double> hermite_function_pair(std::size_t n, double x) {
    double prev = 0.0;
    double cur = std::exp(-0.5 * x * x) / std::pow(std::numbers::pi, 0.25);
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double next = std::sqrt(2.0 / (kk + 1)) * x * cur - std::sqrt(kk / (kk + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return {cur, prev};
}

}  // namespace

Rule1D gauss_legendre(std::size_t n) {
    if (n == 0) throw InputError("quadrature rule needs at least one node");
    auto guesses = jacobi_eigenvalues(n, [](std::size_t k) {
        const double kk = static_cast<double>(k);
        return kk / std::sqrt(4 * kk * kk - 1);
    });
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = guesses[i];
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre_with_derivative(n, x);
            const double step = p / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        auto [p, dp] = legendre_with_derivative(n, x);
        (void)p;
        rule.nodes[i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // Exact symmetry keeps odd integrands at zero.
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

Rule1D gauss_legendre(std::size_t n, double lower, double upper) {
    auto rule = gauss_legendre(n);
    const double half = 0.5 * (upper - lower);
    const double mid = 0.5 * (upper + lower);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

Rule1D gauss_hermite(std::size_t n, double scale) {
    if (n == 0) throw InputError("quadrature rule needs at least one node");
    auto guesses = jacobi_eigenvalues(n, [](std::size_t k) { return std::sqrt(0.5 * static_cast<double>(k)); });
    const double dn = static_cast<double>(n);
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = guesses[i];
        for (int it = 0; it < 100; ++it) {
            auto [psi, psi_prev] = hermite_function_pair(n, x);
            // psi_n' = sqrt(2n) psi_{n-1} - x psi_n; the second term vanishes at roots.
            const double step = psi / (std::sqrt(2 * dn) * psi_prev - x * psi);
            x -= step;
            if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x))) break;
        }
        auto [psi, psi_prev] = hermite_function_pair(n, x);
        (void)psi;
        rule.nodes[i] = scale * x;
        rule.weights[i] = scale / (dn * psi_prev * psi_prev);
    }
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

Rule1D composite_gauss_legendre(std::size_t panels, std::size_t order, double lower, double upper) {
    if (panels == 0) throw InputError("composite rule needs at least one panel");
    const auto base = gauss_legendre(order);
    const double h = (upper - lower) / static_cast<double>(panels);
    Rule1D rule;
    rule.nodes.reserve(panels * order);
    rule.weights.reserve(panels * order);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = lower + (static_cast<double>(p) + 0.5) * h;
        for (std::size_t i = 0; i < order; ++i) {
            rule.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
            rule.weights.push_back(0.5 * h * base.weights[i]);
        }
    }
    return rule;
}

TensorRule tensor_rule(std::span<const Rule1D> rules) {
    if (rules.empty()) throw InputError("tensor rule needs at least one factor");
    std::size_t total = 1;
    for (const auto& r : rules) total *= r.nodes.size();
    const auto dim = rules.size();
    TensorRule out;
    out.nodes.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dim));
    out.weights.resize(static_cast<Eigen::Index>(total));
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t k = 0; k < total; ++k) {
        double w = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            out.nodes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = rules[d].nodes[idx[d]];
            w *= rules[d].weights[idx[d]];
        }
        out.weights[static_cast<Eigen::Index>(k)] = w;
        // Last dimension varies fastest.
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < rules[d].nodes.size()) break;
            idx[d] = 0;
        }
    }
    return out;
}

TensorRule domain_rule(const Domain& domain, std::size_t nodes_per_dim, double hermite_scale) {
    std::vector<Rule1D> rules;
    rules.reserve(domain.dim);
    if (domain.region) {
        for (std::size_t d = 0; d < domain.dim; ++d)
            rules.push_back(gauss_legendre(nodes_per_dim, domain.region->lower(d), domain.region->upper(d)));
    } else {
        auto r = gauss_hermite(nodes_per_dim, hermite_scale);
        rules.assign(domain.dim, r);
    }
    return tensor_rule(rules);
}

std::size_t max_nodes_per_dim(const Domain& domain, const QuadratureOptions& opts) {
    // Hermite function recurrences underflow beyond ~512 nodes.
    std::size_t cap = domain.region ? 1024 : 512;
    while (cap > opts.initial_nodes) {
        double total = std::pow(static_cast<double>(cap), static_cast<double>(domain.dim));
        if (total <= static_cast<double>(opts.max_total_nodes)) break;
        cap /= 2;
    }
    return std::max(cap, opts.initial_nodes);
}

double integrate(const Domain& domain, const std::function<double(std::span<const double>)>& f,
                 const QuadratureOptions& opts) {
    auto estimate = refine_until_stable(domain, opts, [&](const TensorRule& rule) {
        Eigen::Matrix<double, 1, 1> s;
        s(0) = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) s(0) += rule.weights[static_cast<Eigen::Index>(i)] * f(rule.node(i));
        return s;
    });
    return estimate(0);
}

}  // namespace momentfit
