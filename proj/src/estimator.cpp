#include "momentfit/estimator.hpp"

#include "momentfit/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

namespace momentfit {

std::string to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::none: return "none";
        case NormalizationMode::lagrange: return "lagrange";
        default: return "posthoc";
    }
}

NormalizationMode normalization_from_string(const std::string& name) {
    if (name == "none") return NormalizationMode::none;
    if (name == "lagrange") return NormalizationMode::lagrange;
    if (name == "posthoc") return NormalizationMode::posthoc;
    throw InputError("unknown normalization '" + name + "' (expected none|lagrange|posthoc)");
}

double kernel_variance(const std::function<double(double)>& kernel, double half_width) {
    if (!kernel) return 0.0;
    if (!(half_width > 0) || !std::isfinite(half_width)) throw InputError("kernel half width must be positive");
    for (int k = 0; k <= 64; ++k) {
        const double h = half_width * k / 64.0;
        const double a = kernel(h), b = kernel(-h);
        if (!(a >= 0) || !(b >= 0)) throw InputError("kernel must be nonnegative");
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) throw InputError("kernel is not symmetric");
    }
    using boost::math::quadrature::gauss_kronrod;
    // split at 0 where kernels peak or jump
    auto half = [&](auto g) {
        return gauss_kronrod<double, 61>::integrate(g, -half_width, 0.0, 15, 1e-13) +
               gauss_kronrod<double, 61>::integrate(g, 0.0, half_width, 15, 1e-13);
    };
    const double mass = half([&](double h) { return kernel(h); });
    if (std::abs(mass - 1.0) > 1e-8) throw InputError("kernel does not integrate to 1 (got " + std::to_string(mass) + ")");
    return 0.5 * half([&](double h) { return h * h * kernel(h); });
}

KernelSpec KernelSpec::gaussian(double eps) {
    if (!(eps > 0)) throw InputError("kernel width must be positive");
    KernelSpec k;
    k.name = "gaussian";
    k.kernel = [eps](double h) { return std::exp(-0.5 * h * h / (eps * eps)) / (eps * std::sqrt(2 * std::numbers::pi)); };
    k.half_width = 40 * eps;
    k.v = kernel_variance(k.kernel, k.half_width);
    return k;
}

KernelSpec KernelSpec::uniform(double a) {
    if (!(a > 0)) throw InputError("kernel width must be positive");
    KernelSpec k;
    k.name = "uniform";
    k.kernel = [a](double h) { return std::abs(h) <= a ? 0.5 / a : 0.0; };
    k.half_width = a;
    k.v = kernel_variance(k.kernel, k.half_width);
    return k;
}

KernelSpec KernelSpec::dirac() {
    KernelSpec k;
    k.name = "dirac";
    return k;
}

std::complex<double> average_functional(const AveragingSource& source,
                                        const std::function<double(std::span<const double>)>& f) {
    auto avg = source.average(1, [&](std::span<const double> x, std::span<double> out) { out[0] = f(x); });
    return {avg.re[0], avg.is_complex() ? avg.im[0] : 0.0};
}

namespace {

FittedDensity make_density(const BasisFamily& family, const Averages& a) {
    if (a.is_complex()) return FittedDensity(family, a.re, a.im);
    return FittedDensity(family, a.re);
}

void check_orthonormal(const BasisFamily& family) {
    if (!family.orthonormal()) throw InputError("family is not orthonormal; use a Gram solve");
}

Eigen::MatrixXd family_gram(const BasisFamily& family) {
    if (family.gram()) return *family.gram();
    return gram_matrix(family);
}

// Solver for G x = b with conditioning checks; falls back to least squares.
struct GramSolver {
    explicit GramSolver(const Eigen::MatrixXd& g) : gram(g), llt(g) {
        const double cond = gram_condition(g);
        if (!(cond < 1e12)) throw IllConditionedError(cond);
        if (llt.info() != Eigen::Success) {
            std::cerr << "warning: Gram matrix is not positive definite; using a least-squares solve\n";
            fallback.emplace(g);
        }
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        return fallback ? Eigen::VectorXd(fallback->solve(b)) : Eigen::VectorXd(llt.solve(b));
    }
    Eigen::MatrixXd gram;
    Eigen::LLT<Eigen::MatrixXd> llt;
    std::optional<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>> fallback;
};

Averages kernel_corrected_averages(const AveragingSource& source, const BasisFamily& family, const KernelSpec& kernel) {
    auto a = source.average(family);
    if (kernel.v == 0.0) return a;
    if (family.dim() != 1) throw InputError("kernel correction is only defined for one-dimensional families");
    if (!family.has_second_derivatives()) throw InputError("basis family does not provide second derivatives");
    auto second = source.average_second_derivatives(family, 0);
    second *= kernel.v;
    a += second;
    return a;
}

}  // namespace

double gram_condition(const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lo > 0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

FittedDensity fit_orthonormal(const AveragingSource& source, const BasisFamily& family) {
    check_orthonormal(family);
    return make_density(family, source.average(family));
}

FittedDensity fit_general(const AveragingSource& source, const BasisFamily& family) {
    EstimationOptions opts;
    opts.gram_mode = GramMode::solve;
    return fit(source, family, opts);
}

FittedDensity fit_normalized(const AveragingSource& source, const BasisFamily& family, double C) {
    check_orthonormal(family);
    EstimationOptions opts;
    opts.normalization = NormalizationMode::lagrange;
    opts.C = C;
    return fit(source, family, opts);
}

FittedDensity fit_kernel_corrected(const AveragingSource& source, const BasisFamily& family, const KernelSpec& kernel) {
    check_orthonormal(family);
    if (family.dim() != 1) throw InputError("kernel correction is only defined for one-dimensional families");
    EstimationOptions opts;
    opts.kernel_correction = kernel;
    return fit(source, family, opts);
}

FittedDensity fit(const AveragingSource& source, const BasisFamily& family, const EstimationOptions& opts) {
    Averages a = opts.kernel_correction ? kernel_corrected_averages(source, family, *opts.kernel_correction)
                                        : source.average(family);
    const bool complex = a.is_complex();
    const Eigen::VectorXd F = family.integrals();
    const bool solve = opts.gram_mode == GramMode::solve || !family.orthonormal();

    std::optional<GramSolver> solver;
    if (solve) {
        solver.emplace(family_gram(family));
        a.re = solver->solve(a.re);
        if (complex) a.im = solver->solve(a.im);
    }

    switch (opts.normalization) {
        case NormalizationMode::none: break;
        case NormalizationMode::lagrange: {
            // minimizes ||rho_a - rho_b||^2 subject to sum a_i F_i = C; G^{-1} F is F for orthonormal families
            const Eigen::VectorXd GF = solver ? solver->solve(F) : F;
            const double denom = F.dot(GF);
            if (!(denom > 0) || F.cwiseAbs().maxCoeff() <= 1e-12)
                throw InputError("normalization constraint is unsatisfiable: every F_i is zero");
            a.re += ((opts.C - F.dot(a.re)) / denom) * GF;
            if (complex) a.im += (-F.dot(a.im) / denom) * GF;
            break;
        }
        case NormalizationMode::posthoc: {
            if (complex) throw InputError("posthoc normalization is undefined for complex weights");
            const double total = F.dot(a.re);
            if (total == 0.0 || !std::isfinite(total)) throw NumericError("cannot rescale a density integrating to 0");
            a.re *= opts.C / total;
            break;
        }
    }
    return make_density(family, a);
}

}  // namespace momentfit
