#pragma once

#include "momentfit/basis.hpp"
#include "momentfit/density.hpp"
#include "momentfit/sample.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <string>

namespace momentfit {

enum class NormalizationMode { none, lagrange, posthoc };
enum class GramMode { assume_orthonormal, solve };

std::string to_string(NormalizationMode mode);
NormalizationMode normalization_from_string(const std::string& name);

// Symmetric 1D smoothing kernel and v = (1/2) * integral of h^2 k(h).
struct KernelSpec {
    std::string name;
    std::function<double(double)> kernel;  // empty for the Dirac kernel
    double half_width = 0.0;               // integration range [-half_width, half_width]
    double v = 0.0;

    static KernelSpec gaussian(double eps);
    static KernelSpec uniform(double a);
    static KernelSpec dirac();
};

// (1/2) * integral of h^2 k(h) over [-half_width, half_width] by adaptive
// Gauss-Kronrod. Throws InputError unless k integrates to 1 within 1e-8 and
// is symmetric and nonnegative at sampled points.
double kernel_variance(const std::function<double(double)>& kernel, double half_width);

struct EstimationOptions {
    NormalizationMode normalization = NormalizationMode::none;
    double C = 1.0;
    std::optional<KernelSpec> kernel_correction;
    GramMode gram_mode = GramMode::assume_orthonormal;
};

// [f] over the source.
std::complex<double> average_functional(const AveragingSource& source,
                                        const std::function<double(std::span<const double>)>& f);

// a_i = [f_i].
FittedDensity fit_orthonormal(const AveragingSource& source, const BasisFamily& family);

// Solves Gram * a = [f]. Throws IllConditionedError when the Gram condition
// number reaches 1e12.
FittedDensity fit_general(const AveragingSource& source, const BasisFamily& family);

// a_i = [f_i] + lambda F_i with lambda = (C - sum_j [f_j] F_j) / sum_j F_j^2.
// Complex weights constrain the real part to C and the imaginary part to 0.
FittedDensity fit_normalized(const AveragingSource& source, const BasisFamily& family, double C);

// a_i = [f_i] + v [f_i''] (one-dimensional families only).
FittedDensity fit_kernel_corrected(const AveragingSource& source, const BasisFamily& family, const KernelSpec& kernel);

// Averages (optionally kernel corrected), a Gram solve when requested or the
// family is not orthonormal, then the configured normalization.
FittedDensity fit(const AveragingSource& source, const BasisFamily& family, const EstimationOptions& opts = {});

double gram_condition(const Eigen::MatrixXd& gram);

}  // namespace momentfit
