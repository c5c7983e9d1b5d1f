#include "momentfit/density.hpp"

#include "momentfit/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace momentfit {

FittedDensity::FittedDensity(BasisFamily family, Eigen::VectorXd coefficients, std::optional<AffineTransform> transform)
    : FittedDensity(std::move(family), std::move(coefficients), Eigen::VectorXd(), std::move(transform)) {}

FittedDensity::FittedDensity(BasisFamily family, Eigen::VectorXd re, Eigen::VectorXd im,
                             std::optional<AffineTransform> transform)
    : family_(std::move(family)),
      re_(std::move(re)),
      im_(std::move(im)),
      kind_(im_.size() ? WeightKind::complex : WeightKind::real),
      transform_(std::move(transform)) {
    const auto m = static_cast<Eigen::Index>(family_.size());
    if (re_.size() != m) throw InputError("coefficient count does not match the basis size");
    if (im_.size() == 0) im_ = Eigen::VectorXd::Zero(m);
    if (im_.size() != m) throw InputError("imaginary coefficient count does not match the basis size");
    if (!re_.allFinite() || !im_.allFinite()) throw NumericError("non-finite coefficients");
    if (transform_) {
        const auto d = static_cast<Eigen::Index>(family_.dim());
        if (transform_->mean.size() != d || transform_->matrix.rows() != d || transform_->matrix.cols() != d)
            throw InputError("transform dimension does not match the basis");
    }
}

FittedDensity FittedDensity::with_coefficients(Eigen::VectorXd re, Eigen::VectorXd im) const {
    return FittedDensity(family_, std::move(re), std::move(im), transform_);
}

FittedDensity FittedDensity::with_transform(std::optional<AffineTransform> transform) const {
    return is_complex() ? FittedDensity(family_, re_, im_, std::move(transform))
                        : FittedDensity(family_, re_, std::move(transform));
}

Eigen::VectorXd FittedDensity::to_family_coordinates(std::span<const double> x) const {
    if (x.size() != dim()) throw InputError("point dimension does not match the density");
    Eigen::VectorXd y = transform_ ? transform_->apply(x)
                                   : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size())));
    if (!family_.domain().contains(std::span<const double>(y.data(), x.size())))
        throw OutOfDomainError("point outside the basis region");
    return y;
}

std::complex<double> FittedDensity::raw_value(std::span<const double> y) const {
    const Eigen::VectorXd f = family_.evaluate(y);
    return {re_.dot(f), is_complex() ? im_.dot(f) : 0.0};
}

std::complex<double> FittedDensity::evaluate_complex(std::span<const double> x) const {
    const Eigen::VectorXd y = to_family_coordinates(x);
    auto v = raw_value(std::span<const double>(y.data(), dim()));
    return transform_ ? v * transform_->jacobian_abs_det : v;
}

double FittedDensity::evaluate(std::span<const double> x) const { return evaluate_complex(x).real(); }

double FittedDensity::integrate() const { return re_.dot(family_.integrals()); }

double FittedDensity::integrate_quadrature(const QuadratureOptions& opts) const {
    QuadratureOptions o = opts;
    // Hermite-function densities decay like e^{-x^2/2}; this scale makes the rule exact for them
    if (!family_.domain().is_bounded()) o.hermite_scale = std::numbers::sqrt2;
    return momentfit::integrate(
        family_.domain(), [&](std::span<const double> y) { return raw_value(y).real(); }, o);
}

NegativityReport negativity_report(const FittedDensity& density, std::size_t grid) {
    if (grid < 2) throw InputError("negativity grid needs at least 2 points per dimension");
    const std::size_t d = density.dim();
    std::vector<double> lo(d, -8.0), hi(d, 8.0);
    if (const auto& r = density.family().domain().region) {
        lo = r->lower();
        hi = r->upper();
    }
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (total > (std::size_t{1} << 26) / grid) throw InputError("negativity grid too large");
        total *= grid;
    }
    NegativityReport rep;
    rep.min_value = std::numeric_limits<double>::infinity();
    rep.grid_points = total;
    std::vector<double> y(d);
    std::vector<std::size_t> idx(d, 0);
    Eigen::VectorXd best(static_cast<Eigen::Index>(d));
    std::size_t negative = 0;
    const double jac = density.transform() ? density.transform()->jacobian_abs_det : 1.0;
    for (std::size_t n = 0; n < total; ++n) {
        for (std::size_t k = 0; k < d; ++k) {
            y[k] = idx[k] + 1 == grid ? hi[k] : lo[k] + (hi[k] - lo[k]) * double(idx[k]) / double(grid - 1);
        }
        const double v = density.family().evaluate(y).dot(density.coefficients()) * jac;
        if (v < 0) ++negative;
        if (v < rep.min_value) {
            rep.min_value = v;
            best = Eigen::Map<Eigen::VectorXd>(y.data(), Eigen::Index(d));
        }
        for (std::size_t k = d; k-- > 0;) {
            if (++idx[k] < grid) break;
            idx[k] = 0;
        }
    }
    if (const auto& t = density.transform()) best = t->matrix.lu().solve(best) + t->mean;
    rep.argmin = best;
    rep.negative_fraction = double(negative) / double(total);
    return rep;
}

std::string to_string(SignClass c) {
    switch (c) {
        case SignClass::positive: return "+1";
        case SignClass::negative: return "-1";
        default: return "boundary";
    }
}

SignClass classify_sign(const FittedDensity& density, std::span<const double> x) {
    if (density.is_complex()) throw InputError("sign rule needs a real-weighted density");
    const double v = density.evaluate(x);
    if (std::abs(v) < decision_tolerance) return SignClass::boundary;
    return v > 0 ? SignClass::positive : SignClass::negative;
}

std::optional<int> classify_argument(const FittedDensity& density, std::span<const double> x, int classes) {
    if (!density.is_complex()) throw InputError("argument rule needs a complex-weighted density");
    if (classes < 1) throw InputError("number of classes must be positive");
    const auto v = density.evaluate_complex(x);
    if (std::abs(v) < decision_tolerance) return std::nullopt;
    double arg = std::atan2(v.imag(), v.real());
    if (arg < 0) arg += 2 * std::numbers::pi;
    const int k = static_cast<int>(std::floor(classes * arg / (2 * std::numbers::pi)));
    return std::min(k, classes - 1);
}

SparsifyResult sparsify(const FittedDensity& density, double threshold) {
    if (!(threshold >= 0)) throw InputError("sparsify threshold must be nonnegative");
    Eigen::VectorXd re = density.coefficients(), im = density.coefficients_imag();
    std::size_t survivors = 0;
    for (Eigen::Index i = 0; i < re.size(); ++i) {
        if (std::hypot(re[i], im[i]) <= threshold) {
            re[i] = 0;
            im[i] = 0;
        } else {
            ++survivors;
        }
    }
    if (!density.is_complex()) im.resize(0);
    return {density.with_coefficients(std::move(re), std::move(im)), survivors};
}

}  // namespace momentfit
