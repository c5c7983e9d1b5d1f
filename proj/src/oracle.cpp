#include "momentfit/oracle.hpp"

#include "momentfit/error.hpp"
#include "momentfit/random.hpp"

#include <cmath>
#include <numbers>

namespace momentfit {

double kde_smooth(const WeightedSample& sample, double epsilon, std::span<const double> x) {
    if (!(epsilon > 0)) throw InputError("kde width must be positive");
    if (sample.kind() != WeightKind::real) throw InputError("kde smoothing needs real weights");
    if (x.size() != sample.dim()) throw InputError("point dimension does not match the sample");
    const double d = static_cast<double>(sample.dim());
    const double norm = std::pow(2 * std::numbers::pi * epsilon * epsilon, -d / 2);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto y = sample.point(i);
        if (sample.region_filter() && !sample.region_filter()->contains(y)) continue;
        double r2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - y[k]) * (x[k] - y[k]);
        total += sample.weights()[Eigen::Index(i)] * std::exp(-0.5 * r2 / (epsilon * epsilon));
        ++count;
    }
    if (count == 0) throw InputError("no sample points inside the region filter");
    return norm * total / static_cast<double>(count);
}

GridFit grid_least_squares_fit(const WeightedSample& sample, const BasisFamily& family, double epsilon,
                               std::size_t points_per_dim) {
    if (!(epsilon > 0)) throw InputError("kde width must be positive");
    const auto& region = family.domain().region;
    if (!region) throw InputError("grid fits need a bounded family");
    const std::size_t d = family.dim();
    if (d > 2) throw InputError("grid fits support at most two dimensions");
    if (sample.dim() != d) throw InputError("sample dimension does not match the basis");
    const std::size_t per = points_per_dim ? points_per_dim : (d == 1 ? 4096 : 512);
    double spacing = 0.0;
    for (std::size_t k = 0; k < d; ++k) spacing = std::max(spacing, region->width(k) / double(per));
    if (spacing > epsilon / 4)
        throw InputError("grid under-resolves the kernel: spacing " + std::to_string(spacing) + " > eps/4");

    const std::size_t total = d == 1 ? per : per * per;
    const auto m = static_cast<Eigen::Index>(family.size());
    Eigen::MatrixXd V(static_cast<Eigen::Index>(total), m);
    Eigen::VectorXd g(static_cast<Eigen::Index>(total));
    std::vector<double> x(d);
    for (std::size_t n = 0; n < total; ++n) {
        std::size_t rest = n;
        for (std::size_t k = d; k-- > 0;) {
            const std::size_t j = rest % per;
            rest /= per;
            x[k] = region->lower(k) + region->width(k) * (double(j) + 0.5) / double(per);
        }
        const auto row = static_cast<Eigen::Index>(n);
        V.row(row) = family.evaluate(x).transpose();
        g[row] = kde_smooth(sample, epsilon, x);
    }
    GridFit fit;
    fit.points_per_dim = per;
    fit.spacing = spacing;
    fit.epsilon = epsilon;
    fit.coefficients = V.colPivHouseholderQr().solve(g);
    return fit;
}

namespace {

double gaussian_density(std::span<const double> y, double scale) {
    double r2 = 0;
    for (double v : y) r2 += v * v;
    const double d = static_cast<double>(y.size());
    return std::exp(-0.5 * r2 / (scale * scale)) / std::pow(2 * std::numbers::pi * scale * scale, d / 2);
}

}  // namespace

WeightedSample sample_from_density(const FittedDensity& density, std::size_t n, std::uint64_t seed,
                                   const SamplerOptions& opts) {
    if (density.is_complex()) throw InputError("cannot sample from a complex-weighted density");
    if (n == 0) throw InputError("sample size must be positive");
    const std::size_t d = density.dim();
    const auto& region = density.family().domain().region;
    const double scale = opts.proposal_scale;
    if (!region && !(scale > 0)) throw InputError("proposal scale must be positive");
    std::vector<double> lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
        lo[k] = region ? region->lower(k) : -8 * scale;
        hi[k] = region ? region->upper(k) : 8 * scale;
    }
    auto rho = [&](std::span<const double> y) { return density.family().evaluate(y).dot(density.coefficients()); };
    auto proposal = [&](std::span<const double> y) {
        return region ? 1.0 / region->volume() : gaussian_density(y, scale);
    };

    const std::size_t per = opts.envelope_grid ? opts.envelope_grid : (d == 1 ? 2001 : 201);
    if (per < 2) throw InputError("envelope grid needs at least 2 points per dimension");
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
        if (total > (std::size_t{1} << 24) / per) throw InputError("envelope grid too large");
        total *= per;
    }
    double envelope = 0.0;
    std::vector<double> y(d);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t rest = c;
        for (std::size_t k = d; k-- > 0;) {
            y[k] = lo[k] + (hi[k] - lo[k]) * double(rest % per) / double(per - 1);
            rest /= per;
        }
        const double v = rho(y);
        if (v < -1e-12) throw InputError("density takes negative values (" + std::to_string(v) + ") on the scan grid");
        envelope = std::max(envelope, v / proposal(y));
    }
    envelope *= 1.1;
    const double mass = density.integrate();
    if (!(envelope > 0) || !(mass > 0)) throw InputError("density has no positive mass");
    const double acceptance = mass / envelope;
    if (acceptance < 1e-4) throw NumericError("rejection acceptance rate below 1e-4");

    Rng rng(seed);
    RowMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::size_t accepted = 0;
    const std::size_t max_proposals = static_cast<std::size_t>(double(n) / acceptance * 100) + 1000;
    Eigen::MatrixXd inverse;
    if (density.transform()) inverse = density.transform()->matrix.inverse();
    for (std::size_t tries = 0; accepted < n; ++tries) {
        if (tries > max_proposals) throw NumericError("rejection sampler exceeded its proposal budget");
        for (std::size_t k = 0; k < d; ++k) y[k] = region ? rng.uniform(lo[k], hi[k]) : scale * rng.normal();
        const double u = rng.uniform();
        if (u * envelope * proposal(y) >= rho(y)) continue;
        Eigen::Map<const Eigen::VectorXd> yv(y.data(), Eigen::Index(d));
        Eigen::VectorXd x = density.transform() ? Eigen::VectorXd(inverse * yv + density.transform()->mean)
                                                : Eigen::VectorXd(yv);
        out.row(static_cast<Eigen::Index>(accepted++)) = x.transpose();
    }
    return WeightedSample(std::move(out));
}

double clt_predicted_std(const FittedDensity& density, const std::function<double(std::span<const double>)>& f,
                         double a, std::size_t n) {
    if (n == 0) throw InputError("sample size must be positive");
    if (density.transform()) throw InputError("clt prediction works in family coordinates (no transform)");
    QuadratureOptions opts;
    if (!density.family().domain().is_bounded()) opts.hermite_scale = std::numbers::sqrt2;
    const double second = integrate(
        density.family().domain(),
        [&](std::span<const double> y) {
            const double r = f(y) - a;
            return r * r * density.family().evaluate(y).dot(density.coefficients());
        },
        opts);
    return std::sqrt(std::max(0.0, second)) / std::sqrt(double(n));
}

double clt_predicted_std(const FittedDensity& density, std::size_t i, std::size_t n) {
    if (i >= density.size()) throw InputError("basis index out of range");
    return clt_predicted_std(
        density, [&](std::span<const double> y) { return density.family().evaluate(i, y); },
        density.coefficients()[Eigen::Index(i)], n);
}

}  // namespace momentfit
