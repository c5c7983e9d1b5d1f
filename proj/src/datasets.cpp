#include "momentfit/datasets.hpp"

#include "momentfit/error.hpp"
#include "momentfit/random.hpp"

#include <cmath>
#include <numbers>

namespace momentfit {

WeightedSample xor_corners() {
    RowMatrix pts(4, 2);
    pts << 1, 1, -1, 1, -1, -1, 1, -1;
    Eigen::VectorXd w(4);
    w << 1, -1, 1, -1;
    return WeightedSample(pts, w);
}

WeightedSample xor_sample(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("xor sample needs n >= 1");
    Rng rng(seed);
    RowMatrix pts(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        pts(i, 0) = rng.uniform(-1, 1);
        pts(i, 1) = rng.uniform(-1, 1);
        const double p = pts(i, 0) * pts(i, 1);
        w[i] = p > 0 ? 1.0 : p < 0 ? -1.0 : 0.0;
    }
    return WeightedSample(pts, w);
}

namespace {

void check_spiral(const SpiralConfig& c) {
    if (c.classes != 2 && c.classes != 4) throw InputError("spirals support 2 or 4 classes");
    if (!(c.r0 >= 0 && c.r_max > c.r0 && c.turns > 0)) throw InputError("invalid spiral geometry");
}

double slope(const SpiralConfig& c) { return (c.r_max - c.r0) / (2 * std::numbers::pi * c.turns); }

}  // namespace

std::complex<double> spiral_class_weight(int classes, int k) {
    if (classes == 2) return k == 0 ? 1.0 : -1.0;
    static const std::complex<double> w[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    return w[k & 3];
}

Eigen::Vector2d spiral_point(const SpiralConfig& config, int k, double t) {
    const double theta = 2 * std::numbers::pi * config.turns * t;
    const double r = config.r0 + slope(config) * theta;
    const double x = r * std::cos(theta), y = r * std::sin(theta);
    // exact rotations keep the symmetry zeros exact
    switch (config.classes == 2 ? 2 * k : k) {
        case 0: return {x, y};
        case 1: return {-y, x};
        case 2: return {-x, -y};
        default: return {y, -x};
    }
}

std::vector<ContinuousSource> spiral_sources(const SpiralConfig& config) {
    check_spiral(config);
    std::vector<ContinuousSource> out;
    const double c = slope(config);
    const double span = 2 * std::numbers::pi * config.turns;
    for (int k = 0; k < config.classes; ++k) {
        auto src = ContinuousSource::constant(
            2, [config, k](double t) -> Eigen::VectorXd { return spiral_point(config, k, t); },
            spiral_class_weight(config.classes, k), 1.0);
        src.measure = Measure::arc_length;
        src.speed = [config, c, span](double t) {
            const double r = config.r0 + c * span * t;
            return span * std::sqrt(c * c + r * r);
        };
        src.quad_points = 256;
        out.push_back(std::move(src));
    }
    return out;
}

AveragingSource spiral_averaging_source(const SpiralConfig& config) {
    auto sources = spiral_sources(config);
    std::vector<AveragingSource::Component> comps(sources.begin(), sources.end());
    std::vector<double> mix(sources.size(), 1.0 / static_cast<double>(sources.size()));
    return AveragingSource(std::move(comps), std::move(mix));
}

WeightedSample spiral_points(const SpiralConfig& config, std::size_t per_class, std::uint64_t seed) {
    check_spiral(config);
    if (per_class == 0) throw InputError("need at least one point per class");
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(per_class) * config.classes;
    RowMatrix pts(n, 2);
    Eigen::VectorXd re(n), im(n);
    Eigen::Index row = 0;
    for (int k = 0; k < config.classes; ++k) {
        const auto w = spiral_class_weight(config.classes, k);
        for (std::size_t j = 0; j < per_class; ++j, ++row) {
            pts.row(row) = spiral_point(config, k, rng.uniform()).transpose();
            re[row] = w.real();
            im[row] = w.imag();
        }
    }
    if (config.classes == 2) return WeightedSample(pts, re);
    return WeightedSample(pts, re, im);
}

WeightedSample gaussian_mixture(const std::vector<GaussianComponent>& components, std::size_t n, std::uint64_t seed) {
    if (components.empty() || n == 0) throw InputError("gaussian mixture needs components and n >= 1");
    const auto d = components.front().mean.size();
    double total = 0;
    for (const auto& c : components) {
        if (c.mean.size() != d || c.stddev.size() != d) throw InputError("mixture components differ in dimension");
        if (!(c.weight >= 0) || !(c.stddev.array() > 0).all()) throw InputError("invalid mixture component");
        total += c.weight;
    }
    if (!(total > 0)) throw InputError("mixture weights sum to zero");
    Rng rng(seed);
    RowMatrix pts(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        double u = rng.uniform() * total;
        std::size_t k = 0;
        while (k + 1 < components.size() && u >= components[k].weight) u -= components[k++].weight;
        for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = components[k].mean[j] + components[k].stddev[j] * rng.normal();
    }
    return WeightedSample(pts);
}

}  // namespace momentfit
