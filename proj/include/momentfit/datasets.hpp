#pragma once

#include "momentfit/sample.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace momentfit {

// The four corners (+-1, +-1) weighted by sign(x*y).
WeightedSample xor_corners();
// n points uniform on [-1, 1]^2 weighted by sign(x*y) (points on an axis get 0).
WeightedSample xor_sample(std::size_t n, std::uint64_t seed);

// Archimedean arms r(theta) = r0 + c*theta, theta in [0, 4pi], the k-th arm
// rotated by 2*pi*k/classes. Two classes carry W = +1, -1; four classes carry
// W = 1+i, -1+i, -1-i, 1-i so that arm k lands in quadrant k under arg.
struct SpiralConfig {
    int classes = 2;
    double r0 = 0.1;
    double r_max = 0.9;
    double turns = 2.0;
};

std::complex<double> spiral_class_weight(int classes, int k);
// Point on arm k at curve parameter t in [0, 1].
Eigen::Vector2d spiral_point(const SpiralConfig& config, int k, double t);
// One arc-length-measured source per arm (C = 1).
std::vector<ContinuousSource> spiral_sources(const SpiralConfig& config);
// The arms mixed with equal weight.
AveragingSource spiral_averaging_source(const SpiralConfig& config);
// Held-out points: uniform curve parameters per arm, weights = class weight.
WeightedSample spiral_points(const SpiralConfig& config, std::size_t per_class, std::uint64_t seed);

struct GaussianComponent {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
    double weight = 1.0;
};

// n points from an axis-aligned Gaussian mixture (weights normalized here).
WeightedSample gaussian_mixture(const std::vector<GaussianComponent>& components, std::size_t n, std::uint64_t seed);

}  // namespace momentfit
