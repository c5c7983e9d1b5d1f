#pragma once

#include "momentfit/basis.hpp"
#include "momentfit/density.hpp"
#include "momentfit/sample.hpp"

#include <cstdint>
#include <functional>
#include <span>

namespace momentfit {

// g_eps(x) = (1/n) sum_y W(y) k_eps(x - y), Gaussian kernel with std eps per
// coordinate. Real weights only.
double kde_smooth(const WeightedSample& sample, double epsilon, std::span<const double> x);

struct GridFit {
    std::size_t points_per_dim = 0;
    double spacing = 0.0;  // largest cell width
    double epsilon = 0.0;
    Eigen::VectorXd coefficients;
};

// Least-squares fit of sum a_i f_i to g_eps on a midpoint grid over the
// family's region (4096 points in 1D, 512 per dimension in 2D unless given).
// Throws InputError when the spacing exceeds eps / 4.
GridFit grid_least_squares_fit(const WeightedSample& sample, const BasisFamily& family, double epsilon,
                               std::size_t points_per_dim = 0);

struct SamplerOptions {
    std::size_t envelope_grid = 0;  // per dimension; 0 picks 2001 (1D) or 201 (2D+)
    double proposal_scale = 1.5;    // Gaussian proposal std for unbounded families
};

// n i.i.d. points by rejection from a uniform (bounded family) or Gaussian
// (unbounded family) proposal. The envelope comes from a grid scan with a 10%
// margin; negative grid values are rejected. Output is in original coordinates.
WeightedSample sample_from_density(const FittedDensity& density, std::size_t n, std::uint64_t seed,
                                   const SamplerOptions& opts = {});

// sqrt(integral of (f - a)^2 rho) / sqrt(n), integral over the family's domain.
double clt_predicted_std(const FittedDensity& density, const std::function<double(std::span<const double>)>& f,
                         double a, std::size_t n);
// Same for basis member i of the density's family with a = its coefficient.
double clt_predicted_std(const FittedDensity& density, std::size_t i, std::size_t n);

}  // namespace momentfit
