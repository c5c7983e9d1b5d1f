#pragma once

#include "momentfit/basis.hpp"
#include "momentfit/sample.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <span>

namespace momentfit {

// rho = sum_i a_i f_i, optionally composed with a whitening transform.
class FittedDensity {
public:
    FittedDensity(BasisFamily family, Eigen::VectorXd coefficients,
                  std::optional<AffineTransform> transform = std::nullopt);
    FittedDensity(BasisFamily family, Eigen::VectorXd re, Eigen::VectorXd im,
                  std::optional<AffineTransform> transform = std::nullopt);

    const BasisFamily& family() const noexcept { return family_; }
    std::size_t size() const noexcept { return family_.size(); }
    std::size_t dim() const noexcept { return family_.dim(); }
    WeightKind kind() const noexcept { return kind_; }
    bool is_complex() const noexcept { return kind_ == WeightKind::complex; }
    const Eigen::VectorXd& coefficients() const noexcept { return re_; }
    // Zero vector for real densities.
    const Eigen::VectorXd& coefficients_imag() const noexcept { return im_; }
    const std::optional<AffineTransform>& transform() const noexcept { return transform_; }

    FittedDensity with_coefficients(Eigen::VectorXd re, Eigen::VectorXd im = {}) const;
    FittedDensity with_transform(std::optional<AffineTransform> transform) const;

    // Maps x (original coordinates) to family coordinates; throws
    // OutOfDomainError outside a bounded family's region.
    Eigen::VectorXd to_family_coordinates(std::span<const double> x) const;

    // Real part for complex densities.
    double evaluate(std::span<const double> x) const;
    std::complex<double> evaluate_complex(std::span<const double> x) const;

    // sum_i a_i F_i (real part); whitening preserves the integral.
    double integrate() const;
    // Same integral by node-doubling quadrature over the family's domain.
    double integrate_quadrature(const QuadratureOptions& opts = {}) const;

private:
    std::complex<double> raw_value(std::span<const double> y) const;

    BasisFamily family_;
    Eigen::VectorXd re_;
    Eigen::VectorXd im_;
    WeightKind kind_;
    std::optional<AffineTransform> transform_;
};

struct NegativityReport {
    double min_value = 0.0;
    Eigen::VectorXd argmin;
    double negative_fraction = 0.0;
    std::size_t grid_points = 0;
};

// Evaluates on `grid` equally spaced points per dimension including the box
// edges. The box is the family's region, or [-8, 8]^D in family coordinates
// for unbounded families. argmin is reported in original coordinates.
NegativityReport negativity_report(const FittedDensity& density, std::size_t grid);

// |rho| below this counts as a boundary / undecided point.
inline constexpr double decision_tolerance = 1e-12;

enum class SignClass { negative = -1, boundary = 0, positive = 1 };

std::string to_string(SignClass c);

SignClass classify_sign(const FittedDensity& density, std::span<const double> x);

// floor(classes * arg(rho) / (2 pi)) with arg in [0, 2 pi); nullopt when |rho|
// is below decision_tolerance.
std::optional<int> classify_argument(const FittedDensity& density, std::span<const double> x, int classes = 4);

struct SparsifyResult {
    FittedDensity density;
    std::size_t survivors = 0;
};

// Zeroes coefficients with |a_i| <= threshold.
SparsifyResult sparsify(const FittedDensity& density, double threshold);

}  // namespace momentfit
