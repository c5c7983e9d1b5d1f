#pragma once

#include "momentfit/basis.hpp"
#include "momentfit/quadrature.hpp"
#include "momentfit/region.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace momentfit {

enum class WeightKind { real, complex };

std::string to_string(WeightKind kind);

// Points with per-point weights. A sample is homogeneously real or complex.
class WeightedSample {
public:
    // Unit weights.
    explicit WeightedSample(RowMatrix points, std::optional<Region> region_filter = std::nullopt);
    WeightedSample(RowMatrix points, Eigen::VectorXd weights, std::optional<Region> region_filter = std::nullopt);
    WeightedSample(RowMatrix points, Eigen::VectorXd weights_re, Eigen::VectorXd weights_im,
                   std::optional<Region> region_filter = std::nullopt);

    std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
    WeightKind kind() const noexcept { return kind_; }

    const RowMatrix& points() const noexcept { return points_; }
    std::span<const double> point(std::size_t i) const {
        return {points_.data() + i * dim(), dim()};
    }
    const Eigen::VectorXd& weights() const noexcept { return weights_re_; }
    // Empty for real samples.
    const Eigen::VectorXd& weights_imag() const noexcept { return weights_im_; }
    std::complex<double> weight(std::size_t i) const;

    const std::optional<Region>& region_filter() const noexcept { return region_filter_; }
    WeightedSample with_region_filter(std::optional<Region> region) const;
    WeightedSample with_weights(Eigen::VectorXd re, Eigen::VectorXd im = {}) const;

private:
    RowMatrix points_;
    Eigen::VectorXd weights_re_;
    Eigen::VectorXd weights_im_;
    WeightKind kind_;
    std::optional<Region> region_filter_;
};

enum class Measure { parameter, arc_length };

// A curve t in [0, 1] -> R^D carrying weight, averaged by integration.
struct ContinuousSource {
    std::size_t dim = 1;
    std::function<Eigen::VectorXd(double)> curve;
    std::function<std::complex<double>(double)> weight = [](double) { return std::complex<double>(1.0, 0.0); };
    WeightKind weight_kind = WeightKind::real;
    Measure measure = Measure::parameter;
    // |curve'(t)|; central differences when empty and measure is arc_length.
    std::function<double(double)> speed;
    std::size_t quad_points = 64;
    // C in [f] = (1/C) * integral of W f. Empty means C = integral of W (real weights only).
    std::optional<double> normalization = 1.0;

    static ContinuousSource constant(std::size_t dim, std::function<Eigen::VectorXd(double)> curve,
                                     std::complex<double> weight = 1.0, std::optional<double> normalization = 1.0);
};

// Vector-valued integrand g: R^D -> R^m written into `out`.
using VectorIntegrand = std::function<void(std::span<const double>, std::span<double>)>;

// [f] for every entry of a vector integrand; `im` is empty for real sources.
struct Averages {
    Eigen::VectorXd re;
    Eigen::VectorXd im;
    WeightKind kind = WeightKind::real;

    bool is_complex() const noexcept { return kind == WeightKind::complex; }
    Averages& operator*=(double s);
    Averages& operator+=(const Averages& other);
};

// Averaging functional [f] over discrete samples and continuous sources mixed
// with nonnegative weights summing to one.
class AveragingSource {
public:
    using Component = std::variant<WeightedSample, ContinuousSource>;

    AveragingSource(WeightedSample sample);  // NOLINT(google-explicit-constructor)
    AveragingSource(ContinuousSource source);  // NOLINT(google-explicit-constructor)
    AveragingSource(std::vector<Component> components, std::vector<double> mix);

    std::size_t dim() const noexcept { return dim_; }
    WeightKind kind() const noexcept { return kind_; }
    const std::vector<Component>& components() const noexcept { return components_; }
    const std::vector<double>& mix() const noexcept { return mix_; }

    // Averages of an m-vector integrand. Points (or curve positions) outside
    // `filter` carry zero weight; discrete averages divide by the number of
    // points inside.
    Averages average(std::size_t m, const VectorIntegrand& g, const std::optional<Region>& filter = {}) const;

    // [f_i] for all members; bounded families filter to their region.
    Averages average(const BasisFamily& family) const;
    // [f_i''] along dimension `dim`.
    Averages average_second_derivatives(const BasisFamily& family, std::size_t dim) const;

private:
    std::vector<Component> components_;
    std::vector<double> mix_;
    std::size_t dim_ = 0;
    WeightKind kind_ = WeightKind::real;
};

// merge_sources: `discrete` may be empty when its mix weight is zero.
AveragingSource merge_sources(std::optional<WeightedSample> discrete, std::vector<ContinuousSource> continuous,
                              std::vector<double> mix);

// Discrete weighted mean with fixed pairwise reduction order.
Averages discrete_average(const WeightedSample& sample, std::size_t m, const VectorIntegrand& g,
                          const std::optional<Region>& filter = {});

// (1/C) * integral over t of W(t) g(curve(t)) dmu(t); composite Gauss-Legendre,
// panels doubling until stable or 2^14 nodes.
Averages curve_average(const ContinuousSource& source, std::size_t m, const VectorIntegrand& g,
                       const std::optional<Region>& filter = {});
Averages curve_average(const ContinuousSource& source, const BasisFamily& family);

// Maps original coordinates x to y = matrix * (x - mean).
struct AffineTransform {
    Eigen::VectorXd mean;
    Eigen::MatrixXd matrix;
    double jacobian_abs_det = 1.0;

    Eigen::VectorXd apply(std::span<const double> x) const;
};

struct WhiteningResult {
    WeightedSample sample;
    AffineTransform transform;
};

// Centers and rescales principal axes to unit variance (population covariance,
// unweighted points). Eigenvalues sorted descending; each eigenvector's first
// nonzero component is positive.
WhiteningResult whiten(const WeightedSample& sample);

enum class WeightColumns { none, real, complex };

WeightColumns weight_columns_from_string(const std::string& name);

// One point per row, comma separated, optional trailing weight column(s).
// Blank lines and lines starting with '#' are skipped.
WeightedSample read_csv(std::istream& in, WeightColumns weights);
WeightedSample load_csv(const std::filesystem::path& path, WeightColumns weights);

// Writes with 17 significant digits; `comment` lines are prefixed with '#'.
// WeightColumns::none drops the weights; real requires a real sample.
void write_csv(std::ostream& out, const WeightedSample& sample, WeightColumns columns,
               const std::string& comment = {});
void save_csv(const std::filesystem::path& path, const WeightedSample& sample, WeightColumns columns,
              const std::string& comment = {});

std::string format_double(double v);

}  // namespace momentfit
