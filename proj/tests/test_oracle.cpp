#include "doctest.h"

#include "momentfit/error.hpp"
#include "momentfit/estimator.hpp"
#include "momentfit/oracle.hpp"
#include "momentfit/random.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

using namespace momentfit;
using boost::math::quadrature::gauss_kronrod;

namespace {

WeightedSample fixed_sample(std::size_t n, double half, std::uint64_t seed) {
    Rng rng(seed);
    RowMatrix p(static_cast<Eigen::Index>(n), 1);
    for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, 0) = rng.uniform(-half, half);
    return WeightedSample(p);
}

double slope(const std::vector<double>& eps, const std::vector<double>& err) {
    const double n = double(eps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double x = std::log(eps[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("kde_smooth") {
    RowMatrix p(1, 1);
    p << 0.0;
    WeightedSample one(p);
    const std::array<double, 1> x0{0.0};
    CHECK(kde_smooth(one, 1.0, x0) == doctest::Approx(1 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));

    RowMatrix q(2, 1);
    q << -0.3, 0.3;
    RowMatrix r(1, 1);
    r << 0.3;
    CHECK(kde_smooth(WeightedSample(q), 0.2, x0) == doctest::Approx(kde_smooth(WeightedSample(r), 0.2, x0)).epsilon(1e-15));

    auto s = fixed_sample(20, 1.0, 4);
    for (double eps : {0.05, 0.3, 1.0}) {
        const double mass = gauss_kronrod<double, 61>::integrate(
            [&](double x) { return kde_smooth(s, eps, std::span<const double>(&x, 1)); }, -30.0, 30.0, 15, 1e-12);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
    auto w = s.with_weights(Eigen::VectorXd::LinSpaced(20, -1.0, 2.0));
    const double mass = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return kde_smooth(w, 0.2, std::span<const double>(&x, 1)); }, -30.0, 30.0, 15, 1e-12);
    CHECK(mass == doctest::Approx(w.weights().mean()).epsilon(1e-6));
    CHECK_THROWS_AS(kde_smooth(one, 0.0, x0), InputError);
}

TEST_CASE("grid fit limits") {
    auto leg = legendre_family(3, Region::interval(-1, 1));
    auto s = fixed_sample(30, 0.5, 21);
    auto flat = grid_least_squares_fit(s, leg, 50.0);
    // wide kernels flatten g_eps to a constant, so only f_0 survives
    const std::array<double, 1> origin{0.0};
    CHECK(flat.coefficients[0] == doctest::Approx(std::sqrt(2.0) * kde_smooth(s, 50.0, origin)).epsilon(1e-3));
    CHECK(flat.coefficients.tail(3).cwiseAbs().maxCoeff() < 1e-3 * flat.coefficients[0]);
    CHECK_THROWS_AS(grid_least_squares_fit(s, leg, 0.001), InputError);
    CHECK_THROWS_AS(grid_least_squares_fit(s, hermite_function_family(2), 0.1), InputError);

    // g_eps built from a single basis member: its sharp limit is the member itself
    RowMatrix dense(2001, 1);
    Eigen::VectorXd w(2001);
    for (Eigen::Index i = 0; i < 2001; ++i) {
        const double x = -1 + 2.0 * (double(i) + 0.5) / 2001;
        dense(i, 0) = x;
        w[i] = 2.0 * leg.evaluate(2, std::span<const double>(&x, 1));  // n * cell width * f_2
    }
    auto self = grid_least_squares_fit(WeightedSample(dense, w), leg, 0.01, 4096);
    CHECK(self.coefficients[2] == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(std::abs(self.coefficients[1]) < 1e-6);
}

TEST_CASE("spike limit: grid fit converges to averaged coefficients at rate eps^2") {
    auto leg = legendre_family(3, Region::interval(-1, 1));
    auto s = fixed_sample(30, 0.5, 21);
    auto exact = fit_orthonormal(AveragingSource(s), leg).coefficients();
    std::vector<double> eps{0.2, 0.1, 0.05, 0.025}, err, corrected_err;
    for (double e : eps) {
        auto g = grid_least_squares_fit(s, leg, e);
        err.push_back((g.coefficients - exact).norm());
        auto corr = fit_kernel_corrected(AveragingSource(s), leg, KernelSpec::gaussian(e)).coefficients();
        corrected_err.push_back((g.coefficients - corr).norm());
        MESSAGE("eps=" << e << " err=" << err.back() << " corrected=" << corrected_err.back());
    }
    const double k = slope(eps, err);
    MESSAGE("slope " << k);
    CHECK(k >= 1.8);
    CHECK(k <= 2.2);
    CHECK(err[2] / corrected_err[2] >= 5.0);
}

TEST_CASE("sample_from_density") {
    auto leg = legendre_family(2, Region::interval(-1, 1));
    FittedDensity uniform(leg, Eigen::Vector3d(1 / std::sqrt(2.0), 0, 0));
    const std::size_t n = 100000;
    auto s = sample_from_density(uniform, n, 1234);
    CHECK(s.size() == n);
    const double mean = s.points().col(0).mean();
    CHECK(std::abs(mean) < 3 * std::sqrt(1.0 / 3) / std::sqrt(double(n)));
    CHECK(s.points().col(0).minCoeff() >= -1);
    CHECK(s.points().col(0).maxCoeff() <= 1);

    auto again = sample_from_density(uniform, 1000, 77);
    CHECK(again.points() == sample_from_density(uniform, 1000, 77).points());
    CHECK(again.points() != sample_from_density(uniform, 1000, 78).points());

    FittedDensity negative(leg, Eigen::Vector3d(1 / std::sqrt(2.0), 0, -std::sqrt(5.0 / 8)));
    CHECK_THROWS_AS(sample_from_density(negative, 10, 1), InputError);

    // narrow spike relative to the box: acceptance too low
    FittedDensity spike(legendre_family(0, Region::interval(-1, 1)), Eigen::VectorXd::Constant(1, 0.0));
    CHECK_THROWS_AS(sample_from_density(spike, 10, 1), InputError);
}

TEST_CASE("sampled moments match analytic moments at the CLT rate") {
    // f_0 + 0.3 f_1 on [-1, 1]: mean = integral x rho = 0.3 * sqrt(2/3) * ... computed exactly below
    auto leg = legendre_family(1, Region::interval(-1, 1));
    FittedDensity d(leg, Eigen::Vector2d(1 / std::sqrt(2.0), 0.3));
    // rho(x) = 1/2 + 0.3 sqrt(3/2) x; E[x] = 0.3 sqrt(3/2) * 2/3; E[x^2] = 1/3
    const double mu = 0.3 * std::sqrt(1.5) * 2.0 / 3.0;
    const double sd = std::sqrt(1.0 / 3.0 - mu * mu);
    int inside = 0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
        auto s = sample_from_density(d, 400, derive_seed(5, std::uint64_t(seed)));
        if (std::abs(s.points().col(0).mean() - mu) < 3 * sd / std::sqrt(400.0)) ++inside;
    }
    CHECK(inside >= 97);

    auto herm = hermite_function_family(2);
    // psi_0^2 is the N(0, 1/2) density; as rho = sum a_i psi_i take the density psi_0 * (c0 psi_0 + c2 psi_2)?
    // Simpler: a Gaussian-shaped Hermite density a_0 psi_0 with F_0 a_0 = 1 is N(0, 1)
    FittedDensity gauss(herm, Eigen::Vector3d(1 / (std::sqrt(2.0) * std::pow(std::numbers::pi, 0.25)), 0, 0));
    auto g = sample_from_density(gauss, 20000, 9);
    CHECK(std::abs(g.points().col(0).mean()) < 4 / std::sqrt(20000.0));
    CHECK(g.points().col(0).squaredNorm() / 20000 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("clt_predicted_std") {
    auto leg = legendre_family(1, Region::interval(-1, 1));
    FittedDensity uniform(leg, Eigen::Vector2d(1 / std::sqrt(2.0), 0));
    auto f1 = [](std::span<const double> x) { return std::sqrt(1.5) * x[0]; };
    CHECK(clt_predicted_std(uniform, f1, 0.0, 100) == doctest::Approx(std::sqrt(0.5) / 10).epsilon(1e-12));
    CHECK(clt_predicted_std(uniform, f1, 0.0, 400) * 2 == doctest::Approx(clt_predicted_std(uniform, f1, 0.0, 100)).epsilon(1e-15));
    CHECK(clt_predicted_std(uniform, 0, 100) < 1e-15);
    CHECK(clt_predicted_std(uniform, 1, 100) == doctest::Approx(std::sqrt(0.5) / 10).epsilon(1e-12));

    // Hermite: psi_0^2-weighted variance checked against Gauss-Kronrod
    auto herm = hermite_function_family(2);
    FittedDensity gauss(herm, Eigen::Vector3d(1 / (std::sqrt(2.0) * std::pow(std::numbers::pi, 0.25)), 0, 0));
    const double a = 0.3;
    const double oracle = gauss_kronrod<double, 61>::integrate(
        [&](double x) {
            const double psi2 = (2 * x * x - 1) / std::sqrt(2.0) * std::exp(-x * x / 2) / std::pow(std::numbers::pi, 0.25);
            return (psi2 - a) * (psi2 - a) * std::exp(-x * x / 2) / std::sqrt(2 * std::numbers::pi);
        },
        -20.0, 20.0, 12, 1e-13);
    CHECK(clt_predicted_std(gauss, [&](std::span<const double> x) { return herm.evaluate(2, x); }, a, 1) ==
          doctest::Approx(std::sqrt(oracle)).epsilon(1e-10));
}
