#include "doctest.h"

#include "momentfit/datasets.hpp"
#include "momentfit/error.hpp"
#include "momentfit/estimator.hpp"
#include "momentfit/random.hpp"
#include "momentfit/serialization.hpp"

#include <cmath>
#include <numbers>

using namespace momentfit;

namespace {

double eval1(const FittedDensity& d, double x) { return d.evaluate(std::span<const double>(&x, 1)); }

WeightedSample random_sample(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    RowMatrix p(static_cast<Eigen::Index>(n), 1);
    for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, 0) = rng.uniform(-1, 1);
    return WeightedSample(p);
}

double moment(const WeightedSample& s, int k) {
    double m = 0;
    for (std::size_t i = 0; i < s.size(); ++i) m += std::pow(s.point(i)[0], k);
    return m / double(s.size());
}

FamilyDescriptor box(FamilyKind kind, int order) {
    return FamilyDescriptor{kind, order, 2, Region::cube(2, -1, 1), {}, {}, false};
}

}  // namespace

TEST_CASE("evaluate basics") {
    auto fam = legendre_family(2, Region::interval(-1, 1));
    FittedDensity d(fam, Eigen::Vector3d(1 / std::sqrt(2.0), 0, -std::sqrt(5.0 / 8)));
    CHECK(eval1(d, 0.0) == doctest::Approx(9.0 / 8).epsilon(1e-15));
    FittedDensity zero(fam, Eigen::VectorXd::Zero(3));
    CHECK(eval1(zero, 0.3) == 0.0);
    CHECK(zero.integrate() == 0.0);
    CHECK_THROWS_AS(eval1(d, 1.5), OutOfDomainError);
    CHECK_THROWS_AS(FittedDensity(fam, Eigen::VectorXd::Zero(2)), InputError);
}

TEST_CASE("second-order fit equals the moment formula") {
    auto fam = legendre_family(2, Region::interval(-1, 1));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto s = random_sample(10 + seed, seed);
        auto d = fit_orthonormal(AveragingSource(s), fam);
        const double m1 = moment(s, 1), m2 = moment(s, 2);
        for (int k = 0; k <= 100; ++k) {
            const double x = -1 + 0.02 * k;
            const double expected = 0.5 + 1.5 * m1 * x + 5.0 / 8 * (3 * m2 - 1) * (3 * x * x - 1);
            CHECK(std::abs(eval1(d, x) - expected) < 1e-12);
        }
    }
}

TEST_CASE("third-order fit equals the grouped-moment cubic") {
    auto fam = legendre_family(3, Region::interval(-1, 1));
    auto grouped = [](double x, double m1, double m2, double m3, double constant) {
        return 5.0 / 8 *
               (constant - 3 * x * x + m1 * (15 * x - 21 * x * x * x) + m2 * (9 * x * x - 3) + m3 * (35 * x * x * x - 21 * x));
    };
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        auto s = random_sample(25, seed);
        auto d = fit_orthonormal(AveragingSource(s), fam);
        const double m1 = moment(s, 1), m2 = moment(s, 2), m3 = moment(s, 3);
        for (int k = 0; k <= 100; ++k) {
            const double x = -1 + 0.02 * k;
            CHECK(std::abs(eval1(d, x) - grouped(x, m1, m2, m3, 9.0 / 5)) < 1e-12);
        }
        CHECK(d.integrate() == doctest::Approx(1.0).epsilon(1e-12));
        // with a leading 1 the formula integrates to 0 (composite Simpson is exact for cubics)
        double literal = 0;
        for (int k = 0; k <= 200; ++k) {
            const double x = -1 + 0.01 * k;
            const double w = (k == 0 || k == 200) ? 1 : (k % 2 ? 4 : 2);
            literal += w * grouped(x, m1, m2, m3, 1.0);
        }
        CHECK(std::abs(literal * 0.01 / 3) < 1e-12);
    }
}

TEST_CASE("integrate") {
    auto fourier = make_family(box(FamilyKind::fourier, 3));
    Rng rng(4);
    RowMatrix p(40, 2);
    for (Eigen::Index i = 0; i < 40; ++i) p.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
    auto d = fit_orthonormal(AveragingSource(WeightedSample(p)), fourier);
    CHECK(d.integrate() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.integrate_quadrature() == doctest::Approx(1.0).epsilon(1e-10));

    auto herm = hermite_function_family(6);
    auto h = fit_normalized(AveragingSource(random_sample(30, 8)), herm, 1.0);
    CHECK(h.integrate() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(h.integrate_quadrature() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("whitening transform preserves the integral") {
    auto herm = make_family(FamilyDescriptor{FamilyKind::hermite, 3, 2, std::nullopt, {}, {}, false});
    Rng rng(17);
    RowMatrix p(200, 2);
    for (Eigen::Index i = 0; i < 200; ++i) {
        const double a = rng.normal(), b = rng.normal();
        p.row(i) << 3 + 2 * a, -1 + 0.5 * a + 0.3 * b;
    }
    auto white = whiten(WeightedSample(p));
    auto d = fit_normalized(AveragingSource(white.sample), herm, 1.0).with_transform(white.transform);
    // quadrature in original coordinates over a box covering the bulk
    auto rule = tensor_rule(std::vector<Rule1D>{gauss_legendre(200, -12, 18), gauss_legendre(200, -8, 6)});
    double total = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) total += rule.weights[Eigen::Index(i)] * d.evaluate(rule.node(i));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.integrate() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("negativity report") {
    auto leg = legendre_family(2, Region::interval(-1, 1));
    FittedDensity uniform(leg, Eigen::Vector3d(1 / std::sqrt(2.0), 0, 0));
    auto u = negativity_report(uniform, 101);
    CHECK(u.min_value == doctest::Approx(0.5));
    CHECK(u.negative_fraction == 0.0);

    FittedDensity d(leg, Eigen::Vector3d(1 / std::sqrt(2.0), 0, -std::sqrt(5.0 / 8)));
    auto r = negativity_report(d, 10001);
    CHECK(r.min_value == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(std::abs(r.argmin[0]) == 1.0);
    CHECK(r.negative_fraction == doctest::Approx(1 - std::sqrt(0.6)).epsilon(1e-3));

    auto herm = hermite_function_family(3);
    FittedDensity g(herm, Eigen::Vector4d(1, 0, 0, 0));
    auto hr = negativity_report(g, 401);
    CHECK(hr.min_value > 0);
    CHECK(hr.negative_fraction == 0.0);
}

TEST_CASE("XOR corners") {
    auto fam = make_family(box(FamilyKind::legendre, 1));
    auto corners = xor_corners();
    auto d = fit_orthonormal(AveragingSource(corners), fam);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const auto& g = fam.member(i).id.grade;
        if (g[0] == 1 && g[1] == 1)
            CHECK(std::abs(d.coefficients()[Eigen::Index(i)] - 1.5) < 1e-12);
        else
            CHECK(std::abs(d.coefficients()[Eigen::Index(i)]) < 1e-12);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const auto want = corners.weights()[Eigen::Index(i)] > 0 ? SignClass::positive : SignClass::negative;
        CHECK(classify_sign(d, corners.point(i)) == want);
    }
    // positive rescaling of weights leaves every label unchanged
    auto scaled = fit_orthonormal(AveragingSource(corners.with_weights(corners.weights() * 7.5)), fam);
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        std::array<double, 2> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CHECK(classify_sign(scaled, x) == classify_sign(d, x));
    }
    FittedDensity zero(fam, Eigen::VectorXd::Zero(Eigen::Index(fam.size())));
    CHECK(classify_sign(zero, std::array<double, 2>{0.2, 0.4}) == SignClass::boundary);
    CHECK_THROWS_AS(classify_argument(d, corners.point(0)), InputError);
}

TEST_CASE("sign at the mode of a positive sample") {
    auto leg = legendre_family(2, Region::interval(-1, 1));
    RowMatrix p(5, 1);
    p << 0.1, 0.0, -0.1, 0.05, -0.05;
    auto d = fit_orthonormal(AveragingSource(WeightedSample(p)), leg);
    CHECK(classify_sign(d, std::array<double, 1>{0.0}) == SignClass::positive);
}

TEST_CASE("argument classification") {
    auto leg = legendre_family(1, Region::interval(-1, 1));
    // constant density times the weight: rho = W * f_0^2 at a single point
    auto one_point = [&](std::complex<double> w) {
        RowMatrix p(1, 1);
        p << 0.0;
        return fit_orthonormal(AveragingSource(WeightedSample(p, Eigen::VectorXd::Constant(1, w.real()),
                                                              Eigen::VectorXd::Constant(1, w.imag()))),
                               leg);
    };
    const std::array<double, 1> x0{0.0};
    CHECK(classify_argument(one_point({1, 1}), x0) == 0);
    CHECK(classify_argument(one_point({-1, 1}), x0) == 1);
    CHECK(classify_argument(one_point({-1, -1}), x0) == 2);
    CHECK(classify_argument(one_point({1, -1}), x0) == 3);
    CHECK_FALSE(classify_argument(one_point({1e-14, 0}), x0).has_value());

    // four point clusters weighted by +-1 +-i, class k in quadrant k
    auto fam = make_family(box(FamilyKind::fourier, 2));
    Rng rng(8);
    const std::array<std::array<double, 2>, 4> centers{{{0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}}};
    RowMatrix p(80, 2);
    Eigen::VectorXd re(80), im(80);
    for (Eigen::Index i = 0; i < 80; ++i) {
        const int k = int(i % 4);
        p.row(i) << centers[k][0] + 0.05 * rng.normal(), centers[k][1] + 0.05 * rng.normal();
        const auto w = spiral_class_weight(4, k);
        re[i] = w.real();
        im[i] = w.imag();
    }
    WeightedSample s(p, re, im);
    auto d = fit_orthonormal(AveragingSource(s), fam);
    auto scaled = fit_orthonormal(AveragingSource(s.with_weights(re * 3, im * 3)), fam);
    for (int k = 0; k < 4; ++k) {
        CHECK(classify_argument(d, centers[k]) == k);
        CHECK(classify_argument(scaled, centers[k]) == k);
    }
}

TEST_CASE("two-spiral symmetry zeros are sparsified away") {
    SpiralConfig cfg;
    auto fam = make_family(box(FamilyKind::legendre, 7));
    auto d = fit_orthonormal(spiral_averaging_source(cfg), fam);
    std::size_t odd = 0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const auto& id = fam.member(i).id;
        if (id.total_grade() % 2 == 0)
            CHECK(std::abs(d.coefficients()[Eigen::Index(i)]) < 1e-10);
        else
            ++odd;
    }
    auto sp = sparsify(d, 1e-10);
    CHECK(sp.survivors <= odd);
    CHECK(sp.survivors > 0);
    for (std::size_t i = 0; i < fam.size(); ++i)
        if (fam.member(i).id.total_grade() % 2 == 0) CHECK(sp.density.coefficients()[Eigen::Index(i)] == 0.0);

    CHECK(sparsify(d, 0.0).density.coefficients() == d.coefficients());
    auto none = sparsify(d, std::numeric_limits<double>::infinity());
    CHECK(none.survivors == 0);
    CHECK(none.density.coefficients().cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(sparsify(d, -1.0), InputError);
}

TEST_CASE("model json round trip") {
    auto herm = make_family(FamilyDescriptor{FamilyKind::hermite, 2, 2, std::nullopt, {}, {}, false});
    Eigen::VectorXd re = Eigen::VectorXd::LinSpaced(Eigen::Index(herm.size()), 0.1, 1.0 / 3);
    Eigen::VectorXd im = re.reverse() * std::numbers::pi;
    Eigen::Matrix2d m;
    m << 0.7, 0.1, -0.2, 1.9;
    FittedDensity d(herm, re, im, AffineTransform{Eigen::Vector2d(1.0 / 7, -2), m, std::abs(m.determinant())});
    auto back = model_from_json(nlohmann::json::parse(model_to_json(d).dump()));
    CHECK(back.coefficients() == d.coefficients());
    CHECK(back.coefficients_imag() == d.coefficients_imag());
    CHECK(back.transform()->matrix == m);
    CHECK(back.transform()->mean == d.transform()->mean);
    CHECK(back.family().descriptor() == herm.descriptor());
    CHECK(model_to_json(back).dump() == model_to_json(d).dump());

    auto leg = legendre_family(3, Region::interval(-2, 5));
    FittedDensity r(leg, Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
    auto rj = model_to_json(r);
    CHECK(rj["weight_kind"] == "real");
    CHECK(rj["transform"].is_null());
    CHECK(rj["basis"]["region"]["lower"][0] == -2.0);
    auto rback = model_from_json(rj);
    CHECK(eval1(rback, 1.3) == eval1(r, 1.3));

    auto custom = gram_schmidt({parse_monomial_term("1"), parse_monomial_term("x^2")}, Region::interval(-1, 1), 64,
                               FamilyDescriptor{FamilyKind::custom, 1, 1, Region::interval(-1, 1), {}, {"1", "x^2"}, true});
    auto cj = model_to_json(FittedDensity(custom, Eigen::Vector2d(1, 2)));
    CHECK(cj["basis"]["terms"].size() == 2);

    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"basis":{"family":"nope","order":1}})")), InputError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"coefficients":[1]})")), InputError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), InputError);
}
