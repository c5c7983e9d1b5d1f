// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include "momentfit/bench.hpp"
#include "momentfit/datasets.hpp"
#include "momentfit/estimator.hpp"
#include "momentfit/oracle.hpp"
#include "momentfit/random.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

using namespace momentfit;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0 && secs >= time_limit) {
        o.pass = false;
        o.detail << " [runtime " << secs << " s over " << time_limit << " s]";
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << name << " (" << secs << " s)" << o.detail.str()
              << std::endl;
}

double eval1(const FittedDensity& d, double x) { return d.evaluate(std::span<const double>(&x, 1)); }

WeightedSample uniform_points(std::size_t n, double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    RowMatrix p(static_cast<Eigen::Index>(n), 1);
    for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, 0) = rng.uniform(lo, hi);
    return WeightedSample(p);
}

double moment(const WeightedSample& s, int k) {
    double m = 0;
    for (std::size_t i = 0; i < s.size(); ++i) m += std::pow(s.point(i)[0], k);
    return m / double(s.size());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main() {
    std::cout.precision(4);

    criterion(1, "orthonormality of built-in families up to order 10", 10, [](Outcome& o) {
        std::vector<std::pair<std::string, BasisFamily>> fams;
        const std::vector<std::pair<double, double>> regions{{-1, 1}, {0, 2}, {-3.5, 7.25}, {3, 3.5}, {-100, 250}};
        for (int k = 0; k <= 10; ++k) {
            for (auto [lo, hi] : regions) {
                fams.emplace_back("legendre", legendre_family(k, Region::interval(lo, hi)));
                fams.emplace_back("fourier", fourier_family(k, Region::interval(lo, hi)));
            }
            fams.emplace_back("hermite", hermite_function_family(k));
        }
        for (int k : {1, 5, 10}) {
            auto l = legendre_family(k, Region::interval(-1, 1));
            auto l2 = legendre_family(k, Region::interval(0, 3));
            auto f = fourier_family(k, Region::interval(-1, 1));
            auto h = hermite_function_family(k);
            fams.emplace_back("legendre x legendre", tensor_product({l, l2}));
            fams.emplace_back("fourier x fourier", tensor_product({f, f}));
            fams.emplace_back("legendre x fourier", tensor_product({l, f}));
            fams.emplace_back("hermite x hermite", tensor_product({h, h}));
        }
        double worst = 0;
        for (const auto& [name, fam] : fams) {
            const auto r = orthonormality(gram_matrix(fam));
            const double dev = std::max(r.max_off_diagonal, r.max_diagonal_deviation);
            worst = std::max(worst, dev);
            o.require(dev < 1e-8, name + " of size " + std::to_string(fam.size()));
        }
        o.detail << " families=" << fams.size() << " max deviation=" << worst;
    });

    criterion(2, "order-2 fit equals the moment formula", 1, [](Outcome& o) {
        auto fam = legendre_family(2, Region::interval(-1, 1));
        double worst = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto s = uniform_points(5 + 3 * seed, -1, 1, derive_seed(2, seed));
            auto d = fit_orthonormal(AveragingSource(s), fam);
            const double m1 = moment(s, 1), m2 = moment(s, 2);
            for (int k = 0; k <= 100; ++k) {
                const double x = -1 + 0.02 * k;
                const double formula = 0.5 + 1.5 * m1 * x + 5.0 / 8 * (3 * m2 - 1) * (3 * x * x - 1);
                worst = std::max(worst, std::abs(eval1(d, x) - formula));
            }
        }
        o.require(worst <= 1e-12, "pointwise difference <= 1e-12");
        o.detail << " max difference=" << worst;
    });

    criterion(3, "order-3 fit equals the grouped-moment cubic; literal constant integrates to 0", 1, [](Outcome& o) {
        auto fam = legendre_family(3, Region::interval(-1, 1));
        auto grouped = [](double x, double m1, double m2, double m3, double constant) {
            return 5.0 / 8 *
                   (constant - 3 * x * x + m1 * (15 * x - 21 * x * x * x) + m2 * (9 * x * x - 3) +
                    m3 * (35 * x * x * x - 21 * x));
        };
        double worst = 0, literal_worst = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto s = uniform_points(25, -1, 1, derive_seed(3, seed));
            auto d = fit_orthonormal(AveragingSource(s), fam);
            const double m1 = moment(s, 1), m2 = moment(s, 2), m3 = moment(s, 3);
            for (int k = 0; k <= 100; ++k) {
                const double x = -1 + 0.02 * k;
                worst = std::max(worst, std::abs(eval1(d, x) - grouped(x, m1, m2, m3, 9.0 / 5)));
            }
            // composite Simpson, exact for cubics
            double integral = 0;
            for (int k = 0; k <= 200; ++k) {
                const double x = -1 + 0.01 * k;
                const double w = (k == 0 || k == 200) ? 1 : (k % 2 ? 4 : 2);
                integral += w * grouped(x, m1, m2, m3, 1.0);
            }
            literal_worst = std::max(literal_worst, std::abs(integral * 0.01 / 3));
        }
        o.require(worst <= 1e-12, "corrected formula within 1e-12");
        o.require(literal_worst <= 1e-12, "literal formula integrates to 0");
        o.detail << " max difference=" << worst << " |integral of literal formula|=" << literal_worst;
    });

    criterion(4, "RMS error halves when n quadruples (Legendre and Hermite testbeds)", 60, [](Outcome& o) {
        TrialConfig cfg{200, 7, threads()};
        for (const auto& tb : {legendre_testbed(), hermite_testbed()}) {
            auto rep = error_scaling_experiment(tb, {25, 100, 400}, cfg, {1.7, 2.3});
            for (const auto& r : rep.summary.at("ratios")) {
                const double ratio = r.at("ratio").get<double>();
                o.require(ratio >= 1.7 && ratio <= 2.3, tb.name + " ratio in [1.7, 2.3]");
                o.detail << " " << tb.name << ":" << r.at("n").get<int>() << "/" << r.at("n_next").get<int>() << "=" << ratio;
            }
        }
    });

    criterion(5, "empirical coefficient std matches the CLT prediction", 60, [](Outcome& o) {
        TrialConfig cfg{500, 7, threads()};
        for (const auto& tb : {uniform_testbed(2), legendre_testbed(), hermite_testbed()}) {
            auto rep = clt_variance_check(tb, 400, cfg, {0.8, 1.25});
            double lo = INFINITY, hi = -INFINITY;
            for (const auto& row : rep.rows) {
                lo = std::min(lo, row.ratio);
                hi = std::max(hi, row.ratio);
                o.require(row.ratio >= 0.8 && row.ratio <= 1.25,
                          tb.name + " coefficient " + std::to_string(row.coefficient) + " ratio in [0.8, 1.25]");
            }
            o.detail << " " << tb.name << " ratios in [" << lo << ", " << hi << "]";
        }
    });

    criterion(6, "grid least-squares fit converges to the averaged fit at rate eps^2", 30, [](Outcome& o) {
        auto leg = legendre_family(3, Region::interval(-1, 1));
        auto s = uniform_points(30, -0.5, 0.5, 21);
        const Eigen::VectorXd plain = fit_orthonormal(AveragingSource(s), leg).coefficients();
        std::vector<double> eps{0.2, 0.1, 0.05, 0.025}, err, corrected;
        for (double e : eps) {
            auto g = grid_least_squares_fit(s, leg, e);
            err.push_back((g.coefficients - plain).norm());
            auto k = fit_kernel_corrected(AveragingSource(s), leg, KernelSpec::gaussian(e));
            corrected.push_back((g.coefficients - k.coefficients()).norm());
        }
        const double k = loglog_slope(eps, err);
        const double gain = err[2] / corrected[2];
        o.require(k >= 1.8 && k <= 2.2, "slope in [1.8, 2.2]");
        o.require(gain >= 5, "kernel correction reduces the eps=0.05 error at least 5x");
        o.detail << " slope=" << k << " correction gain at eps=0.05: " << gain << "x";
    });

    criterion(7, "normalization: Lagrange constraint and integrals by construction", 0, [](Outcome& o) {
        auto herm = hermite_function_family(6);
        auto truth = hermite_testbed().truth;
        double worst = 0;
        for (std::uint64_t t = 0; t < 100; ++t) {
            Rng pick(derive_seed(70, t));
            const std::size_t n = 5 + pick.below(200);
            auto s = sample_from_density(truth, n, derive_seed(71, t));
            const double C = t % 2 ? 1.0 : pick.uniform(0.5, 3.0);
            auto d = fit_normalized(AveragingSource(s), herm, C);
            double sum = 0;
            for (std::size_t i = 0; i < herm.size(); ++i) sum += d.coefficients()[Eigen::Index(i)] * herm.member(i).integral;
            worst = std::max(worst, std::abs(sum - C));
        }
        o.require(worst <= 1e-10, "Hermite Lagrange constraint within 1e-10");
        double bounded = 0;
        const auto square = Region::cube(2, -1, 1);
        for (std::uint64_t t = 0; t < 20; ++t) {
            auto s = uniform_points(10 + t, -2, 3, derive_seed(72, t));
            bounded = std::max(bounded, std::abs(fit_orthonormal(AveragingSource(s), legendre_family(5, Region::interval(-2, 3))).integrate() - 1));
            bounded = std::max(bounded, std::abs(fit_orthonormal(AveragingSource(s), fourier_family(5, Region::interval(-2, 3))).integrate() - 1));
            Rng rng(derive_seed(73, t));
            RowMatrix p(30, 2);
            for (Eigen::Index i = 0; i < 30; ++i) p.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
            const FamilyDescriptor fd{FamilyKind::fourier, 3, 2, square, {}, {}, false};
            const FamilyDescriptor ld{FamilyKind::legendre, 3, 2, square, {}, {}, false};
            bounded = std::max(bounded, std::abs(fit_orthonormal(AveragingSource(WeightedSample(p)), make_family(fd)).integrate() - 1));
            bounded = std::max(bounded, std::abs(fit_orthonormal(AveragingSource(WeightedSample(p)), make_family(ld)).integrate() - 1));
        }
        o.require(bounded <= 1e-12, "Legendre/Fourier integrals within 1e-12");
        o.detail << " max |sum a_i F_i - C|=" << worst << " max |integral - 1| (bounded)=" << bounded;
    });

    criterion(8, "classification: XOR, two spirals by sign, four spirals by argument", 30, [](Outcome& o) {
        auto square = Region::cube(2, -1, 1);
        const FamilyDescriptor lin{FamilyKind::legendre, 1, 2, square, {}, {}, false};
        auto xor_fit = fit_orthonormal(AveragingSource(xor_corners()), make_family(lin));
        const auto& a = xor_fit.coefficients();
        o.require(std::abs(a[3] - 1.5) <= 1e-12, "xy coefficient 3/2");
        o.require(std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])}) <= 1e-12, "other coefficients zero");
        const auto corners = xor_corners();
        std::size_t xor_ok = 0;
        for (std::size_t i = 0; i < corners.size(); ++i)
            xor_ok += int(classify_sign(xor_fit, corners.point(i))) == (corners.weight(i).real() > 0 ? 1 : -1);
        o.require(xor_ok == 4, "all XOR corners correct");

        const FamilyDescriptor four{FamilyKind::fourier, 6, 2, square, {}, {}, false};
        auto fam = make_family(four);
        SpiralConfig two;
        auto d2 = fit_orthonormal(spiral_averaging_source(two), fam);
        auto held2 = spiral_points(two, 1000, 2024);
        std::size_t ok2 = 0;
        for (std::size_t i = 0; i < held2.size(); ++i)
            ok2 += int(classify_sign(d2, held2.point(i))) == (held2.weight(i).real() > 0 ? 1 : -1);
        const double acc2 = double(ok2) / double(held2.size());

        SpiralConfig quad;
        quad.classes = 4;
        auto d4 = fit_orthonormal(spiral_averaging_source(quad), fam);
        auto held4 = spiral_points(quad, 1000, 2025);
        std::size_t ok4 = 0;
        for (std::size_t i = 0; i < held4.size(); ++i) {
            const auto w = held4.weight(i);
            int truth = 0;
            while (truth < 4 && spiral_class_weight(4, truth) != w) ++truth;
            ok4 += classify_argument(d4, held4.point(i), 4) == truth;
        }
        const double acc4 = double(ok4) / double(held4.size());
        o.require(acc2 >= 0.95, "two-spiral accuracy >= 95%");
        o.require(acc4 >= 0.95, "four-spiral accuracy >= 95%");
        o.detail << " xor=" << xor_ok << "/4 two-spiral=" << acc2 << " four-spiral=" << acc4;
    });

    criterion(9, "Gram solve: raw monomials reproduce the Legendre fit", 0, [](Outcome& o) {
        auto region = Region::interval(-1, 1);
        std::vector<RawFunction> terms;
        for (const char* t : {"1", "x", "x^2", "x^3", "x^4"}) terms.push_back(parse_monomial_term(t));
        auto raw = raw_family(terms, region);
        auto leg = legendre_family(4, region);
        double mono_diff = 0, solve_diff = 0;
        for (std::uint64_t t = 0; t < 10; ++t) {
            AveragingSource s(uniform_points(40, -1, 1, derive_seed(9, t)));
            auto plain = fit_orthonormal(s, leg);
            auto mono = fit_general(s, raw);
            for (int k = 0; k <= 200; ++k) {
                const double x = -1 + 0.01 * k;
                mono_diff = std::max(mono_diff, std::abs(eval1(mono, x) - eval1(plain, x)));
            }
            solve_diff = std::max(solve_diff, (fit_general(s, leg).coefficients() - plain.coefficients()).cwiseAbs().maxCoeff());
        }
        o.require(mono_diff <= 1e-8, "monomial and Legendre fits agree within 1e-8");
        o.require(solve_diff <= 1e-12, "orthonormal Gram solve equals averaging within 1e-12");
        o.detail << " monomial vs Legendre=" << mono_diff << " solve vs average=" << solve_diff;
    });

    criterion(10, "PRNG uniformity test", 0, [](Outcome& o) {
        const std::size_t tuples = 100000;
        Rng adv_rng(99);
        std::vector<double> adversarial(2 * tuples);
        for (std::size_t i = 0; i < tuples; ++i) adversarial[2 * i] = adversarial[2 * i + 1] = adv_rng.uniform();
        const double z_adv = prng_uniformity_test(adversarial, 2, tuples).z;
        o.require(std::abs(z_adv) > 10, "duplicated-coordinate stream |z| > 10");
        std::size_t below = 0;
        double z_max = 0;
        std::vector<double> values(2 * tuples);
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            Rng rng(seed);
            for (auto& v : values) v = rng.uniform();
            const double z = std::abs(prng_uniformity_test(values, 2, tuples).z);
            below += z < 4;
            z_max = std::max(z_max, z);
        }
        o.require(below >= 99, "|z| < 4 on at least 99 of 100 seeds");
        o.detail << " adversarial z=" << z_adv << " mt19937_64 seeds with |z|<4: " << below << "/100 (max " << z_max << ")";
    });

    std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " failing criteria" << std::endl;
    return failures ? 1 : 0;
}
