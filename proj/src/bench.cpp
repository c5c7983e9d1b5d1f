#include "momentfit/bench.hpp"

#include "momentfit/error.hpp"
#include "momentfit/oracle.hpp"
#include "momentfit/random.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

namespace momentfit {

using nlohmann::json;

namespace {

Testbed checked(std::string name, FittedDensity truth) {
    auto rep = negativity_report(truth, truth.family().domain().is_bounded() ? 2001 : 4001);
    if (rep.min_value < 0) throw InputError("testbed '" + name + "' is negative somewhere");
    return {std::move(name), std::move(truth)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_trials(const TrialConfig& cfg) {
    if (cfg.trials < 2) throw InputError("at least 2 trials are needed to measure dispersion");
}

json base_config(const Testbed& tb, const TrialConfig& cfg) {
    json c;
    c["testbed"] = tb.name;
    c["basis"] = {{"family", to_string(tb.truth.family().descriptor().kind)}, {"order", tb.truth.family().descriptor().order}};
    c["true_coefficients"] = std::vector<double>(tb.truth.coefficients().data(),
                                                 tb.truth.coefficients().data() + tb.truth.coefficients().size());
    c["trials"] = cfg.trials;
    c["seed"] = cfg.seed;
    c["threads"] = cfg.threads;
    return c;
}

Eigen::VectorXd fit_coefficients(const WeightedSample& s, const BasisFamily& family, const EstimationOptions& opts = {}) {
    return fit(AveragingSource(s), family, opts).coefficients();
}

}  // namespace

Testbed legendre_testbed() {
    Eigen::Vector4d a(1 / std::sqrt(2.0), 0.2, 0.1, -0.05);
    return checked("legendre-cubic", FittedDensity(legendre_family(3, Region::interval(-1, 1)), a));
}

Testbed hermite_testbed() {
    auto family = hermite_function_family(4);
    const Eigen::VectorXd F = family.integrals();
    Eigen::VectorXd a(5);
    a << 0.0, 0.15, 0.1, -0.05, 0.06;
    a[0] = (1.0 - a.tail(4).dot(F.tail(4))) / F[0];
    return checked("hermite-quartic", FittedDensity(family, a));
}

Testbed uniform_testbed(int order) {
    auto family = legendre_family(order, Region::interval(-1, 1));
    Eigen::VectorXd a = Eigen::VectorXd::Zero(Eigen::Index(family.size()));
    a[0] = 1 / std::sqrt(2.0);
    return checked("uniform-legendre-" + std::to_string(order), FittedDensity(family, a));
}

Testbed testbed_by_name(const std::string& name, int order) {
    if (name == "legendre") return legendre_testbed();
    if (name == "hermite") return hermite_testbed();
    if (name == "uniform") return uniform_testbed(order);
    throw InputError("unknown testbed '" + name + "' (expected legendre|hermite|uniform)");
}

json ExperimentReport::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["config"] = config;
    j["summary"] = summary;
    j["rows"] = json::array();
    for (const auto& r : rows) {
        json row = {{"n", r.n}, {"coefficient", r.coefficient}, {"rms", r.rms}, {"predicted_std", r.predicted_std},
                    {"ratio", r.ratio}};
        if (!r.label.empty()) row["label"] = r.label;
        j["rows"].push_back(row);
    }
    j["trial_errors"] = trial_errors;
    j["violations"] = violations;
    j["passed"] = passed();
    return j;
}

void ExperimentReport::write_csv(std::ostream& out) const {
    out << "# config: " << config.dump() << '\n';
    out << "label,n,coefficient,rms,predicted_std,ratio\n";
    for (const auto& r : rows)
        out << r.label << ',' << r.n << ',' << r.coefficient << ',' << format_double(r.rms) << ','
            << format_double(r.predicted_std) << ',' << format_double(r.ratio) << '\n';
}

void ExperimentReport::save(const std::filesystem::path& stem) const {
    auto json_path = stem;
    json_path += ".json";
    auto csv_path = stem;
    csv_path += ".csv";
    std::ofstream j(json_path), c(csv_path);
    if (!j || !c) throw InputError("cannot write report files at '" + stem.string() + "'");
    j << to_json().dump(2) << '\n';
    write_csv(c);
}

ExperimentReport error_scaling_experiment(const Testbed& testbed, const std::vector<std::size_t>& n_values,
                                          const TrialConfig& cfg, Band band) {
    const auto t0 = std::chrono::steady_clock::now();
    check_trials(cfg);
    if (n_values.empty()) throw InputError("need at least one sample size");
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (n_values[k] == 0) throw InputError("sample sizes must be positive");
        if (k && n_values[k] <= n_values[k - 1]) throw InputError("sample sizes must be strictly increasing");
    }
    const auto& family = testbed.truth.family();
    const Eigen::VectorXd truth = testbed.truth.coefficients();
    const auto m = truth.size();

    ExperimentReport rep;
    rep.experiment = "scaling";
    rep.config = base_config(testbed, cfg);
    rep.config["n_values"] = n_values;
    rep.config["band"] = {band.lo, band.hi};
    std::vector<double> rms;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        const std::size_t n = n_values[k];
        const std::uint64_t level_seed = derive_seed(cfg.seed, k);
        auto errors = run_trials<Eigen::VectorXd>(cfg.trials, cfg.threads, [&](std::size_t t) {
            try {
                auto s = sample_from_density(testbed.truth, n, derive_seed(level_seed, t));
                return Eigen::VectorXd(fit_coefficients(s, family) - truth);
            } catch (const std::exception& e) {
                throw NumericError("trial " + std::to_string(t) + " at n=" + std::to_string(n) + ": " + e.what());
            }
        });
        std::vector<double> sq;
        Eigen::VectorXd per = Eigen::VectorXd::Zero(m);
        for (const auto& e : errors) {
            sq.push_back(e.squaredNorm());
            per += e.cwiseAbs2();
        }
        double mean_sq = 0;
        for (double v : sq) mean_sq += v;
        mean_sq /= double(cfg.trials);
        if (!std::isfinite(mean_sq)) throw NumericError("non-finite coefficient error");
        rms.push_back(std::sqrt(mean_sq));
        rep.trial_errors.push_back(std::move(sq));
        for (Eigen::Index i = 0; i < m; ++i) {
            SummaryRow row;
            row.label = testbed.name;
            row.n = n;
            row.coefficient = std::size_t(i);
            row.rms = std::sqrt(per[i] / double(cfg.trials));
            row.predicted_std = clt_predicted_std(testbed.truth, std::size_t(i), n);
            row.ratio = row.predicted_std > 1e-12 ? row.rms / row.predicted_std : (row.rms < 1e-12 ? 1.0 : INFINITY);
            rep.rows.push_back(row);
        }
    }
    rep.summary["rms"] = json::array();
    for (std::size_t k = 0; k < n_values.size(); ++k) rep.summary["rms"].push_back({{"n", n_values[k]}, {"rms", rms[k]}});
    rep.summary["ratios"] = json::array();
    for (std::size_t k = 0; k + 1 < n_values.size(); ++k) {
        const double r = rms[k] / rms[k + 1];
        const bool checked_band = n_values[k + 1] == 4 * n_values[k];
        rep.summary["ratios"].push_back(
            {{"n", n_values[k]}, {"n_next", n_values[k + 1]}, {"ratio", r}, {"checked", checked_band}});
        if (checked_band && !band.contains(r))
            rep.violations.push_back("RMS(" + std::to_string(n_values[k]) + ")/RMS(" + std::to_string(n_values[k + 1]) +
                                     ") = " + format_double(r) + " outside [" + format_double(band.lo) + ", " +
                                     format_double(band.hi) + "]");
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport clt_variance_check(const Testbed& testbed, std::size_t n, const TrialConfig& cfg, Band band) {
    const auto t0 = std::chrono::steady_clock::now();
    check_trials(cfg);
    if (n == 0) throw InputError("sample size must be positive");
    const auto& family = testbed.truth.family();
    const auto m = testbed.truth.coefficients().size();
    auto coeffs = run_trials<Eigen::VectorXd>(cfg.trials, cfg.threads, [&](std::size_t t) {
        try {
            return fit_coefficients(sample_from_density(testbed.truth, n, derive_seed(cfg.seed, t)), family);
        } catch (const std::exception& e) {
            throw NumericError("trial " + std::to_string(t) + ": " + e.what());
        }
    });
    ExperimentReport rep;
    rep.experiment = "clt";
    rep.config = base_config(testbed, cfg);
    rep.config["n"] = n;
    rep.config["band"] = {band.lo, band.hi};
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (const auto& c : coeffs) mean += c;
    mean /= double(cfg.trials);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
    std::vector<double> sq;
    for (const auto& c : coeffs) {
        var += (c - mean).cwiseAbs2();
        sq.push_back((c - testbed.truth.coefficients()).squaredNorm());
    }
    var /= double(cfg.trials - 1);
    rep.trial_errors.push_back(std::move(sq));
    for (Eigen::Index i = 0; i < m; ++i) {
        SummaryRow row;
        row.label = testbed.name;
        row.n = n;
        row.coefficient = std::size_t(i);
        row.rms = std::sqrt(var[i]);
        row.predicted_std = clt_predicted_std(testbed.truth, std::size_t(i), n);
        if (row.predicted_std < 1e-12 && row.rms < 1e-12)
            row.ratio = 1.0;
        else
            row.ratio = row.predicted_std > 0 ? row.rms / row.predicted_std : INFINITY;
        if (!band.contains(row.ratio))
            rep.violations.push_back("coefficient " + std::to_string(i) + ": empirical/predicted std " +
                                     format_double(row.ratio) + " outside [" + format_double(band.lo) + ", " +
                                     format_double(band.hi) + "]");
        rep.rows.push_back(row);
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

ExperimentReport normalization_comparison(const Testbed& testbed, std::size_t n, const TrialConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    check_trials(cfg);
    if (n == 0) throw InputError("sample size must be positive");
    const auto& family = testbed.truth.family();
    const Eigen::VectorXd truth = testbed.truth.coefficients();
    const Eigen::VectorXd F = family.integrals();
    const auto m = truth.size();
    const NormalizationMode modes[] = {NormalizationMode::none, NormalizationMode::posthoc, NormalizationMode::lagrange};
    struct Trial {
        Eigen::VectorXd err[3];
        double constraint = 0.0;
    };
    auto results = run_trials<Trial>(cfg.trials, cfg.threads, [&](std::size_t t) {
        try {
            auto s = sample_from_density(testbed.truth, n, derive_seed(cfg.seed, t));
            Trial tr;
            for (int k = 0; k < 3; ++k) {
                EstimationOptions opts;
                opts.normalization = modes[k];
                Eigen::VectorXd a = fit_coefficients(s, family, opts);
                tr.err[k] = a - truth;
                if (modes[k] == NormalizationMode::lagrange) tr.constraint = std::abs(a.dot(F) - 1.0);
            }
            return tr;
        } catch (const std::exception& e) {
            throw NumericError("trial " + std::to_string(t) + ": " + e.what());
        }
    });
    ExperimentReport rep;
    rep.experiment = "normalization";
    rep.config = base_config(testbed, cfg);
    rep.config["n"] = n;
    rep.config["C"] = 1.0;
    double worst = 0;
    for (const auto& r : results) worst = std::max(worst, r.constraint);
    rep.summary["lagrange_max_constraint_error"] = worst;
    rep.summary["rms"] = json::object();
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd per = Eigen::VectorXd::Zero(m);
        std::vector<double> sq;
        for (const auto& r : results) {
            per += r.err[k].cwiseAbs2();
            sq.push_back(r.err[k].squaredNorm());
        }
        double total = 0;
        for (double v : sq) total += v;
        rep.summary["rms"][to_string(modes[k])] = std::sqrt(total / double(cfg.trials));
        rep.trial_errors.push_back(std::move(sq));
        for (Eigen::Index i = 0; i < m; ++i) {
            SummaryRow row;
            row.label = to_string(modes[k]);
            row.n = n;
            row.coefficient = std::size_t(i);
            row.rms = std::sqrt(per[i] / double(cfg.trials));
            row.predicted_std = clt_predicted_std(testbed.truth, std::size_t(i), n);
            row.ratio = row.predicted_std > 1e-12 ? row.rms / row.predicted_std : (row.rms < 1e-12 ? 1.0 : INFINITY);
            rep.rows.push_back(row);
        }
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

PrngResult prng_uniformity_test(std::span<const double> values, std::size_t dim, std::size_t n_tuples) {
    if (dim == 0 || n_tuples == 0) throw InputError("need a positive tuple dimension and tuple count");
    if (values.size() / dim < n_tuples)
        throw InputError("stream too short: need " + std::to_string(n_tuples * dim) + " values, have " +
                         std::to_string(values.size()));
    double total = 0.0;
    for (std::size_t t = 0; t < n_tuples; ++t) {
        double prod = 1.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double x = values[t * dim + d];
            if (!(x >= 0.0 && x < 1.0)) throw InputError("stream values must lie in [0, 1)");
            prod *= x - 0.5;
        }
        total += prod;
    }
    PrngResult r;
    r.dim = dim;
    r.tuples = n_tuples;
    r.statistic = total / double(n_tuples);
    r.z = r.statistic / std::sqrt(std::pow(1.0 / 12.0, double(dim)) / double(n_tuples));
    r.p_value = std::erfc(std::abs(r.z) / std::numbers::sqrt2);
    return r;
}

std::vector<double> read_uniform_stream(std::istream& in, std::size_t max_values) {
    std::vector<double> out;
    unsigned char buf[8];
    while ((max_values == 0 || out.size() < max_values) && in.read(reinterpret_cast<char*>(buf), 8)) {
        std::uint64_t w = 0;
        for (int b = 7; b >= 0; --b) w = (w << 8) | buf[b];
        out.push_back(static_cast<double>(w >> 11) * 0x1.0p-53);
    }
    return out;
}

std::vector<double> load_uniform_stream(const std::filesystem::path& path, std::size_t max_values) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_uniform_stream(in, max_values);
}

}  // namespace momentfit
