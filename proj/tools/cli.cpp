#include "cli.hpp"

#include "momentfit/bench.hpp"
#include "momentfit/datasets.hpp"
#include "momentfit/error.hpp"
#include "momentfit/estimator.hpp"
#include "momentfit/oracle.hpp"
#include "momentfit/random.hpp"
#include "momentfit/serialization.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace momentfit::cli {

namespace {

using nlohmann::json;

struct AcceptanceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError("cannot parse " + what + " value '" + item + "'");
        }
    }
    if (out.empty()) throw InputError("empty " + what);
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_list(text, "--n")) {
        if (!(v >= 1) || v != std::floor(v)) throw InputError("sample sizes must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

struct BasisArgs {
    std::string family = "legendre";
    int order = 2;
    std::string region;
    std::size_t dim = 1;
    std::string terms;
    bool orthonormalize = false;
};

void add_basis_options(CLI::App* app, BasisArgs& b) {
    app->add_option("--basis", b.family, "legendre|fourier|hermite|custom")->capture_default_str();
    app->add_option("--order", b.order, "polynomial order or highest frequency")->capture_default_str();
    app->add_option("--region", b.region, "lo,hi[,lo,hi...] (default -1,1 per dimension)");
    app->add_option("--dim", b.dim, "dimension")->capture_default_str();
    app->add_option("--terms", b.terms, "custom family monomials, e.g. 1,x,x^2");
    app->add_flag("--orthonormalize", b.orthonormalize, "Gram-Schmidt the custom terms");
}

FamilyDescriptor descriptor_from(const BasisArgs& b) {
    const FamilyKind kind = family_kind_from_string(b.family);
    if (kind == FamilyKind::product) throw InputError("product families are built from --dim, not --basis product");
    if (b.order < 0) throw InputError("--order must be nonnegative");
    if (b.dim < 1) throw InputError("--dim must be at least 1");
    FamilyDescriptor d{kind, b.order, b.dim, std::nullopt, {}, {}, b.orthonormalize};
    if (kind == FamilyKind::hermite) {
        if (!b.region.empty()) throw InputError("hermite functions live on all of R^D; drop --region");
        return d;
    }
    std::vector<double> bounds = b.region.empty() ? std::vector<double>{-1.0, 1.0} : parse_list(b.region, "--region");
    if (bounds.size() == 2 && b.dim > 1) {
        std::vector<double> rep;
        for (std::size_t k = 0; k < b.dim; ++k) rep.insert(rep.end(), bounds.begin(), bounds.end());
        bounds = rep;
    }
    if (bounds.size() != 2 * b.dim) throw InputError("--region needs 2 values per dimension");
    std::vector<double> lo, hi;
    for (std::size_t k = 0; k < b.dim; ++k) {
        lo.push_back(bounds[2 * k]);
        hi.push_back(bounds[2 * k + 1]);
    }
    d.region = Region(lo, hi);
    if (kind == FamilyKind::custom) {
        if (b.terms.empty()) throw InputError("custom families need --terms");
        if (b.dim != 1) throw InputError("custom monomial families are one-dimensional");
        std::stringstream ss(b.terms);
        std::string t;
        while (std::getline(ss, t, ',')) d.terms.push_back(t);
        d.order = static_cast<int>(d.terms.size()) - 1;
    }
    return d;
}

unsigned resolve_threads(int flag) {
    if (flag > 0) return static_cast<unsigned>(flag);
    if (const char* env = std::getenv("MOMENTFIT_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw InputError(std::string("MOMENTFIT_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_to(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
    if (path.empty() || path == "-") {
        fn(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path + "'");
    fn(f);
}

std::string join_point(std::span<const double> x) {
    std::string s;
    for (std::size_t k = 0; k < x.size(); ++k) s += (k ? "," : "") + format_double(x[k]);
    return s;
}

std::string header_columns(std::size_t dim) {
    std::string s;
    for (std::size_t k = 0; k < dim; ++k) s += (k ? ",x" : "x") + std::to_string(k + 1);
    return s;
}

// ---- gen ----

struct GenArgs {
    std::string kind;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::string out;
    int classes = 2;
    std::string testbed = "legendre";
    std::string model;
    std::size_t dim = 1;
    std::string mixture = "-1,0.5,0.5;1.5,0.7,0.5";
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    json config = {{"command", "gen"}, {"kind", a.kind}, {"n", a.n}, {"seed", a.seed}};
    WeightedSample sample = [&]() -> WeightedSample {
        if (a.kind == "xor") return xor_sample(a.n, a.seed);
        if (a.kind == "xor-corners") return xor_corners();
        if (a.kind == "spirals") {
            config["classes"] = a.classes;
            SpiralConfig sc;
            sc.classes = a.classes;
            return spiral_points(sc, std::max<std::size_t>(1, a.n / std::size_t(std::max(1, a.classes))), a.seed);
        }
        if (a.kind == "mixture") {
            config["mixture"] = a.mixture;
            config["dim"] = a.dim;
            std::vector<GaussianComponent> comps;
            std::stringstream ss(a.mixture);
            std::string part;
            while (std::getline(ss, part, ';')) {
                auto v = parse_list(part, "--mixture");
                if (v.size() != 3) throw InputError("mixture components are mean,std,weight");
                const auto d = static_cast<Eigen::Index>(a.dim);
                comps.push_back({Eigen::VectorXd::Constant(d, v[0]), Eigen::VectorXd::Constant(d, v[1]), v[2]});
            }
            return gaussian_mixture(comps, a.n, a.seed);
        }
        if (a.kind == "testbed") {
            config["testbed"] = a.testbed;
            return sample_from_density(testbed_by_name(a.testbed).truth, a.n, a.seed);
        }
        if (a.kind == "model") {
            if (a.model.empty()) throw InputError("gen model needs --model");
            config["model"] = a.model;
            return sample_from_density(load_model(a.model), a.n, a.seed);
        }
        throw InputError("unknown dataset '" + a.kind + "' (expected xor|xor-corners|spirals|mixture|testbed|model)");
    }();
    const WeightColumns cols = a.kind == "xor" || a.kind == "xor-corners" ? WeightColumns::real
                               : a.kind == "spirals"                      ? (sample.kind() == WeightKind::complex
                                                                                 ? WeightColumns::complex
                                                                                 : WeightColumns::real)
                                                                          : WeightColumns::none;
    config["weights"] = cols == WeightColumns::none ? "none" : cols == WeightColumns::real ? "real" : "complex";
    write_to(a.out, out, [&](std::ostream& o) { write_csv(o, sample, cols, "config: " + config.dump()); });
    if (!a.out.empty()) out << "wrote " << sample.size() << " points to " << a.out << '\n';
    return ok;
}

// ---- fit ----

struct FitArgs {
    BasisArgs basis;
    std::string input;
    std::string weights = "none";
    std::string source = "sample";
    int classes = 2;
    std::string normalize = "none";
    double C = 1.0;
    double kernel_eps = 0.0;
    std::string gram = "assume";
    bool whiten = false;
    double sparsify_threshold = -1.0;
    std::string out;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const auto desc = descriptor_from(a.basis);
    json config = {{"command", "fit"},       {"basis", descriptor_to_json(desc)}, {"input", a.input},
                   {"weights", a.weights},   {"source", a.source},                {"normalize", a.normalize},
                   {"C", a.C},               {"kernel_eps", a.kernel_eps},        {"gram", a.gram},
                   {"whiten", a.whiten},     {"sparsify", a.sparsify_threshold}};
    EstimationOptions opts;
    opts.normalization = normalization_from_string(a.normalize);
    opts.C = a.C;
    if (a.gram == "solve")
        opts.gram_mode = GramMode::solve;
    else if (a.gram != "assume")
        throw InputError("--gram must be assume|solve");
    if (a.kernel_eps < 0) throw InputError("--kernel-eps must be nonnegative");
    if (a.kernel_eps > 0) opts.kernel_correction = KernelSpec::gaussian(a.kernel_eps);

    auto family = make_family(desc);
    std::optional<AffineTransform> transform;
    std::optional<AveragingSource> source;
    if (a.source == "spirals") {
        config["classes"] = a.classes;
        if (a.whiten) throw InputError("--whiten applies to point samples only");
        SpiralConfig sc;
        sc.classes = a.classes;
        source.emplace(spiral_averaging_source(sc));
    } else if (a.source == "sample") {
        if (a.input.empty()) throw InputError("fit needs --input (or --source spirals)");
        auto sample = load_csv(a.input, weight_columns_from_string(a.weights));
        config["points"] = sample.size();
        if (a.whiten) {
            auto w = whiten(sample);
            transform = w.transform;
            sample = std::move(w.sample);
        }
        source.emplace(std::move(sample));
    } else {
        throw InputError("--source must be sample|spirals");
    }
    FittedDensity density = fit(*source, family, opts);
    if (transform) density = density.with_transform(transform);
    std::size_t survivors = density.size();
    if (a.sparsify_threshold >= 0) {
        auto sp = sparsify(density, a.sparsify_threshold);
        density = sp.density;
        survivors = sp.survivors;
    }

    out << "# config: " << config.dump() << '\n';
    out << "index,grade,coefficient" << (density.is_complex() ? ",imag" : "") << '\n';
    for (std::size_t i = 0; i < density.size(); ++i) {
        std::string grade;
        for (int g : family.member(i).id.grade) grade += (grade.empty() ? "" : ":") + std::to_string(g);
        out << i << ',' << grade << ',' << format_double(density.coefficients()[Eigen::Index(i)]);
        if (density.is_complex()) out << ',' << format_double(density.coefficients_imag()[Eigen::Index(i)]);
        out << '\n';
    }
    out << "integral," << format_double(density.integrate()) << '\n';
    out << "nonzero," << survivors << '\n';
    if (!a.out.empty()) save_model(a.out, density, config);
    return ok;
}

// ---- eval ----

struct EvalArgs {
    std::string model;
    std::size_t grid = 101;
    std::string range;
    std::string points;
    std::string weights = "none";
    std::string out;
};

void grid_box(const FittedDensity& d, const std::string& range, std::vector<double>& lo, std::vector<double>& hi) {
    const std::size_t dim = d.dim();
    lo.assign(dim, -8.0);
    hi.assign(dim, 8.0);
    if (!range.empty()) {
        auto r = parse_list(range, "--range");
        if (r.size() == 2 && dim > 1) {
            std::vector<double> rep;
            for (std::size_t k = 0; k < dim; ++k) rep.insert(rep.end(), r.begin(), r.end());
            r = rep;
        }
        if (r.size() != 2 * dim) throw InputError("--range needs 2 values per dimension");
        for (std::size_t k = 0; k < dim; ++k) {
            lo[k] = r[2 * k];
            hi[k] = r[2 * k + 1];
            if (!(lo[k] < hi[k])) throw DegenerateRegionError();
        }
        return;
    }
    if (const auto& t = d.transform()) {
        // +-8 standard deviations around the sample mean
        const Eigen::MatrixXd inv = t->matrix.inverse();
        const Eigen::MatrixXd cov = inv * inv.transpose();
        for (std::size_t k = 0; k < dim; ++k) {
            const double s = std::sqrt(cov(Eigen::Index(k), Eigen::Index(k)));
            lo[k] = t->mean[Eigen::Index(k)] - 8 * s;
            hi[k] = t->mean[Eigen::Index(k)] + 8 * s;
        }
    } else if (const auto& r = d.family().domain().region) {
        lo = r->lower();
        hi = r->upper();
    }
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    if (a.model.empty()) throw InputError("eval needs --model");
    auto density = load_model(a.model);
    const std::size_t dim = density.dim();
    json config = {{"command", "eval"}, {"model", a.model}};

    std::vector<std::vector<double>> pts;
    if (!a.points.empty()) {
        config["points"] = a.points;
        auto s = load_csv(a.points, weight_columns_from_string(a.weights));
        if (s.dim() != dim) throw InputError("points file dimension does not match the model");
        for (std::size_t i = 0; i < s.size(); ++i) pts.emplace_back(s.point(i).begin(), s.point(i).end());
    } else {
        if (a.grid < 1) throw InputError("--grid must be positive");
        std::vector<double> lo, hi;
        grid_box(density, a.range, lo, hi);
        config["grid"] = a.grid;
        config["range"] = {lo, hi};
        std::size_t total = 1;
        for (std::size_t k = 0; k < dim; ++k) {
            if (total > (std::size_t{1} << 24) / a.grid) throw InputError("evaluation grid too large");
            total *= a.grid;
        }
        for (std::size_t c = 0; c < total; ++c) {
            std::vector<double> x(dim);
            std::size_t rest = c;
            for (std::size_t k = dim; k-- > 0;) {
                const std::size_t j = rest % a.grid;
                rest /= a.grid;
                x[k] = a.grid == 1 ? 0.5 * (lo[k] + hi[k])
                       : j + 1 == a.grid ? hi[k]
                                         : lo[k] + (hi[k] - lo[k]) * double(j) / double(a.grid - 1);
            }
            pts.push_back(std::move(x));
        }
    }
    write_to(a.out, out, [&](std::ostream& o) {
        o << "# config: " << config.dump() << '\n';
        o << header_columns(dim) << ",value" << (density.is_complex() ? ",imag" : "") << ",status\n";
        for (const auto& x : pts) {
            o << join_point(x) << ',';
            try {
                const auto v = density.evaluate_complex(x);
                o << format_double(v.real());
                if (density.is_complex()) o << ',' << format_double(v.imag());
                o << ",ok\n";
            } catch (const OutOfDomainError&) {
                o << (density.is_complex() ? "," : "") << ",out-of-domain\n";
            }
        }
        if (!density.is_complex()) {
            auto rep = negativity_report(density, dim == 1 ? 2001 : dim == 2 ? 201 : 21);
            o << "# negativity: min=" << format_double(rep.min_value) << " argmin=("
              << join_point(std::span<const double>(rep.argmin.data(), dim)) << ") negative_fraction="
              << format_double(rep.negative_fraction) << " grid_points=" << rep.grid_points << '\n';
        }
    });
    return ok;
}

// ---- classify ----

struct ClassifyArgs {
    std::string model;
    std::string points;
    std::string weights = "none";
    std::string rule = "sign";
    int classes = 4;
    std::string out;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
    if (a.model.empty() || a.points.empty()) throw InputError("classify needs --model and --points");
    auto density = load_model(a.model);
    if (a.rule != "sign" && a.rule != "argument") throw InputError("--rule must be sign|argument");
    if (a.rule == "sign" && density.is_complex()) throw InputError("sign rule needs a real-weighted model");
    if (a.rule == "argument" && !density.is_complex()) throw InputError("argument rule needs a complex-weighted model");
    auto s = load_csv(a.points, weight_columns_from_string(a.weights));
    if (s.dim() != density.dim()) throw InputError("points file dimension does not match the model");
    json config = {{"command", "classify"}, {"model", a.model}, {"points", a.points},
                   {"rule", a.rule},        {"classes", a.classes}, {"weights", a.weights}};
    const bool labelled = a.weights != "none";
    std::size_t correct = 0;
    write_to(a.out, out, [&](std::ostream& o) {
        o << "# config: " << config.dump() << '\n';
        o << header_columns(s.dim()) << ",label\n";
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto x = s.point(i);
            std::string label;
            std::string truth;
            try {
                if (a.rule == "sign") {
                    label = to_string(classify_sign(density, x));
                    const double w = s.weight(i).real();
                    truth = w > 0 ? "+1" : w < 0 ? "-1" : "boundary";
                } else {
                    auto c = classify_argument(density, x, a.classes);
                    label = c ? std::to_string(*c) : "undecided";
                    const auto w = s.weight(i);
                    double arg = std::atan2(w.imag(), w.real());
                    if (arg < 0) arg += 2 * std::numbers::pi;
                    truth = std::to_string(std::min(a.classes - 1, int(std::floor(a.classes * arg / (2 * std::numbers::pi)))));
                }
            } catch (const OutOfDomainError&) {
                label = "out-of-domain";
            }
            if (labelled && label == truth) ++correct;
            o << join_point(x) << ',' << label << '\n';
        }
        if (labelled)
            o << "# accuracy: " << format_double(double(correct) / double(s.size())) << " (" << correct << "/"
              << s.size() << ")\n";
    });
    return ok;
}

// ---- bench ----

struct BenchArgs {
    std::string n;
    std::size_t trials = 0;
    std::uint64_t seed = 7;
    int threads = 0;
    std::string out;
    std::string testbed;
    int order = 2;
    double band_lo = 0, band_hi = 0;
    std::string file;
    std::size_t D = 2;
    std::size_t tuples = 0;
    std::size_t generate = 0;
    double z_max = 4.0;
};

void emit_report(const ExperimentReport& rep, const std::string& stem, std::ostream& out) {
    if (!stem.empty()) rep.save(stem);
    rep.write_csv(out);
    out << "# summary: " << rep.summary.dump() << '\n';
    for (const auto& v : rep.violations) out << "# violation: " << v << '\n';
    out << "# " << (rep.passed() ? "PASS" : "FAIL") << " (" << rep.experiment << ", "
        << format_double(rep.runtime_seconds) << " s)\n";
}

int cmd_bench(const std::string& which, const BenchArgs& a, std::ostream& out) {
    TrialConfig tc;
    tc.seed = a.seed;
    tc.threads = resolve_threads(a.threads);
    std::vector<std::string> failures;
    auto run = [&](const ExperimentReport& rep, const std::string& stem) {
        emit_report(rep, stem, out);
        for (const auto& v : rep.violations) failures.push_back(rep.experiment + ": " + v);
    };
    if (which == "scaling") {
        tc.trials = a.trials ? a.trials : 200;
        const auto ns = parse_sizes(a.n.empty() ? "25,100,400" : a.n);
        const Band band{a.band_lo > 0 ? a.band_lo : 1.7, a.band_hi > 0 ? a.band_hi : 2.3};
        std::vector<std::string> beds = {"legendre", "hermite"};
        if (!a.testbed.empty() && a.testbed != "both") beds = {a.testbed};
        for (const auto& name : beds) {
            auto tb = testbed_by_name(name, a.order);
            run(error_scaling_experiment(tb, ns, tc, band), a.out.empty() ? "" : a.out + "-" + tb.name);
        }
    } else if (which == "clt") {
        tc.trials = a.trials ? a.trials : 500;
        const auto ns = parse_sizes(a.n.empty() ? "400" : a.n);
        const Band band{a.band_lo > 0 ? a.band_lo : 0.8, a.band_hi > 0 ? a.band_hi : 1.25};
        auto tb = testbed_by_name(a.testbed.empty() ? "uniform" : a.testbed, a.order);
        for (std::size_t n : ns)
            run(clt_variance_check(tb, n, tc, band), a.out.empty() ? "" : a.out + "-" + tb.name + "-n" + std::to_string(n));
    } else if (which == "normalization") {
        tc.trials = a.trials ? a.trials : 200;
        const auto ns = parse_sizes(a.n.empty() ? "100" : a.n);
        auto tb = testbed_by_name(a.testbed.empty() ? "hermite" : a.testbed, a.order);
        for (std::size_t n : ns)
            run(normalization_comparison(tb, n, tc), a.out.empty() ? "" : a.out + "-" + tb.name + "-n" + std::to_string(n));
    } else if (which == "prng") {
        std::vector<double> values;
        json config = {{"command", "bench prng"}, {"D", a.D}, {"z_max", a.z_max}};
        if (!a.file.empty()) {
            config["file"] = a.file;
            values = load_uniform_stream(a.file, a.tuples ? a.tuples * a.D : 0);
        } else if (a.generate) {
            config["generator"] = "mt19937_64";
            config["seed"] = a.seed;
            Rng rng(a.seed);
            values.resize(a.generate);
            for (auto& v : values) v = rng.uniform();
        } else {
            throw InputError("bench prng needs --file or --generate");
        }
        if (a.D == 0) throw InputError("--D must be positive");
        const std::size_t tuples = a.tuples ? a.tuples : values.size() / a.D;
        config["tuples"] = tuples;
        auto r = prng_uniformity_test(values, a.D, tuples);
        json j = {{"config", config},
                  {"statistic", r.statistic},
                  {"z", r.z},
                  {"p_value", r.p_value},
                  {"dim", r.dim},
                  {"tuples", r.tuples}};
        if (!a.out.empty()) {
            std::ofstream f(a.out + ".json");
            if (!f) throw InputError("cannot write '" + a.out + ".json'");
            f << j.dump(2) << '\n';
        }
        out << "# config: " << config.dump() << '\n';
        out << "statistic,z,p_value,dim,tuples\n";
        out << format_double(r.statistic) << ',' << format_double(r.z) << ',' << format_double(r.p_value) << ','
            << r.dim << ',' << r.tuples << '\n';
        if (!(std::abs(r.z) < a.z_max))
            failures.push_back("prng: |z| = " + format_double(std::abs(r.z)) + " not below " + format_double(a.z_max));
    } else {
        throw InputError("unknown experiment '" + which + "'");
    }
    if (!failures.empty()) {
        std::string msg = "acceptance band violated:";
        for (const auto& f : failures) msg += "\n  " + f;
        throw AcceptanceFailure(msg);
    }
    return ok;
}

// ---- orthocheck ----

int cmd_orthocheck(const BasisArgs& b, std::ostream& out) {
    const auto desc = descriptor_from(b);
    out << "# config: " << json{{"command", "orthocheck"}, {"basis", descriptor_to_json(desc)}}.dump() << '\n';
    BasisFamily family = [&] {
        try {
            return make_family(desc);
        } catch (const DependenceError& e) {
            throw AcceptanceFailure(std::string("orthonormality failed: ") + e.what());
        }
    }();
    auto rep = orthonormality(gram_matrix(family));
    out << "size,max_off_diagonal,max_diagonal_deviation\n";
    out << family.size() << ',' << format_double(rep.max_off_diagonal) << ',' << format_double(rep.max_diagonal_deviation)
        << '\n';
    if (!rep.passes(1e-8))
        throw AcceptanceFailure("orthonormality failed: Gram deviates from identity by more than 1e-8");
    out << "PASS\n";
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Density estimation and classification by orthonormal function averages"};
    app.require_subcommand(1);
    int threads_flag = 0;

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "generate a dataset as CSV");
    g->add_option("kind", gen.kind, "xor|xor-corners|spirals|mixture|testbed|model")->required();
    g->add_option("--n", gen.n, "number of points")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--out", gen.out, "output CSV (default stdout)");
    g->add_option("--classes", gen.classes, "spiral classes (2 or 4)")->capture_default_str();
    g->add_option("--testbed", gen.testbed, "legendre|hermite|uniform")->capture_default_str();
    g->add_option("--model", gen.model, "model JSON to sample from");
    g->add_option("--dim", gen.dim, "mixture dimension")->capture_default_str();
    g->add_option("--mixture", gen.mixture, "mean,std,weight;... per component")->capture_default_str();

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "fit a density or classifier");
    add_basis_options(f, fa.basis);
    f->add_option("--input", fa.input, "sample CSV");
    f->add_option("--weights", fa.weights, "none|real|complex weight columns")->capture_default_str();
    f->add_option("--source", fa.source, "sample|spirals")->capture_default_str();
    f->add_option("--classes", fa.classes, "spiral classes for --source spirals")->capture_default_str();
    f->add_option("--normalize", fa.normalize, "none|lagrange|posthoc")->capture_default_str();
    f->add_option("--C", fa.C, "normalization constant")->capture_default_str();
    f->add_option("--kernel-eps", fa.kernel_eps, "Gaussian kernel width for the correction term");
    f->add_option("--gram", fa.gram, "assume|solve")->capture_default_str();
    f->add_flag("--whiten", fa.whiten, "center and PCA-whiten the sample first");
    f->add_option("--sparsify", fa.sparsify_threshold, "zero coefficients with |a| <= threshold");
    f->add_option("--out", fa.out, "model JSON");

    EvalArgs ea;
    auto* e = app.add_subcommand("eval", "evaluate a model on a grid or points");
    e->add_option("--model", ea.model)->required();
    e->add_option("--grid", ea.grid, "points per dimension")->capture_default_str();
    e->add_option("--range", ea.range, "lo,hi[,...] grid box");
    e->add_option("--points", ea.points, "CSV of points");
    e->add_option("--weights", ea.weights, "weight columns in --points")->capture_default_str();
    e->add_option("--out", ea.out, "output CSV (default stdout)");

    ClassifyArgs ca;
    auto* c = app.add_subcommand("classify", "label points by the sign or argument of a model");
    c->add_option("--model", ca.model)->required();
    c->add_option("--points", ca.points)->required();
    c->add_option("--weights", ca.weights, "weight columns in --points (used as reference labels)")->capture_default_str();
    c->add_option("--rule", ca.rule, "sign|argument")->capture_default_str();
    c->add_option("--classes", ca.classes)->capture_default_str();
    c->add_option("--out", ca.out, "output CSV (default stdout)");

    BenchArgs ba;
    std::string experiment;
    auto* b = app.add_subcommand("bench", "statistical experiments");
    b->add_option("experiment", experiment, "scaling|clt|normalization|prng")->required();
    b->add_option("--n", ba.n, "sample size(s), comma separated");
    b->add_option("--trials", ba.trials);
    b->add_option("--seed", ba.seed)->capture_default_str();
    b->add_option("--threads", threads_flag, "worker threads (default MOMENTFIT_THREADS or all cores)");
    b->add_option("--out", ba.out, "report file stem");
    b->add_option("--testbed", ba.testbed, "legendre|hermite|uniform|both");
    b->add_option("--order", ba.order, "order of the uniform testbed")->capture_default_str();
    b->add_option("--band-lo", ba.band_lo);
    b->add_option("--band-hi", ba.band_hi);
    b->add_option("--file", ba.file, "binary stream of 64-bit words");
    b->add_option("--D", ba.D, "tuple dimension")->capture_default_str();
    b->add_option("--tuples", ba.tuples);
    b->add_option("--generate", ba.generate, "test this many values from the built-in generator");
    b->add_option("--z-max", ba.z_max)->capture_default_str();

    BasisArgs oa;
    auto* o = app.add_subcommand("orthocheck", "check orthonormality of a basis by quadrature");
    add_basis_options(o, oa);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? ok : input_error;
    }
    ba.threads = threads_flag;

    try {
        if (*g) return cmd_gen(gen, out);
        if (*f) return cmd_fit(fa, out);
        if (*e) return cmd_eval(ea, out);
        if (*c) return cmd_classify(ca, out);
        if (*b) return cmd_bench(experiment, ba, out);
        if (*o) return cmd_orthocheck(oa, out);
    } catch (const AcceptanceFailure& ex) {
        err << "error: " << ex.what() << '\n';
        return acceptance_failed;
    } catch (const InputError& ex) {
        err << "input error: " << ex.what() << '\n';
        return input_error;
    } catch (const NumericError& ex) {
        err << "numerical error: " << ex.what() << '\n';
        return numeric_error;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return numeric_error;
    }
    return input_error;
}

}  // namespace momentfit::cli
