#pragma once

#include "momentfit/density.hpp"
#include "momentfit/estimator.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace momentfit {

// A known density expressed in its own basis; samples are drawn from it and
// fits are compared with its coefficients.
struct Testbed {
    std::string name;
    FittedDensity truth;
};

// Cubic on [-1, 1]: a = (1/sqrt(2), 0.2, 0.1, -0.05) in orthonormal Legendre.
Testbed legendre_testbed();
// Order-4 Hermite-function density, a = (a_0, 0.15, 0.1, -0.05, 0.06) with a_0
// fixed by sum a_i F_i = 1.
Testbed hermite_testbed();
// Uniform density on [-1, 1] in the orthonormal Legendre family of `order`.
Testbed uniform_testbed(int order);
Testbed testbed_by_name(const std::string& name, int order = 2);

struct Band {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

struct SummaryRow {
    std::string label;  // e.g. the normalization strategy
    std::size_t n = 0;
    std::size_t coefficient = 0;
    double rms = 0.0;            // RMS error (scaling) or empirical std (clt) of a_i
    double predicted_std = 0.0;  // CLT prediction
    double ratio = 0.0;          // rms / predicted_std
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::json config;
    std::vector<SummaryRow> rows;
    nlohmann::json summary;
    // trial_errors[k][t]: squared coefficient error of trial t at the k-th n
    std::vector<std::vector<double>> trial_errors;
    std::vector<std::string> violations;
    double runtime_seconds = 0.0;  // never written to report files

    bool passed() const { return violations.empty(); }
    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
    // <stem>.json and <stem>.csv
    void save(const std::filesystem::path& stem) const;
};

struct TrialConfig {
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Runs body(t) for t in [0, trials) on `threads` workers; results are
// returned in trial order.
template <class T>
std::vector<T> run_trials(std::size_t trials, unsigned threads, const std::function<T(std::size_t)>& body) {
    std::vector<std::optional<T>> slots(trials);
    std::vector<std::exception_ptr> errors(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < trials; t = next++) {
            try {
                slots[t].emplace(body(t));
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // the lowest failing trial wins so errors do not depend on scheduling
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(trials);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// For each n: `trials` samples of size n, plain fits, RMS of ||a - a*||.
// Ratios RMS(n_k)/RMS(n_{k+1}) are checked against `band` when consecutive n
// differ by a factor of 4.
ExperimentReport error_scaling_experiment(const Testbed& testbed, const std::vector<std::size_t>& n_values,
                                          const TrialConfig& trials, Band band = {1.7, 2.3});

// Per-coefficient empirical std over trials vs clt_predicted_std; coefficients
// with zero predicted and empirical spread get ratio 1.
ExperimentReport clt_variance_check(const Testbed& testbed, std::size_t n, const TrialConfig& trials,
                                    Band band = {0.8, 1.25});

// RMS coefficient error for no normalization, posthoc rescaling and the
// Lagrange constraint (C = 1). Records the largest |sum a_i F_i - 1| of the
// Lagrange fits; no acceptance band.
ExperimentReport normalization_comparison(const Testbed& testbed, std::size_t n, const TrialConfig& trials);

struct PrngResult {
    double statistic = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    std::size_t dim = 0;
    std::size_t tuples = 0;
};

// T = mean over non-overlapping D-tuples of prod_d (x_d - 1/2);
// z = T / sqrt((1/12)^D / n_tuples); two-sided normal p-value.
PrngResult prng_uniformity_test(std::span<const double> values, std::size_t dim, std::size_t n_tuples);

// Little-endian 64-bit words mapped to [0, 1) by their top 53 bits.
std::vector<double> read_uniform_stream(std::istream& in, std::size_t max_values = 0);
std::vector<double> load_uniform_stream(const std::filesystem::path& path, std::size_t max_values = 0);

}  // namespace momentfit
