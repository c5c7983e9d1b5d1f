#include "momentfit/sample.hpp"

#include "momentfit/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace momentfit {

std::string to_string(WeightKind kind) { return kind == WeightKind::real ? "real" : "complex"; }

namespace {

void require_finite(const RowMatrix& points) {
    if (!points.allFinite()) throw InputError("sample contains non-finite coordinates");
}

}  // namespace

WeightedSample::WeightedSample(RowMatrix points, std::optional<Region> region_filter)
    : WeightedSample(points, Eigen::VectorXd::Ones(points.rows()), std::move(region_filter)) {}

WeightedSample::WeightedSample(RowMatrix points, Eigen::VectorXd weights, std::optional<Region> region_filter)
    : points_(std::move(points)),
      weights_re_(std::move(weights)),
      kind_(WeightKind::real),
      region_filter_(std::move(region_filter)) {
    if (points_.rows() < 1 || points_.cols() < 1) throw InputError("sample needs at least one point");
    if (weights_re_.size() != points_.rows()) throw InputError("one weight per point required");
    require_finite(points_);
    if (!weights_re_.allFinite()) throw InputError("sample contains non-finite weights");
    if (region_filter_ && region_filter_->dim() != dim()) throw InputError("region filter dimension mismatch");
}

WeightedSample::WeightedSample(RowMatrix points, Eigen::VectorXd weights_re, Eigen::VectorXd weights_im,
                               std::optional<Region> region_filter)
    : WeightedSample(std::move(points), std::move(weights_re), std::move(region_filter)) {
    if (weights_im.size() != points_.rows()) throw InputError("one imaginary weight per point required");
    if (!weights_im.allFinite()) throw InputError("sample contains non-finite weights");
    weights_im_ = std::move(weights_im);
    kind_ = WeightKind::complex;
}

std::complex<double> WeightedSample::weight(std::size_t i) const {
    const auto k = static_cast<Eigen::Index>(i);
    return {weights_re_[k], kind_ == WeightKind::complex ? weights_im_[k] : 0.0};
}

WeightedSample WeightedSample::with_region_filter(std::optional<Region> region) const {
    auto copy = *this;
    if (region && region->dim() != dim()) throw InputError("region filter dimension mismatch");
    copy.region_filter_ = std::move(region);
    return copy;
}

WeightedSample WeightedSample::with_weights(Eigen::VectorXd re, Eigen::VectorXd im) const {
    if (im.size() == 0) return WeightedSample(points_, std::move(re), region_filter_);
    return WeightedSample(points_, std::move(re), std::move(im), region_filter_);
}

ContinuousSource ContinuousSource::constant(std::size_t dim, std::function<Eigen::VectorXd(double)> curve,
                                            std::complex<double> weight, std::optional<double> normalization) {
    ContinuousSource s;
    s.dim = dim;
    s.curve = std::move(curve);
    s.weight = [weight](double) { return weight; };
    s.weight_kind = weight.imag() != 0.0 ? WeightKind::complex : WeightKind::real;
    s.normalization = normalization;
    return s;
}

Averages& Averages::operator*=(double s) {
    re *= s;
    if (im.size()) im *= s;
    return *this;
}

Averages& Averages::operator+=(const Averages& other) {
    if (re.size() == 0) {
        *this = other;
        return *this;
    }
    re += other.re;
    if (other.is_complex() || is_complex()) {
        if (im.size() == 0) im = Eigen::VectorXd::Zero(re.size());
        if (other.im.size()) im += other.im;
        kind = WeightKind::complex;
    }
    return *this;
}

Averages discrete_average(const WeightedSample& sample, std::size_t m, const VectorIntegrand& g,
                          const std::optional<Region>& filter) {
    std::vector<std::size_t> inside;
    inside.reserve(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto x = sample.point(i);
        if (sample.region_filter() && !sample.region_filter()->contains(x)) continue;
        if (filter && !filter->contains(x)) continue;
        inside.push_back(i);
    }
    if (inside.empty()) throw InputError("no sample points inside the averaging region");

    const bool complex = sample.kind() == WeightKind::complex;
    const auto mm = static_cast<Eigen::Index>(m);
    Eigen::VectorXd scratch(mm);
    struct Partial {
        Eigen::VectorXd re, im;
    };
    // Pairwise summation over a fixed split of the index range.
    std::function<Partial(std::size_t, std::size_t)> sum = [&](std::size_t lo, std::size_t hi) -> Partial {
        Partial p{Eigen::VectorXd::Zero(mm), complex ? Eigen::VectorXd::Zero(mm) : Eigen::VectorXd()};
        if (hi - lo <= 16) {
            for (std::size_t k = lo; k < hi; ++k) {
                const auto i = inside[k];
                g(sample.point(i), std::span<double>(scratch.data(), m));
                const auto w = sample.weight(i);
                p.re += w.real() * scratch;
                if (complex) p.im += w.imag() * scratch;
            }
            return p;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        auto left = sum(lo, mid);
        auto right = sum(mid, hi);
        left.re += right.re;
        if (complex) left.im += right.im;
        return left;
    };
    auto total = sum(0, inside.size());
    const double n = static_cast<double>(inside.size());
    Averages out;
    out.kind = sample.kind();
    out.re = total.re / n;
    if (complex) out.im = total.im / n;
    return out;
}

Averages curve_average(const ContinuousSource& source, std::size_t m, const VectorIntegrand& g,
                       const std::optional<Region>& filter) {
    if (!source.curve) throw InputError("continuous source has no curve");
    const bool complex = source.weight_kind == WeightKind::complex;
    if (complex && !source.normalization)
        throw InputError("complex-weighted sources need an explicit normalization constant");
    const auto mm = static_cast<Eigen::Index>(m);
    constexpr std::size_t order = 16;
    constexpr std::size_t max_nodes = std::size_t{1} << 14;

    auto speed = [&](double t) {
        if (source.measure == Measure::parameter) return 1.0;
        if (source.speed) return source.speed(t);
        const double h = 1e-6;
        const double a = std::max(0.0, t - h), b = std::min(1.0, t + h);
        return (source.curve(b) - source.curve(a)).norm() / (b - a);
    };

    auto estimate = [&](std::size_t panels) {
        auto rule = composite_gauss_legendre(panels, order, 0.0, 1.0);
        Eigen::VectorXd re = Eigen::VectorXd::Zero(mm), im = Eigen::VectorXd::Zero(mm), buf(mm);
        double total_weight = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double t = rule.nodes[k];
            const Eigen::VectorXd x = source.curve(t);
            if (static_cast<std::size_t>(x.size()) != source.dim) throw InputError("curve dimension mismatch");
            if (!x.allFinite()) throw InputError("curve is not finite");
            std::span<const double> xs(x.data(), source.dim);
            if (filter && !filter->contains(xs)) continue;
            const double dmu = rule.weights[k] * speed(t);
            const auto w = source.weight(t);
            g(xs, std::span<double>(buf.data(), m));
            re += dmu * w.real() * buf;
            if (complex) im += dmu * w.imag() * buf;
            total_weight += dmu * w.real();
        }
        const double c = source.normalization ? *source.normalization : total_weight;
        if (c == 0.0 || !std::isfinite(c)) throw NumericError("curve normalization constant is zero");
        Eigen::VectorXd out(complex ? 2 * mm : mm);
        out.head(mm) = re / c;
        if (complex) out.tail(mm) = im / c;
        return out;
    };

    std::size_t panels = std::max<std::size_t>(1, source.quad_points / order);
    Eigen::VectorXd previous = estimate(panels);
    double change = 0.0;
    while (2 * panels * order <= max_nodes) {
        panels *= 2;
        Eigen::VectorXd current = estimate(panels);
        change = (current - previous).cwiseAbs().maxCoeff() / std::max(1.0, current.cwiseAbs().maxCoeff());
        previous = std::move(current);
        if (change <= 1e-10) break;
    }
    if (!(change <= 1e-6))
        throw QuadratureError("curve average did not converge (change " + std::to_string(change) + ")");
    Averages out;
    out.kind = source.weight_kind;
    out.re = previous.head(mm);
    if (complex) out.im = previous.tail(mm);
    return out;
}

Averages curve_average(const ContinuousSource& source, const BasisFamily& family) {
    return curve_average(
        source, family.size(), [&](std::span<const double> x, std::span<double> out) { family.evaluate(x, out); },
        family.domain().region);
}

AveragingSource::AveragingSource(WeightedSample sample)
    : AveragingSource(std::vector<Component>{std::move(sample)}, {1.0}) {}

AveragingSource::AveragingSource(ContinuousSource source)
    : AveragingSource(std::vector<Component>{std::move(source)}, {1.0}) {}

AveragingSource::AveragingSource(std::vector<Component> components, std::vector<double> mix)
    : components_(std::move(components)), mix_(std::move(mix)) {
    if (components_.empty()) throw InputError("averaging source needs at least one component");
    if (components_.size() != mix_.size()) throw InputError("one mix weight per source component required");
    double total = 0.0;
    for (double w : mix_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("mix weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("mix weights must sum to 1");
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto [d, kind] = std::visit(
            [](const auto& c) -> std::pair<std::size_t, WeightKind> {
                if constexpr (std::is_same_v<std::decay_t<decltype(c)>, WeightedSample>)
                    return {c.dim(), c.kind()};
                else
                    return {c.dim, c.weight_kind};
            },
            components_[k]);
        if (k == 0) dim_ = d;
        if (d != dim_) throw InputError("all source components must share a dimension");
        if (kind == WeightKind::complex) kind_ = WeightKind::complex;
    }
}

Averages AveragingSource::average(std::size_t m, const VectorIntegrand& g, const std::optional<Region>& filter) const {
    Averages total;
    total.re = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    total.kind = kind_;
    if (kind_ == WeightKind::complex) total.im = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < components_.size(); ++k) {
        if (mix_[k] == 0.0) continue;
        Averages part = std::visit(
            [&](const auto& c) {
                if constexpr (std::is_same_v<std::decay_t<decltype(c)>, WeightedSample>)
                    return discrete_average(c, m, g, filter);
                else
                    return curve_average(c, m, g, filter);
            },
            components_[k]);
        part *= mix_[k];
        total += part;
    }
    return total;
}

Averages AveragingSource::average(const BasisFamily& family) const {
    if (family.dim() != dim_) throw InputError("basis dimension does not match the sample dimension");
    return average(
        family.size(), [&](std::span<const double> x, std::span<double> out) { family.evaluate(x, out); },
        family.domain().region);
}

Averages AveragingSource::average_second_derivatives(const BasisFamily& family, std::size_t dim) const {
    if (family.dim() != dim_) throw InputError("basis dimension does not match the sample dimension");
    if (!family.has_second_derivatives()) throw InputError("basis family does not provide second derivatives");
    return average(
        family.size(),
        [&](std::span<const double> x, std::span<double> out) { family.second_derivatives(x, dim, out); },
        family.domain().region);
}

AveragingSource merge_sources(std::optional<WeightedSample> discrete, std::vector<ContinuousSource> continuous,
                              std::vector<double> mix) {
    if (mix.size() != continuous.size() + 1)
        throw InputError("mix needs one weight for the discrete sample plus one per continuous source");
    std::vector<AveragingSource::Component> components;
    std::vector<double> weights;
    if (discrete) {
        components.emplace_back(std::move(*discrete));
        weights.push_back(mix[0]);
    } else if (mix[0] != 0.0) {
        throw InputError("missing discrete sample has nonzero mix weight");
    }
    for (std::size_t k = 0; k < continuous.size(); ++k) {
        components.emplace_back(std::move(continuous[k]));
        weights.push_back(mix[k + 1]);
    }
    if (components.empty()) throw InputError("no sources to average");
    if (!discrete) {
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (total == 0.0) throw InputError("no sources to average");
    }
    return AveragingSource(std::move(components), std::move(weights));
}

Eigen::VectorXd AffineTransform::apply(std::span<const double> x) const {
    Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return matrix * (v - mean);
}

WhiteningResult whiten(const WeightedSample& sample) {
    const auto n = static_cast<Eigen::Index>(sample.size());
    const auto d = static_cast<Eigen::Index>(sample.dim());
    if (n <= d) throw InputError("whitening needs more points than dimensions");
    Eigen::MatrixXd x = sample.points();
    Eigen::VectorXd mean = x.colwise().mean().transpose();
    Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return solver.eigenvalues()[a] > solver.eigenvalues()[b];
    });

    Eigen::MatrixXd matrix(d, d);
    double det = 1.0;
    for (Eigen::Index r = 0; r < d; ++r) {
        const auto k = order[static_cast<std::size_t>(r)];
        const double lambda = solver.eigenvalues()[k];
        Eigen::VectorXd v = solver.eigenvectors().col(k);
        for (Eigen::Index j = 0; j < d; ++j) {
            if (std::abs(v[j]) > 1e-12) {
                if (v[j] < 0) v = -v;
                break;
            }
        }
        if (!(lambda > 1e-12)) throw SingularCovarianceError(lambda, std::vector<double>(v.data(), v.data() + d));
        matrix.row(r) = v.transpose() / std::sqrt(lambda);
        det /= std::sqrt(lambda);
    }
    AffineTransform transform{mean, matrix, std::abs(det)};
    RowMatrix white = (centered * matrix.transpose());
    WeightedSample out = sample.kind() == WeightKind::complex
                             ? WeightedSample(white, sample.weights(), sample.weights_imag())
                             : WeightedSample(white, sample.weights());
    return {std::move(out), std::move(transform)};
}

WeightColumns weight_columns_from_string(const std::string& name) {
    if (name == "none") return WeightColumns::none;
    if (name == "real") return WeightColumns::real;
    if (name == "complex") return WeightColumns::complex;
    throw InputError("unknown weight mode '" + name + "' (expected none|real|complex)");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, std::size_t line) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
        throw InputError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
    if (!std::isfinite(v)) throw InputError("line " + std::to_string(line) + ": non-finite value");
    return v;
}

}  // namespace

WeightedSample read_csv(std::istream& in, WeightColumns weights) {
    const std::size_t wcols = weights == WeightColumns::none ? 0 : weights == WeightColumns::real ? 1 : 2;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t arity = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            auto comma = view.find(',', start);
            row.push_back(parse_field(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start), lineno));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (arity == 0) {
            arity = row.size();
            if (arity <= wcols)
                throw InputError("line " + std::to_string(lineno) + ": needs at least one coordinate column");
        } else if (row.size() != arity) {
            throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(arity) +
                             " columns, found " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError("empty sample file");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(arity - wcols);
    RowMatrix points(n, d);
    Eigen::VectorXd re = Eigen::VectorXd::Ones(n), im = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) points(i, j) = row[static_cast<std::size_t>(j)];
        if (wcols >= 1) re[i] = row[static_cast<std::size_t>(d)];
        if (wcols == 2) im[i] = row[static_cast<std::size_t>(d + 1)];
    }
    if (weights == WeightColumns::complex) return WeightedSample(std::move(points), std::move(re), std::move(im));
    return WeightedSample(std::move(points), std::move(re));
}

WeightedSample load_csv(const std::filesystem::path& path, WeightColumns weights) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_csv(in, weights);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const WeightedSample& sample, WeightColumns columns, const std::string& comment) {
    if (columns == WeightColumns::real && sample.kind() == WeightKind::complex)
        throw InputError("cannot write complex weights as a single real column");
    if (!comment.empty()) {
        std::istringstream lines(comment);
        std::string l;
        while (std::getline(lines, l)) out << "# " << l << '\n';
    }
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto x = sample.point(i);
        for (std::size_t d = 0; d < x.size(); ++d) out << (d ? "," : "") << format_double(x[d]);
        const auto w = sample.weight(i);
        if (columns != WeightColumns::none) out << ',' << format_double(w.real());
        if (columns == WeightColumns::complex) out << ',' << format_double(w.imag());
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const WeightedSample& sample, WeightColumns columns,
              const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    write_csv(out, sample, columns, comment);
}

}  // namespace momentfit
