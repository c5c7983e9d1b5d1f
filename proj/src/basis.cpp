#include "momentfit/basis.hpp"

#include "momentfit/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

namespace momentfit {

std::string to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::legendre: return "legendre";
        case FamilyKind::fourier: return "fourier";
        case FamilyKind::hermite: return "hermite";
        case FamilyKind::product: return "product";
        case FamilyKind::custom: return "custom";
    }
    return "custom";
}

FamilyKind family_kind_from_string(const std::string& name) {
    if (name == "legendre") return FamilyKind::legendre;
    if (name == "fourier") return FamilyKind::fourier;
    if (name == "hermite") return FamilyKind::hermite;
    if (name == "product") return FamilyKind::product;
    if (name == "custom") return FamilyKind::custom;
    throw InputError("unknown basis family '" + name + "'");
}

int BasisId::total_grade() const { return std::accumulate(grade.begin(), grade.end(), 0); }

namespace {

class LegendreImpl final : public detail::FamilyImpl {
public:
    LegendreImpl(int order, double lower, double upper)
        : order_(order), lower_(lower), upper_(upper), scale_(std::sqrt(2.0 / (upper - lower))) {}

    void evaluate(std::span<const double> x, std::span<double> out) const override {
        const double t = to_unit(x[0]);
        double p0 = 1.0, p1 = t;
        out[0] = norm(0) * p0;
        if (order_ >= 1) out[1] = norm(1) * p1;
        for (int k = 1; k < order_; ++k) {
            const double p2 = ((2 * k + 1) * t * p1 - k * p0) / (k + 1);
            p0 = p1;
            p1 = p2;
            out[static_cast<std::size_t>(k + 1)] = norm(k + 1) * p2;
        }
    }

    bool has_second_derivatives() const override { return true; }

    void second_derivatives(std::span<const double> x, std::size_t, std::span<double> out) const override {
        const double t = to_unit(x[0]);
        const double chain = 4.0 / ((upper_ - lower_) * (upper_ - lower_));
        // P_{k+1}' = P_{k-1}' + (2k+1) P_k,  P_{k+1}'' = P_{k-1}'' + (2k+1) P_k'
        double p_prev = 1.0, p = t;
        double d_prev = 0.0, d = 1.0;
        double s_prev = 0.0, s = 0.0;
        out[0] = 0.0;
        if (order_ >= 1) out[1] = 0.0;
        for (int k = 1; k < order_; ++k) {
            const double p_next = ((2 * k + 1) * t * p - k * p_prev) / (k + 1);
            const double d_next = d_prev + (2 * k + 1) * p;
            const double s_next = s_prev + (2 * k + 1) * d;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            s_prev = s;
            s = s_next;
            out[static_cast<std::size_t>(k + 1)] = chain * norm(k + 1) * s_next;
        }
    }

private:
    double to_unit(double x) const { return (2.0 * x - lower_ - upper_) / (upper_ - lower_); }
    double norm(int k) const { return scale_ * std::sqrt(k + 0.5); }

    int order_;
    double lower_, upper_, scale_;
};

class FourierImpl final : public detail::FamilyImpl {
public:
    FourierImpl(int freq, double lower, double upper)
        : freq_(freq), center_(0.5 * (lower + upper)), half_(0.5 * (upper - lower)) {}

    void evaluate(std::span<const double> x, std::span<double> out) const override {
        const double t = (x[0] - center_) / half_;
        out[0] = 1.0 / std::sqrt(2.0 * half_);
        const double s = 1.0 / std::sqrt(half_);
        for (int j = 1; j <= freq_; ++j) {
            const double arg = j * std::numbers::pi * t;
            out[static_cast<std::size_t>(2 * j - 1)] = s * std::sin(arg);
            out[static_cast<std::size_t>(2 * j)] = s * std::cos(arg);
        }
    }

    bool has_second_derivatives() const override { return true; }

    void second_derivatives(std::span<const double> x, std::size_t, std::span<double> out) const override {
        evaluate(x, out);
        out[0] = 0.0;
        for (int j = 1; j <= freq_; ++j) {
            const double w = j * std::numbers::pi / half_;
            out[static_cast<std::size_t>(2 * j - 1)] *= -w * w;
            out[static_cast<std::size_t>(2 * j)] *= -w * w;
        }
    }

private:
    int freq_;
    double center_, half_;
};

class HermiteImpl final : public detail::FamilyImpl {
public:
    explicit HermiteImpl(int order) : order_(order) {}

    void evaluate(std::span<const double> x, std::span<double> out) const override {
        const double v = x[0];
        double prev = 0.0;
        double cur = std::exp(-0.5 * v * v) / std::pow(std::numbers::pi, 0.25);
        out[0] = cur;
        for (int k = 0; k < order_; ++k) {
            const double next = std::sqrt(2.0 / (k + 1)) * v * cur - std::sqrt(double(k) / (k + 1)) * prev;
            prev = cur;
            cur = next;
            out[static_cast<std::size_t>(k + 1)] = cur;
        }
    }

    bool has_second_derivatives() const override { return true; }

    // psi_k'' = (x^2 - 2k - 1) psi_k
    void second_derivatives(std::span<const double> x, std::size_t, std::span<double> out) const override {
        evaluate(x, out);
        const double v = x[0];
        for (int k = 0; k <= order_; ++k) out[static_cast<std::size_t>(k)] *= v * v - (2 * k + 1);
    }

private:
    int order_;
};

class ProductImpl final : public detail::FamilyImpl {
public:
    ProductImpl(std::vector<BasisFamily> factors, std::vector<std::vector<std::size_t>> indices)
        : factors_(std::move(factors)), indices_(std::move(indices)) {}

    void evaluate(std::span<const double> x, std::span<double> out) const override {
        auto values = factor_values(x);
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            double p = 1.0;
            for (std::size_t d = 0; d < factors_.size(); ++d) p *= values[d][indices_[k][d]];
            out[k] = p;
        }
    }

    bool has_second_derivatives() const override {
        return std::all_of(factors_.begin(), factors_.end(),
                           [](const BasisFamily& f) { return f.has_second_derivatives(); });
    }

    void second_derivatives(std::span<const double> x, std::size_t dim, std::span<double> out) const override {
        auto values = factor_values(x);
        const auto& f = factors_[dim];
        std::vector<double> second(f.size());
        f.second_derivatives(x.subspan(dim, 1), 0, second);
        values[dim] = std::move(second);
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            double p = 1.0;
            for (std::size_t d = 0; d < factors_.size(); ++d) p *= values[d][indices_[k][d]];
            out[k] = p;
        }
    }

private:
    std::vector<std::vector<double>> factor_values(std::span<const double> x) const {
        std::vector<std::vector<double>> values(factors_.size());
        for (std::size_t d = 0; d < factors_.size(); ++d) {
            values[d].resize(factors_[d].size());
            factors_[d].evaluate(x.subspan(d, 1), values[d]);
        }
        return values;
    }

    std::vector<BasisFamily> factors_;
    std::vector<std::vector<std::size_t>> indices_;
};

// f_i = sum_j coeffs(i, j) g_j
class CustomImpl final : public detail::FamilyImpl {
public:
    CustomImpl(std::vector<RawFunction> raw, Eigen::MatrixXd coeffs)
        : raw_(std::move(raw)), coeffs_(std::move(coeffs)) {}

    void evaluate(std::span<const double> x, std::span<double> out) const override {
        Eigen::VectorXd g(static_cast<Eigen::Index>(raw_.size()));
        for (std::size_t j = 0; j < raw_.size(); ++j) g[static_cast<Eigen::Index>(j)] = raw_[j].value(x);
        Eigen::Map<Eigen::VectorXd>(out.data(), coeffs_.rows()) = coeffs_ * g;
    }

    bool has_second_derivatives() const override {
        return std::all_of(raw_.begin(), raw_.end(),
                           [](const RawFunction& r) { return static_cast<bool>(r.second_derivative); });
    }

    void second_derivatives(std::span<const double> x, std::size_t dim, std::span<double> out) const override {
        Eigen::VectorXd g(static_cast<Eigen::Index>(raw_.size()));
        for (std::size_t j = 0; j < raw_.size(); ++j)
            g[static_cast<Eigen::Index>(j)] = raw_[j].second_derivative(x, dim);
        Eigen::Map<Eigen::VectorXd>(out.data(), coeffs_.rows()) = coeffs_ * g;
    }

private:
    std::vector<RawFunction> raw_;
    Eigen::MatrixXd coeffs_;
};

void require_order(int order, const char* what) {
    if (order < 0) throw InputError(std::string(what) + " must be nonnegative");
}

const Region& require_1d(const Region& range) {
    if (range.dim() != 1) throw InputError("expected a one-dimensional range");
    return range;
}

Eigen::VectorXd quadrature_integrals(const BasisFamily& family) {
    return refine_until_stable(family.domain(), QuadratureOptions{}, [&](const TensorRule& rule) {
        Eigen::VectorXd s = family.evaluate_rows(rule).transpose() * rule.weights;
        return s;
    });
}

}  // namespace

BasisFunction::BasisFunction(std::shared_ptr<const BasisFamily> family, std::size_t index)
    : family_(std::move(family)), index_(index) {}

const BasisId& BasisFunction::id() const { return family_->member(index_).id; }
double BasisFunction::integral() const { return family_->member(index_).integral; }
bool BasisFunction::boundary_vanishing() const { return family_->member(index_).boundary_vanishing; }
double BasisFunction::operator()(std::span<const double> x) const { return family_->evaluate(index_, x); }
double BasisFunction::second_derivative(std::span<const double> x, std::size_t dim) const {
    return family_->second_derivatives(x, dim)[static_cast<Eigen::Index>(index_)];
}

BasisFamily::BasisFamily(std::shared_ptr<const detail::FamilyImpl> impl, std::vector<Member> members,
                         Domain domain, bool orthonormal, std::optional<Eigen::MatrixXd> gram,
                         FamilyDescriptor descriptor, bool serializable)
    : impl_(std::move(impl)),
      members_(std::move(members)),
      domain_(std::move(domain)),
      orthonormal_(orthonormal),
      gram_(std::move(gram)),
      descriptor_(std::move(descriptor)),
      serializable_(serializable) {}

Eigen::VectorXd BasisFamily::integrals() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) out[static_cast<Eigen::Index>(i)] = members_[i].integral;
    return out;
}

BasisFunction BasisFamily::function(std::size_t i) const {
    if (i >= size()) throw InputError("basis function index out of range");
    return BasisFunction(std::make_shared<const BasisFamily>(*this), i);
}

void BasisFamily::evaluate(std::span<const double> x, std::span<double> out) const {
    if (x.size() != dim()) throw InputError("point dimension does not match basis dimension");
    impl_->evaluate(x, out);
}

Eigen::VectorXd BasisFamily::evaluate(std::span<const double> x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    evaluate(x, std::span<double>(out.data(), size()));
    return out;
}

double BasisFamily::evaluate(std::size_t i, std::span<const double> x) const {
    return evaluate(x)[static_cast<Eigen::Index>(i)];
}

void BasisFamily::second_derivatives(std::span<const double> x, std::size_t dim, std::span<double> out) const {
    if (!impl_->has_second_derivatives()) throw InputError("basis family does not provide second derivatives");
    if (x.size() != this->dim() || dim >= this->dim()) throw InputError("bad dimension for second derivative");
    impl_->second_derivatives(x, dim, out);
}

Eigen::VectorXd BasisFamily::second_derivatives(std::span<const double> x, std::size_t dim) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    second_derivatives(x, dim, std::span<double>(out.data(), size()));
    return out;
}

Eigen::MatrixXd BasisFamily::evaluate_rows(const TensorRule& rule) const {
    RowMatrix values(static_cast<Eigen::Index>(rule.size()), static_cast<Eigen::Index>(size()));
    for (std::size_t n = 0; n < rule.size(); ++n)
        impl_->evaluate(rule.node(n), std::span<double>(values.row(static_cast<Eigen::Index>(n)).data(), size()));
    return values;
}

BasisFamily legendre_family(int max_order, const Region& range) {
    require_order(max_order, "Legendre order");
    const auto& r = require_1d(range);
    std::vector<BasisFamily::Member> members;
    for (int k = 0; k <= max_order; ++k)
        members.push_back({BasisId{FamilyKind::legendre, {k}, {k}}, k == 0 ? std::sqrt(r.volume()) : 0.0, false});
    FamilyDescriptor desc{FamilyKind::legendre, max_order, 1, r, {}, {}, false};
    return BasisFamily(std::make_shared<LegendreImpl>(max_order, r.lower(0), r.upper(0)), std::move(members),
                       Domain::bounded(r), true, std::nullopt, std::move(desc), true);
}

BasisFamily fourier_family(int max_freq, const Region& range) {
    require_order(max_freq, "Fourier frequency");
    const auto& r = require_1d(range);
    std::vector<BasisFamily::Member> members;
    members.push_back({BasisId{FamilyKind::fourier, {0}, {0}}, std::sqrt(r.volume()), false});
    for (int j = 1; j <= max_freq; ++j) {
        members.push_back({BasisId{FamilyKind::fourier, {2 * j - 1}, {j}}, 0.0, true});
        members.push_back({BasisId{FamilyKind::fourier, {2 * j}, {j}}, 0.0, false});
    }
    FamilyDescriptor desc{FamilyKind::fourier, max_freq, 1, r, {}, {}, false};
    return BasisFamily(std::make_shared<FourierImpl>(max_freq, r.lower(0), r.upper(0)), std::move(members),
                       Domain::bounded(r), true, std::nullopt, std::move(desc), true);
}

BasisFamily hermite_function_family(int max_order) {
    require_order(max_order, "Hermite order");
    std::vector<BasisFamily::Member> members;
    // F_0 = sqrt(2) pi^{1/4},  F_{k+2} = F_k sqrt((k+1)/(k+2)),  odd F_k = 0
    double even_integral = std::sqrt(2.0) * std::pow(std::numbers::pi, 0.25);
    for (int k = 0; k <= max_order; ++k) {
        double integral = 0.0;
        if (k % 2 == 0) {
            integral = even_integral;
            even_integral *= std::sqrt((k + 1.0) / (k + 2.0));
        }
        members.push_back({BasisId{FamilyKind::hermite, {k}, {k}}, integral, false});
    }
    FamilyDescriptor desc{FamilyKind::hermite, max_order, 1, std::nullopt, {}, {}, false};
    return BasisFamily(std::make_shared<HermiteImpl>(max_order), std::move(members), Domain::unbounded(1), true,
                       std::nullopt, std::move(desc), true);
}

BasisFamily tensor_product(const std::vector<BasisFamily>& families) {
    if (families.empty()) throw InputError("tensor product needs at least one family");
    const bool bounded = families.front().domain().is_bounded();
    std::optional<Region> region;
    FamilyDescriptor desc{FamilyKind::product, 0, families.size(), std::nullopt, {}, {}, false};
    bool orthonormal = true;
    bool serializable = true;
    for (const auto& f : families) {
        if (f.dim() != 1) throw InputError("tensor product factors must be one-dimensional");
        if (f.domain().is_bounded() != bounded)
            throw InputError("tensor product cannot mix bounded and unbounded factors");
        if (bounded) region = region ? region->product(*f.domain().region) : *f.domain().region;
        orthonormal = orthonormal && f.orthonormal();
        serializable = serializable && f.serializable();
        desc.order = std::max(desc.order, f.descriptor().order);
        desc.factors.push_back(f.descriptor());
    }
    desc.region = region;

    const std::size_t dims = families.size();
    std::vector<std::vector<std::size_t>> tuples{{}};
    for (const auto& f : families) {
        std::vector<std::vector<std::size_t>> next;
        for (const auto& t : tuples) {
            for (std::size_t i = 0; i < f.size(); ++i) {
                auto u = t;
                u.push_back(i);
                next.push_back(std::move(u));
            }
        }
        tuples = std::move(next);
    }
    auto grade_of = [&](const std::vector<std::size_t>& t) {
        std::vector<int> g(dims);
        for (std::size_t d = 0; d < dims; ++d) g[d] = families[d].member(t[d]).id.grade[0];
        return g;
    };
    std::stable_sort(tuples.begin(), tuples.end(), [&](const auto& a, const auto& b) {
        auto ga = grade_of(a), gb = grade_of(b);
        const int sa = std::accumulate(ga.begin(), ga.end(), 0), sb = std::accumulate(gb.begin(), gb.end(), 0);
        if (sa != sb) return sa < sb;
        if (ga != gb) return ga > gb;
        return a < b;
    });

    std::vector<BasisFamily::Member> members;
    members.reserve(tuples.size());
    for (const auto& t : tuples) {
        BasisFamily::Member m;
        m.id.family = FamilyKind::product;
        m.integral = 1.0;
        m.boundary_vanishing = true;
        for (std::size_t d = 0; d < dims; ++d) {
            const auto& fm = families[d].member(t[d]);
            m.id.index.push_back(static_cast<int>(t[d]));
            m.id.grade.push_back(fm.id.grade[0]);
            m.integral *= fm.integral;
            m.boundary_vanishing = m.boundary_vanishing && fm.boundary_vanishing;
        }
        members.push_back(std::move(m));
    }
    Domain domain = bounded ? Domain::bounded(*region) : Domain::unbounded(dims);
    auto impl = std::make_shared<ProductImpl>(families, std::move(tuples));
    BasisFamily family(impl, members, domain, orthonormal, std::nullopt, desc, serializable);
    if (!orthonormal) {
        return BasisFamily(impl, std::move(members), std::move(domain), false, gram_matrix(family), std::move(desc),
                           serializable);
    }
    return family;
}

RawFunction parse_monomial_term(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw InputError("empty monomial term");
    double coef = 1.0;
    int power = 0;
    auto xpos = s.find('x');
    std::string head = xpos == std::string::npos ? s : s.substr(0, xpos);
    if (!head.empty() && head.back() == '*') head.pop_back();
    if (head == "+" || head.empty()) {
        coef = 1.0;
    } else if (head == "-") {
        coef = -1.0;
    } else {
        const char* first = head.data() + (head.front() == '+' ? 1 : 0);
        auto [ptr, ec] = std::from_chars(first, head.data() + head.size(), coef);
        if (ec != std::errc{} || ptr != head.data() + head.size()) throw InputError("bad monomial term '" + text + "'");
    }
    if (xpos != std::string::npos) {
        power = 1;
        std::string tail = s.substr(xpos + 1);
        if (!tail.empty()) {
            if (tail.front() != '^') throw InputError("bad monomial term '" + text + "'");
            auto [ptr, ec] = std::from_chars(tail.data() + 1, tail.data() + tail.size(), power);
            if (ec != std::errc{} || ptr != tail.data() + tail.size() || power < 0)
                throw InputError("bad monomial term '" + text + "'");
        }
    }
    RawFunction f;
    f.label = s;
    f.value = [coef, power](std::span<const double> x) { return coef * std::pow(x[0], power); };
    f.second_derivative = [coef, power](std::span<const double> x, std::size_t) {
        return power < 2 ? 0.0 : coef * power * (power - 1) * std::pow(x[0], power - 2);
    };
    return f;
}

BasisFamily raw_family(std::vector<RawFunction> raw, const Region& region, FamilyDescriptor descriptor) {
    if (raw.empty()) throw InputError("custom family needs at least one function");
    const auto m = raw.size();
    auto impl = std::make_shared<CustomImpl>(std::move(raw), Eigen::MatrixXd::Identity(Eigen::Index(m), Eigen::Index(m)));
    std::vector<BasisFamily::Member> members;
    for (std::size_t i = 0; i < m; ++i)
        members.push_back({BasisId{FamilyKind::custom, {int(i)}, {int(i)}}, 0.0, false});
    const bool serializable = !descriptor.terms.empty();
    descriptor.kind = FamilyKind::custom;
    descriptor.dim = region.dim();
    descriptor.region = region;
    descriptor.orthonormalize = false;
    BasisFamily provisional(impl, members, Domain::bounded(region), false, std::nullopt, descriptor, serializable);
    Eigen::VectorXd integrals = quadrature_integrals(provisional);
    for (std::size_t i = 0; i < m; ++i) members[i].integral = integrals[Eigen::Index(i)];
    return BasisFamily(impl, std::move(members), Domain::bounded(region), false, gram_matrix(provisional),
                       std::move(descriptor), serializable);
}

BasisFamily gram_schmidt(std::vector<RawFunction> raw, const Region& region, std::size_t quad_points,
                         FamilyDescriptor descriptor) {
    if (raw.empty()) throw InputError("custom family needs at least one function");
    const auto m = static_cast<Eigen::Index>(raw.size());
    auto rule = domain_rule(Domain::bounded(region), quad_points);
    const auto n_nodes = static_cast<Eigen::Index>(rule.size());

    Eigen::MatrixXd values(n_nodes, m);
    for (Eigen::Index k = 0; k < n_nodes; ++k)
        for (Eigen::Index j = 0; j < m; ++j) values(k, j) = raw[std::size_t(j)].value(rule.node(std::size_t(k)));

    const Eigen::VectorXd& w = rule.weights;
    auto inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a.array() * b.array() * w.array()).sum(); };

    Eigen::MatrixXd q(n_nodes, m);              // orthonormal functions at nodes
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(m, m);  // rows: f_i in terms of raw g_j
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::VectorXd v = values.col(k);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
        c[k] = 1.0;
        const double initial = std::sqrt(inner(v, v));
        if (!(initial > 0.0)) throw DependenceError(std::size_t(k));
        // Two passes of modified Gram-Schmidt.
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < k; ++j) {
                const double proj = inner(v, q.col(j));
                v -= proj * q.col(j);
                c -= proj * coeffs.row(j).transpose();
            }
        }
        const double residual = std::sqrt(inner(v, v));
        if (residual < 1e-10 * initial) throw DependenceError(std::size_t(k));
        q.col(k) = v / residual;
        coeffs.row(k) = c.transpose() / residual;
    }

    auto impl = std::make_shared<CustomImpl>(std::move(raw), coeffs);
    std::vector<BasisFamily::Member> members;
    Eigen::VectorXd integrals = q.transpose() * w;
    for (Eigen::Index i = 0; i < m; ++i)
        members.push_back({BasisId{FamilyKind::custom, {int(i)}, {int(i)}}, integrals[i], false});
    const bool serializable = !descriptor.terms.empty();
    descriptor.kind = FamilyKind::custom;
    descriptor.dim = region.dim();
    descriptor.region = region;
    descriptor.orthonormalize = true;
    return BasisFamily(impl, std::move(members), Domain::bounded(region), true, std::nullopt, std::move(descriptor),
                       serializable);
}

BasisFamily make_family(const FamilyDescriptor& descriptor) {
    const auto& d = descriptor;
    auto per_dim_regions = [&]() {
        if (!d.region) throw InputError(to_string(d.kind) + " family requires a region");
        std::vector<Region> out;
        for (std::size_t k = 0; k < d.region->dim(); ++k)
            out.push_back(Region::interval(d.region->lower(k), d.region->upper(k)));
        return out;
    };
    auto with_descriptor = [&](const BasisFamily& f) {
        return BasisFamily(f.impl(), f.members(), f.domain(), f.orthonormal(), f.gram(), d, f.serializable());
    };
    switch (d.kind) {
        case FamilyKind::legendre:
        case FamilyKind::fourier: {
            auto regions = per_dim_regions();
            std::vector<BasisFamily> factors;
            for (const auto& r : regions)
                factors.push_back(d.kind == FamilyKind::legendre ? legendre_family(d.order, r) : fourier_family(d.order, r));
            if (factors.size() == 1) return factors.front();
            auto normalized = d;
            normalized.dim = regions.size();
            normalized.factors.clear();
            auto product = tensor_product(factors);
            return BasisFamily(product.impl(), product.members(), product.domain(), true, std::nullopt, normalized,
                               true);
        }
        case FamilyKind::hermite: {
            if (d.region) throw InputError("hermite family is defined on all of R^D and takes no region");
            if (d.dim == 0) throw InputError("hermite family needs dim >= 1");
            std::vector<BasisFamily> factors(d.dim, hermite_function_family(d.order));
            if (d.dim == 1) return factors.front();
            return with_descriptor(tensor_product(factors));
        }
        case FamilyKind::product: {
            std::vector<BasisFamily> factors;
            for (const auto& f : d.factors) factors.push_back(make_family(f));
            return tensor_product(factors);
        }
        case FamilyKind::custom: {
            if (d.terms.empty()) throw InputError("custom family descriptor needs monomial terms");
            if (!d.region || d.region->dim() != 1) throw InputError("custom monomial family needs a 1D region");
            std::vector<RawFunction> raw;
            for (const auto& t : d.terms) raw.push_back(parse_monomial_term(t));
            auto desc = d;
            desc.order = static_cast<int>(d.terms.size()) - 1;
            return d.orthonormalize ? gram_schmidt(std::move(raw), *d.region, 64, desc)
                                    : raw_family(std::move(raw), *d.region, desc);
        }
    }
    throw InputError("unknown family kind");
}

Eigen::MatrixXd gram_matrix(const BasisFamily& family, const QuadratureOptions& opts) {
    Eigen::MatrixXd g = refine_until_stable(family.domain(), opts, [&](const TensorRule& rule) {
        Eigen::MatrixXd v = family.evaluate_rows(rule);
        Eigen::MatrixXd weighted = rule.weights.asDiagonal() * v;
        Eigen::MatrixXd out = v.transpose() * weighted;
        return out;
    });
    return 0.5 * (g + g.transpose());
}

OrthonormalityReport orthonormality(const Eigen::MatrixXd& gram) {
    OrthonormalityReport r;
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        for (Eigen::Index j = 0; j < gram.cols(); ++j) {
            if (i == j)
                r.max_diagonal_deviation = std::max(r.max_diagonal_deviation, std::abs(gram(i, j) - 1.0));
            else
                r.max_off_diagonal = std::max(r.max_off_diagonal, std::abs(gram(i, j)));
        }
    }
    return r;
}

}  // namespace momentfit
