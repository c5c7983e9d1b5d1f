#pragma once

#include "momentfit/quadrature.hpp"
#include "momentfit/region.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace momentfit {

enum class FamilyKind { legendre, fourier, hermite, product, custom };

std::string to_string(FamilyKind kind);
FamilyKind family_kind_from_string(const std::string& name);

// Identifies one member of a family. For a 1D family `index` and `grade` have
// one entry; product families carry one entry per dimension. `grade` is the
// polynomial degree or trigonometric frequency of each factor.
struct BasisId {
    FamilyKind family = FamilyKind::custom;
    std::vector<int> index;
    std::vector<int> grade;

    int total_grade() const;
    bool operator==(const BasisId&) const = default;
};

// Enough to rebuild a family, used by model files. Custom families are
// rebuildable only when they were made from monomial `terms`.
struct FamilyDescriptor {
    FamilyKind kind = FamilyKind::legendre;
    int order = 0;
    std::size_t dim = 1;
    std::optional<Region> region;
    std::vector<FamilyDescriptor> factors;  // product
    std::vector<std::string> terms;         // custom
    bool orthonormalize = false;            // custom

    bool operator==(const FamilyDescriptor&) const = default;
};

// A user-supplied function for custom families.
struct RawFunction {
    std::function<double(std::span<const double>)> value;
    // d^2/dx_d^2; may be empty.
    std::function<double(std::span<const double>, std::size_t)> second_derivative;
    std::string label;
};

// c * x^p in one variable. Accepts "1", "x", "-2x", "0.5*x^3", "x^2".
RawFunction parse_monomial_term(const std::string& text);

namespace detail {
class FamilyImpl {
public:
    virtual ~FamilyImpl() = default;
    virtual void evaluate(std::span<const double> x, std::span<double> out) const = 0;
    virtual bool has_second_derivatives() const = 0;
    virtual void second_derivatives(std::span<const double> x, std::size_t dim, std::span<double> out) const = 0;
};
}  // namespace detail

class BasisFamily;

// Handle to the i-th member of a family.
class BasisFunction {
public:
    BasisFunction(std::shared_ptr<const BasisFamily> family, std::size_t index);

    const BasisId& id() const;
    double integral() const;
    bool boundary_vanishing() const;
    double operator()(std::span<const double> x) const;
    double second_derivative(std::span<const double> x, std::size_t dim) const;

private:
    std::shared_ptr<const BasisFamily> family_;
    std::size_t index_;
};

// Ordered, immutable set of real basis functions over a domain. Copies share state.
class BasisFamily {
public:
    struct Member {
        BasisId id;
        double integral = 0.0;  // F_i over the domain
        bool boundary_vanishing = false;
    };

    BasisFamily(std::shared_ptr<const detail::FamilyImpl> impl, std::vector<Member> members, Domain domain,
                bool orthonormal, std::optional<Eigen::MatrixXd> gram, FamilyDescriptor descriptor,
                bool serializable);

    std::size_t size() const noexcept { return members_.size(); }
    std::size_t dim() const noexcept { return domain_.dim; }
    const Domain& domain() const noexcept { return domain_; }
    bool orthonormal() const noexcept { return orthonormal_; }
    bool has_second_derivatives() const { return impl_->has_second_derivatives(); }
    const std::optional<Eigen::MatrixXd>& gram() const noexcept { return gram_; }
    const FamilyDescriptor& descriptor() const noexcept { return descriptor_; }
    bool serializable() const noexcept { return serializable_; }

    const Member& member(std::size_t i) const { return members_.at(i); }
    const std::vector<Member>& members() const noexcept { return members_; }
    Eigen::VectorXd integrals() const;
    BasisFunction function(std::size_t i) const;

    // All members at x (no domain check).
    void evaluate(std::span<const double> x, std::span<double> out) const;
    Eigen::VectorXd evaluate(std::span<const double> x) const;
    double evaluate(std::size_t i, std::span<const double> x) const;

    // d^2 f_i / dx_dim^2 for all members. Throws InputError when unavailable.
    void second_derivatives(std::span<const double> x, std::size_t dim, std::span<double> out) const;
    Eigen::VectorXd second_derivatives(std::span<const double> x, std::size_t dim) const;

    // Values at every node of a rule: N x m.
    Eigen::MatrixXd evaluate_rows(const TensorRule& rule) const;

    const std::shared_ptr<const detail::FamilyImpl>& impl() const noexcept { return impl_; }

private:
    std::shared_ptr<const detail::FamilyImpl> impl_;
    std::vector<Member> members_;
    Domain domain_;
    bool orthonormal_;
    std::optional<Eigen::MatrixXd> gram_;
    FamilyDescriptor descriptor_;
    bool serializable_;
};

// Orthonormal Legendre polynomials of degree 0..max_order on `range`.
BasisFamily legendre_family(int max_order, const Region& range);

// Constant, then sin/cos pairs for frequencies 1..max_freq, on `range`.
BasisFamily fourier_family(int max_freq, const Region& range);

// Hermite functions H_i(x) e^{-x^2/2} / sqrt(2^i i! sqrt(pi)), physicists' H_i, on R.
BasisFamily hermite_function_family(int max_order);

// All products of members of 1D families, graded by total degree/frequency.
// Ties put higher grades in earlier dimensions first (x before y), then follow
// the factors' own ordering.
BasisFamily tensor_product(const std::vector<BasisFamily>& families);

// Same family in every dimension of a box (or `dims` copies of Hermite).
BasisFamily make_family(const FamilyDescriptor& descriptor);

// Non-orthonormal family of raw functions; its Gram matrix is computed on construction.
BasisFamily raw_family(std::vector<RawFunction> raw, const Region& region,
                       FamilyDescriptor descriptor = {FamilyKind::custom, 0, 1, std::nullopt, {}, {}, false});

// Orthonormalizes `raw` under the tensor Gauss-Legendre rule with
// `quad_points` nodes per dimension. Throws DependenceError naming the first
// function whose residual norm falls below 1e-10 of its initial norm.
BasisFamily gram_schmidt(std::vector<RawFunction> raw, const Region& region, std::size_t quad_points = 64,
                         FamilyDescriptor descriptor = {FamilyKind::custom});

// Pairwise inner products <f_i, f_j> with unit weight, by node-doubling quadrature.
Eigen::MatrixXd gram_matrix(const BasisFamily& family, const QuadratureOptions& opts = {});

struct OrthonormalityReport {
    double max_off_diagonal = 0.0;
    double max_diagonal_deviation = 0.0;
    bool passes(double tolerance = 1e-8) const {
        return max_off_diagonal < tolerance && max_diagonal_deviation < tolerance;
    }
};

OrthonormalityReport orthonormality(const Eigen::MatrixXd& gram);

}  // namespace momentfit
