#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace momentfit {

// Axis-aligned box, the product of per-dimension ranges.
class Region {
public:
    // Throws DegenerateRegionError unless lower[d] < upper[d] for all d.
    Region(std::vector<double> lower, std::vector<double> upper);

    static Region interval(double lower, double upper) { return Region({lower}, {upper}); }
    static Region cube(std::size_t dim, double lower, double upper);

    std::size_t dim() const noexcept { return lower_.size(); }
    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    double lower(std::size_t d) const { return lower_[d]; }
    double upper(std::size_t d) const { return upper_[d]; }
    double width(std::size_t d) const { return upper_[d] - lower_[d]; }
    double volume() const noexcept;

    // Closed box membership.
    bool contains(std::span<const double> x) const noexcept;

    // Product region self × other (dimensions appended).
    Region product(const Region& other) const;

    bool operator==(const Region&) const = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

// Integration domain of a basis family: a finite box or all of R^D.
struct Domain {
    std::size_t dim = 1;
    std::optional<Region> region;  // nullopt = unbounded

    static Domain bounded(Region r) {
        auto d = r.dim();
        return Domain{d, std::move(r)};
    }
    static Domain unbounded(std::size_t dim) { return Domain{dim, std::nullopt}; }

    bool is_bounded() const noexcept { return region.has_value(); }
    bool contains(std::span<const double> x) const noexcept {
        return !region || region->contains(x);
    }
    bool operator==(const Domain&) const = default;
};

}  // namespace momentfit
