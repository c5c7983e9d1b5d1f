#include "momentfit/region.hpp"

#include "momentfit/error.hpp"

#include <cmath>

namespace momentfit {

Region::Region(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty() || lower_.size() != upper_.size())
        throw InputError("region bounds must be nonempty and of equal dimension");
    for (std::size_t d = 0; d < lower_.size(); ++d) {
        if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d]) || !(lower_[d] < upper_[d]))
            throw DegenerateRegionError();
    }
}

Region Region::cube(std::size_t dim, double lower, double upper) {
    return Region(std::vector<double>(dim, lower), std::vector<double>(dim, upper));
}

double Region::volume() const noexcept {
    double v = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) v *= width(d);
    return v;
}

bool Region::contains(std::span<const double> x) const noexcept {
    if (x.size() != dim()) return false;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (!(x[d] >= lower_[d] && x[d] <= upper_[d])) return false;
    }
    return true;
}

Region Region::product(const Region& other) const {
    auto lo = lower_;
    auto hi = upper_;
    lo.insert(lo.end(), other.lower_.begin(), other.lower_.end());
    hi.insert(hi.end(), other.upper_.begin(), other.upper_.end());
    return Region(std::move(lo), std::move(hi));
}

}  // namespace momentfit
