#include "deepiv/spline.hpp"

#include <cmath>

#include "deepiv/errors.hpp"

namespace deepiv {

SplineSpec SplineSpec::equally_spaced(std::size_t n_knots, double lo, double hi,
                                      Interaction interaction) {
    SplineSpec spec;
    spec.lo = lo;
    spec.hi = hi;
    spec.interaction = interaction;
    spec.knots.reserve(n_knots);
    for (std::size_t k = 1; k <= n_knots; ++k)
        spec.knots.push_back(lo + (hi - lo) * static_cast<double>(k) /
                                      static_cast<double>(n_knots + 1));
    return spec;
}

void SplineSpec::check() const {
    if (!(lo < hi)) throw DomainError("spline: domain must satisfy lo < hi");
    for (std::size_t k = 0; k < knots.size(); ++k) {
        if (!(knots[k] > lo && knots[k] < hi))
            throw DomainError("spline: knot outside (lo, hi)");
        if (k > 0 && !(knots[k] > knots[k - 1]))
            throw DomainError("spline: knots must be strictly increasing");
    }
}

std::vector<double> spline_basis_1d(double z, const SplineSpec& spec) {
    std::vector<double> b;
    b.reserve(spec.basis_1d_size());
    b.push_back(1.0);
    b.push_back(z);
    b.push_back(z * z);
    b.push_back(z * z * z);
    for (double t : spec.knots) {
        const double h = std::max(z - t, 0.0);
        b.push_back(h * h * h);
    }
    return b;
}

std::vector<double> tensor_basis(std::span<const double> zrow, const SplineSpec& spec) {
    if (zrow.empty()) throw DomainError("tensor_basis: empty input");
    const std::size_t m = spec.basis_1d_size();
    std::size_t total = 1;
    for (std::size_t k = 0; k < zrow.size(); ++k) {
        if (total > spec.tensor_cap / m)
            throw BasisTooLarge("tensor_basis: design width exceeds cap");
        total *= m;
    }

    // grow the product coordinate by coordinate; earlier coordinates end
    // up with the slowest-varying index
    std::vector<double> out{1.0};
    std::vector<double> next;
    for (double zk : zrow) {
        const std::vector<double> uni = spline_basis_1d(zk, spec);
        next.clear();
        next.reserve(out.size() * m);
        for (double prefix : out)
            for (double u : uni) next.push_back(prefix * u);
        out.swap(next);
    }
    return out;
}

std::vector<double> additive_basis(std::span<const double> zrow, const SplineSpec& spec) {
    std::vector<double> out;
    out.reserve(zrow.size() * spec.basis_1d_size());
    for (double zk : zrow) {
        const std::vector<double> uni = spline_basis_1d(zk, spec);
        out.insert(out.end(), uni.begin(), uni.end());
    }
    return out;
}

}  // namespace deepiv
