#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace deepiv {

// Cubic truncated power basis on [lo, hi]:
//   B(z) = (1, z, z^2, z^3, (z-t_1)^3_+, ..., (z-t_K)^3_+)
// with interior knots t_1 < ... < t_K. Multivariate designs combine the
// univariate bases either as a full tensor product or additively.
struct SplineSpec {
    static constexpr int degree = 3;
    std::vector<double> knots;
    double lo = -3.0;
    double hi = 3.0;
    enum class Interaction { tensor, additive };
    Interaction interaction = Interaction::additive;
    // Guard on the tensor design width (4+K)^d.
    std::size_t tensor_cap = 200000;

    // K equally spaced interior knots t_k = lo + (hi-lo) k/(K+1).
    static SplineSpec equally_spaced(std::size_t n_knots, double lo, double hi,
                                     Interaction interaction);

    std::size_t basis_1d_size() const { return 4 + knots.size(); }

    // Throws DomainError unless lo < hi and knots are strictly increasing
    // inside (lo, hi).
    void check() const;
};

// Univariate basis vector of length 4 + K; z outside [lo, hi] is allowed,
// the truncated power terms remain defined.
std::vector<double> spline_basis_1d(double z, const SplineSpec& spec);

// Full outer product of the d univariate bases, lexicographic with the
// first coordinate's index slowest. Throws BasisTooLarge past tensor_cap.
std::vector<double> tensor_basis(std::span<const double> zrow, const SplineSpec& spec);

// Concatenation of the d univariate bases in coordinate order.
std::vector<double> additive_basis(std::span<const double> zrow, const SplineSpec& spec);

}  // namespace deepiv
