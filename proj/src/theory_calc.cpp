#include "deepiv/theory_calc.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "deepiv/errors.hpp"

namespace deepiv {

void CompositionalSpec::check() const {
    if (dims.size() != l_star + 2)
        throw DomainError("compositional spec: dims must have length l_star + 2");
    if (active.size() != l_star + 1 || smoothness.size() != l_star + 1)
        throw DomainError("compositional spec: active and smoothness must have length l_star + 1");
    if (dims.back() != 1) throw DomainError("compositional spec: final dimension must be 1");
    for (std::size_t i = 0; i <= l_star; ++i) {
        if (dims[i] < 1) throw DomainError("compositional spec: dimensions must be >= 1");
        if (active[i] < 1 || active[i] > dims[i])
            throw DomainError("compositional spec: need 1 <= t_i <= d_i");
        if (!(smoothness[i] > 0.0))
            throw DomainError("compositional spec: smoothness must be > 0");
    }
}

IntrinsicSummary intrinsic_summary(const CompositionalSpec& spec, std::size_t q) {
    spec.check();
    if (q < 1) throw DomainError("intrinsic_summary: q must be >= 1");
    const std::size_t layers = spec.l_star + 1;

    IntrinsicSummary out;
    out.p_star_per_layer.resize(layers);
    for (std::size_t i = 0; i < layers; ++i) {
        double p = spec.smoothness[i];
        for (std::size_t s = i + 1; s < layers; ++s)
            p *= std::min(spec.smoothness[s], 1.0);
        out.p_star_per_layer[i] = p;
    }

    out.i_star = 0;
    double best = out.p_star_per_layer[0] / static_cast<double>(spec.active[0]);
    for (std::size_t i = 1; i < layers; ++i) {
        const double ratio = out.p_star_per_layer[i] / static_cast<double>(spec.active[i]);
        if (ratio < best) {  // ties keep the smallest index
            best = ratio;
            out.i_star = i;
        }
    }
    out.p_star = out.p_star_per_layer[out.i_star];
    out.t_star = spec.active[out.i_star];

    if (std::isinf(out.p_star)) {
        out.rate_exponent = 0.5;
        out.lw_exponent = 0.0;
    } else {
        const double denom = 2.0 * out.p_star + static_cast<double>(out.t_star);
        out.rate_exponent = out.p_star / denom;
        out.lw_exponent = static_cast<double>(out.t_star) / (2.0 * denom);
    }

    // minimum sizes; layers with p_i = +inf have no defined L_i/W_i and
    // are skipped
    out.min_depth = static_cast<double>(spec.l_star);
    out.min_width = 0.0;
    for (std::size_t i = 0; i < layers; ++i) {
        if (std::isinf(spec.smoothness[i])) {
            out.infinite_smoothness = true;
            continue;
        }
        const double ceil_p = std::ceil(spec.smoothness[i]);
        const double t = static_cast<double>(spec.active[i]);
        const double l_i = 216.0 * ceil_p * ceil_p + 1.0;
        const double w_i = 81.0 * std::pow(ceil_p + t + 2.0, t + 1.0) * std::pow(3.0, t + 1.0);
        out.min_depth += l_i;
        out.min_width = std::max(out.min_width,
                                 static_cast<double>(q) * w_i *
                                     static_cast<double>(spec.dims[i + 1]));
    }
    return out;
}

double composition_smoothness(double p1, double p2) {
    if (!(p1 > 0.0) || !(p2 > 0.0))
        throw DomainError("composition_smoothness: exponents must be > 0");
    return std::min(p1 * p2, std::min(p1, p2));
}

RateResult rate(double p_star, std::size_t t_star) {
    if (!(p_star > 0.0)) throw DomainError("rate: p_star must be > 0");
    if (t_star < 1) throw DomainError("rate: t_star must be >= 1");
    RateResult out;
    out.exponent = std::isinf(p_star)
                       ? 0.5
                       : p_star / (2.0 * p_star + static_cast<double>(t_star));
    std::ostringstream msg;
    msg << "first-stage error decays as n^-" << out.exponent
        << " (intrinsic smoothness " << p_star << ", intrinsic dimension " << t_star << ")";
    out.description = msg.str();
    return out;
}

}  // namespace deepiv
