#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace deepiv {

// Compositional-structure parameters of the target function: L_star
// composition levels with layer i mapping d_i inputs to d_{i+1} outputs,
// each coordinate depending on at most t_i variables with Hölder
// smoothness p_i (+infinity allowed). d has length L_star + 2 with
// d_{L_star+1} == 1.
struct CompositionalSpec {
    std::size_t l_star = 0;
    std::vector<std::size_t> dims;
    std::vector<std::size_t> active;
    std::vector<double> smoothness;

    void check() const;
};

// Derived intrinsic quantities: effective per-layer smoothness
// p_i^* = p_i prod_{s>i} (p_s ∧ 1), the bottleneck layer
// i^* = argmin p_i^*/t_i (ties to the smallest index), the convergence
// rate exponent p^*/(2p^*+t^*), and the minimum network sizes
//   L_i = 216 ceil(p_i)^2 + 1,
//   W_i = 81 (ceil(p_i)+t_i+2)^(t_i+1) 3^(t_i+1),
//   L_min = L_star + sum_i L_i,   W_min = max_i q W_i d_{i+1}.
// Layers with infinite smoothness contribute exactly 1 to the (p ∧ 1)
// products but have no defined L_i/W_i; they are skipped in the minimum
// sizes and infinite_smoothness is set.
struct IntrinsicSummary {
    std::vector<double> p_star_per_layer;
    std::size_t i_star = 0;
    double p_star = 0.0;
    std::size_t t_star = 0;
    double rate_exponent = 0.0;  // p*/(2p*+t*)
    double lw_exponent = 0.0;    // t*/(2(2p*+t*)), growth of L·W with n
    double min_depth = 0.0;
    double min_width = 0.0;
    bool infinite_smoothness = false;
};

IntrinsicSummary intrinsic_summary(const CompositionalSpec& spec, std::size_t q);

// Hölder exponent of a composition g1 ∘ g2: min{p1 p2, p1, p2}.
double composition_smoothness(double p1, double p2);

struct RateResult {
    double exponent = 0.0;
    std::string description;
};

// Convergence-rate exponent p*/(2p*+t*) of the first-stage error.
RateResult rate(double p_star, std::size_t t_star);

}  // namespace deepiv
