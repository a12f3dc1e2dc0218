#pragma once

#include <cstddef>

namespace deepiv {

// Standard normal CDF.
double normal_cdf(double z);

// Inverse standard normal CDF: returns z with Phi(z) = p. Rational initial
// approximation refined by Newton steps; absolute error well below 1e-8.
// Throws DomainError outside (0, 1).
double normal_quantile(double p);

// Upper tail P(chi2_dof > x), the regularized upper incomplete gamma
// Q(dof/2, x/2).
double chi2_upper_tail(std::size_t dof, double x);

// Upper-p quantile of the chi-square distribution with dof degrees of
// freedom: returns x with P(chi2_dof > x) = p, absolute error <= 1e-6.
double chi2_quantile(std::size_t dof, double p);

}  // namespace deepiv
