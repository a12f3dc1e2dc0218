#include "deepiv/distributions.hpp"

#include <cmath>
#include <limits>

#include "deepiv/errors.hpp"

namespace deepiv {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Peter Acklam's rational approximation to the inverse normal CDF,
// accurate to ~1.15e-9 before refinement.
double normal_quantile_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Regularized lower incomplete gamma P(a, x) by series expansion; valid
// for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction;
// valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw DomainError("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_pdf(double dof, double x) {
    if (x <= 0.0) return 0.0;
    const double half = 0.5 * dof;
    return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * std::log(2.0) -
                    std::lgamma(half));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
    double z = normal_quantile_approx(p);
    // two Newton steps drive the error to ~machine precision
    for (int i = 0; i < 2; ++i) {
        const double err = normal_cdf(z) - p;
        const double pdf = normal_pdf(z);
        if (pdf <= 0.0) break;
        z -= err / pdf;
    }
    return z;
}

double chi2_upper_tail(std::size_t dof, double x) {
    if (dof < 1) throw DomainError("chi2_upper_tail: dof must be >= 1");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * static_cast<double>(dof), 0.5 * x);
}

double chi2_quantile(std::size_t dof, double p) {
    if (dof < 1) throw DomainError("chi2_quantile: dof must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0,1)");
    const double k = static_cast<double>(dof);

    // Wilson-Hilferty starting point
    const double z = normal_quantile(1.0 - p);
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    double x = k * t * t * t;
    if (!(x > 0.0)) x = 0.5;

    // Newton on Q(dof/2, x/2) = p with bisection fallback
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 200; ++i) {
        const double q = chi2_upper_tail(dof, x);
        const double err = q - p;
        if (err > 0.0)
            lo = x;  // quantile lies above x
        else
            hi = x;
        if (std::abs(err) < 1e-13) break;
        const double pdf = chi2_pdf(k, x);
        double next = pdf > 0.0 ? x + err / pdf : x;
        if (!(next > lo) || !(next < hi))
            next = std::isinf(hi) ? 2.0 * x + 1.0 : 0.5 * (lo + hi);
        if (std::abs(next - x) < 1e-14 * (1.0 + x)) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

}  // namespace deepiv
