#include "deepiv/inference.hpp"

#include <cmath>

#include "deepiv/distributions.hpp"
#include "deepiv/errors.hpp"

namespace deepiv {

namespace {

// (1/n) sum a_i b_i^T for row blocks a (n×q), b (n×q).
Matrix mean_outer(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("moment matrix: row counts differ");
    if (a.rows() == 0) throw DomainError("moment matrix: empty sample");
    Matrix m(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t r = 0; r < a.cols(); ++r)
            for (std::size_t c = 0; c < b.cols(); ++c) m(r, c) += a(i, r) * b(i, c);
    const double inv_n = 1.0 / static_cast<double>(a.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) *= inv_n;
    return m;
}

std::vector<double> mean_weighted(const Matrix& a, std::span<const double> y) {
    if (a.rows() != y.size()) throw ShapeMismatch("moment vector: row counts differ");
    std::vector<double> v(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t r = 0; r < a.cols(); ++r) v[r] += a(i, r) * y[i];
    for (double& x : v) x /= static_cast<double>(a.rows());
    return v;
}

}  // namespace

std::vector<double> estimate_beta(const Matrix& x_hat, const Matrix& x,
                                  std::span<const double> y) {
    if (x_hat.cols() != x.cols()) throw ShapeMismatch("estimate_beta: column counts differ");
    if (x.rows() != y.size()) throw ShapeMismatch("estimate_beta: y length mismatch");
    const Matrix m = mean_outer(x_hat, x);
    const std::vector<double> rhs = mean_weighted(x_hat, y);
    return solve_linear(m, rhs);
}

std::pair<Matrix, double> estimate_vcov(const Matrix& x_hat, const Matrix& x,
                                        std::span<const double> y,
                                        std::span<const double> beta) {
    if (beta.size() != x.cols()) throw ShapeMismatch("estimate_vcov: beta length mismatch");
    const std::size_t n = x.rows();
    if (n != y.size()) throw ShapeMismatch("estimate_vcov: y length mismatch");

    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t s = 0; s < x.cols(); ++s) fit += beta[s] * x(i, s);
        const double eps = y[i] - fit;
        ssr += eps * eps;
    }
    const double sigma2 = ssr / static_cast<double>(n);

    // (sum xhat x^T)^{-1} * sum eps^2 == (mean outer)^{-1} * sigma2
    Matrix v = inverse(mean_outer(x_hat, x));
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) *= sigma2;
    Matrix sym(v.rows(), v.cols());
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = 0; c < v.cols(); ++c) sym(r, c) = 0.5 * (v(r, c) + v(c, r));
    return {sym, sigma2};
}

BetaEstimate make_estimate(const Matrix& x_hat, const Matrix& x, std::span<const double> y) {
    BetaEstimate est;
    est.beta = estimate_beta(x_hat, x, y);
    auto [vcov, sigma2] = estimate_vcov(x_hat, x, y, est.beta);
    est.vcov = std::move(vcov);
    est.residual_variance = sigma2;
    est.n = x.rows();
    est.se.resize(est.beta.size());
    for (std::size_t j = 0; j < est.se.size(); ++j)
        est.se[j] = std::sqrt(est.vcov(j, j) / static_cast<double>(est.n));
    return est;
}

ConfidenceInterval confidence_interval(const BetaEstimate& est, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("confidence_interval: alpha must lie in (0,1)");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    ConfidenceInterval ci;
    ci.level = 1.0 - alpha;
    ci.lower.resize(est.beta.size());
    ci.upper.resize(est.beta.size());
    for (std::size_t j = 0; j < est.beta.size(); ++j) {
        const double half = z * std::sqrt(est.vcov(j, j)) / std::sqrt(static_cast<double>(est.n));
        ci.lower[j] = est.beta[j] - half;
        ci.upper[j] = est.beta[j] + half;
    }
    return ci;
}

BetaEstimate estimate_with_exogenous(const Dataset& data, const ExogenousConfig& cfg) {
    data.validate();
    if (!data.r) throw MissingExogenous("estimate_with_exogenous: dataset has no r block");
    const Matrix& r = *data.r;

    // first stage on the augmented instruments (R, Z)
    Dataset aug;
    aug.y = data.y;
    aug.x = data.x;
    aug.z = hcat(r, data.z);

    FirstStageModel model;
    switch (cfg.family) {
        case FsFamily::dnn:
            model = fit_dnn(aug, cfg.L, cfg.W, cfg.train);
            break;
        case FsFamily::tensor_spline:
        case FsFamily::additive_spline: {
            SplineSpec spec = cfg.spline;
            spec.interaction = cfg.family == FsFamily::tensor_spline
                                   ? SplineSpec::Interaction::tensor
                                   : SplineSpec::Interaction::additive;
            model = fit_spline_lasso(aug, spec, cfg.cv);
            break;
        }
        case FsFamily::linear:
            model = fit_linear(aug);
            break;
        case FsFamily::oracle:
            throw DomainError("estimate_with_exogenous: oracle family not supported here");
    }

    const Matrix fhat = predict(model, aug.z);
    const Matrix d_hat = hcat(fhat, r);    // (fhat^T, R^T)^T
    const Matrix d_obs = hcat(data.x, r);  // (X^T, R^T)^T
    return make_estimate(d_hat, d_obs, data.y);
}

}  // namespace deepiv
