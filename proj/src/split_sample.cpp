#include "deepiv/split_sample.hpp"

#include <cmath>

#include "deepiv/errors.hpp"
#include "deepiv/first_stage.hpp"

namespace deepiv {

namespace {

// sum_i a_i b_i^T (raw sums, not divided by n)
Matrix sum_outer(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("sum_outer: row counts differ");
    Matrix m(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t r = 0; r < a.cols(); ++r)
            for (std::size_t c = 0; c < b.cols(); ++c) m(r, c) += a(i, r) * b(i, c);
    return m;
}

std::vector<double> sum_weighted(const Matrix& a, std::span<const double> y) {
    std::vector<double> v(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t r = 0; r < a.cols(); ++r) v[r] += a(i, r) * y[i];
    return v;
}

double sum_sq_residuals(const Matrix& x, std::span<const double> y,
                        std::span<const double> beta) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double fit = 0.0;
        for (std::size_t s = 0; s < x.cols(); ++s) fit += beta[s] * x(i, s);
        const double eps = y[i] - fit;
        ssr += eps * eps;
    }
    return ssr;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.y = take(data.y, idx);
    out.x = take_rows(data.x, idx);
    out.z = take_rows(data.z, idx);
    if (data.r) out.r = take_rows(*data.r, idx);
    return out;
}

}  // namespace

SplitPlan split(const Dataset& data, std::uint64_t seed) {
    const std::size_t n = data.n();
    if (n < 4) throw DomainError("split: need n >= 4");
    RngStream rng(seed, 0);
    const std::vector<std::size_t> perm = rng.permutation(n);
    SplitPlan plan;
    plan.seed = seed;
    const std::size_t n_a = n / 2;
    plan.indices_a.assign(perm.begin(), perm.begin() + n_a);
    plan.indices_b.assign(perm.begin() + n_a, perm.end());
    return plan;
}

Matrix split_vcov(const Matrix& x_check_a, const Matrix& x_a, std::span<const double> y_a,
                  const Matrix& x_check_b, const Matrix& x_b, std::span<const double> y_b,
                  std::span<const double> beta_ab) {
    Matrix m = sum_outer(x_check_a, x_a);
    const Matrix mb = sum_outer(x_check_b, x_b);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += mb(r, c);

    const double ssr = sum_sq_residuals(x_a, y_a, beta_ab) +
                       sum_sq_residuals(x_b, y_b, beta_ab);

    Matrix v = inverse(m);
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) *= ssr;
    Matrix sym(v.rows(), v.cols());
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = 0; c < v.cols(); ++c) sym(r, c) = 0.5 * (v(r, c) + v(c, r));
    return sym;
}

SplitEstimate assemble_split_estimate(const Matrix& x_check_a, const Matrix& x_a,
                                      std::span<const double> y_a, const Matrix& x_check_b,
                                      const Matrix& x_b, std::span<const double> y_b) {
    SplitEstimate est;
    est.beta_a = estimate_beta(x_check_a, x_a, y_a);
    est.beta_b = estimate_beta(x_check_b, x_b, y_b);

    // Stage 4: (M_a + M_b)^{-1} (sum_a xcheck y + sum_b xcheck y)
    Matrix m = sum_outer(x_check_a, x_a);
    const Matrix mb = sum_outer(x_check_b, x_b);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += mb(r, c);
    std::vector<double> rhs = sum_weighted(x_check_a, y_a);
    const std::vector<double> rhs_b = sum_weighted(x_check_b, y_b);
    for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] += rhs_b[r];
    est.beta_ab = solve_linear(m, rhs);

    est.vcov_ab = split_vcov(x_check_a, x_a, y_a, x_check_b, x_b, y_b, est.beta_ab);
    est.n = x_a.rows() + x_b.rows();
    const double ssr = sum_sq_residuals(x_a, y_a, est.beta_ab) +
                       sum_sq_residuals(x_b, y_b, est.beta_ab);
    est.sigma2 = ssr / static_cast<double>(est.n);
    est.se.resize(est.beta_ab.size());
    for (std::size_t j = 0; j < est.se.size(); ++j)
        est.se[j] = std::sqrt(est.vcov_ab(j, j) / static_cast<double>(est.n));
    est.x_check_a = x_check_a;
    est.x_check_b = x_check_b;
    return est;
}

SplitEstimate fit_split_estimator(const Dataset& data, std::size_t L, std::size_t W,
                                  double c_n, const TrainConfig& cfg) {
    data.validate();
    if (!(c_n > 0.0)) throw DomainError("fit_split_estimator: c_n must be > 0");
    const SplitPlan plan = split(data, cfg.seed);

    const Dataset group_a = subset(data, plan.indices_a);
    const Dataset group_b = subset(data, plan.indices_b);

    // Stage 1: one network per group on independent derived streams
    TrainConfig cfg_a = cfg;
    cfg_a.seed = derive_seed(cfg.seed, 1);
    TrainConfig cfg_b = cfg;
    cfg_b.seed = derive_seed(cfg.seed, 2);
    const FirstStageModel model_a = fit_dnn(group_a, L, W, cfg_a);
    const FirstStageModel model_b = fit_dnn(group_b, L, W, cfg_b);

    // Stage 2: truncate; Stage 3 inputs: each group predicted by the
    // other group's model
    const FirstStageModel trunc_a = truncate_model(model_a, c_n);
    const FirstStageModel trunc_b = truncate_model(model_b, c_n);
    const Matrix x_check_a = predict(trunc_b, group_a.z);
    const Matrix x_check_b = predict(trunc_a, group_b.z);

    SplitEstimate est = assemble_split_estimate(x_check_a, group_a.x, group_a.y,
                                                x_check_b, group_b.x, group_b.y);
    est.c_n = c_n;
    est.split_seed = cfg.seed;
    return est;
}

}  // namespace deepiv
