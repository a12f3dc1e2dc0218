#pragma once

#include <span>
#include <vector>

#include "deepiv/dataset.hpp"
#include "deepiv/first_stage.hpp"
#include "deepiv/matrix.hpp"

namespace deepiv {

// Second-stage coefficient estimate with its covariance: vcov estimates
// the asymptotic sigma^2_eps E^{-1}(DD^T), so se_j = sqrt(vcov_jj / n).
struct BetaEstimate {
    std::vector<double> beta;
    Matrix vcov;
    std::vector<double> se;
    std::size_t n = 0;
    double residual_variance = 0.0;
};

struct ConfidenceInterval {
    double level = 0.0;  // 1 - alpha
    std::vector<double> lower;
    std::vector<double> upper;
};

// beta_hat = ((1/n) sum xhat_i x_i^T)^{-1} (1/n) sum xhat_i y_i.
// A singular moment matrix signals weak or invalid instruments.
std::vector<double> estimate_beta(const Matrix& x_hat, const Matrix& x,
                                  std::span<const double> y);

// V^2 = (sum xhat_i x_i^T)^{-1} sum eps_i^2 with eps_i = y_i - beta^T x_i,
// symmetrized; second element is sigma2 = (1/n) sum eps_i^2.
std::pair<Matrix, double> estimate_vcov(const Matrix& x_hat, const Matrix& x,
                                        std::span<const double> y,
                                        std::span<const double> beta);

// estimate_beta + estimate_vcov + standard errors in one pass.
BetaEstimate make_estimate(const Matrix& x_hat, const Matrix& x, std::span<const double> y);

// Per coordinate beta_j ± z*_{alpha/2} sqrt(vcov_jj) / sqrt(n).
ConfidenceInterval confidence_interval(const BetaEstimate& est, double alpha);

// Extension with exogenous regressors R: the first stage regresses X on
// the augmented instruments (R, Z); the second stage uses
// D_hat_i = (fhat(Ztilde_i)^T, R_i^T)^T against D_i = (X_i^T, R_i^T)^T.
// The estimate stacks (beta, alpha) with the X coefficients first.
struct ExogenousConfig {
    FsFamily family = FsFamily::dnn;
    std::size_t L = 3;
    std::size_t W = 10;
    TrainConfig train;
    SplineSpec spline;
    LassoCvSpec cv;
};
BetaEstimate estimate_with_exogenous(const Dataset& data, const ExogenousConfig& cfg);

}  // namespace deepiv
