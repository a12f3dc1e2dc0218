#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deepiv/matrix.hpp"
#include "deepiv/rng.hpp"

namespace deepiv {

// Solution of  min_{b0, beta}  (1/(2n)) ||y - b0 - X beta||^2 + lambda ||beta||_1
// with the intercept unpenalized. Coefficients are reported on the
// original column scale.
struct LassoFit {
    std::vector<double> coefficients;
    double intercept = 0.0;
    bool fit_intercept = true;
    double lambda = 0.0;
    std::size_t iterations = 0;     // coordinate sweeps
    double kkt_violation = 0.0;     // max stationarity residual at exit
    bool converged = true;

    double predict_row(std::span<const double> x) const;
};

// Smallest lambda for which the all-zero coefficient vector is optimal:
// max_j |(1/n) x_j^T (y - ybar)|.
double lasso_lambda_max(const Matrix& design, std::span<const double> y);

// Log-spaced grid from lambda_max down to ratio * lambda_max, descending.
std::vector<double> lasso_lambda_grid(double lambda_max, std::size_t count = 50,
                                      double ratio = 1e-4);

// Cyclic coordinate descent with soft thresholding. Columns are
// standardized internally for conditioning and the solution mapped back,
// so the minimized objective is the original-scale one above. A fit that
// fails to reach kkt_violation <= tol within max_iter sweeps is returned
// with converged = false rather than thrown.
LassoFit lasso_coordinate_descent(const Matrix& design, std::span<const double> y,
                                  double lambda, double tol = 1e-7,
                                  std::size_t max_iter = 20000);

// Warm-started fits along a descending lambda grid.
std::vector<LassoFit> lasso_path(const Matrix& design, std::span<const double> y,
                                 const std::vector<double>& lambdas, double tol = 1e-7,
                                 std::size_t max_iter = 20000);

struct LassoCvResult {
    std::vector<double> lambdas;   // descending
    std::vector<double> cv_mse;    // mean held-out squared error per lambda
    std::size_t best_index = 0;    // ties go to the larger lambda
    LassoFit best;                 // full-data fit at lambdas[best_index]
};

// K-fold cross-validation over a log grid from lambda_max down to
// ratio * lambda_max. Fold assignment is drawn from rng.
LassoCvResult lasso_cv(const Matrix& design, std::span<const double> y, RngStream& rng,
                       std::size_t folds = 5, std::size_t n_lambda = 50,
                       double ratio = 1e-4, double tol = 1e-7,
                       std::size_t max_iter = 20000);

}  // namespace deepiv
