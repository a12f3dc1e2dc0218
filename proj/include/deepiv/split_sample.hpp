#pragma once

#include <cstdint>
#include <vector>

#include "deepiv/dataset.hpp"
#include "deepiv/inference.hpp"
#include "deepiv/mlp.hpp"

namespace deepiv {

// Random partition into group a of size floor(n/2) and group b holding
// the rest.
struct SplitPlan {
    std::vector<std::size_t> indices_a;
    std::vector<std::size_t> indices_b;
    std::uint64_t seed = 0;
};

SplitPlan split(const Dataset& data, std::uint64_t seed);

// Four-stage cross-fitted estimate: per-group estimates from the
// opposite group's truncated first stage, then the moment-weighted
// combination, with pooled-residual covariance.
struct SplitEstimate {
    std::vector<double> beta_a;
    std::vector<double> beta_b;
    std::vector<double> beta_ab;
    Matrix vcov_ab;
    std::vector<double> se;
    double sigma2 = 0.0;
    double c_n = 0.0;
    std::uint64_t split_seed = 0;
    std::size_t n = 0;
    // cross-fitted truncated predictions, kept for diagnostics
    Matrix x_check_a;  // group a rows, predicted by the group-b model
    Matrix x_check_b;
};

// Stage 1: one network per group (same L, W, cfg; streams derived from
// cfg.seed). Stage 2: truncate both at c_n. Stage 3: per-group estimates
// with the opposite group's model. Stage 4: combine.
SplitEstimate fit_split_estimator(const Dataset& data, std::size_t L, std::size_t W,
                                  double c_n, const TrainConfig& cfg);

// Stages 3-4 alone, starting from cross-fitted predictions; exposed so
// the combination algebra is testable without network training.
SplitEstimate assemble_split_estimate(const Matrix& x_check_a, const Matrix& x_a,
                                      std::span<const double> y_a, const Matrix& x_check_b,
                                      const Matrix& x_b, std::span<const double> y_b);

// Pooled-residual covariance
//   V^2 = (sum_a xcheck x^T + sum_b xcheck x^T)^{-1} (sum_a eps^2 + sum_b eps^2)
// with residuals taken at beta_ab.
Matrix split_vcov(const Matrix& x_check_a, const Matrix& x_a, std::span<const double> y_a,
                  const Matrix& x_check_b, const Matrix& x_b, std::span<const double> y_b,
                  std::span<const double> beta_ab);

}  // namespace deepiv
