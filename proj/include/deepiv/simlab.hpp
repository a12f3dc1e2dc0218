#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deepiv/dataset.hpp"
#include "deepiv/first_stage.hpp"
#include "deepiv/inference.hpp"
#include "deepiv/rng.hpp"

namespace deepiv {

enum class DgpKind { dgp1, dgp2, custom };

std::string dgp_name(DgpKind kind);
DgpKind dgp_from_name(const std::string& name);

// Scalar conditional mean of X given Z.
using ScalarF0 = std::function<double(std::span<const double>)>;

// dgp1: f0 = z1*sin(z2) + z3*z4 (weak instruments).
// dgp2: f0 = 3*z1 + 4*z2 - 2*z3 + z4 (strong instruments).
// Both: Z ~ U[z_low, z_high]^d iid, eps ~ N(0,1),
//       X = f0(Z) + eps, Y = beta0*X + noise_scale*eps  (same eps => endogenous).
// d > 4 appends redundant instruments that f0 ignores.
struct DgpSpec {
    DgpKind kind = DgpKind::dgp2;
    std::size_t n = 2000;
    double beta0 = 3.0;
    double noise_scale = 20.0;
    std::size_t d = 4;
    double z_low = -3.0;
    double z_high = 3.0;
    ScalarF0 custom_f0;                     // required when kind == custom
    bool custom_independent_noise = false;  // custom only: Y-noise independent of eps

    void check() const;
};

struct DgpDraw {
    Dataset data;
    std::vector<double> epsilon;  // the shared structural error
    double beta0 = 0.0;
    ScalarF0 f0;
};

// The conditional mean the spec encodes, without drawing data.
ScalarF0 dgp_f0(const DgpSpec& spec);

// Per row: d uniforms, then one normal (then one more normal for
// custom_independent_noise). Fixed draw order keeps streams replayable.
DgpDraw gen_dgp(const DgpSpec& spec, RngStream& rng);

// Plain OLS of Y on X, no intercept (both are mean zero under the DGPs);
// inconsistent under endogeneity, kept as the naive benchmark.
BetaEstimate ols_estimator(const Dataset& data);

// Second stage with the true conditional mean as first stage.
BetaEstimate oracle_estimator(const Dataset& data, const ScalarF0& f0);

// sqrt of the mean squared deviation over all points and output coords.
double first_stage_rmse(const Matrix& pred, const Matrix& truth);
double first_stage_rmse(const FirstStageModel& model, const ScalarF0& f0,
                        const Matrix& eval_z);

enum class McEstimator { dnn, pspline, aspline, lr, ols, oracle };

std::string estimator_name(McEstimator est);
McEstimator estimator_from_name(const std::string& name);

struct NetSize {
    std::size_t depth = 3;
    std::size_t width = 10;
};

struct McConfig {
    DgpSpec dgp;  // dgp.n ignored; sample_sizes drives n
    std::vector<std::size_t> sample_sizes{100, 200, 500, 1000, 2000};
    std::size_t replications = 200;
    std::vector<McEstimator> estimators{McEstimator::dnn, McEstimator::lr,
                                        McEstimator::ols, McEstimator::oracle};
    std::vector<NetSize> grid{{3, 10}};  // dnn sizes; sweep W/L here for stability studies
    double ci_level = 0.95;
    std::uint64_t master_seed = 0;
    std::size_t eval_points = 10000;  // fresh-sample first-stage RMSE
    TrainConfig train;                // seed ignored; per-cell seeds are derived
    std::size_t aspline_knots = 20;
    std::size_t pspline_knots = 5;  // desk-scale default; see the tensor caveat in the readme
    LassoCvSpec cv;                 // seed ignored likewise

    void check() const;
};

// One (estimator, n) cell; depth/width are 0 except for dnn cells.
// Aggregates run over successful replications; failures counts the rest.
struct McCell {
    McEstimator estimator = McEstimator::ols;
    std::size_t depth = 0;
    std::size_t width = 0;
    std::size_t n = 0;
    std::size_t rep_count = 0;
    std::size_t failures = 0;
    double beta_mean = std::numeric_limits<double>::quiet_NaN();
    double beta_rmse = std::numeric_limits<double>::quiet_NaN();
    double fs_rmse = std::numeric_limits<double>::quiet_NaN();
    double fs_rmse_sd = std::numeric_limits<double>::quiet_NaN();
    double coverage = std::numeric_limits<double>::quiet_NaN();
    double coverage_se = std::numeric_limits<double>::quiet_NaN();
};

struct McResult {
    std::string dgp;
    double ci_level = 0.95;
    std::vector<McCell> cells;  // sorted: estimator name, depth, width, n
};

// Deterministic given master_seed regardless of thread count: replication
// r draws from stream r, estimator fits get seeds derived per cell, and
// every estimator in a replication sees the same dataset.
McResult run_monte_carlo(const McConfig& cfg);

// Tidy CSV, one row per cell:
// dgp,estimator,n,L,W,rep_count,beta_mean,beta_rmse,fs_rmse,coverage,coverage_se,failures
std::string mc_result_to_csv(const McResult& result);

// Plot-data tables, columns {x,series,value}. Numbering by family and DGP:
// figs 1-4 first-stage RMSE, 5-8 beta RMSE, 9-12 coverage; within a family
// {by-estimator dgp1, by-estimator dgp2, by-(W,L) dgp1, by-(W,L) dgp2}.
// A run emits the six tables for its own DGP (custom runs use the dgp1 slots).
struct FigureTable {
    std::string name;  // "fig1" .. "fig12"
    std::string csv;
};

std::vector<FigureTable> figure_tables(const McResult& result);

// Minimal polyline chart of one figure table; pure function of the CSV text.
std::string svg_line_chart(const std::string& figure_csv, const std::string& title);

}  // namespace deepiv
