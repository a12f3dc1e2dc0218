#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "deepiv/dataset.hpp"
#include "deepiv/lasso.hpp"
#include "deepiv/matrix.hpp"
#include "deepiv/mlp.hpp"
#include "deepiv/spline.hpp"

namespace deepiv {

enum class FsFamily { dnn, tensor_spline, additive_spline, linear, oracle };

std::string family_name(FsFamily family);
FsFamily family_from_name(const std::string& name);

// A fitted conditional-mean estimate fhat: R^d -> R^q from one of the
// estimator families, with optional hard truncation
// fhat_s 1{|fhat_s| <= c_n} applied on top.
struct FirstStageModel {
    FsFamily family = FsFamily::linear;
    std::size_t d = 0;
    std::size_t q = 0;

    MlpNetwork net;                      // dnn
    SplineSpec spline;                   // spline families
    Matrix coef;                         // spline: p×q; linear: (1+d)×q, intercept row first
    std::vector<double> intercepts;      // spline families, one per output
    std::function<std::vector<double>(std::span<const double>)> f0;  // oracle
    std::string oracle_name;             // names a built-in f0 when serializable

    bool truncated = false;
    double c_n = std::numeric_limits<double>::infinity();
};

// Cross-validation knobs for the spline-lasso families.
struct LassoCvSpec {
    std::size_t folds = 5;
    std::size_t n_lambda = 50;
    double ratio = 1e-4;
    std::uint64_t seed = 0;
};

// One multi-output network fit by minimizing the mean squared residual
// over all q outputs jointly.
FirstStageModel fit_dnn(const Dataset& data, std::size_t L, std::size_t W,
                        const TrainConfig& cfg);

// Per-output lasso on the shared spline design (tensor or additive per
// spec.interaction), lambda chosen by K-fold cross-validation.
FirstStageModel fit_spline_lasso(const Dataset& data, const SplineSpec& spec,
                                 const LassoCvSpec& cv);

// Per-output least squares of X on (1, Z).
FirstStageModel fit_linear(const Dataset& data);

// Wraps a known conditional mean for benchmarking. `name` may identify a
// built-in ("dgp1", "dgp2") to keep the model serializable.
FirstStageModel oracle_model(std::function<std::vector<double>(std::span<const double>)> f0,
                             std::size_t d, std::size_t q, std::string name = "");

std::vector<double> predict_row(const FirstStageModel& model, std::span<const double> z);

// Row i of the result is the model's prediction at Z row i.
Matrix predict(const FirstStageModel& model, const Matrix& z);

// Same predictor with outputs zeroed outside [-c_n, c_n] (the indicator
// form, not clipping). Truncating twice keeps the tighter level.
FirstStageModel truncate_model(const FirstStageModel& model, double c_n);

}  // namespace deepiv
