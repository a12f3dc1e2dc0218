#include "deepiv/first_stage.hpp"

#include <cmath>

#include "deepiv/errors.hpp"

namespace deepiv {

std::string family_name(FsFamily family) {
    switch (family) {
        case FsFamily::dnn: return "dnn";
        case FsFamily::tensor_spline: return "tensor_spline";
        case FsFamily::additive_spline: return "additive_spline";
        case FsFamily::linear: return "linear";
        case FsFamily::oracle: return "oracle";
    }
    throw DomainError("family_name: unknown family");
}

FsFamily family_from_name(const std::string& name) {
    if (name == "dnn") return FsFamily::dnn;
    if (name == "tensor_spline" || name == "pspline") return FsFamily::tensor_spline;
    if (name == "additive_spline" || name == "aspline") return FsFamily::additive_spline;
    if (name == "linear" || name == "lr") return FsFamily::linear;
    if (name == "oracle") return FsFamily::oracle;
    throw DomainError("unknown first-stage family: " + name);
}

FirstStageModel fit_dnn(const Dataset& data, std::size_t L, std::size_t W,
                        const TrainConfig& cfg) {
    data.validate();
    if (L < 1 || W < 1) throw DomainError("fit_dnn: L and W must be >= 1");
    RngStream root(cfg.seed, 0);
    RngStream init_rng = root.substream(0);
    MlpNetwork net = init_network(data.d(), data.q(), L, W, init_rng);
    auto [fitted, report] = train(net, data.x, data.z, cfg);
    (void)report;
    FirstStageModel model;
    model.family = FsFamily::dnn;
    model.d = data.d();
    model.q = data.q();
    model.net = std::move(fitted);
    return model;
}

namespace {

std::vector<double> basis_row(const FirstStageModel& model, std::span<const double> z) {
    return model.spline.interaction == SplineSpec::Interaction::tensor
               ? tensor_basis(z, model.spline)
               : additive_basis(z, model.spline);
}

}  // namespace

FirstStageModel fit_spline_lasso(const Dataset& data, const SplineSpec& spec,
                                 const LassoCvSpec& cv) {
    data.validate();
    spec.check();

    FirstStageModel model;
    model.family = spec.interaction == SplineSpec::Interaction::tensor
                       ? FsFamily::tensor_spline
                       : FsFamily::additive_spline;
    model.d = data.d();
    model.q = data.q();
    model.spline = spec;

    // shared design across outputs
    const std::vector<double> probe = basis_row(model, data.z.row(0));
    Matrix design(data.n(), probe.size());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const std::vector<double> b = basis_row(model, data.z.row(i));
        for (std::size_t j = 0; j < b.size(); ++j) design(i, j) = b[j];
    }

    model.coef = Matrix(design.cols(), data.q());
    model.intercepts.assign(data.q(), 0.0);
    for (std::size_t s = 0; s < data.q(); ++s) {
        RngStream fold_rng = RngStream(cv.seed, 0).substream(100 + s);
        const std::vector<double> xs = data.x.col(s);
        // stationarity tolerance on the problem's own gradient scale;
        // unit-scale designs keep the strict absolute default
        const double tol = 1e-6 * std::max(1.0, lasso_lambda_max(design, xs));
        // truncated-power columns are near-collinear, so descent crawls when
        // cv picks a near-zero lambda; sweeps are cheap in covariance mode
        const std::size_t max_iter = 200000;
        const LassoCvResult res =
            lasso_cv(design, xs, fold_rng, cv.folds, cv.n_lambda, cv.ratio, tol, max_iter);
        if (!res.best.converged)
            throw NonConvergence("fit_spline_lasso: lasso did not converge at selected lambda");
        for (std::size_t j = 0; j < design.cols(); ++j) model.coef(j, s) = res.best.coefficients[j];
        model.intercepts[s] = res.best.intercept;
    }
    return model;
}

FirstStageModel fit_linear(const Dataset& data) {
    data.validate();
    const std::size_t n = data.n(), d = data.d(), q = data.q();

    // least squares of each X column on (1, Z) via the normal equations
    Matrix b(n, d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        b(i, 0) = 1.0;
        for (std::size_t j = 0; j < d; ++j) b(i, j + 1) = data.z(i, j);
    }
    const Matrix bt = transpose(b);
    const Matrix gram = matmul(bt, b);
    const Matrix rhs = matmul(bt, data.x);

    FirstStageModel model;
    model.family = FsFamily::linear;
    model.d = d;
    model.q = q;
    model.coef = solve_linear(gram, rhs);  // (1+d) × q, intercept row first
    return model;
}

FirstStageModel oracle_model(std::function<std::vector<double>(std::span<const double>)> f0,
                             std::size_t d, std::size_t q, std::string name) {
    if (!f0) throw DomainError("oracle_model: missing f0");
    FirstStageModel model;
    model.family = FsFamily::oracle;
    model.d = d;
    model.q = q;
    model.f0 = std::move(f0);
    model.oracle_name = std::move(name);
    return model;
}

std::vector<double> predict_row(const FirstStageModel& model, std::span<const double> z) {
    if (z.size() != model.d) throw ShapeMismatch("predict: input length != d");
    std::vector<double> out;
    switch (model.family) {
        case FsFamily::dnn:
            out = forward(model.net, z);
            break;
        case FsFamily::tensor_spline:
        case FsFamily::additive_spline: {
            const std::vector<double> b = basis_row(model, z);
            if (b.size() != model.coef.rows())
                throw ShapeMismatch("predict: basis/coefficient size mismatch");
            out.assign(model.q, 0.0);
            for (std::size_t s = 0; s < model.q; ++s) {
                double acc = model.intercepts[s];
                for (std::size_t j = 0; j < b.size(); ++j) acc += model.coef(j, s) * b[j];
                out[s] = acc;
            }
            break;
        }
        case FsFamily::linear: {
            out.assign(model.q, 0.0);
            for (std::size_t s = 0; s < model.q; ++s) {
                double acc = model.coef(0, s);
                for (std::size_t j = 0; j < model.d; ++j) acc += model.coef(j + 1, s) * z[j];
                out[s] = acc;
            }
            break;
        }
        case FsFamily::oracle:
            out = model.f0(z);
            if (out.size() != model.q) throw ShapeMismatch("oracle f0 returned wrong length");
            break;
    }
    if (model.truncated)
        for (double& v : out)
            if (std::abs(v) > model.c_n) v = 0.0;
    return out;
}

Matrix predict(const FirstStageModel& model, const Matrix& z) {
    if (z.cols() != model.d) throw ShapeMismatch("predict: input width != d");
    Matrix out(z.rows(), model.q);
    if (model.family == FsFamily::dnn && !model.truncated) {
        return forward_batch(model.net, z);
    }
    if (model.family == FsFamily::dnn) {
        out = forward_batch(model.net, z);
        for (std::size_t i = 0; i < out.rows(); ++i)
            for (std::size_t s = 0; s < out.cols(); ++s)
                if (std::abs(out(i, s)) > model.c_n) out(i, s) = 0.0;
        return out;
    }
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const std::vector<double> row = predict_row(model, z.row(i));
        for (std::size_t s = 0; s < model.q; ++s) out(i, s) = row[s];
    }
    return out;
}

FirstStageModel truncate_model(const FirstStageModel& model, double c_n) {
    if (!(c_n > 0.0)) throw DomainError("truncate_model: c_n must be > 0");
    FirstStageModel out = model;
    out.truncated = true;
    out.c_n = std::min(model.truncated ? model.c_n : std::numeric_limits<double>::infinity(),
                       c_n);
    return out;
}

}  // namespace deepiv
