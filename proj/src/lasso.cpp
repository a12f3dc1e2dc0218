#include "deepiv/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "deepiv/errors.hpp"

namespace deepiv {

namespace {

double soft_threshold(double rho, double gamma) {
    if (rho > gamma) return rho - gamma;
    if (rho < -gamma) return rho + gamma;
    return 0.0;
}

// Standardized copy of the design with the response centered. Constant
// columns are dropped from the iteration (their coefficient stays 0 and
// the intercept absorbs them). Narrow problems precompute the Gram
// matrix so coordinate updates cost O(p) instead of O(n); wide problems
// keep a running residual.
struct Workspace {
    std::size_t n = 0, p = 0;
    std::vector<double> mu, sd;
    std::vector<std::size_t> live;    // indices of non-constant columns
    std::vector<std::size_t> pos_of;  // column index -> position in live
    std::vector<double> xs;           // column-major; column j starts at xs[j*n]
    double ybar = 0.0;
    std::vector<double> yc;
    bool cov_mode = false;
    std::vector<double> gram;  // live x live, (1/n) Xc^T Xc
    std::vector<double> gy;    // (1/n) Xc^T yc per live column

    Workspace(const Matrix& design, std::span<const double> y) {
        n = design.rows();
        p = design.cols();
        if (n == 0 || y.size() != n)
            throw ShapeMismatch("lasso: design and response sizes disagree");
        mu.assign(p, 0.0);
        sd.assign(p, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) mu[j] += design(i, j);
        for (double& m : mu) m /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                const double c = design(i, j) - mu[j];
                sd[j] += c * c;
            }
        for (std::size_t j = 0; j < p; ++j) sd[j] = std::sqrt(sd[j] / static_cast<double>(n));

        pos_of.assign(p, static_cast<std::size_t>(-1));
        xs.assign(p * n, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
            if (sd[j] > 1e-12 * (1.0 + std::abs(mu[j]))) {
                pos_of[j] = live.size();
                live.push_back(j);
                double* col = xs.data() + j * n;
                for (std::size_t i = 0; i < n; ++i) col[i] = (design(i, j) - mu[j]) / sd[j];
            }
        }

        ybar = 0.0;
        for (double v : y) ybar += v;
        ybar /= static_cast<double>(n);
        yc.resize(n);
        for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - ybar;

        const std::size_t m = live.size();
        cov_mode = m > 0 && m <= 400 && n >= m;
        if (cov_mode) {
            const double inv_n = 1.0 / static_cast<double>(n);
            gram.assign(m * m, 0.0);
            gy.assign(m, 0.0);
            for (std::size_t a = 0; a < m; ++a) {
                const double* ca = xs.data() + live[a] * n;
                for (std::size_t c = a; c < m; ++c) {
                    const double* cc = xs.data() + live[c] * n;
                    double dot = 0.0;
                    for (std::size_t i = 0; i < n; ++i) dot += ca[i] * cc[i];
                    gram[a * m + c] = gram[c * m + a] = dot * inv_n;
                }
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += ca[i] * yc[i];
                gy[a] = dot * inv_n;
            }
        }
    }

    // Coordinate descent from the warm start in b with a working set:
    // sweep the coordinates last seen active until their updates settle,
    // then verify stationarity over all columns, recruiting any violators
    // into the working set. Since every violating coordinate is recruited,
    // viol > tol guarantees the inner loop has work to do. Returns sweeps
    // used and the exit KKT violation.
    std::pair<std::size_t, double> solve(double lambda, std::vector<double>& b, double tol,
                                         std::size_t max_iter) const {
        const std::size_t m = live.size();
        const double inv_n = 1.0 / static_cast<double>(n);
        const double settle = 0.25 * tol;  // update size on the sd-1 scale

        // state: residual r (wide mode) or gb = (1/n) Xc^T Xc b (gram mode)
        std::vector<double> r, gb;
        if (cov_mode) {
            gb.assign(m, 0.0);
            for (std::size_t a = 0; a < m; ++a) {
                const double ba = b[live[a]];
                if (ba == 0.0) continue;
                const double* row = gram.data() + a * m;
                for (std::size_t c = 0; c < m; ++c) gb[c] += row[c] * ba;
            }
        } else {
            r = yc;
            for (std::size_t j : live) {
                if (b[j] == 0.0) continue;
                const double* col = xs.data() + j * n;
                for (std::size_t i = 0; i < n; ++i) r[i] -= col[i] * b[j];
            }
        }

        // (1/n) Xc_j^T (current residual), on the standardized scale
        auto grad_at = [&](std::size_t j) {
            if (cov_mode) {
                const std::size_t a = pos_of[j];
                return gy[a] - gb[a];
            }
            const double* col = xs.data() + j * n;
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += col[i] * r[i];
            return dot * inv_n;
        };

        auto update = [&](std::size_t j) {
            const double rho = b[j] + grad_at(j);  // unit curvature: columns have sd 1
            const double next = soft_threshold(rho, lambda / sd[j]);
            const double delta = next - b[j];
            if (delta != 0.0) {
                if (cov_mode) {
                    const double* row = gram.data() + pos_of[j] * m;
                    for (std::size_t c = 0; c < m; ++c) gb[c] += row[c] * delta;
                } else {
                    const double* col = xs.data() + j * n;
                    for (std::size_t i = 0; i < n; ++i) r[i] -= col[i] * delta;
                }
                b[j] = next;
            }
            return std::abs(delta);
        };

        auto kkt = [&](std::vector<std::size_t>* working) {
            if (working) working->clear();
            double worst = 0.0;
            for (std::size_t j : live) {
                const double grad = sd[j] * grad_at(j);  // original-scale gradient
                double viol;
                if (b[j] != 0.0) {
                    viol = std::abs(grad - lambda * (b[j] > 0.0 ? 1.0 : -1.0));
                    if (working) working->push_back(j);
                } else {
                    viol = std::max(0.0, std::abs(grad) - lambda);
                    if (working && viol > 0.0) working->push_back(j);
                }
                worst = std::max(worst, viol);
            }
            return worst;
        };

        std::size_t sweeps = 0;
        std::vector<std::size_t> working;
        double viol = kkt(&working);
        while (viol > tol && sweeps < max_iter) {
            while (sweeps < max_iter) {
                double max_delta = 0.0;
                for (std::size_t j : working) max_delta = std::max(max_delta, update(j));
                ++sweeps;
                if (max_delta <= settle) break;
            }
            viol = kkt(&working);
        }
        return {sweeps, viol};
    }

    LassoFit finish(double lambda, const std::vector<double>& b, std::size_t sweeps,
                    double viol, double tol) const {
        LassoFit fit;
        fit.lambda = lambda;
        fit.iterations = sweeps;
        fit.kkt_violation = viol;
        fit.converged = viol <= tol;
        fit.coefficients.assign(p, 0.0);
        for (std::size_t j : live) fit.coefficients[j] = b[j] / sd[j];
        fit.intercept = ybar;
        for (std::size_t j = 0; j < p; ++j) fit.intercept -= fit.coefficients[j] * mu[j];
        return fit;
    }
};

}  // namespace

double LassoFit::predict_row(std::span<const double> x) const {
    if (x.size() != coefficients.size())
        throw ShapeMismatch("lasso predict: wrong input length");
    double out = intercept;
    for (std::size_t j = 0; j < x.size(); ++j) out += coefficients[j] * x[j];
    return out;
}

double lasso_lambda_max(const Matrix& design, std::span<const double> y) {
    const std::size_t n = design.rows();
    if (n == 0 || y.size() != n)
        throw ShapeMismatch("lasso_lambda_max: design and response sizes disagree");
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);
    double worst = 0.0;
    for (std::size_t j = 0; j < design.cols(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += design(i, j) * (y[i] - ybar);
        worst = std::max(worst, std::abs(dot) / static_cast<double>(n));
    }
    return worst;
}

std::vector<double> lasso_lambda_grid(double lambda_max, std::size_t count, double ratio) {
    if (count == 0) throw DomainError("lasso_lambda_grid: count must be >= 1");
    std::vector<double> grid(count);
    if (count == 1 || lambda_max == 0.0) {
        std::fill(grid.begin(), grid.end(), lambda_max);
        return grid;
    }
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = lambda_max * std::pow(ratio, static_cast<double>(i) /
                                                   static_cast<double>(count - 1));
    return grid;
}

LassoFit lasso_coordinate_descent(const Matrix& design, std::span<const double> y,
                                  double lambda, double tol, std::size_t max_iter) {
    if (lambda < 0.0) throw DomainError("lasso: lambda must be >= 0");
    const Workspace ws(design, y);
    std::vector<double> b(ws.p, 0.0);
    const auto [sweeps, viol] = ws.solve(lambda, b, tol, max_iter);
    return ws.finish(lambda, b, sweeps, viol, tol);
}

std::vector<LassoFit> lasso_path(const Matrix& design, std::span<const double> y,
                                 const std::vector<double>& lambdas, double tol,
                                 std::size_t max_iter) {
    const Workspace ws(design, y);
    std::vector<LassoFit> fits;
    fits.reserve(lambdas.size());
    std::vector<double> b(ws.p, 0.0);  // warm start carried down the grid
    for (double lambda : lambdas) {
        if (lambda < 0.0) throw DomainError("lasso_path: lambda must be >= 0");
        const auto [sweeps, viol] = ws.solve(lambda, b, tol, max_iter);
        fits.push_back(ws.finish(lambda, b, sweeps, viol, tol));
    }
    return fits;
}

LassoCvResult lasso_cv(const Matrix& design, std::span<const double> y, RngStream& rng,
                       std::size_t folds, std::size_t n_lambda, double ratio, double tol,
                       std::size_t max_iter) {
    const std::size_t n = design.rows();
    if (y.size() != n) throw ShapeMismatch("lasso_cv: design and response sizes disagree");
    if (folds < 2) throw DomainError("lasso_cv: need at least 2 folds");
    if (n < folds) throw DomainError("lasso_cv: fewer rows than folds");

    LassoCvResult result;
    result.lambdas = lasso_lambda_grid(lasso_lambda_max(design, y), n_lambda, ratio);
    result.cv_mse.assign(result.lambdas.size(), 0.0);

    const std::vector<std::size_t> perm = rng.permutation(n);
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t lo = f * n / folds;
        const std::size_t hi = (f + 1) * n / folds;
        std::vector<std::size_t> train_rows;
        train_rows.reserve(n - (hi - lo));
        for (std::size_t i = 0; i < n; ++i)
            if (i < lo || i >= hi) train_rows.push_back(perm[i]);

        Matrix sub(train_rows.size(), design.cols());
        std::vector<double> suby(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            for (std::size_t j = 0; j < design.cols(); ++j) sub(i, j) = design(train_rows[i], j);
            suby[i] = y[train_rows[i]];
        }

        const std::vector<LassoFit> fits = lasso_path(sub, suby, result.lambdas, tol, max_iter);
        for (std::size_t li = 0; li < fits.size(); ++li) {
            double sse = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t row = perm[i];
                const double pred = fits[li].predict_row(design.row(row));
                const double e = y[row] - pred;
                sse += e * e;
            }
            result.cv_mse[li] += sse;
        }
    }
    for (double& m : result.cv_mse) m /= static_cast<double>(n);

    result.best_index = 0;
    for (std::size_t li = 1; li < result.cv_mse.size(); ++li)
        if (result.cv_mse[li] < result.cv_mse[result.best_index]) result.best_index = li;

    // final full-data fit: walk the warm-started path only down to the winner
    const std::vector<double> head(result.lambdas.begin(),
                                   result.lambdas.begin() +
                                       static_cast<std::ptrdiff_t>(result.best_index) + 1);
    result.best = lasso_path(design, y, head, tol, max_iter).back();
    return result;
}

}  // namespace deepiv
