#include "deepiv/matrix.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

namespace deepiv {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) throw ShapeMismatch("from_rows: ragged rows");
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

std::vector<double> Matrix::col(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw ShapeMismatch("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("hcat: row counts differ");
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
    }
    return c;
}

Matrix take_rows(const Matrix& a, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), a.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= a.rows()) throw ShapeMismatch("take_rows: index out of range");
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(rows[i], j);
    }
    return out;
}

std::vector<double> take(std::span<const double> v, std::span<const std::size_t> idx) {
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= v.size()) throw ShapeMismatch("take: index out of range");
        out[i] = v[idx[i]];
    }
    return out;
}

bool all_finite(const Matrix& a) {
    const double* p = a.data();
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    const double* p = a.data();
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace {

struct LuFactors {
    Matrix lu;                      // packed L (unit diagonal) and U
    std::vector<std::size_t> perm;  // row permutation
};

LuFactors lu_factor(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeMismatch("solve_linear: matrix not square");
    const std::size_t n = a.rows();
    LuFactors f{a, std::vector<std::size_t>(n)};
    for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

    const double scale = max_abs(a);
    const double pivot_tol = 1e-12 * (scale > 0.0 ? scale : 1.0);

    Matrix& lu = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best < pivot_tol) throw SingularMatrix("solve_linear: matrix numerically singular");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        const double inv_pivot = 1.0 / lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = lu(i, k) * inv_pivot;
            lu(i, k) = m;
            if (m == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
        }
    }
    return f;
}

void lu_solve_column(const LuFactors& f, std::span<const double> b, std::span<double> x) {
    const std::size_t n = f.perm.size();
    for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
    for (std::size_t i = 1; i < n; ++i) {
        double acc = x[i];
        for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * x[j];
        x[i] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= f.lu(ii, j) * x[j];
        x[ii] = acc / f.lu(ii, ii);
    }
}

}  // namespace

Matrix solve_linear(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("solve_linear: rhs row count mismatch");
    const LuFactors f = lu_factor(a);
    const std::size_t n = a.rows();
    Matrix x(n, b.cols());
    std::vector<double> bcol(n), xcol(n);
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) bcol[i] = b(i, j);
        lu_solve_column(f, bcol, xcol);
        for (std::size_t i = 0; i < n; ++i) x(i, j) = xcol[i];
    }
    return x;
}

std::vector<double> solve_linear(const Matrix& a, std::span<const double> b) {
    if (a.rows() != b.size()) throw ShapeMismatch("solve_linear: rhs size mismatch");
    const LuFactors f = lu_factor(a);
    std::vector<double> x(b.size());
    lu_solve_column(f, b, x);
    return x;
}

Matrix inverse(const Matrix& a) { return solve_linear(a, Matrix::identity(a.rows())); }

bool is_positive_definite(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) return false;
    const std::size_t n = a.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = 0.5 * (a(i, j) + a(j, i));
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum)) return false;
                l(i, i) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return true;
}

}  // namespace deepiv
