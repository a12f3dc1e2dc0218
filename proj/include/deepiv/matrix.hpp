#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deepiv/errors.hpp"

namespace deepiv {

// Dense row-major matrix of 64-bit floats. Sized for the problems in this
// toolkit (moment matrices, network layers, spline designs), not for large
// scale linear algebra.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data_.data() + i * cols_, cols_);
    }
    std::span<double> row(std::size_t i) {
        return std::span<double>(data_.data() + i * cols_, cols_);
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double> col(std::size_t j) const;

    bool operator==(const Matrix& other) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
Matrix transpose(const Matrix& a);

// Side-by-side concatenation [a b]; row counts must match.
Matrix hcat(const Matrix& a, const Matrix& b);

// New matrix (or vector) made of the given rows, in the given order.
Matrix take_rows(const Matrix& a, std::span<const std::size_t> rows);
std::vector<double> take(std::span<const double> v, std::span<const std::size_t> idx);

// Checks every entry with std::isfinite.
bool all_finite(const Matrix& a);
bool all_finite(std::span<const double> v);

double max_abs(const Matrix& a);
double max_abs(std::span<const double> v);

// Solves a * x = b by LU factorization with partial pivoting. Throws
// SingularMatrix when a pivot falls below 1e-12 times the largest entry
// of |a|.
Matrix solve_linear(const Matrix& a, const Matrix& b);
std::vector<double> solve_linear(const Matrix& a, std::span<const double> b);

// Inverse via solve_linear against the identity.
Matrix inverse(const Matrix& a);

// In-place Cholesky test: returns false when the (symmetrized) input is
// not positive definite.
bool is_positive_definite(const Matrix& a);

}  // namespace deepiv
