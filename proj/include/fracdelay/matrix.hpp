#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracdelay {

using Vec = std::vector<double>;

/// Dense real matrix, row-major. Small dimensions only (the library carries
/// system matrices of a handful of rows); entries are validated finite when
/// constructed from user data.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
        if (data_.size() != rows * cols)
            throw std::invalid_argument("Matrix: entries length must equal rows*cols");
        for (double v : data_)
            if (!std::isfinite(v))
                throw std::invalid_argument("Matrix: entries must be finite");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        if (rows_ == 0 || cols_ == 0)
            throw std::invalid_argument("Matrix: dimensions must be positive");
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw std::invalid_argument("Matrix: ragged initializer");
            for (double v : row) {
                if (!std::isfinite(v))
                    throw std::invalid_argument("Matrix: entries must be finite");
                data_.push_back(v);
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("mat_mul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

/// alpha*a + b
inline Matrix mat_axpy(double alpha, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("mat_axpy: shape mismatch");
    Matrix c = b;
    for (std::size_t i = 0; i < c.data().size(); ++i)
        c.data()[i] += alpha * a.data()[i];
    return c;
}

inline Matrix mat_scale(double alpha, const Matrix& a) {
    Matrix c = a;
    for (double& v : c.data()) v *= alpha;
    return c;
}

/// Induced 1-norm: max absolute column sum. Submultiplicative.
inline double norm_ind1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a(i, j));
        if (s > best) best = s;
    }
    return best;
}

inline Vec mat_vec(const Matrix& a, const Vec& x) {
    if (a.cols() != x.size())
        throw std::invalid_argument("mat_vec: dimension mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

/// Vector 1-norm; the vector norm inducing norm_ind1.
inline double norm1(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
}

inline Vec vec_axpy(double alpha, const Vec& x, const Vec& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("vec_axpy: size mismatch");
    Vec z = y;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += alpha * x[i];
    return z;
}

inline Vec vec_sub(const Vec& x, const Vec& y) { return vec_axpy(-1.0, y, x); }

/// Gauss-Jordan inverse with partial pivoting. Only small, well-conditioned
/// systems appear (resolvents at admissible s, eigenbasis assembly in tests).
inline Matrix mat_inverse(const Matrix& a) {
    if (!a.square())
        throw std::invalid_argument("mat_inverse: matrix must be square");
    const std::size_t n = a.rows();
    Matrix w = a;
    Matrix inv = Matrix::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(w(r, col)) > std::fabs(w(piv, col))) piv = r;
        if (w(piv, col) == 0.0)
            throw std::runtime_error("mat_inverse: singular matrix");
        if (piv != col)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(w(piv, j), w(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const double d = w(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            w(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = w(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                w(r, j) -= f * w(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

} // namespace fracdelay
