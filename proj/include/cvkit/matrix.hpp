/*
 * Copyright 2025 The cvkit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <initializer_list>

#include "common.hpp"

namespace cvkit {

/// Dense row-major complex matrix. Sized for the desk scale this library
/// targets (dimensions up to a few hundred), with pivoted LU for inverses
/// and determinants.
class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
    Matrix(size_t rows, size_t cols, std::initializer_list<cplx> entries)
        : rows_(rows), cols_(cols), a_(entries) {
        if (a_.size() != rows * cols) throw dimension_error("Matrix: initializer size mismatch");
    }

    static Matrix identity(size_t n) {
        Matrix m(n, n);
        for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    cplx& operator()(size_t i, size_t j) { return a_[i * cols_ + j]; }
    const cplx& operator()(size_t i, size_t j) const { return a_[i * cols_ + j]; }

    Matrix operator+(const Matrix& o) const {
        check_same_shape(o);
        Matrix r = *this;
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
        return r;
    }

    Matrix operator-(const Matrix& o) const {
        check_same_shape(o);
        Matrix r = *this;
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
        return r;
    }

    Matrix operator*(cplx s) const {
        Matrix r = *this;
        for (auto& x : r.a_) x *= s;
        return r;
    }

    Matrix operator*(const Matrix& o) const {
        if (cols_ != o.rows_) throw dimension_error("Matrix: product shape mismatch");
        Matrix r(rows_, o.cols_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t k = 0; k < cols_; ++k) {
                cplx aik = (*this)(i, k);
                if (aik == cplx(0.0)) continue;
                for (size_t j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
            }
        return r;
    }

    std::vector<cplx> operator*(const std::vector<cplx>& v) const {
        if (cols_ != v.size()) throw dimension_error("Matrix: vector product shape mismatch");
        std::vector<cplx> r(rows_);
        for (size_t i = 0; i < rows_; ++i) {
            cplx s = 0.0;
            for (size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }

    Matrix transpose() const {
        Matrix r(cols_, rows_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    Matrix conjugate() const {
        Matrix r = *this;
        for (auto& x : r.a_) x = std::conj(x);
        return r;
    }

    Matrix adjoint() const { return transpose().conjugate(); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& x : a_) m = std::max(m, std::abs(x));
        return m;
    }

    /// max |(U^dag U - I)_{ij}|
    double unitarity_defect() const {
        if (rows_ != cols_) return 1.0;
        Matrix d = adjoint() * (*this) - identity(rows_);
        return d.max_abs();
    }

    bool is_unitary(double tol) const { return unitarity_defect() < tol; }

    double symmetry_defect() const {
        if (rows_ != cols_) return 1.0;
        double m = 0.0;
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = i + 1; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
        return m;
    }

    double hermiticity_defect() const {
        if (rows_ != cols_) return 1.0;
        double m = 0.0;
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = i; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return m;
    }

    Matrix symmetrized() const {
        Matrix r(rows_, cols_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) r(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return r;
    }

    /// Keeps rows[i] copies of row i and cols[j] copies of column j, in order.
    Matrix repeat(const std::vector<int>& row_reps, const std::vector<int>& col_reps) const {
        if (row_reps.size() != rows_ || col_reps.size() != cols_)
            throw dimension_error("Matrix::repeat: repetition length mismatch");
        std::vector<size_t> ri, ci;
        for (size_t i = 0; i < rows_; ++i) {
            if (row_reps[i] < 0) throw dimension_error("Matrix::repeat: negative repetition");
            for (int k = 0; k < row_reps[i]; ++k) ri.push_back(i);
        }
        for (size_t j = 0; j < cols_; ++j) {
            if (col_reps[j] < 0) throw dimension_error("Matrix::repeat: negative repetition");
            for (int k = 0; k < col_reps[j]; ++k) ci.push_back(j);
        }
        Matrix r(ri.size(), ci.size());
        for (size_t i = 0; i < ri.size(); ++i)
            for (size_t j = 0; j < ci.size(); ++j) r(i, j) = (*this)(ri[i], ci[j]);
        return r;
    }

    Matrix select(const std::vector<size_t>& ri, const std::vector<size_t>& ci) const {
        Matrix r(ri.size(), ci.size());
        for (size_t i = 0; i < ri.size(); ++i)
            for (size_t j = 0; j < ci.size(); ++j) r(i, j) = (*this)(ri[i], ci[j]);
        return r;
    }

    Matrix top_left(size_t n) const {
        Matrix r(n, n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) r(i, j) = (*this)(i, j);
        return r;
    }

    /// LU factorization with partial pivoting; returns determinant and, when
    /// requested, the inverse. Throws numeric_error on singularity.
    struct LuResult;
    LuResult lu_invert(bool want_inverse = true) const;
    cplx determinant() const;
    Matrix inverse() const;

    /// Operator (spectral) norm by power iteration on A^dag A.
    double operator_norm(int iters = 60) const {
        if (empty()) return 0.0;
        std::vector<cplx> v(cols_);
        for (size_t j = 0; j < cols_; ++j) v[j] = cplx(1.0 / std::sqrt(double(cols_)), 0.0);
        double s = 0.0;
        for (int it = 0; it < iters; ++it) {
            std::vector<cplx> w = (*this) * v;
            // v <- A^dag w
            std::vector<cplx> u(cols_, cplx(0.0));
            for (size_t i = 0; i < rows_; ++i)
                for (size_t j = 0; j < cols_; ++j) u[j] += std::conj((*this)(i, j)) * w[i];
            double norm = 0.0;
            for (const auto& x : u) norm += std::norm(x);
            norm = std::sqrt(norm);
            if (norm == 0.0) return 0.0;
            for (auto& x : u) x /= norm;
            v = std::move(u);
            s = std::sqrt(norm);
        }
        return s;
    }

    /// Cheap condition estimate ||A|| * ||A^-1|| with max-row-sum norms.
    double condition_estimate(const Matrix& inv) const {
        auto row_sum_norm = [](const Matrix& m) {
            double best = 0.0;
            for (size_t i = 0; i < m.rows(); ++i) {
                double s = 0.0;
                for (size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
                best = std::max(best, s);
            }
            return best;
        };
        return row_sum_norm(*this) * row_sum_norm(inv);
    }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw dimension_error("Matrix: shape mismatch");
    }

    size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

struct Matrix::LuResult {
    cplx det;
    Matrix inverse;
};

inline Matrix::LuResult Matrix::lu_invert(bool want_inverse) const {
    if (rows_ != cols_) throw dimension_error("Matrix: inverse of non-square matrix");
    size_t n = rows_;
    Matrix lu = *this;
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    cplx det = 1.0;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        double best = std::abs(lu(c, c));
        for (size_t r = c + 1; r < n; ++r)
            if (std::abs(lu(r, c)) > best) {
                best = std::abs(lu(r, c));
                piv = r;
            }
        if (best == 0.0) throw numeric_error("Matrix: singular matrix");
        if (piv != c) {
            for (size_t j = 0; j < n; ++j) std::swap(lu(c, j), lu(piv, j));
            std::swap(perm[c], perm[piv]);
            det = -det;
        }
        det *= lu(c, c);
        for (size_t r = c + 1; r < n; ++r) {
            cplx f = lu(r, c) / lu(c, c);
            lu(r, c) = f;
            for (size_t j = c + 1; j < n; ++j) lu(r, j) -= f * lu(c, j);
        }
    }
    LuResult out{det, Matrix()};
    if (!want_inverse) return out;
    Matrix inv(n, n);
    for (size_t col = 0; col < n; ++col) {
        std::vector<cplx> b(n);
        for (size_t i = 0; i < n; ++i) b[i] = (perm[i] == col) ? 1.0 : 0.0;
        for (size_t i = 1; i < n; ++i)
            for (size_t j = 0; j < i; ++j) b[i] -= lu(i, j) * b[j];
        for (size_t i = n; i-- > 0;) {
            for (size_t j = i + 1; j < n; ++j) b[i] -= lu(i, j) * b[j];
            b[i] /= lu(i, i);
        }
        for (size_t i = 0; i < n; ++i) inv(i, col) = b[i];
    }
    out.inverse = std::move(inv);
    return out;
}

inline cplx Matrix::determinant() const {
    if (rows_ == 0) return 1.0;
    return lu_invert(false).det;
}

inline Matrix Matrix::inverse() const { return lu_invert(true).inverse; }

inline Matrix direct_sum(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() + b.rows(), a.cols() + b.cols());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j);
    for (size_t i = 0; i < b.rows(); ++i)
        for (size_t j = 0; j < b.cols(); ++j) r(a.rows() + i, a.cols() + j) = b(i, j);
    return r;
}

inline Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j)
            for (size_t k = 0; k < b.rows(); ++k)
                for (size_t l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return r;
}

/// Haar-random unitary via Gram-Schmidt on a complex Gaussian matrix.
inline Matrix random_unitary(size_t n, Rng& rng) {
    Matrix g(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    // QR by modified Gram-Schmidt on columns.
    for (size_t j = 0; j < n; ++j) {
        for (size_t k = 0; k < j; ++k) {
            cplx dot = 0.0;
            for (size_t i = 0; i < n; ++i) dot += std::conj(g(i, k)) * g(i, j);
            for (size_t i = 0; i < n; ++i) g(i, j) -= dot * g(i, k);
        }
        double norm = 0.0;
        for (size_t i = 0; i < n; ++i) norm += std::norm(g(i, j));
        norm = std::sqrt(norm);
        for (size_t i = 0; i < n; ++i) g(i, j) /= norm;
    }
    return g;
}

}  // namespace cvkit
