#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace tgs {

using Vec = std::vector<double>;

/// Dense row-major matrix. Everything in this pipeline is desk-scale
/// (T <= 64 sentences, latent width <= 256), so no BLAS backing.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    Vec row(std::size_t i) const { return Vec(row_ptr(i), row_ptr(i) + cols); }
    void set_row(std::size_t i, const Vec& v) {
        assert(v.size() == cols);
        for (std::size_t j = 0; j < cols; ++j) (*this)(i, j) = v[j];
    }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double dot_n(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double squared_distance(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    return squared_distance(a.data(), b.data(), a.size());
}

/// Cosine similarity with the degenerate-input convention used throughout the
/// pipeline: a zero vector on either side yields 0 rather than an error.
inline double cosine_or_zero(const double* a, const double* b, std::size_t n) {
    const double na = std::sqrt(dot_n(a, a, n));
    const double nb = std::sqrt(dot_n(b, b, n));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot_n(a, b, n) / (na * nb);
}

inline double cosine_or_zero(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    return cosine_or_zero(a.data(), b.data(), a.size());
}

inline Vec matvec(const Mat& m, const Vec& x) {
    assert(x.size() == m.cols);
    Vec y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) y[i] = dot_n(m.row_ptr(i), x.data(), m.cols);
    return y;
}

/// y = m^T x  (x has m.rows entries).
inline Vec matvec_t(const Mat& m, const Vec& x) {
    assert(x.size() == m.rows);
    Vec y(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* r = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += xi * r[j];
    }
    return y;
}

inline void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline void axpy(double a, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    axpy(a, x.data(), y.data(), x.size());
}

/// grads += a * (x outer y), with grads shaped |x| rows by |y| cols.
inline void add_outer(Mat& grads, double a, const Vec& x, const Vec& y) {
    assert(grads.rows == x.size() && grads.cols == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double* r = grads.row_ptr(i);
        const double axi = a * x[i];
        for (std::size_t j = 0; j < y.size(); ++j) r[j] += axi * y[j];
    }
}

inline void add_outer(Mat& grads, const Vec& x, const Vec& y) { add_outer(grads, 1.0, x, y); }

} // namespace tgs
