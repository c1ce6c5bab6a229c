#pragma once

#include <cmath>

#include "fskg/num/tensor.hpp"

namespace fskg::num {

inline double dot(const Vector& u, const Vector& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

inline double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

// y = W x + b
inline Vector linear_forward(const Vector& x, const Matrix& w, const Vector& b) {
    if (x.size() != w.cols || b.size() != w.rows) {
        throw ShapeError("linear_forward: W is [" + std::to_string(w.rows) + "x" +
                         std::to_string(w.cols) + "], x is [" + std::to_string(x.size()) +
                         "], b is [" + std::to_string(b.size()) + "]");
    }
    Vector y(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double s = b[r];
        const double* wr = w.data.data() + r * w.cols;
        for (std::size_t c = 0; c < w.cols; ++c) s += wr[c] * x[c];
        y[r] = s;
    }
    return y;
}

// Returns 0 when either norm is below 1e-12 (masked-modality rule).
inline double cosine_similarity(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine_similarity: dimension mismatch [" + std::to_string(u.size()) +
                         "] vs [" + std::to_string(v.size()) + "]");
    }
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu < 1e-12 || nv < 1e-12) return 0.0;
    return dot(u, v) / (nu * nv);
}

inline double l2_distance(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) {
        throw ShapeError("l2_distance: dimension mismatch [" + std::to_string(u.size()) +
                         "] vs [" + std::to_string(v.size()) + "]");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double hinge(double x) { return x > 0.0 ? x : 0.0; }

} // namespace fskg::num
