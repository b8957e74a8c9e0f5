/// Preconditioned conjugate gradient in the quadrature-weighted inner product,
/// for operators self-adjoint and positive with respect to it.

#pragma once

#include "vortexlab/geometry.h"

#include <cmath>
#include <functional>

namespace vortexlab {

struct PcgResult {
    int iterations = 0;
    double residual_norm = 0.0;
    bool converged = false;
};

using FieldOp = std::function<void(const Field&, Field&)>;

inline double weighted_dot(const Field& w, const Field& a, const Field& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i] * w[i];
    return s;
}

inline PcgResult pcg(const Field& weights, const FieldOp& apply, const FieldOp& precond,
                     const Field& rhs, Field& x, double rel_tol, int max_iter) {
    const size_t n = rhs.size();
    if (x.size() != n) x.assign(n, 0.0);
    Field r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
    double rhs_norm = std::sqrt(weighted_dot(weights, rhs, rhs));
    if (rhs_norm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0, true};
    }
    precond(r, z);
    p = z;
    double rz = weighted_dot(weights, r, z);
    PcgResult res;
    for (int k = 0; k < max_iter; ++k) {
        apply(p, ap);
        double pap = weighted_dot(weights, p, ap);
        if (!(pap > 0.0)) break;  // operator lost positivity; caller damps
        double alpha = rz / pap;
        for (size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res.iterations = k + 1;
        res.residual_norm = std::sqrt(weighted_dot(weights, r, r));
        if (res.residual_norm <= rel_tol * rhs_norm) {
            res.converged = true;
            return res;
        }
        precond(r, z);
        double rz_new = weighted_dot(weights, r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.residual_norm = std::sqrt(weighted_dot(weights, r, r));
    return res;
}

}  // namespace vortexlab
