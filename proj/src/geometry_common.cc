#include "vortexlab/geometry.h"

#include <cmath>
#include <cstdio>

namespace vortexlab {

double Surface::integrate(const Field& u) const {
    if (u.size() != weights.size()) throw std::invalid_argument("field size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += u[i] * weights[i];
    return s;
}

Field laplacian_apply(const Surface& g, const Field& u) {
    Field out(u.size());
    g.laplacian(u, out);
    return out;
}

Field poisson_solve(const Surface& g, const Field& rhs) {
    double m = g.integrate(rhs);
    double nrm = 0.0;
    for (size_t i = 0; i < rhs.size(); ++i) nrm += rhs[i] * rhs[i] * g.weights[i];
    nrm = std::sqrt(nrm);
    if (std::fabs(m) > 1e-8 * std::max(nrm, 1e-300))
        throw std::invalid_argument("poisson_solve: rhs is not mean-zero");
    Field out(rhs.size());
    g.shifted_solve(rhs, 0.0, out);
    return out;
}

Field helmholtz_solve(const Surface& g, const Field& v, const Field& rhs) {
    const int n = g.npts();
    if ((int)v.size() != n || (int)rhs.size() != n)
        throw std::invalid_argument("helmholtz_solve: size mismatch");
    double vmin = v[0], vint = 0.0;
    for (int i = 0; i < n; ++i) {
        vmin = std::min(vmin, v[i]);
        vint += v[i] * g.weights[i];
    }
    if (vmin < -1e-14 * std::fabs(vint) || vint <= 0.0)
        throw std::invalid_argument("helmholtz_solve: potential must be >= 0 with positive mass");

    // Preconditioned CG in the weighted inner product; A = Delta0 + v is
    // self-adjoint positive definite, M = Delta0 + mean(v).
    const double shift = std::max(vint / g.volume, 1e-14);
    Field x(n, 0.0), r = rhs, z(n), p(n), Ap(n), tmp(n);
    auto dot = [&](const Field& a, const Field& b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += a[i] * b[i] * g.weights[i];
        return s;
    };
    g.shifted_solve(r, shift, z);
    p = z;
    double rz = dot(r, z);
    const double rhs_nrm = std::sqrt(std::max(dot(rhs, rhs), 1e-300));
    for (int it = 0; it < 2000; ++it) {
        g.laplacian(p, Ap);
        for (int i = 0; i < n; ++i) Ap[i] += v[i] * p[i];
        double alpha = rz / dot(p, Ap);
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        if (std::sqrt(dot(r, r)) <= 1e-13 * rhs_nrm) break;
        g.shifted_solve(r, shift, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return x;
}

Field green_function(const Surface& g, const SurfacePoint& p) { return g.green(p); }

Field conformal_factor(const Surface& g, const Field& kpot) {
    Field rho(kpot.size());
    g.laplacian(kpot, rho);
    for (size_t i = 0; i < rho.size(); ++i) {
        rho[i] = 1.0 - rho[i];
        if (rho[i] < 1e-8) throw std::runtime_error("conformal factor not positive (1 - Delta kpot < 1e-8)");
    }
    return rho;
}

Field conformal_curvature(const Surface& g, const Field& kpot) {
    Field rho = conformal_factor(g, kpot);
    Field u(rho.size()), lap_u(rho.size());
    for (size_t i = 0; i < rho.size(); ++i) u[i] = 0.5 * std::log(rho[i]);
    g.laplacian(u, lap_u);
    Field s(rho.size());
    for (size_t i = 0; i < rho.size(); ++i) s[i] = (g.s0[i] + lap_u[i]) / rho[i];
    return s;
}

double dirichlet_pairing(const Surface& g, const Field& a, const Field& b) {
    Field ax(a.size()), ay(a.size()), bx(b.size()), by(b.size());
    g.grad_components(a, ax, ay);
    g.grad_components(b, bx, by);
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (ax[i] * bx[i] + ay[i] * by[i]) * g.weights[i];
    return 0.5 * s;
}

// C-infinity transition h(x) = S(x)/(S(x)+S(1-x)) with S(x) = exp(-1/x).
static double bump_s(double x) { return x <= 0.0 ? 0.0 : std::exp(-1.0 / x); }
static double bump_s_d1(double x) { return x <= 0.0 ? 0.0 : std::exp(-1.0 / x) / (x * x); }
static double bump_s_d2(double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(-1.0 / x) * (1.0 - 2.0 * x) / (x * x * x * x);
}

double green_cutoff(double r, double r1, double r0) {
    if (r <= r1) return 1.0;
    if (r >= r0) return 0.0;
    double x = (r0 - r) / (r0 - r1);
    double sa = bump_s(x), sb = bump_s(1.0 - x);
    return sa / (sa + sb);
}

double green_cutoff_d1(double r, double r1, double r0) {
    if (r <= r1 || r >= r0) return 0.0;
    double w = r0 - r1;
    double x = (r0 - r) / w;
    double sa = bump_s(x), sb = bump_s(1.0 - x);
    double da = bump_s_d1(x), db = bump_s_d1(1.0 - x);
    // d/dx of sa/(sa+sb), then dx/dr = -1/w.
    double hx = (da * sb + sa * db) / ((sa + sb) * (sa + sb));
    return -hx / w;
}

double green_cutoff_d2(double r, double r1, double r0) {
    if (r <= r1 || r >= r0) return 0.0;
    double w = r0 - r1;
    double x = (r0 - r) / w;
    double sa = bump_s(x), sb = bump_s(1.0 - x);
    double da = bump_s_d1(x), db = bump_s_d1(1.0 - x);
    double dda = bump_s_d2(x), ddb = bump_s_d2(1.0 - x);
    double q = sa + sb, dq = da - db;
    double num = da * sb + sa * db;
    double dnum = dda * sb - sa * ddb;
    double hxx = (dnum * q - 2.0 * num * dq) / (q * q * q);
    return hxx / (w * w);
}

}  // namespace vortexlab
