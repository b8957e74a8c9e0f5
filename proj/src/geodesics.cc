#include "vortexlab/geodesics.h"

#include <Eigen/Dense>

#include <cmath>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Field fs_ray_potential(const SphereSurface& g, double t, double b) {
    if (std::fabs(t) > 30.0) throw std::invalid_argument("fs_ray_potential: |t| > 30 overflows");
    Field out(g.npts());
    const double s = g.volume / (4.0 * kPi);
    const double e4t = std::exp(4.0 * t);
    for (int i = 0; i < g.npts(); ++i) {
        double r2 = g.chart_r2(i);
        out[i] = s * (std::log1p(e4t * r2) - std::log1p(r2) - 2.0 * t) + b * t;
    }
    return out;
}

Field fs_ray_velocity(const SphereSurface& g, double t, double b) {
    Field out(g.npts());
    const double s = g.volume / (4.0 * kPi);
    const double e4t = std::exp(4.0 * t);
    for (int i = 0; i < g.npts(); ++i) {
        double r2 = g.chart_r2(i);
        out[i] = s * (4.0 * e4t * r2 / (1.0 + e4t * r2) - 2.0) + b;
    }
    return out;
}

Field fs_ray_conformal(const SphereSurface& g, double t) {
    Field out(g.npts());
    const double e2t = std::exp(2.0 * t);
    for (int i = 0; i < g.npts(); ++i) {
        double r2 = g.chart_r2(i);
        double d = (1.0 + r2) / (1.0 + e2t * e2t * r2);
        out[i] = e2t * e2t * d * d;
    }
    return out;
}

double ray_j_slope(const SphereSurface& g, const Field& xi, double t, double b) {
    Field vel = fs_ray_velocity(g, t, b);
    Field rho = fs_ray_conformal(g, t);
    double acc = 0.0;
    for (int i = 0; i < g.npts(); ++i) acc += vel[i] * (xi[i] - rho[i]) * g.weights[i];
    return acc;
}

double geodesic_residual(const Surface& g, const Field& prev, const Field& mid, const Field& next,
                         double dt) {
    const int n = g.npts();
    Field vel(n), acc(n);
    for (int i = 0; i < n; ++i) {
        vel[i] = (next[i] - prev[i]) / (2.0 * dt);
        acc[i] = (next[i] - 2.0 * mid[i] + prev[i]) / (dt * dt);
    }
    Field rho = conformal_factor(g, mid);
    Field gx, gy;
    g.grad_components(vel, gx, gy);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = acc[i] - (gx[i] * gx[i] + gy[i] * gy[i]) / rho[i];
        sup = std::max(sup, std::fabs(r));
    }
    return sup;
}

Field expand_zonal(const SphereSurface& g, const Field& profile) {
    if ((int)profile.size() != g.nlat) throw std::invalid_argument("expand_zonal: profile size mismatch");
    Field out((size_t)g.nlat * g.nlon);
    for (int i = 0; i < g.nlat; ++i)
        for (int j = 0; j < g.nlon; ++j) out[(size_t)i * g.nlon + j] = profile[i];
    return out;
}

Field zonal_profile(const SphereSurface& g, const Field& u) {
    Field out(g.nlat, 0.0);
    double scale = 0.0;
    for (double v : u) scale = std::max(scale, std::fabs(v));
    for (int i = 0; i < g.nlat; ++i) {
        double avg = 0.0;
        for (int j = 0; j < g.nlon; ++j) avg += u[(size_t)i * g.nlon + j];
        avg /= g.nlon;
        for (int j = 0; j < g.nlon; ++j)
            if (std::fabs(u[(size_t)i * g.nlon + j] - avg) > 1e-9 * (1.0 + scale))
                throw std::invalid_argument("zonal_profile: field is not axisymmetric");
        out[i] = avg;
    }
    return out;
}

EpsilonGeodesic solve_epsilon_geodesic(const SphereSurface& g, const Field& end0, const Field& end1,
                                       double epsilon, int time_nodes) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("solve_epsilon_geodesic: epsilon must be positive");
    if (time_nodes < 5) throw std::invalid_argument("solve_epsilon_geodesic: need at least 5 time nodes");
    const int M = time_nodes, nl = g.nlat;
    const double dt = 1.0 / (M - 1);

    std::vector<double> L0 = g.zonal_laplacian_matrix();
    std::vector<double> Dx = g.zonal_ddx_matrix();
    Field p0 = zonal_profile(g, end0), p1 = zonal_profile(g, end1);

    // gradsq scale for zonal fields: |du|^2_0 = (4pi/V)(1-x^2)(du/dx)^2.
    Field gsc(nl);
    for (int i = 0; i < nl; ++i) gsc[i] = 4.0 * kPi / g.volume * (1.0 - g.glx[i] * g.glx[i]);

    // Start from the constant path at end0 plus the exact spatially constant
    // parabola; the second endpoint is brought in by continuation below.
    std::vector<Field> phi(M, Field(nl));
    for (int k = 0; k < M; ++k) {
        double tk = (double)k / (M - 1);
        double para = 0.5 * epsilon * tk * (tk - 1.0);
        for (int i = 0; i < nl; ++i) phi[k][i] = p0[i] + para;
    }

    auto matvec = [&](const std::vector<double>& A, const Field& x, Field& out) {
        for (int i = 0; i < nl; ++i) {
            double s = 0.0;
            for (int j = 0; j < nl; ++j) s += A[(size_t)i * nl + j] * x[j];
            out[i] = s;
        }
    };

    auto residual = [&](const std::vector<Field>& p, std::vector<Field>& F, double& sup,
                        double& min_rho, double& l2) {
        sup = 0.0;
        min_rho = 1e300;
        l2 = 0.0;
        Field lap(nl), dx(nl);
        for (int k = 1; k + 1 < M; ++k) {
            matvec(L0, p[k], lap);
            Field vel(nl);
            for (int i = 0; i < nl; ++i) vel[i] = (p[k + 1][i] - p[k - 1][i]) / (2.0 * dt);
            matvec(Dx, vel, dx);
            for (int i = 0; i < nl; ++i) {
                double rho = 1.0 - lap[i];
                min_rho = std::min(min_rho, rho);
                double acc = (p[k + 1][i] - 2.0 * p[k][i] + p[k - 1][i]) / (dt * dt);
                F[k - 1][i] = acc * rho - gsc[i] * dx[i] * dx[i] - epsilon;
                sup = std::max(sup, std::fabs(F[k - 1][i]));
                l2 += F[k - 1][i] * F[k - 1][i];
            }
        }
    };

    EpsilonGeodesic out;
    out.epsilon = epsilon;
    out.newton_iters = 0;
    out.times.resize(M);
    for (int k = 0; k < M; ++k) out.times[k] = k * dt;

    std::vector<Field> F(M - 2, Field(nl));

    using Mat = Eigen::MatrixXd;
    using Vec = Eigen::VectorXd;
    Mat L0m(nl, nl), Dxm(nl, nl);
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) {
            L0m(i, j) = L0[(size_t)i * nl + j];
            Dxm(i, j) = Dx[(size_t)i * nl + j];
        }

    auto newton_stage = [&]() {
    double sup = 0.0, min_rho = 0.0, l2 = 0.0;
    residual(phi, F, sup, min_rho, l2);
    int iter = 0;
    for (; iter < 100 && sup > 1e-7; ++iter) {
        // Assemble block-tridiagonal Jacobian rows for interior nodes.
        std::vector<Mat> A(M - 2), Bm(M - 2), Cm(M - 2);
        Field lap(nl), dx(nl);
        for (int k = 1; k + 1 < M; ++k) {
            matvec(L0, phi[k], lap);
            Field vel(nl);
            for (int i = 0; i < nl; ++i) vel[i] = (phi[k + 1][i] - phi[k - 1][i]) / (2.0 * dt);
            matvec(Dx, vel, dx);
            Mat Ak = Mat::Zero(nl, nl), Bk = Mat::Zero(nl, nl), Ck = Mat::Zero(nl, nl);
            for (int i = 0; i < nl; ++i) {
                double rho = 1.0 - lap[i];
                double acc = (phi[k + 1][i] - 2.0 * phi[k][i] + phi[k - 1][i]) / (dt * dt);
                Ak(i, i) = -2.0 * rho / (dt * dt);
                Ak.row(i) -= acc * L0m.row(i);
                double gcoef = gsc[i] * 2.0 * dx[i] / (2.0 * dt);
                Bk(i, i) = rho / (dt * dt);
                Bk.row(i) += gcoef * Dxm.row(i);
                Ck(i, i) = rho / (dt * dt);
                Ck.row(i) -= gcoef * Dxm.row(i);
            }
            A[k - 1] = Ak;
            Bm[k - 1] = Bk;
            Cm[k - 1] = Ck;
        }
        // Block Thomas elimination.
        std::vector<Mat> W(M - 2);
        std::vector<Vec> y(M - 2);
        Vec rhs(nl);
        Eigen::PartialPivLU<Mat> lu(A[0]);
        W[0] = lu.solve(Cm[0]);
        for (int i = 0; i < nl; ++i) rhs(i) = -F[0][i];
        y[0] = lu.solve(rhs);
        for (int k = 1; k < M - 2; ++k) {
            Mat D = A[k] - Bm[k] * W[k - 1];
            Eigen::PartialPivLU<Mat> luk(D);
            W[k] = luk.solve(Cm[k]);
            for (int i = 0; i < nl; ++i) rhs(i) = -F[k][i];
            y[k] = luk.solve(rhs - Bm[k] * y[k - 1]);
        }
        std::vector<Vec> delta(M - 2);
        delta[M - 3] = y[M - 3];
        for (int k = M - 4; k >= 0; --k) delta[k] = y[k] - W[k] * delta[k + 1];

        // Damped update: l2 merit must decrease and the metric may approach
        // its positivity boundary only by a bounded fraction per step.
        double lambda = 1.0;
        bool accepted = false;
        std::vector<Field> trial = phi;
        for (int bt = 0; bt < 40; ++bt) {
            for (int k = 1; k + 1 < M; ++k)
                for (int i = 0; i < nl; ++i)
                    trial[k][i] = phi[k][i] + lambda * delta[k - 1](i);
            double tsup, tmin, tl2;
            residual(trial, F, tsup, tmin, tl2);
            if (tmin > 0.2 * min_rho && tl2 <= l2 * (1.0 - 1e-4 * lambda)) {
                phi.swap(trial);
                sup = tsup;
                min_rho = tmin;
                l2 = tl2;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            residual(phi, F, sup, min_rho, l2);  // restore F for current phi
            break;
        }
    }
    out.newton_iters += iter;
    out.residual_sup = sup;
    return sup <= 1e-7;
    };

    // The second endpoint is walked in from end0; each stage warm-starts from
    // the previous path shifted by a linear-in-time increment.
    double s_done = 0.0, step = 0.25;
    int stages = 0;
    while (s_done < 1.0) {
        if (++stages > 64)
            throw std::runtime_error("solve_epsilon_geodesic: endpoint continuation stalled");
        double s_try = std::min(1.0, s_done + step);
        std::vector<Field> saved = phi;
        double ds = s_try - s_done;
        for (int k = 0; k < M; ++k) {
            double tk = (double)k / (M - 1);
            for (int i = 0; i < nl; ++i) phi[k][i] += ds * tk * (p1[i] - p0[i]);
        }
        if (newton_stage()) {
            s_done = s_try;
            step = std::min(0.25, step * 2.0);
        } else {
            phi.swap(saved);
            step *= 0.5;
            if (step < 1e-3)
                throw std::runtime_error(
                    "solve_epsilon_geodesic: endpoint continuation stalled");
        }
    }

    out.zonal = std::move(phi);
    return out;
}

double d1_path_length(const Surface& g, const std::vector<double>& times,
                      const std::vector<Field>& kpots) {
    if (times.size() != kpots.size() || times.size() < 2)
        throw std::invalid_argument("d1_path_length: need matching times and fields");
    const int M = (int)times.size();
    const int n = g.npts();
    std::vector<double> speed(M);
    Field vel(n);
    for (int k = 0; k < M; ++k) {
        int a = std::max(k - 1, 0), b = std::min(k + 1, M - 1);
        Field rho = conformal_factor(g, kpots[k]);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            vel[i] = (kpots[b][i] - kpots[a][i]) / (times[b] - times[a]);
            acc += std::fabs(vel[i]) * rho[i] * g.weights[i];
        }
        speed[k] = acc;
    }
    double len = 0.0;
    for (int k = 0; k + 1 < M; ++k) len += 0.5 * (speed[k] + speed[k + 1]) * (times[k + 1] - times[k]);
    return len;
}

std::vector<RayProfileRow> ray_k_alpha_profile(const SphereSurface& g, const HiggsData& higgs,
                                               double alpha, double tau,
                                               const std::vector<double>& tgrid, double b) {
    if (tgrid.size() < 2) throw std::invalid_argument("ray_k_alpha_profile: need at least 2 t values");
    const int n = g.npts();
    const int N = higgs.degree();
    const double q0 = 2.0 * kPi * N / g.volume;
    const double c = constant_c(0, alpha, tau, N, g.volume);
    Field vel0 = fs_ray_velocity(g, 0.0, b);

    std::vector<RayProfileRow> rows(tgrid.size());
    Field warm;
    for (size_t k = 0; k < tgrid.size(); ++k) {
        HiggsData ht = pullback_higgs(higgs, tgrid[k]);
        VortexProblem prob{higgs.geom, ht, tau, Field()};
        VortexSolution sol = solve_vortex(prob, warm.empty() ? nullptr : &warm);
        warm = sol.f;
        Field w(n), lw, lf;
        for (int i = 0; i < n; ++i) w[i] = std::exp(ht.u0[i] + 2.0 * sol.f[i]);
        g.laplacian(w, lw);
        g.laplacian(sol.f, lf);
        double kp = 0.0;
        for (int i = 0; i < n; ++i) {
            double bracket = g.s0[i] + alpha * lw[i] - 2.0 * alpha * tau * (q0 + lf[i]) - c;
            kp += -vel0[i] * bracket * g.weights[i];
        }
        rows[k].t = tgrid[k];
        rows[k].k_alpha_prime = kp;
    }
    // Anchor the energy column at the first node and integrate the slope.
    Field phi0 = fs_ray_potential(g, tgrid[0], b);
    rows[0].k_alpha = k_alpha_reduced(g, higgs, alpha, tau, phi0).k_alpha;
    for (size_t k = 1; k < tgrid.size(); ++k)
        rows[k].k_alpha = rows[k - 1].k_alpha +
                          0.5 * (rows[k].k_alpha_prime + rows[k - 1].k_alpha_prime) *
                              (tgrid[k] - tgrid[k - 1]);
    return rows;
}

double aitken_limit(double a, double b, double c) {
    double d2 = (c - b) - (b - a);
    if (std::fabs(d2) < 1e-300) return c;
    return c - (c - b) * (c - b) / d2;
}

}  // namespace vortexlab
