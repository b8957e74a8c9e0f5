#include "vortexlab/gravity.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

namespace vortexlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec = std::vector<double>;
using Op = std::function<void(const Vec&, Vec&)>;

double dotv(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Restarted GMRES on the left-preconditioned system; x starts at zero.
bool gmres(const Op& apply, const Op& precond, const Vec& rhs, Vec& x, int m, double tol,
           int max_restarts) {
    const size_t n = rhs.size();
    x.assign(n, 0.0);
    Vec r(n), z(n), w(n);
    double beta0 = -1.0;
    for (int restart = 0; restart < max_restarts; ++restart) {
        apply(x, r);
        for (size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        precond(r, z);
        double beta = std::sqrt(dotv(z, z));
        if (beta0 < 0.0) beta0 = beta;
        if (beta <= tol * beta0 || beta0 == 0.0) return true;

        std::vector<Vec> V(1, z);
        for (double& vi : V[0]) vi /= beta;
        std::vector<Vec> H;  // H[j] holds column j, length j+2
        Vec cs, sn, gvec(1, beta);
        int j = 0;
        for (; j < m; ++j) {
            apply(V[j], w);
            precond(w, z);
            Vec hj(j + 2, 0.0);
            for (int i = 0; i <= j; ++i) {
                hj[i] = dotv(z, V[i]);
                for (size_t t = 0; t < n; ++t) z[t] -= hj[i] * V[i][t];
            }
            hj[j + 1] = std::sqrt(dotv(z, z));
            if (hj[j + 1] > 1e-14 * std::fabs(hj[0] + 1.0)) {
                Vec vnew = z;
                for (double& vi : vnew) vi /= hj[j + 1];
                V.push_back(std::move(vnew));
            }
            // apply accumulated Givens rotations, then a new one
            for (int i = 0; i < j; ++i) {
                double t = cs[i] * hj[i] + sn[i] * hj[i + 1];
                hj[i + 1] = -sn[i] * hj[i] + cs[i] * hj[i + 1];
                hj[i] = t;
            }
            double denom = std::hypot(hj[j], hj[j + 1]);
            double c = denom > 0.0 ? hj[j] / denom : 1.0;
            double s = denom > 0.0 ? hj[j + 1] / denom : 0.0;
            cs.push_back(c);
            sn.push_back(s);
            hj[j] = denom;
            hj[j + 1] = 0.0;
            gvec.push_back(-s * gvec[j]);
            gvec[j] = c * gvec[j];
            H.push_back(std::move(hj));
            if ((int)V.size() == j + 1) {  // happy breakdown
                ++j;
                break;
            }
            if (std::fabs(gvec[j + 1]) <= tol * beta0) {
                ++j;
                break;
            }
        }
        // back-substitute y from the triangularized Hessenberg
        Vec y(j, 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = gvec[i];
            for (int t = i + 1; t < j; ++t) s -= H[t][i] * y[t];
            y[i] = s / H[i][i];
        }
        for (int i = 0; i < j; ++i)
            for (size_t t = 0; t < n; ++t) x[t] += y[i] * V[i][t];
        if (std::fabs(gvec[j]) <= tol * beta0) return true;
    }
    return false;
}

// Integrated exponential form of the coupled system, optionally twisted
// (lambda, psi) and optionally gauge-pinned (free constant in the exponent,
// AM(kpot) = 0 appended as a scalar equation).
struct CoupledSystem {
    const Surface* g = nullptr;
    const Field* u0 = nullptr;
    double alpha = 0.0, tau = 1.0, c = 0.0, lambda = 0.0, q0 = 0.0;
    const Field* psi = nullptr;
    bool pinned = false;

    int nvec() const { return 2 * g->npts() + (pinned ? 1 : 0); }
};

struct EvalState {
    Field w, E, r1, r2;
    Field rho;  // 1 - Delta0 kpot at the evaluation point (AM derivative)
    double r3 = 0.0;
    double sup1 = 0.0, sup2 = 0.0;
    double merit = 0.0;  // weighted l2 of the stacked residual
    bool finite = true;
};

EvalState evaluate(const CoupledSystem& sys, const Field& f, const Field& kpot, double kconst) {
    const Surface& g = *sys.g;
    const int n = g.npts();
    EvalState st;
    st.w.resize(n);
    st.E.resize(n);
    st.r1.resize(n);
    st.r2.resize(n);
    Field lf(n), lp(n);
    g.laplacian(f, lf);
    g.laplacian(kpot, lp);
    st.rho.resize(n);
    for (int i = 0; i < n; ++i) st.rho[i] = 1.0 - lp[i];
    double am = 0.0;
    for (int i = 0; i < n; ++i) {
        st.w[i] = std::exp((*sys.u0)[i] + 2.0 * f[i]);
        double theta = 4.0 * sys.alpha * sys.tau * f[i] - 2.0 * sys.alpha * st.w[i] +
                       2.0 * (sys.lambda - sys.c) * kpot[i] + kconst;
        if (sys.psi) theta += 2.0 * sys.lambda * (*sys.psi)[i];
        if (!(std::fabs(theta) < 300.0)) {
            st.finite = false;
            return st;
        }
        st.E[i] = std::exp(theta);
        st.r1[i] = lf[i] + 0.5 * (st.w[i] - sys.tau) * st.E[i] + sys.q0;
        st.r2[i] = lp[i] + st.E[i] - 1.0;
        st.sup1 = std::max(st.sup1, std::fabs(st.r1[i]));
        st.sup2 = std::max(st.sup2, std::fabs(st.r2[i]));
        st.merit += (st.r1[i] * st.r1[i] + st.r2[i] * st.r2[i]) * g.weights[i];
        am += kpot[i] * (1.0 + st.rho[i]) * g.weights[i];
    }
    if (sys.pinned) {
        st.r3 = am / (2.0 * g.volume);
        st.merit += st.r3 * st.r3;
    }
    return st;
}

struct NewtonResult {
    bool converged = false;
    int iters = 0;
    double sup1 = 0.0, sup2 = 0.0;
};

NewtonResult newton_coupled(const CoupledSystem& sys, Field& f, Field& kpot, double& kconst) {
    const Surface& g = *sys.g;
    const int n = g.npts();
    NewtonResult out;

    EvalState st = evaluate(sys, f, kpot, kconst);
    if (!st.finite) return out;

    for (int iter = 0; iter < 50; ++iter) {
        out.iters = iter;
        out.sup1 = st.sup1;
        out.sup2 = st.sup2;
        if (st.sup1 <= 1e-9 && st.sup2 <= 1e-9 && (!sys.pinned || std::fabs(st.r3) <= 1e-12)) {
            out.converged = true;
            return out;
        }

        // Exact linearization: dE = E (4a(tau-w) df + 2(lambda-c) dphi + dk).
        auto apply = [&](const Vec& x, Vec& y) {
            Field df(x.begin(), x.begin() + n), dphi(x.begin() + n, x.begin() + 2 * n);
            double dk = sys.pinned ? x[2 * n] : 0.0;
            Field lf(n), lp(n);
            g.laplacian(df, lf);
            g.laplacian(dphi, lp);
            y.resize(sys.nvec());
            double amrow = 0.0;
            for (int i = 0; i < n; ++i) {
                double de = st.E[i] * (4.0 * sys.alpha * (sys.tau - st.w[i]) * df[i] +
                                       2.0 * (sys.lambda - sys.c) * dphi[i] + dk);
                y[i] = lf[i] + st.w[i] * st.E[i] * df[i] + 0.5 * (st.w[i] - sys.tau) * de;
                y[n + i] = lp[i] + de;
                amrow += dphi[i] * st.rho[i] * g.weights[i];
            }
            if (sys.pinned) y[2 * n] = amrow / g.volume;
        };

        double sig_f = 0.0, sig_p = 0.0;
        for (int i = 0; i < n; ++i) {
            sig_f += st.E[i] * st.w[i] * g.weights[i];
            sig_p += st.E[i] * g.weights[i];
        }
        sig_f = std::max(sig_f / g.volume, 1e-12);
        sig_p = std::max(2.0 * std::fabs(sys.lambda - sys.c) * sig_p / g.volume, 1e-12);
        auto precond = [&](const Vec& r, Vec& z) {
            Field rf(r.begin(), r.begin() + n), rp(r.begin() + n, r.begin() + 2 * n);
            Field zf(n), zp(n);
            g.shifted_solve(rf, sig_f, zf);
            g.shifted_solve(rp, sig_p, zp);
            z.resize(sys.nvec());
            for (int i = 0; i < n; ++i) {
                z[i] = zf[i];
                z[n + i] = zp[i];
            }
            if (sys.pinned) z[2 * n] = r[2 * n];
        };

        Vec rhs(sys.nvec()), dx;
        for (int i = 0; i < n; ++i) {
            rhs[i] = -st.r1[i];
            rhs[n + i] = -st.r2[i];
        }
        if (sys.pinned) rhs[2 * n] = -st.r3;
        if (!gmres(apply, precond, rhs, dx, 40, 1e-8, 12)) return out;

        double step = 1.0;
        bool accepted = false;
        Field tf(n), tp(n);
        for (int bt = 0; bt < 30; ++bt) {
            for (int i = 0; i < n; ++i) {
                tf[i] = f[i] + step * dx[i];
                tp[i] = kpot[i] + step * dx[n + i];
            }
            double tk = kconst + (sys.pinned ? step * dx[2 * n] : 0.0);
            EvalState ts = evaluate(sys, tf, tp, tk);
            if (ts.finite && ts.merit <= (1.0 - 1e-4 * step) * st.merit) {
                f.swap(tf);
                kpot.swap(tp);
                kconst = tk;
                st = std::move(ts);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) return out;
    }
    out.sup1 = st.sup1;
    out.sup2 = st.sup2;
    return out;
}

void check_config(const GravConfig& cfg) {
    if (!cfg.geom) throw std::invalid_argument("gravitating solve: missing geometry");
    if (cfg.higgs.geom.get() != cfg.geom.get())
        throw std::invalid_argument("gravitating solve: higgs data built on a different surface");
    if (!(cfg.tau > 0.0)) throw std::invalid_argument("gravitating solve: tau must be positive");
    if (cfg.alpha < 0.0) throw std::invalid_argument("gravitating solve: alpha must be nonnegative");
    const double N = cfg.higgs.degree();
    if (!(cfg.tau * cfg.geom->volume > 4.0 * kPi * N))
        throw BradlowViolated("gravitating solve: tau V <= 4 pi N leaves no room for the vortex");
}

double pair_k_alpha(const GravConfig& cfg, const Field& f, const Field& kpot) {
    return k_energy(*cfg.geom, kpot) +
           m_alpha_pair(*cfg.geom, cfg.higgs, cfg.alpha, cfg.tau, f, kpot);
}

}  // namespace

std::pair<Field, Field> coupled_residual(const GravConfig& cfg, const Field& f, const Field& kpot) {
    check_config(cfg);
    CoupledSystem sys;
    sys.g = cfg.geom.get();
    sys.u0 = &cfg.higgs.u0;
    sys.alpha = cfg.alpha;
    sys.tau = cfg.tau;
    sys.q0 = cfg.higgs.curvature_density;
    sys.c = constant_c(cfg.geom->genus, cfg.alpha, cfg.tau, cfg.higgs.degree(), cfg.geom->volume);
    EvalState st = evaluate(sys, f, kpot, 0.0);
    if (!st.finite) throw std::invalid_argument("coupled_residual: exponent out of range");
    return {st.r1, st.r2};
}

GravOutcome solve_gravitating(const GravConfig& cfg, const Field* init_f, const Field* init_kpot) {
    check_config(cfg);
    const Surface& g = *cfg.geom;
    const int n = g.npts();
    const int N = cfg.higgs.degree();
    GravOutcome out;

    if (g.genus == 1 && cfg.alpha > 0.0) {
        if (g.volume <= 8.0 * kPi * N / cfg.tau)
            out.trace.warnings.push_back("volume at or below 8 pi N / tau: existence not guaranteed");
        if (2.0 * cfg.alpha * cfg.tau * cfg.higgs.divisor.max_multiplicity() >= 1.0)
            out.trace.warnings.push_back("2 alpha tau max-multiplicity >= 1: existence not guaranteed");
    }

    // Exact start of the continuity path: round/flat metric, vortex Hermitian
    // potential. With kpot = 0 the second equation is an identity at alpha = 0.
    Field f, kpot;
    if (init_f && init_kpot) {
        f = *init_f;
        kpot = *init_kpot;
    } else {
        VortexProblem vp{cfg.geom, cfg.higgs, cfg.tau, Field()};
        f = solve_vortex(vp).f;
        kpot.assign(n, 0.0);
    }

    CoupledSystem sys;
    sys.g = cfg.geom.get();
    sys.u0 = &cfg.higgs.u0;
    sys.tau = cfg.tau;
    sys.q0 = cfg.higgs.curvature_density;

    auto record = [&](double alpha, int iters, double s1, double s2, const Field& fc,
                      const Field& kc, double d1_step) {
        GravConfig at = cfg;
        at.alpha = alpha;
        ContinuityRow row;
        row.alpha = alpha;
        row.newton_iters = iters;
        row.res_f = s1;
        row.res_kpot = s2;
        row.k_alpha = pair_k_alpha(at, fc, kc);
        out.trace.rows.push_back(row);
        out.trace.mean_f_path.push_back(g.mean(fc));
        out.trace.d1_steps.push_back(d1_step);
    };

    {
        sys.alpha = 0.0;
        sys.c = constant_c(g.genus, 0.0, cfg.tau, N, g.volume);
        double kconst = 0.0;
        EvalState st0 = evaluate(sys, f, kpot, kconst);
        record(0.0, 0, st0.sup1, st0.sup2, f, kpot, 0.0);
    }

    double alpha_cur = 0.0;
    double step = std::min(cfg.alpha_step, std::max(cfg.alpha, 0.0));
    double kconst = 0.0;
    while (alpha_cur < cfg.alpha - 1e-15) {
        step = std::min(step, cfg.alpha - alpha_cur);
        const double alpha_try = alpha_cur + step;
        sys.alpha = alpha_try;
        sys.c = constant_c(g.genus, alpha_try, cfg.tau, N, g.volume);
        Field fs = f, ks = kpot;
        NewtonResult nr = newton_coupled(sys, fs, ks, kconst);
        if (nr.converged) {
            double d1 = 0.0;
            Field rho(n), lp(n);
            g.laplacian(ks, lp);
            for (int i = 0; i < n; ++i) d1 += std::fabs(ks[i] - kpot[i]) * (1.0 - lp[i]) * g.weights[i];
            f.swap(fs);
            kpot.swap(ks);
            alpha_cur = alpha_try;
            record(alpha_cur, nr.iters, nr.sup1, nr.sup2, f, kpot, d1 / step);
            step = std::min(cfg.alpha_step, step * 2.0);
        } else {
            step *= 0.5;
            if (step < 1e-4) {
                out.trace.stalled = true;
                out.trace.stall_alpha = alpha_cur;
                break;
            }
        }
    }

    sys.alpha = alpha_cur;
    sys.c = constant_c(g.genus, alpha_cur, cfg.tau, N, g.volume);
    EvalState fin = evaluate(sys, f, kpot, kconst);
    GravConfig at = cfg;
    at.alpha = alpha_cur;
    out.sol.f = std::move(f);
    out.sol.kpot = std::move(kpot);
    out.sol.c = sys.c;
    out.sol.res_f_sup = fin.sup1;
    out.sol.res_kpot_sup = fin.sup2;
    out.sol.k_alpha_value = pair_k_alpha(at, out.sol.f, out.sol.kpot);
    return out;
}

VerifyReport verify_solution(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                             const GravSolution& sol) {
    const int n = g.npts();
    VerifyReport rep;
    Field rho = conformal_factor(g, sol.kpot);
    Field scurv = conformal_curvature(g, sol.kpot);
    Field w(n), lw(n), lf(n);
    for (int i = 0; i < n; ++i) w[i] = std::exp(higgs.u0[i] + 2.0 * sol.f[i]);
    g.laplacian(w, lw);
    g.laplacian(sol.f, lf);
    const double q0 = higgs.curvature_density;
    double tmin = 1e300, tmax = -1e300, tmean = 0.0;
    rep.min_rho = 1e300;
    for (int i = 0; i < n; ++i) {
        rep.min_rho = std::min(rep.min_rho, rho[i]);
        double ra = q0 + lf[i] + 0.5 * (w[i] - tau) * rho[i];
        rep.res_vortex_sup = std::max(rep.res_vortex_sup, std::fabs(ra));
        double t = scurv[i] + alpha * (lw[i] / rho[i] + tau * (w[i] - tau));
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
        tmean += t * rho[i] * g.weights[i];
        rep.res_scalar_sup = std::max(rep.res_scalar_sup, std::fabs(t - sol.c));
    }
    rep.scalar_spread = tmax - tmin;
    rep.mean_minus_c = tmean / g.volume - sol.c;
    return rep;
}

GravSolution solve_twisted(const GravConfig& cfg, const Field& xi, double lambda,
                           const Field* init_f, const Field* init_kpot) {
    check_config(cfg);
    const Surface& g = *cfg.geom;
    const int n = g.npts();
    if ((int)xi.size() != n) throw std::invalid_argument("solve_twisted: xi size mismatch");
    double mass = 0.0, ximin = 1e300;
    for (int i = 0; i < n; ++i) {
        mass += xi[i] * g.weights[i];
        ximin = std::min(ximin, xi[i]);
    }
    if (!(ximin > 0.0)) throw std::invalid_argument("solve_twisted: xi must be positive");
    if (std::fabs(mass - g.volume) > 1e-6 * g.volume)
        throw std::invalid_argument("solve_twisted: xi must have total mass V");
    const double c = constant_c(g.genus, cfg.alpha, cfg.tau, cfg.higgs.degree(), g.volume);
    if (std::fabs(lambda) > 0.2 * std::fabs(c) + 0.1)
        throw std::invalid_argument("solve_twisted: |lambda| exceeds the perturbative bound");

    Field psi(n);
    {
        Field rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = xi[i] - 1.0;
        psi = poisson_solve(g, rhs);
    }

    Field f, kpot;
    if (init_f && init_kpot) {
        f = *init_f;
        kpot = *init_kpot;
    } else {
        GravOutcome base = solve_gravitating(cfg);
        if (base.trace.stalled)
            throw std::runtime_error("solve_twisted: untwisted continuity stalled before target alpha");
        f = std::move(base.sol.f);
        kpot = std::move(base.sol.kpot);
    }

    CoupledSystem sys;
    sys.g = cfg.geom.get();
    sys.u0 = &cfg.higgs.u0;
    sys.alpha = cfg.alpha;
    sys.tau = cfg.tau;
    sys.q0 = cfg.higgs.curvature_density;
    sys.c = c;
    sys.lambda = lambda;
    sys.psi = &psi;
    sys.pinned = std::fabs(lambda - c) < 1e-10;

    double kconst = 0.0;
    if (sys.pinned) {
        // Gauge the incoming potential to AM = 0 before Newton refines it.
        double am = am_functional(g, kpot);
        for (int i = 0; i < n; ++i) kpot[i] -= am;
    }
    NewtonResult nr = newton_coupled(sys, f, kpot, kconst);
    if (!nr.converged) throw std::runtime_error("solve_twisted: Newton failed to converge");

    GravSolution sol;
    sol.f = std::move(f);
    sol.kpot = std::move(kpot);
    sol.c = c;
    sol.res_f_sup = nr.sup1;
    sol.res_kpot_sup = nr.sup2;
    sol.k_alpha_value = pair_k_alpha(cfg, sol.f, sol.kpot);
    return sol;
}

double futaki_closed_form(double alpha, double tau, int N, int n1, double V) {
    if (!(V > 4.0 * kPi * N / tau))
        throw std::invalid_argument("futaki_closed_form: volume below the admissible bound");
    return 2.0 * alpha * tau * (N - 2.0 * n1) * (V - 4.0 * kPi * N / tau);
}

StabilityVerdict check_polystability(const Divisor& d) {
    d.validate();
    const int N = d.degree();
    StabilityVerdict v;
    int imax = 0;
    for (size_t j = 1; j < d.multiplicities.size(); ++j)
        if (d.multiplicities[j] > d.multiplicities[imax]) imax = (int)j;
    const int nmax = d.multiplicities[imax];
    if (2 * nmax < N) {
        v.kind = Stability::stable;
        v.witness_index = imax;
        v.note = "all multiplicities below N/2";
        return v;
    }
    if (N % 2 == 0 && d.points.size() == 2 && d.multiplicities[0] == N / 2 &&
        d.multiplicities[1] == N / 2) {
        v.kind = Stability::polystable;
        v.witness_index = 0;
        v.note = "balanced pair of multiplicity N/2";
        return v;
    }
    v.kind = Stability::unstable;
    v.witness_index = imax;
    v.note = "point of multiplicity >= N/2";
    return v;
}

std::string trace_csv(const ContinuityTrace& trace) {
    std::ostringstream os;
    os << "alpha,newton_iters,res_f,res_kpot,k_alpha\n";
    os << std::setprecision(12);
    for (const ContinuityRow& r : trace.rows)
        os << r.alpha << ',' << r.newton_iters << ',' << r.res_f << ',' << r.res_kpot << ','
           << r.k_alpha << '\n';
    return os.str();
}

}  // namespace vortexlab
