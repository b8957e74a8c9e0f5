#include "vortexlab/vortex.h"

#include "vortexlab/pcg.h"

#include <algorithm>
#include <cmath>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

Field higgs_density(const Field& u0, const Field& f) {
    Field w(u0.size());
    for (size_t i = 0; i < u0.size(); ++i) w[i] = std::exp(u0[i] + 2.0 * f[i]);
    return w;
}
}  // namespace

Field VortexProblem::conformal() const {
    if (kpot.empty()) return Field(geom->npts(), 1.0);
    return conformal_factor(*geom, kpot);
}

double mhat_energy(const VortexProblem& prob, const Field& f) {
    const Surface& g = *prob.geom;
    const double q0 = 2.0 * kPi * prob.higgs.degree() / g.volume;
    Field rho = prob.conformal();
    double dir = dirichlet_pairing(g, f, f);
    double lin0 = 0.0, expterm = 0.0, linphi = 0.0, w0term = 0.0;
    for (int i = 0; i < g.npts(); ++i) {
        double w0 = std::exp(prob.higgs.u0[i]);
        double wm = g.weights[i];
        lin0 += f[i] * wm;
        expterm += w0 * std::exp(2.0 * f[i]) * rho[i] * wm;
        linphi += f[i] * rho[i] * wm;
        w0term += w0 * rho[i] * wm;
    }
    return dir + q0 * lin0 + 0.25 * expterm - 0.5 * prob.tau * linphi - 0.25 * w0term;
}

Field mhat_gradient(const VortexProblem& prob, const Field& f) {
    const Surface& g = *prob.geom;
    const double q0 = 2.0 * kPi * prob.higgs.degree() / g.volume;
    Field rho = prob.conformal();
    Field lap;
    g.laplacian(f, lap);
    Field w = higgs_density(prob.higgs.u0, f);
    Field out(g.npts());
    for (int i = 0; i < g.npts(); ++i)
        out[i] = q0 + lap[i] + 0.5 * (w[i] - prob.tau) * rho[i];
    return out;
}

VortexSolution solve_vortex(const VortexProblem& prob, const Field* init) {
    const Surface& g = *prob.geom;
    const int npt = g.npts();
    const int N = prob.higgs.degree();
    const double tau = prob.tau;
    if (tau * g.volume <= 4.0 * kPi * N)
        throw BradlowViolated("solve_vortex: tau V <= 4 pi N");

    Field rho = prob.conformal();
    Field f;
    if (init && !init->empty()) {
        f = *init;
    } else {
        double me = 0.0;
        for (int i = 0; i < npt; ++i) me += std::exp(prob.higgs.u0[i]) * g.weights[i];
        me /= g.volume;
        f.assign(npt, 0.5 * (std::log(tau) - std::log(std::max(me, 1e-300))));
    }

    const double tol = 1e-8 * tau;
    double best_res = 1e300;
    double energy = mhat_energy(prob, f);
    VortexSolution sol;

    for (int step = 0; step < 60; ++step) {
        Field res = mhat_gradient(prob, f);
        double sup = 0.0;
        for (double v : res) sup = std::max(sup, std::fabs(v));
        sol.residual_sup = sup;
        sol.newton_iters = step;
        if (sup <= tol) break;

        double fmean = g.mean(f);
        if (fmean <= -50.0 && sup >= best_res * 0.999)
            throw BradlowViolated("solve_vortex: iterates diverge (mean f below -50, residual stuck)");
        best_res = std::min(best_res, sup);

        Field w = higgs_density(prob.higgs.u0, f);
        Field wr(npt);
        for (int i = 0; i < npt; ++i) wr[i] = w[i] * rho[i];
        double shift = std::max(g.mean(wr), 1e-12);

        Field neg(npt);
        for (int i = 0; i < npt; ++i) neg[i] = -res[i];
        Field delta(npt, 0.0);
        auto apply = [&](const Field& x, Field& out) {
            g.laplacian(x, out);
            for (int i = 0; i < npt; ++i) out[i] += wr[i] * x[i];
        };
        auto prec = [&](const Field& x, Field& out) { g.shifted_solve(x, shift, out); };
        pcg(g.weights, apply, prec, neg, delta, 1e-10, 400);

        // Armijo backtracking on Mhat; slope = <grad, delta> < 0 for SPD Newton.
        double slope = weighted_dot(g.weights, res, delta);
        double lambda = 1.0;
        Field trial(npt);
        for (int bt = 0; bt < 50; ++bt) {
            for (int i = 0; i < npt; ++i) trial[i] = f[i] + lambda * delta[i];
            double et = mhat_energy(prob, trial);
            if (et <= energy + 1e-4 * lambda * slope) {
                f.swap(trial);
                energy = et;
                break;
            }
            lambda *= 0.5;
        }
    }

    {
        Field res = mhat_gradient(prob, f);
        double sup = 0.0;
        for (double v : res) sup = std::max(sup, std::fabs(v));
        sol.residual_sup = sup;
    }
    Field w = higgs_density(prob.higgs.u0, f);
    double deg = 0.0, pmax = 0.0;
    for (int i = 0; i < npt; ++i) {
        deg += w[i] * rho[i] * g.weights[i];
        pmax = std::max(pmax, w[i]);
    }
    sol.f = std::move(f);
    sol.degree_defect = std::fabs(deg - (tau * g.volume - 4.0 * kPi * N));
    sol.pointwise_max = pmax;
    return sol;
}

std::pair<double, double> vortex_stability_bound(const VortexProblem& prob, const Field& kpot_a,
                                                 const Field& kpot_b) {
    VortexProblem pa = prob, pb = prob;
    pa.kpot = kpot_a;
    pb.kpot = kpot_b;
    VortexSolution sa = solve_vortex(pa), sb = solve_vortex(pb);
    const Surface& g = *prob.geom;
    Field df(g.npts()), dpsi(g.npts());
    for (int i = 0; i < g.npts(); ++i) {
        df[i] = sa.f[i] - sb.f[i];
        dpsi[i] = kpot_a[i] - kpot_b[i];
    }
    double lhs = 2.0 * dirichlet_pairing(g, df, df);
    double e = 2.0 * dirichlet_pairing(g, dpsi, dpsi);
    double n = prob.higgs.degree();
    double rhs = 0.25 * prob.tau * prob.tau * e + prob.tau * std::sqrt(2.0 * kPi * n) * std::sqrt(e);
    return {lhs, rhs};
}

}  // namespace vortexlab
