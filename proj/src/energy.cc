#include "vortexlab/energy.h"

#include <cmath>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

Field zero_if_empty(const Field& f, int n) { return f.empty() ? Field(n, 0.0) : f; }

// Residual densities of the coupled system at an arbitrary pair (f, kpot),
// both taken against omega0. p1 is the vortex residual; p2 is the metric
// residual, i.e. the density of the first variation in the kpot direction.
struct PairState {
    Field rho, u, lap_u, w, lap_w, lap_f, p1, p2;
    double q0 = 0.0, c = 0.0;
};

PairState pair_state(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                     const Field& f, const Field& kpot) {
    PairState st;
    const int n = g.npts();
    st.q0 = 2.0 * kPi * higgs.degree() / g.volume;
    st.c = constant_c(g.genus, alpha, tau, higgs.degree(), g.volume);
    st.rho = kpot.empty() ? Field(n, 1.0) : conformal_factor(g, kpot);
    st.u.resize(n);
    for (int i = 0; i < n; ++i) st.u[i] = 0.5 * std::log(st.rho[i]);
    g.laplacian(st.u, st.lap_u);
    st.w.resize(n);
    for (int i = 0; i < n; ++i) st.w[i] = std::exp(higgs.u0[i] + 2.0 * f[i]);
    g.laplacian(st.w, st.lap_w);
    g.laplacian(f, st.lap_f);
    st.p1.resize(n);
    st.p2.resize(n);
    for (int i = 0; i < n; ++i) {
        st.p1[i] = st.q0 + st.lap_f[i] + 0.5 * (st.w[i] - tau) * st.rho[i];
        st.p2[i] = -(g.s0[i] + st.lap_u[i]) - alpha * st.lap_w[i] +
                   2.0 * alpha * tau * (st.q0 + st.lap_f[i]) + st.c * st.rho[i];
    }
    return st;
}

VortexSolution solve_for(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                         const Field& kpot) {
    (void)alpha;
    if (!higgs.geom || higgs.geom.get() != &g)
        throw std::invalid_argument("energy: HiggsData not built on this geometry");
    VortexProblem prob{higgs.geom, higgs, tau, kpot};
    return solve_vortex(prob);
}
}  // namespace

double constant_c(int genus, double alpha, double tau, int degree, double volume) {
    if (!(volume > 0.0)) throw std::invalid_argument("constant_c: volume must be positive");
    return 2.0 * kPi * (2.0 - 2.0 * genus - 2.0 * alpha * tau * degree) / volume;
}

double k_energy(const Surface& g, const Field& kpot) {
    Field rho = conformal_factor(g, kpot);
    double ent = 0.0, lin = 0.0;
    for (int i = 0; i < g.npts(); ++i) {
        ent += std::log(rho[i]) * rho[i] * g.weights[i];
        lin += kpot[i] * (rho[i] - 1.0) * g.weights[i];
    }
    return 0.5 * ent + 0.5 * g.mean_curvature * lin;
}

double m_alpha_pair(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                    const Field& f, const Field& kpot) {
    const int n = g.npts();
    const double q0 = 2.0 * kPi * higgs.degree() / g.volume;
    const double c = constant_c(g.genus, alpha, tau, higgs.degree(), g.volume);
    const double sbar = g.mean_curvature;
    Field rho = kpot.empty() ? Field(n, 1.0) : conformal_factor(g, kpot);
    Field lap_f;
    g.laplacian(f, lap_f);
    Field phi = zero_if_empty(kpot, n);

    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t5 = 0.0;
    const double coef5 = -sbar + 2.0 * alpha * tau * q0 + c;  // vanishes by the choice of c
    for (int i = 0; i < n; ++i) {
        double w0 = std::exp(higgs.u0[i]);
        double wf = std::exp(higgs.u0[i] + 2.0 * f[i]);
        double wm = g.weights[i];
        t1 += f[i] * (2.0 * q0 + lap_f[i]) * wm;
        t2 += (wf * rho[i] - w0) * wm;
        t3 += f[i] * rho[i] * wm;
        t5 += phi[i] * wm;
    }
    double t4 = -(c - sbar) * dirichlet_pairing(g, phi, phi);
    return 2.0 * alpha * t1 + alpha * t2 - 2.0 * alpha * tau * t3 + t4 + coef5 * t5;
}

double m_alpha_reduced(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                       const Field& kpot) {
    VortexSolution sol = solve_for(g, higgs, alpha, tau, kpot);
    const int n = g.npts();
    const double q0 = 2.0 * kPi * higgs.degree() / g.volume;
    const double c = constant_c(g.genus, alpha, tau, higgs.degree(), g.volume);
    const double sbar = g.mean_curvature;
    const int N = higgs.degree();
    Field psi = zero_if_empty(kpot, n);

    double fint = 0.0, w0int = 0.0, psiint = 0.0;
    for (int i = 0; i < n; ++i) {
        fint += sol.f[i] * g.weights[i];
        w0int += std::exp(higgs.u0[i]) * g.weights[i];
        psiint += psi[i] * g.weights[i];
    }
    double r1 = 4.0 * alpha * q0 * fint + 4.0 * alpha * dirichlet_pairing(g, sol.f, sol.f);
    double r2 = -2.0 * alpha * tau * fint + 4.0 * alpha * tau * dirichlet_pairing(g, sol.f, psi);
    double r3 = -(c - sbar) * dirichlet_pairing(g, psi, psi);
    double r4 = alpha * tau * (g.volume - 4.0 * kPi * N / tau) - alpha * w0int;
    double r5 = (-sbar + 2.0 * alpha * tau * q0 + c) * psiint;
    return r1 + r2 + r3 + r4 + r5;
}

EnergyBreakdown k_alpha_reduced(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                                const Field& kpot) {
    EnergyBreakdown b;
    b.k_energy = k_energy(g, zero_if_empty(kpot, g.npts()));
    b.m_alpha = m_alpha_reduced(g, higgs, alpha, tau, kpot);
    b.k_alpha = b.k_energy + b.m_alpha;
    Field rho = kpot.empty() ? Field(g.npts(), 1.0) : conformal_factor(g, kpot);
    double ent = 0.0;
    for (int i = 0; i < g.npts(); ++i) ent += std::log(rho[i]) * rho[i] * g.weights[i];
    b.entropy = ent / g.volume;
    b.am = am_functional(g, zero_if_empty(kpot, g.npts()));
    b.constants.alpha = alpha;
    b.constants.tau = tau;
    b.constants.volume = g.volume;
    b.constants.degree = higgs.degree();
    b.constants.c = constant_c(g.genus, alpha, tau, higgs.degree(), g.volume);
    b.constants.mean_s = g.mean_curvature;
    return b;
}

Field sigma_alpha_density(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                          const Field& kpot) {
    VortexSolution sol = solve_for(g, higgs, alpha, tau, kpot);
    PairState st = pair_state(g, higgs, alpha, tau, sol.f, kpot);
    return st.p2;
}

double ktilde_first_variation(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                              const Field& f, const Field& kpot, const Field& fdot,
                              const Field& kdot) {
    PairState st = pair_state(g, higgs, alpha, tau, f, kpot);
    double acc = 0.0;
    for (int i = 0; i < g.npts(); ++i)
        acc += (4.0 * alpha * fdot[i] * st.p1[i] + kdot[i] * st.p2[i]) * g.weights[i];
    return acc;
}

SecondVariation second_variation_terms(const Surface& g, const HiggsData& higgs, double alpha,
                                       double tau, const PathJet& jet) {
    const int n = g.npts();
    PairState st = pair_state(g, higgs, alpha, tau, jet.f, jet.kpot);
    Field fx, fy, px, py, wx, wy, lap_p1;
    g.grad_components(jet.f1, fx, fy);
    g.grad_components(jet.kpot1, px, py);
    g.grad_components(st.w, wx, wy);
    g.laplacian(jet.kpot1, lap_p1);

    SecondVariation sv;
    for (int i = 0; i < n; ++i) {
        const double wm = g.weights[i];
        const double B = (st.q0 + st.lap_f[i]) / st.rho[i];
        const double gp2 = px[i] * px[i] + py[i] * py[i];

        double ax = fx[i] + B * px[i], ay = fy[i] + B * py[i];
        sv.grad_f_term += 4.0 * alpha * (ax * ax + ay * ay) * wm;

        double a_boch = B * st.w[i] - 0.5 * st.lap_w[i] / st.rho[i];
        sv.higgs_term += 4.0 * alpha *
                         (0.5 * gp2 * a_boch - jet.f1[i] * (px[i] * wx[i] + py[i] * wy[i]) +
                          jet.f1[i] * jet.f1[i] * st.w[i] * st.rho[i]) *
                         wm;

        sv.potential_term += (0.5 * lap_p1[i] * lap_p1[i] / st.rho[i] -
                              (g.s0[i] + st.lap_u[i]) * gp2 / st.rho[i]) *
                             wm;

        double cross = 2.0 * (fx[i] * px[i] + fy[i] * py[i]) + B * gp2;
        sv.moment1_term += 4.0 * alpha * (jet.f2[i] * st.p1[i] - cross * st.p1[i] / st.rho[i]) * wm;

        sv.moment2_term += (jet.kpot2[i] * st.p2[i] - gp2 * st.p2[i] / st.rho[i]) * wm;
    }
    sv.total = sv.grad_f_term + sv.higgs_term + sv.potential_term + sv.moment1_term + sv.moment2_term;
    return sv;
}

double am_functional(const Surface& g, const Field& kpot) {
    Field rho = conformal_factor(g, kpot);
    double acc = 0.0;
    for (int i = 0; i < g.npts(); ++i) acc += kpot[i] * (1.0 + rho[i]) * g.weights[i];
    return acc / (2.0 * g.volume);
}

double i_functional(const Surface& g, const Field& u0, const Field& u1) {
    Field d(g.npts());
    for (int i = 0; i < g.npts(); ++i) d[i] = u0[i] - u1[i];
    return 2.0 / g.volume * dirichlet_pairing(g, d, d);
}

double j_xi(const Surface& g, const Field& xi, const Field& kpot) {
    double mass = g.integrate(xi);
    if (std::fabs(mass - g.volume) > 1e-6 * g.volume)
        throw std::invalid_argument("j_xi: density must integrate to V");
    Field rho = conformal_factor(g, kpot);
    double acc = 0.0;
    for (int i = 0; i < g.npts(); ++i)
        acc += kpot[i] * (xi[i] - 0.5 * (1.0 + rho[i])) * g.weights[i];
    return acc;
}

}  // namespace vortexlab
