#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vortexlab/energy.h"
#include "vortexlab/rng.h"

#include <cmath>

using namespace vortexlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Fixture {
    std::shared_ptr<TorusSurface> t;
    HiggsData h;
    Fixture() {
        t = build_torus({0.0, 1.0}, 30.0, 32);
        Divisor d;
        SurfacePoint p;
        p.a = 0.31;
        p.b = 0.57;
        d.points.push_back(p);
        d.multiplicities.push_back(1);
        h = build_higgs_green(t, d);
    }
};

Field axpy(const Field& a, double s, const Field& b) {
    Field r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] += s * b[i];
    return r;
}

double ktilde_pair(const Surface& g, const HiggsData& h, double alpha, double tau, const Field& f,
                   const Field& kpot) {
    return k_energy(g, kpot) + m_alpha_pair(g, h, alpha, tau, f, kpot);
}

}  // namespace

TEST_CASE("k-energy vanishes on constants and is quadratic to leading order") {
    Fixture fx;
    Field zero(fx.t->npts(), 0.0);
    CHECK(k_energy(*fx.t, zero) == doctest::Approx(0.0).epsilon(1e-14));
    Field cst(fx.t->npts(), 3.7);
    CHECK(std::fabs(k_energy(*fx.t, cst)) < 1e-10);

    CounterRng rng(5, 0);
    Field v = random_smooth_field(*fx.t, rng, 1.0);
    Field v1 = axpy(zero, 0.01, v), v2 = axpy(zero, 0.02, v);
    double ratio = k_energy(*fx.t, v2) / k_energy(*fx.t, v1);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.02));
    CHECK(k_energy(*fx.t, v1) > 0.0);
}

TEST_CASE("pair and reduced coupling energies agree at the solved potential") {
    Fixture fx;
    CounterRng rng(6, 0);
    for (double alpha : {0.0, 0.3}) {
        Field kpot = random_smooth_field(*fx.t, rng, 0.1);
        VortexProblem prob{fx.t, fx.h, 1.0, kpot};
        VortexSolution sol = solve_vortex(prob);
        double pair = m_alpha_pair(*fx.t, fx.h, alpha, 1.0, sol.f, kpot);
        double red = m_alpha_reduced(*fx.t, fx.h, alpha, 1.0, kpot);
        CHECK(std::fabs(pair - red) < 1e-7 * (1.0 + std::fabs(red)));
    }
}

TEST_CASE("the coupling energy vanishes identically at alpha = 0") {
    Fixture fx;
    CounterRng rng(7, 0);
    Field kpot = random_smooth_field(*fx.t, rng, 0.1);
    CHECK(std::fabs(m_alpha_reduced(*fx.t, fx.h, 0.0, 1.0, kpot)) < 1e-9);
    EnergyBreakdown b = k_alpha_reduced(*fx.t, fx.h, 0.0, 1.0, kpot);
    CHECK(b.k_alpha == doctest::Approx(b.k_energy).epsilon(1e-12));
}

TEST_CASE("reduced energy is invariant under constant shifts of the potential") {
    Fixture fx;
    CounterRng rng(8, 0);
    Field kpot = random_smooth_field(*fx.t, rng, 0.1);
    Field shifted = kpot;
    for (double& x : shifted) x += 2.9;
    EnergyBreakdown a = k_alpha_reduced(*fx.t, fx.h, 0.2, 1.0, kpot);
    EnergyBreakdown b = k_alpha_reduced(*fx.t, fx.h, 0.2, 1.0, shifted);
    CHECK(std::fabs(a.k_alpha - b.k_alpha) < 1e-9 * (1.0 + std::fabs(a.k_alpha)));
}

TEST_CASE("first-variation density of the reduced energy matches differences") {
    Fixture fx;
    const double alpha = 0.2, tau = 1.0;
    CounterRng rng(9, 0);
    Field kpot = random_smooth_field(*fx.t, rng, 0.08);
    Field v = random_smooth_field(*fx.t, rng, 1.0);
    Field sig = sigma_alpha_density(*fx.t, fx.h, alpha, tau, kpot);

    double total = 0.0, paired = 0.0;
    for (int i = 0; i < fx.t->npts(); ++i) {
        total += sig[i] * fx.t->weights[i];
        paired += sig[i] * v[i] * fx.t->weights[i];
    }
    CHECK(std::fabs(total) < 1e-9);

    const double h = 1e-4;
    double fd = (k_alpha_reduced(*fx.t, fx.h, alpha, tau, axpy(kpot, h, v)).k_alpha -
                 k_alpha_reduced(*fx.t, fx.h, alpha, tau, axpy(kpot, -h, v)).k_alpha) /
                (2.0 * h);
    CHECK(paired == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("first variation of the pair energy matches differences") {
    Fixture fx;
    const double alpha = 0.15, tau = 1.0;
    CounterRng rng(10, 0);
    Field f = random_smooth_field(*fx.t, rng, 0.3);
    Field kpot = random_smooth_field(*fx.t, rng, 0.08);
    Field fdot = random_smooth_field(*fx.t, rng, 1.0);
    Field kdot = random_smooth_field(*fx.t, rng, 1.0);

    double lhs = ktilde_first_variation(*fx.t, fx.h, alpha, tau, f, kpot, fdot, kdot);
    const double h = 1e-5;
    double rhs = (ktilde_pair(*fx.t, fx.h, alpha, tau, axpy(f, h, fdot), axpy(kpot, h, kdot)) -
                  ktilde_pair(*fx.t, fx.h, alpha, tau, axpy(f, -h, fdot), axpy(kpot, -h, kdot))) /
                 (2.0 * h);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("a sign flip in the curvature density is caught by the difference check") {
    Fixture fx;
    const double alpha = 0.15, tau = 1.0;
    CounterRng rng(10, 0);  // same draws as the passing check above
    Field f = random_smooth_field(*fx.t, rng, 0.3);
    Field kpot = random_smooth_field(*fx.t, rng, 0.08);
    Field fdot = random_smooth_field(*fx.t, rng, 1.0);
    for (double& x : fdot) x += 0.3;  // nonzero mean so the constant term matters
    Field kdot = random_smooth_field(*fx.t, rng, 1.0);

    double lhs = ktilde_first_variation(*fx.t, fx.h, alpha, tau, f, kpot, fdot, kdot);
    const double q0 = 2.0 * kPi * fx.h.degree() / fx.t->volume;
    double flipped = lhs;
    for (int i = 0; i < fx.t->npts(); ++i)
        flipped -= 4.0 * alpha * fdot[i] * 2.0 * q0 * fx.t->weights[i];
    const double h = 1e-5;
    double rhs = (ktilde_pair(*fx.t, fx.h, alpha, tau, axpy(f, h, fdot), axpy(kpot, h, kdot)) -
                  ktilde_pair(*fx.t, fx.h, alpha, tau, axpy(f, -h, fdot), axpy(kpot, -h, kdot))) /
                 (2.0 * h);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    CHECK(std::fabs(flipped - rhs) > 1e-3);
}

TEST_CASE("second-variation decomposition sums to the finite-difference value") {
    Fixture fx;
    const double alpha = 0.2, tau = 1.0;
    CounterRng rng(11, 0);
    for (int jet_id = 0; jet_id < 3; ++jet_id) {
        PathJet jet;
        jet.f = random_smooth_field(*fx.t, rng, 0.25);
        jet.kpot = random_smooth_field(*fx.t, rng, 0.08);
        jet.f1 = random_smooth_field(*fx.t, rng, 0.5);
        jet.kpot1 = random_smooth_field(*fx.t, rng, 0.2);
        jet.f2 = random_smooth_field(*fx.t, rng, 0.5);
        jet.kpot2 = random_smooth_field(*fx.t, rng, 0.2);

        SecondVariation sv = second_variation_terms(*fx.t, fx.h, alpha, tau, jet);
        CHECK(sv.grad_f_term >= 0.0);
        CHECK(sv.potential_term > -1e-6 * (1.0 + std::fabs(sv.total)));
        CHECK(sv.higgs_term > -1e-6 * (1.0 + std::fabs(sv.total)));

        auto at = [&](double t) {
            Field f = jet.f, k = jet.kpot;
            for (int i = 0; i < fx.t->npts(); ++i) {
                f[i] += t * jet.f1[i] + 0.5 * t * t * jet.f2[i];
                k[i] += t * jet.kpot1[i] + 0.5 * t * t * jet.kpot2[i];
            }
            return ktilde_pair(*fx.t, fx.h, alpha, tau, f, k);
        };
        const double h = 1e-3;
        double fd = (-at(2 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2 * h)) /
                    (12.0 * h * h);
        CHECK(sv.total == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("the pair-energy Hessian is symmetric") {
    Fixture fx;
    const double alpha = 0.2, tau = 1.0;
    CounterRng rng(12, 0);
    Field f = random_smooth_field(*fx.t, rng, 0.25);
    Field kpot = random_smooth_field(*fx.t, rng, 0.08);
    const double h = 1e-4;
    for (int pair_id = 0; pair_id < 3; ++pair_id) {
        Field uf = random_smooth_field(*fx.t, rng, 0.5);
        Field uk = random_smooth_field(*fx.t, rng, 0.2);
        Field wf = random_smooth_field(*fx.t, rng, 0.5);
        Field wk = random_smooth_field(*fx.t, rng, 0.2);
        double huw =
            (ktilde_first_variation(*fx.t, fx.h, alpha, tau, axpy(f, h, wf), axpy(kpot, h, wk),
                                    uf, uk) -
             ktilde_first_variation(*fx.t, fx.h, alpha, tau, axpy(f, -h, wf), axpy(kpot, -h, wk),
                                    uf, uk)) /
            (2.0 * h);
        double hwu =
            (ktilde_first_variation(*fx.t, fx.h, alpha, tau, axpy(f, h, uf), axpy(kpot, h, uk),
                                    wf, wk) -
             ktilde_first_variation(*fx.t, fx.h, alpha, tau, axpy(f, -h, uf), axpy(kpot, -h, uk),
                                    wf, wk)) /
            (2.0 * h);
        double scale = std::max({1.0, std::fabs(huw), std::fabs(hwu)});
        CHECK(std::fabs(huw - hwu) <= 1e-8 * scale);
    }
}

TEST_CASE("normalization functional has the exact quadratic expansion") {
    Fixture fx;
    CounterRng rng(13, 0);
    Field v = random_smooth_field(*fx.t, rng, 0.5);
    for (double t : {0.3, 1.0}) {
        Field tv = v;
        for (double& x : tv) x *= t;
        double want = (t / fx.t->volume) * fx.t->integrate(v) -
                      (t * t / fx.t->volume) * dirichlet_pairing(*fx.t, v, v);
        CHECK(am_functional(*fx.t, tv) == doctest::Approx(want).epsilon(1e-11));
    }
}

TEST_CASE("separation functional is a definite quadratic of the difference") {
    Fixture fx;
    CounterRng rng(14, 0);
    Field u = random_smooth_field(*fx.t, rng, 0.5);
    Field w = random_smooth_field(*fx.t, rng, 0.5);
    CHECK(i_functional(*fx.t, u, u) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(i_functional(*fx.t, u, w) == doctest::Approx(i_functional(*fx.t, w, u)).epsilon(1e-12));
    CHECK(i_functional(*fx.t, u, w) > 0.0);
    Field shifted = u;
    for (double& x : shifted) x += 1.7;
    CHECK(i_functional(*fx.t, shifted, w) ==
          doctest::Approx(i_functional(*fx.t, u, w)).epsilon(1e-11));
}

TEST_CASE("twisting functional differentiates to the twisted density") {
    Fixture fx;
    CounterRng rng(15, 0);
    Field xi(fx.t->npts(), 1.0);
    Field noise = random_smooth_field(*fx.t, rng, 0.3);
    for (int i = 0; i < fx.t->npts(); ++i) xi[i] += noise[i];
    Field v = random_smooth_field(*fx.t, rng, 0.4);

    const double t0 = 0.2, h = 1e-5;
    Field base = v;
    for (double& x : base) x *= t0;
    double fd = (j_xi(*fx.t, xi, axpy(base, h, v)) - j_xi(*fx.t, xi, axpy(base, -h, v))) /
                (2.0 * h);
    Field rho = conformal_factor(*fx.t, base);
    double want = 0.0;
    for (int i = 0; i < fx.t->npts(); ++i)
        want += v[i] * (xi[i] - rho[i]) * fx.t->weights[i];
    CHECK(fd == doctest::Approx(want).epsilon(1e-8));

    Field badxi(fx.t->npts(), 1.2);
    CHECK_THROWS(j_xi(*fx.t, badxi, base));
}
