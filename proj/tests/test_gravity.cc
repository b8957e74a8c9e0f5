#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vortexlab/energy.h"
#include "vortexlab/gravity.h"
#include "vortexlab/rng.h"

#include <cmath>

using namespace vortexlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

Divisor one_point(double a, double b, int mult) {
    Divisor d;
    SurfacePoint p;
    p.a = a;
    p.b = b;
    d.points.push_back(p);
    d.multiplicities.push_back(mult);
    return d;
}

Divisor multi(std::initializer_list<int> mults) {
    Divisor d;
    double x = 0.1;
    for (int m : mults) {
        SurfacePoint p;
        p.a = x;
        x += 0.17;
        d.points.push_back(p);
        d.multiplicities.push_back(m);
    }
    return d;
}

double sup_abs(const Field& u) {
    double s = 0.0;
    for (double v : u) s = std::max(s, std::fabs(v));
    return s;
}

double sup_diff(const Field& a, const Field& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s = std::max(s, std::fabs(a[i] - b[i]));
    return s;
}

struct TorusCase {
    std::shared_ptr<TorusSurface> t;
    HiggsData h;
    TorusCase(int n = 64) {
        t = build_torus({0.0, 1.0}, 30.0, n);
        h = build_higgs_green(t, one_point(0.31, 0.57, 1));
    }
};

}  // namespace

TEST_CASE("topological constant examples") {
    CHECK(constant_c(0, 0.0, 1.0, 1, 4.0 * kPi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(constant_c(1, 0.3, 1.0, 1, 30.0) == doctest::Approx(-0.04 * kPi).epsilon(1e-14));
    CHECK(constant_c(0, 0.5, 2.0, 1, 7.0) == doctest::Approx(0.0).epsilon(1e-14));  // a tau N = 1
    CHECK_THROWS(constant_c(1, 0.0, 1.0, 1, -3.0));
}

TEST_CASE("coupled residual at alpha = 0 reduces to the vortex residual") {
    TorusCase tc;
    VortexProblem prob{tc.t, tc.h, 1.0, Field()};
    VortexSolution vs = solve_vortex(prob);
    GravConfig cfg{tc.t, tc.h, 1.0, 0.0, 0.05};
    auto [r1, r2] = coupled_residual(cfg, vs.f, Field(tc.t->npts(), 0.0));
    CHECK(sup_abs(r1) < 1e-8);
    CHECK(sup_abs(r2) < 1e-12);
}

TEST_CASE("continuity method reaches the target coupling on the torus") {
    TorusCase tc;
    GravConfig cfg{tc.t, tc.h, 1.0, 0.3, 0.05};
    GravOutcome o = solve_gravitating(cfg);
    REQUIRE(!o.trace.stalled);
    CHECK(o.sol.res_f_sup <= 1e-8);
    CHECK(o.sol.res_kpot_sup <= 1e-8);
    CHECK(o.trace.rows.back().alpha == doctest::Approx(0.3).epsilon(1e-12));

    // accepted alpha values strictly increase, each with converged residuals
    for (size_t k = 1; k < o.trace.rows.size(); ++k) {
        CHECK(o.trace.rows[k].alpha > o.trace.rows[k - 1].alpha);
        CHECK(o.trace.rows[k].res_f <= 1e-8);
        CHECK(o.trace.rows[k].res_kpot <= 1e-8);
    }

    VerifyReport vr = verify_solution(*tc.t, tc.h, 0.3, 1.0, o.sol);
    CHECK(vr.res_vortex_sup <= 1e-6);
    CHECK(vr.res_scalar_sup <= 1e-6);
    CHECK(vr.scalar_spread <= 1e-6);
    CHECK(std::fabs(vr.mean_minus_c) <= 1e-8);
    CHECK(vr.min_rho > 0.0);

    // both integral normalizations at the solution
    Field rho = conformal_factor(*tc.t, o.sol.kpot);
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < tc.t->npts(); ++i) {
        double w = std::exp(tc.h.u0[i] + 2.0 * o.sol.f[i]);
        m1 += (w - 1.0) * rho[i] * tc.t->weights[i];
        m2 += rho[i] * tc.t->weights[i];
    }
    CHECK(m1 == doctest::Approx(-4.0 * kPi).epsilon(1e-6));
    CHECK(m2 == doctest::Approx(30.0).epsilon(1e-9));

    // a priori pointwise bounds
    for (int i = 0; i < tc.t->npts(); ++i) {
        CHECK(2.0 * o.sol.f[i] <= -tc.h.u0[i] + 1e-8);
        CHECK(std::exp(tc.h.u0[i] + 2.0 * o.sol.f[i]) <= 1.0 + 1e-8);
    }

    // c matches the closed form and the trace serializes with the fixed header
    CHECK(o.sol.c == doctest::Approx(constant_c(1, 0.3, 1.0, 1, 30.0)).epsilon(1e-14));
    std::string csv = trace_csv(o.trace);
    CHECK(csv.rfind("alpha,newton_iters,res_f,res_kpot,k_alpha\n", 0) == 0);

    // the energy density of the first variation vanishes at the solution
    Field sig = sigma_alpha_density(*tc.t, tc.h, 0.3, 1.0, o.sol.kpot);
    CHECK(sup_abs(sig) < 1e-5);

    // minimization among nearby potentials
    CounterRng rng(77, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Field pert = random_smooth_field(*tc.t, rng, 0.05);
        Field moved = o.sol.kpot;
        for (int i = 0; i < tc.t->npts(); ++i) moved[i] += pert[i];
        double nearby = k_alpha_reduced(*tc.t, tc.h, 0.3, 1.0, moved).k_alpha;
        CHECK(o.sol.k_alpha_value <= nearby + 1e-10);
    }

    // verify_solution notices a broken input
    GravSolution bad = o.sol;
    for (double& v : bad.f) v += 1e-3;
    VerifyReport vb = verify_solution(*tc.t, tc.h, 0.3, 1.0, bad);
    CHECK(vb.res_vortex_sup > 1e-4);

    // two initializations agree
    CounterRng rng2(78, 0);
    Field f0 = o.sol.f, k0 = o.sol.kpot;
    Field nf = random_smooth_field(*tc.t, rng2, 0.05);
    Field nk = random_smooth_field(*tc.t, rng2, 0.02);
    for (int i = 0; i < tc.t->npts(); ++i) {
        f0[i] += nf[i];
        k0[i] += nk[i];
    }
    GravOutcome o2 = solve_gravitating(cfg, &f0, &k0);
    REQUIRE(!o2.trace.stalled);
    CHECK(sup_diff(o2.sol.f, o.sol.f) <= 1e-6);
    Field da(tc.t->npts()), db(tc.t->npts());
    double ma = tc.t->mean(o.sol.kpot), mb = tc.t->mean(o2.sol.kpot);
    for (int i = 0; i < tc.t->npts(); ++i) {
        da[i] = o.sol.kpot[i] - ma;
        db[i] = o2.sol.kpot[i] - mb;
    }
    CHECK(sup_diff(da, db) <= 1e-6);
}

TEST_CASE("gravitating solve rejects volumes at the degree threshold") {
    auto t = build_torus({0.0, 1.0}, 10.0, 32);
    HiggsData h = build_higgs_green(t, one_point(0.25, 0.5, 1));
    GravConfig cfg{t, h, 1.0, 0.2, 0.05};
    CHECK_THROWS_AS((void)solve_gravitating(cfg), BradlowViolated);
}

TEST_CASE("the balanced sphere pair admits a gravitating solution") {
    auto s = build_sphere(50.0, 32);
    Divisor d = one_point(0.0, 0.0, 1);
    SurfacePoint q;
    q.at_inf = true;
    d.points.push_back(q);
    d.multiplicities.push_back(1);
    HiggsData h = build_higgs_explicit_sphere(s, d);
    GravConfig cfg{s, h, 1.0, 0.05, 0.05};
    GravOutcome o = solve_gravitating(cfg);
    REQUIRE(!o.trace.stalled);
    CHECK(o.sol.res_f_sup <= 1e-8);
    CHECK(o.sol.res_kpot_sup <= 1e-8);
    VerifyReport vr = verify_solution(*s, h, 0.05, 1.0, o.sol);
    CHECK(vr.res_scalar_sup <= 1e-6);
}

TEST_CASE("twisted solve at zero twist matches the untwisted system") {
    TorusCase tc(48);
    GravConfig cfg{tc.t, tc.h, 1.0, 0.3, 0.05};
    GravOutcome o = solve_gravitating(cfg);
    REQUIRE(!o.trace.stalled);
    Field xi(tc.t->npts(), 1.0);
    GravSolution tw = solve_twisted(cfg, xi, 0.0, &o.sol.f, &o.sol.kpot);
    CHECK(tw.res_f_sup <= 1e-9);
    CHECK(sup_diff(tw.f, o.sol.f) < 1e-8);
    Field da(tc.t->npts()), db(tc.t->npts());
    double ma = tc.t->mean(o.sol.kpot), mb = tc.t->mean(tw.kpot);
    for (int i = 0; i < tc.t->npts(); ++i) {
        da[i] = o.sol.kpot[i] - ma;
        db[i] = tw.kpot[i] - mb;
    }
    CHECK(sup_diff(da, db) < 1e-8);
}

TEST_CASE("small twists perturb the solution continuously") {
    TorusCase tc(48);
    GravConfig cfg{tc.t, tc.h, 1.0, 0.3, 0.05};
    GravOutcome o = solve_gravitating(cfg);
    REQUIRE(!o.trace.stalled);
    CounterRng rng(91, 0);
    Field xi(tc.t->npts(), 1.0);
    Field noise = random_smooth_field(*tc.t, rng, 0.2);
    for (int i = 0; i < tc.t->npts(); ++i) xi[i] += noise[i];

    GravSolution t1 = solve_twisted(cfg, xi, 0.02, &o.sol.f, &o.sol.kpot);
    GravSolution t2 = solve_twisted(cfg, xi, 0.04, &o.sol.f, &o.sol.kpot);
    CHECK(t1.res_f_sup <= 1e-9);
    CHECK(t2.res_f_sup <= 1e-9);
    double d1 = sup_diff(t1.f, o.sol.f);
    double d2 = sup_diff(t2.f, o.sol.f);
    CHECK(d1 > 1e-8);           // the twist has an effect
    CHECK(d2 < 4.0 * d1);       // and it scales roughly linearly

    Field negxi(tc.t->npts(), -1.0);
    CHECK_THROWS((void)solve_twisted(cfg, negxi, 0.02));
    Field badmass(tc.t->npts(), 1.1);
    CHECK_THROWS((void)solve_twisted(cfg, badmass, 0.02));
    CHECK_THROWS((void)solve_twisted(cfg, xi, 5.0));  // beyond the perturbative bound
}

TEST_CASE("closed-form obstruction values") {
    CHECK(futaki_closed_form(0.05, 1.0, 3, 1, 50.0) ==
          doctest::Approx(0.1 * (50.0 - 12.0 * kPi)).epsilon(1e-14));
    CHECK(futaki_closed_form(0.05, 1.0, 3, 2, 50.0) ==
          doctest::Approx(-0.1 * (50.0 - 12.0 * kPi)).epsilon(1e-14));
    CHECK(futaki_closed_form(0.2, 1.0, 2, 1, 50.0) == doctest::Approx(0.0));
    CHECK_THROWS(futaki_closed_form(0.05, 1.0, 3, 1, 12.0 * kPi));
}

TEST_CASE("polystability classifier on the reference partitions") {
    StabilityVerdict v = check_polystability(multi({1, 1, 1}));
    CHECK(v.kind == Stability::stable);
    v = check_polystability(multi({2, 2}));
    CHECK(v.kind == Stability::polystable);
    v = check_polystability(multi({2, 1}));
    CHECK(v.kind == Stability::unstable);
    CHECK(v.witness_index == 0);
    v = check_polystability(multi({1}));
    CHECK(v.kind == Stability::unstable);
    v = check_polystability(multi({4, 3, 1}));
    CHECK(v.kind == Stability::unstable);
    CHECK(v.witness_index == 0);
    v = check_polystability(multi({3, 3, 2}));
    CHECK(v.kind == Stability::stable);
    v = check_polystability(multi({4, 4}));
    CHECK(v.kind == Stability::polystable);
}

TEST_CASE("config validation names the broken contract") {
    TorusCase tc(32);
    GravConfig bad_tau{tc.t, tc.h, -1.0, 0.2, 0.05};
    CHECK_THROWS(solve_gravitating(bad_tau));
    GravConfig bad_alpha{tc.t, tc.h, 1.0, -0.2, 0.05};
    CHECK_THROWS(solve_gravitating(bad_alpha));
    GravConfig null_geom{nullptr, tc.h, 1.0, 0.2, 0.05};
    CHECK_THROWS(solve_gravitating(null_geom));
}
