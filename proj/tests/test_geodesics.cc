#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vortexlab/geodesics.h"
#include "vortexlab/rng.h"

#include <cmath>

using namespace vortexlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

double sup_abs(const Field& u) {
    double s = 0.0;
    for (double v : u) s = std::max(s, std::fabs(v));
    return s;
}

// Closed form of int of ray velocity against omega0 at time t (b = 0):
// (V^2/4pi) [4 (e/(e-1) - e log(e)/(e-1)^2) - 2] with e = exp(4t).
double ray_mean_velocity_integral(double V, double t) {
    double e = std::exp(4.0 * t);
    double inner = e / (e - 1.0) - e * std::log(e) / ((e - 1.0) * (e - 1.0));
    return V * V / (4.0 * kPi) * (4.0 * inner - 2.0);
}

}  // namespace

TEST_CASE("ray potential starts at zero and shifts linearly with b") {
    auto s = build_sphere(20.0, 32);
    Field p0 = fs_ray_potential(*s, 0.0);
    CHECK(sup_abs(p0) < 1e-14);

    Field pa = fs_ray_potential(*s, 0.7, 0.0);
    Field pb = fs_ray_potential(*s, 0.7, 1.3);
    for (int i = 0; i < s->npts(); ++i)
        CHECK(pb[i] - pa[i] == doctest::Approx(1.3 * 0.7).epsilon(1e-12));

    CHECK_THROWS(fs_ray_potential(*s, 31.0));
}

TEST_CASE("ray velocity is the time derivative of the ray potential") {
    auto s = build_sphere(20.0, 32);
    const double t = 0.45, h = 1e-6;
    Field vel = fs_ray_velocity(*s, t, 0.2);
    Field fp = fs_ray_potential(*s, t + h, 0.2);
    Field fm = fs_ray_potential(*s, t - h, 0.2);
    double worst = 0.0;
    for (int i = 0; i < s->npts(); ++i)
        worst = std::max(worst, std::fabs(vel[i] - (fp[i] - fm[i]) / (2.0 * h)));
    CHECK(worst < 1e-7 * s->volume);

    Field v0 = fs_ray_velocity(*s, 0.0, 0.2);
    for (int i = 0; i < s->npts(); ++i) {
        double x = s->glx[i / s->nlon];
        CHECK(v0[i] == doctest::Approx(-(s->volume / (2.0 * kPi)) * x + 0.2).epsilon(1e-10));
    }
}

TEST_CASE("closed-form ray density matches the spectral conformal factor") {
    auto s = build_sphere(20.0, 64);
    const double t = 0.4;
    Field pot = fs_ray_potential(*s, t);
    Field rho_spec = conformal_factor(*s, pot);
    Field rho_exact = fs_ray_conformal(*s, t);
    CHECK(sup_abs(rho_exact) > 1.0);
    double worst = 0.0;
    for (int i = 0; i < s->npts(); ++i)
        worst = std::max(worst, std::fabs(rho_spec[i] - rho_exact[i]));
    CHECK(worst < 1e-8);
    CHECK(s->integrate(rho_exact) == doctest::Approx(s->volume).epsilon(1e-10));
}

TEST_CASE("the J slope along the ray matches its closed form") {
    auto s = build_sphere(20.0, 64);
    Field ones(s->npts(), 1.0);
    CHECK(ray_j_slope(*s, ones, 0.0) == doctest::Approx(0.0).epsilon(1e-10));
    for (double t : {0.5, 1.0}) {
        // d/dt J_1 = int vel (1 - rho_t): the rho_t term integrates to the
        // t = 0 mean of the velocity, which vanishes for b = 0.
        double want = ray_mean_velocity_integral(s->volume, t);
        CHECK(ray_j_slope(*s, ones, t) == doctest::Approx(want).epsilon(1e-7));
    }
    // saturation toward V^2/2pi
    double sat = ray_j_slope(*s, ones, 8.0);
    CHECK(sat == doctest::Approx(s->volume * s->volume / (2.0 * kPi)).epsilon(1e-3));
}

TEST_CASE("the exact ray solves the geodesic equation and an affine path does not") {
    auto s = build_sphere(20.0, 48);
    const double t = 0.3, dt = 1e-3;
    Field prev = fs_ray_potential(*s, t - dt);
    Field mid = fs_ray_potential(*s, t);
    Field next = fs_ray_potential(*s, t + dt);
    double res = geodesic_residual(*s, prev, mid, next, dt);
    CHECK(res < 1e-5 * s->volume);

    // b only shifts the potential affinely in t; the residual is unchanged.
    Field prevb = fs_ray_potential(*s, t - dt, 0.9);
    Field midb = fs_ray_potential(*s, t, 0.9);
    Field nextb = fs_ray_potential(*s, t + dt, 0.9);
    CHECK(geodesic_residual(*s, prevb, midb, nextb, dt) == doctest::Approx(res).epsilon(1e-6));

    Field end = fs_ray_potential(*s, 0.6);
    Field a1(s->npts()), a2(s->npts());
    for (int i = 0; i < s->npts(); ++i) {
        a1[i] = end[i] * (0.5 - dt / 0.6);
        a2[i] = end[i] * 0.5;
    }
    Field a3(s->npts());
    for (int i = 0; i < s->npts(); ++i) a3[i] = end[i] * (0.5 + dt / 0.6);
    CHECK(geodesic_residual(*s, a1, a2, a3, dt) > 1e-2);
}

TEST_CASE("zonal profiles expand and restrict consistently") {
    auto s = build_sphere(12.0, 24);
    Field prof(s->nlat);
    for (int i = 0; i < s->nlat; ++i) prof[i] = std::sin(2.0 * s->glx[i]);
    Field full = expand_zonal(*s, prof);
    Field back = zonal_profile(*s, full);
    for (int i = 0; i < s->nlat; ++i) CHECK(back[i] == doctest::Approx(prof[i]).epsilon(1e-14));

    full[s->node_index(3, 5)] += 0.1;  // break axisymmetry
    CHECK_THROWS((void)zonal_profile(*s, full));
}

TEST_CASE("epsilon geodesic with equal endpoints is the parabolic arc") {
    auto s = build_sphere(15.0, 24);
    Field zero(s->npts(), 0.0);
    const double eps = 0.3;
    EpsilonGeodesic eg = solve_epsilon_geodesic(*s, zero, zero, eps, 17);
    REQUIRE((int)eg.times.size() == 17);
    double worst = 0.0;
    for (int k = 0; k < 17; ++k) {
        double t = eg.times[k];
        double want = 0.5 * eps * t * (t - 1.0);
        for (int i = 0; i < s->nlat; ++i)
            worst = std::max(worst, std::fabs(eg.zonal[k][i] - want));
    }
    CHECK(worst < 1e-9);
    CHECK(eg.residual_sup < 1e-7);
}

TEST_CASE("epsilon geodesic between distinct zonal endpoints converges") {
    auto s = build_sphere(15.0, 24);
    Field zero(s->npts(), 0.0);
    Field end = fs_ray_potential(*s, 0.3);
    EpsilonGeodesic eg = solve_epsilon_geodesic(*s, zero, end, 0.05, 21);
    CHECK(eg.residual_sup < 1e-7);
    // endpoints are reproduced exactly
    Field endprof = zonal_profile(*s, end);
    for (int i = 0; i < s->nlat; ++i) {
        CHECK(eg.zonal[0][i] == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(eg.zonal[20][i] == doctest::Approx(endprof[i]).epsilon(1e-13));
    }
    CHECK_THROWS((void)solve_epsilon_geodesic(*s, zero, end, -0.1, 21));
    CHECK_THROWS((void)solve_epsilon_geodesic(*s, zero, end, 0.05, 3));
}

TEST_CASE("path length along the ray matches the invariant speed") {
    auto s = build_sphere(20.0, 48);
    const int K = 51;
    const double T = 0.5;
    std::vector<double> times(K);
    std::vector<Field> kpots(K);
    for (int k = 0; k < K; ++k) {
        times[k] = T * k / (K - 1);
        kpots[k] = fs_ray_potential(*s, times[k]);
    }
    double len = d1_path_length(*s, times, kpots);
    double want = T * s->volume * s->volume / (4.0 * kPi);
    CHECK(len == doctest::Approx(want).epsilon(0.01));
}

TEST_CASE("normalization functional is affine along the ray") {
    auto s = build_sphere(20.0, 48);
    for (double b : {0.0, 0.7}) {
        double a1 = am_functional(*s, fs_ray_potential(*s, 0.2, b));
        double a2 = am_functional(*s, fs_ray_potential(*s, 0.4, b));
        double a3 = am_functional(*s, fs_ray_potential(*s, 0.6, b));
        CHECK(std::fabs(a1 - 2.0 * a2 + a3) < 1e-6);
        CHECK((a2 - a1) / 0.2 == doctest::Approx(b).epsilon(1e-5));
    }
}

TEST_CASE("energy profile along the ray has nondecreasing slope") {
    auto s = build_sphere(50.0, 32);
    Divisor d;
    SurfacePoint p0, p1, p2;
    p1.a = 1.0;
    p2.a = -1.0;
    d.points = {p0, p1, p2};
    d.multiplicities = {1, 1, 1};
    HiggsData h = build_higgs_explicit_sphere(s, d);
    std::vector<double> tgrid = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<RayProfileRow> rows = ray_k_alpha_profile(*s, h, 0.05, 1.0, tgrid);
    REQUIRE(rows.size() == tgrid.size());
    for (size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].k_alpha_prime >= rows[i - 1].k_alpha_prime - 1e-9);
    // cumulative energy is consistent with the trapezoid of its slope
    double acc = rows[0].k_alpha;
    for (size_t i = 1; i < rows.size(); ++i) {
        acc += 0.5 * (rows[i].k_alpha_prime + rows[i - 1].k_alpha_prime) *
               (tgrid[i] - tgrid[i - 1]);
        CHECK(rows[i].k_alpha == doctest::Approx(acc).epsilon(1e-10));
    }
}

TEST_CASE("sequence extrapolation recovers geometric limits") {
    double s = 2.5, q = 0.4, c = 1.7;
    double a1 = s - c * q, a2 = s - c * q * q, a3 = s - c * q * q * q;
    CHECK(aitken_limit(a1, a2, a3) == doctest::Approx(s).epsilon(1e-12));
    CHECK(aitken_limit(1.0, 1.0, 1.0) == doctest::Approx(1.0));
}
