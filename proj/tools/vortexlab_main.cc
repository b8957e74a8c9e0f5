#include "CLI11.hpp"

#include "vortexlab/config.h"
#include "vortexlab/fields_io.h"
#include "vortexlab/geodesics.h"
#include "vortexlab/gravity.h"
#include "vortexlab/rng.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr const char* kVersion = "vortexlab 1.0.0";
constexpr double kPi = 3.14159265358979323846;

int g_threads = 1;

struct Report {
    std::ostringstream body;

    template <typename T>
    void kv(const std::string& key, const T& value) {
        std::ostringstream v;
        v.precision(17);
        v << value;
        body << key << " = " << v.str() << "\n";
    }
    void line(const std::string& s) { body << s << "\n"; }
};

void emit_report(const vortexlab::RunConfig& cfg, const Report& rep) {
    std::ostringstream os;
    os << "version = " << kVersion << "\n";
    os << "threads = " << g_threads << "\n\n";
    os << "[resolved-config]\n" << vortexlab::resolved_config_text(cfg) << "\n";
    os << "[report]\n" << rep.body.str();
    const std::string text = os.str();
    std::ofstream f(std::filesystem::path(cfg.output) / "report.txt");
    f << text;
    std::cout << text;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

struct Built {
    std::shared_ptr<const vortexlab::Surface> geom;
    std::shared_ptr<vortexlab::SphereSurface> sphere;  // set when genus 0
    vortexlab::HiggsData higgs;
};

Built build_problem(const vortexlab::RunConfig& cfg) {
    Built b;
    if (cfg.genus == 0) {
        b.sphere = vortexlab::build_sphere(cfg.volume, cfg.band_limit);
        b.geom = b.sphere;
        b.higgs = vortexlab::build_higgs_explicit_sphere(b.sphere, cfg.divisor);
    } else {
        b.geom = vortexlab::build_torus({cfg.modulus_re, cfg.modulus_im}, cfg.volume,
                                        cfg.resolution);
        b.higgs = vortexlab::build_higgs_green(b.geom, cfg.divisor);
    }
    return b;
}

int run_solve_vortex(const vortexlab::RunConfig& cfg) {
    Built b = build_problem(cfg);
    vortexlab::VortexProblem prob{b.geom, b.higgs, cfg.tau, vortexlab::Field()};
    vortexlab::VortexSolution sol = vortexlab::solve_vortex(prob);
    vortexlab::save_field_file((std::filesystem::path(cfg.output) / "f.field").string(), *b.geom,
                               sol.f);
    Report rep;
    rep.kv("residual_sup", sol.residual_sup);
    rep.kv("degree_defect", sol.degree_defect);
    rep.kv("pointwise_max", sol.pointwise_max);
    rep.kv("newton_iters", sol.newton_iters);
    rep.kv("mhat", vortexlab::mhat_energy(prob, sol.f));
    emit_report(cfg, rep);
    return 0;
}

int run_solve_gravitating(const vortexlab::RunConfig& cfg) {
    Built b = build_problem(cfg);
    vortexlab::GravConfig gc{b.geom, b.higgs, cfg.tau, cfg.alpha, 0.05};
    vortexlab::GravOutcome o = vortexlab::solve_gravitating(gc);
    const std::filesystem::path out(cfg.output);
    write_text(out / "trace.csv", vortexlab::trace_csv(o.trace));
    vortexlab::save_field_file((out / "f.field").string(), *b.geom, o.sol.f);
    vortexlab::save_field_file((out / "kpot.field").string(), *b.geom, o.sol.kpot);
    Report rep;
    rep.kv("reached_alpha", o.trace.rows.back().alpha);
    rep.kv("stalled", o.trace.stalled ? 1 : 0);
    rep.kv("c", o.sol.c);
    rep.kv("res_f", o.sol.res_f_sup);
    rep.kv("res_kpot", o.sol.res_kpot_sup);
    rep.kv("k_alpha", o.sol.k_alpha_value);
    for (const std::string& w : o.trace.warnings) rep.kv("warning", w);
    if (!o.trace.stalled) {
        vortexlab::VerifyReport vr =
            vortexlab::verify_solution(*b.geom, b.higgs, cfg.alpha, cfg.tau, o.sol);
        rep.kv("verify_res_vortex", vr.res_vortex_sup);
        rep.kv("verify_res_scalar", vr.res_scalar_sup);
        rep.kv("verify_spread", vr.scalar_spread);
        rep.kv("verify_mean_minus_c", vr.mean_minus_c);
        rep.kv("verify_min_rho", vr.min_rho);
    } else {
        rep.kv("stall_alpha", o.trace.stall_alpha);
        if (!o.trace.d1_steps.empty()) rep.kv("last_d1_step", o.trace.d1_steps.back());
        if (!o.trace.mean_f_path.empty()) rep.kv("last_mean_f", o.trace.mean_f_path.back());
    }
    emit_report(cfg, rep);
    return o.trace.stalled ? 2 : 0;
}

int run_solve_twisted(const vortexlab::RunConfig& cfg) {
    Built b = build_problem(cfg);
    vortexlab::GravConfig gc{b.geom, b.higgs, cfg.tau, cfg.alpha, 0.05};
    vortexlab::Field xi(b.geom->npts(), 1.0);
    vortexlab::GravSolution sol = vortexlab::solve_twisted(gc, xi, cfg.lambda);
    const std::filesystem::path out(cfg.output);
    vortexlab::save_field_file((out / "f.field").string(), *b.geom, sol.f);
    vortexlab::save_field_file((out / "kpot.field").string(), *b.geom, sol.kpot);
    Report rep;
    rep.kv("lambda", cfg.lambda);
    rep.kv("c", sol.c);
    rep.kv("res_f", sol.res_f_sup);
    rep.kv("res_kpot", sol.res_kpot_sup);
    rep.kv("k_alpha", sol.k_alpha_value);
    emit_report(cfg, rep);
    return 0;
}

int run_ray_slope(const vortexlab::RunConfig& cfg) {
    if (cfg.genus != 0) throw vortexlab::ConfigError("ray-slope requires the sphere");
    Built b = build_problem(cfg);
    int n1 = 0;
    for (size_t j = 0; j < cfg.divisor.points.size(); ++j) {
        const auto& p = cfg.divisor.points[j];
        if (!p.at_inf && std::hypot(p.a, p.b) < 1e-12) n1 = cfg.divisor.multiplicities[j];
    }
    std::vector<double> tgrid;
    for (int k = 0; k <= 12; ++k) tgrid.push_back(0.5 * k);
    std::vector<vortexlab::RayProfileRow> rows =
        vortexlab::ray_k_alpha_profile(*b.sphere, b.higgs, cfg.alpha, cfg.tau, tgrid);
    std::ostringstream csv;
    csv << "t,k_alpha,k_alpha_prime\n";
    csv.precision(12);
    for (const auto& r : rows) csv << r.t << ',' << r.k_alpha << ',' << r.k_alpha_prime << '\n';
    write_text(std::filesystem::path(cfg.output) / "profile.csv", csv.str());

    // rows at t = 4, 5, 6 sit at indices 8, 10, 12 of the half-step grid
    double slope = vortexlab::aitken_limit(rows[8].k_alpha_prime, rows[10].k_alpha_prime,
                                           rows[12].k_alpha_prime);
    double futaki = vortexlab::futaki_closed_form(cfg.alpha, cfg.tau, b.higgs.degree(), n1,
                                                  cfg.volume);
    Report rep;
    rep.kv("n1", n1);
    rep.kv("ray_slope_limit", slope);
    rep.kv("futaki_closed_form", futaki);
    rep.kv("abs_gap", std::fabs(slope - futaki));
    emit_report(cfg, rep);
    return 0;
}

int run_convexity_scan(const vortexlab::RunConfig& cfg) {
    Built b = build_problem(cfg);
    vortexlab::CounterRng rng(cfg.seed, 17);
    vortexlab::VortexProblem prob{b.geom, b.higgs, cfg.tau, vortexlab::Field()};
    const int n = b.geom->npts();
    double min_second = 1e300;
    const int segments = 50;
    for (int s = 0; s < segments; ++s) {
        vortexlab::Field fa = vortexlab::random_smooth_field(*b.geom, rng, 1.0);
        vortexlab::Field fb = vortexlab::random_smooth_field(*b.geom, rng, 1.0);
        vortexlab::Field fm(n);
        for (int i = 0; i < n; ++i) fm[i] = 0.5 * (fa[i] + fb[i]);
        double second = vortexlab::mhat_energy(prob, fa) + vortexlab::mhat_energy(prob, fb) -
                        2.0 * vortexlab::mhat_energy(prob, fm);
        min_second = std::min(min_second, second);
    }
    Report rep;
    rep.kv("segments", segments);
    rep.kv("min_second_difference", min_second);
    rep.kv("convex", min_second >= 0.0 ? 1 : 0);
    emit_report(cfg, rep);
    return 0;
}

int run_epsilon_geodesic(const vortexlab::RunConfig& cfg) {
    if (cfg.genus != 0) throw vortexlab::ConfigError("epsilon-geodesic requires the sphere");
    Built b = build_problem(cfg);
    const int M = 33;
    vortexlab::Field end0(b.geom->npts(), 0.0);
    vortexlab::Field end1 = vortexlab::fs_ray_potential(*b.sphere, 0.5);
    vortexlab::EpsilonGeodesic eg =
        vortexlab::solve_epsilon_geodesic(*b.sphere, end0, end1, cfg.epsilon, M);
    std::vector<double> energy(M);
    std::ostringstream csv;
    csv << "t,m_alpha\n";
    csv.precision(12);
    for (int k = 0; k < M; ++k) {
        vortexlab::Field kpot = vortexlab::expand_zonal(*b.sphere, eg.zonal[k]);
        energy[k] = vortexlab::m_alpha_reduced(*b.geom, b.higgs, cfg.alpha, cfg.tau, kpot);
        csv << eg.times[k] << ',' << energy[k] << '\n';
    }
    write_text(std::filesystem::path(cfg.output) / "geodesic_energy.csv", csv.str());
    const double dt = eg.times[1] - eg.times[0];
    double min_second = 1e300;
    for (int k = 1; k + 1 < M; ++k)
        min_second = std::min(min_second,
                              (energy[k + 1] - 2.0 * energy[k] + energy[k - 1]) / (dt * dt));
    const double bound = -4.0 * kPi * cfg.alpha * cfg.tau * b.higgs.degree() * cfg.epsilon;
    Report rep;
    rep.kv("epsilon", cfg.epsilon);
    rep.kv("time_nodes", M);
    rep.kv("residual_sup", eg.residual_sup);
    rep.kv("newton_iters", eg.newton_iters);
    rep.kv("min_second_difference", min_second);
    rep.kv("convexity_bound", bound);
    emit_report(cfg, rep);
    return 0;
}

int run_stability(const vortexlab::RunConfig& cfg) {
    vortexlab::StabilityVerdict v = vortexlab::check_polystability(cfg.divisor);
    Report rep;
    const char* name = v.kind == vortexlab::Stability::stable      ? "stable"
                       : v.kind == vortexlab::Stability::polystable ? "polystable"
                                                                     : "unstable";
    rep.kv("verdict", name);
    rep.kv("witness_index", v.witness_index);
    rep.kv("witness_note", v.note);
    emit_report(cfg, rep);
    return 0;
}

int run_energy_report(const vortexlab::RunConfig& cfg) {
    Built b = build_problem(cfg);
    vortexlab::Field zero(b.geom->npts(), 0.0);
    vortexlab::EnergyBreakdown eb =
        vortexlab::k_alpha_reduced(*b.geom, b.higgs, cfg.alpha, cfg.tau, zero);
    Report rep;
    rep.kv("k_energy", eb.k_energy);
    rep.kv("m_alpha", eb.m_alpha);
    rep.kv("k_alpha", eb.k_alpha);
    rep.kv("am", eb.am);
    rep.kv("c", eb.constants.c);
    rep.kv("mean_s", eb.constants.mean_s);
    emit_report(cfg, rep);
    return 0;
}

int cmd_run(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot read config file: " << config_path << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    vortexlab::RunConfig cfg;
    try {
        cfg = vortexlab::parse_run_config(buf.str());
    } catch (const vortexlab::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    try {
        std::filesystem::create_directories(cfg.output);
        write_text(std::filesystem::path(cfg.output) / "resolved-config.txt",
                   vortexlab::resolved_config_text(cfg));
        switch (cfg.experiment) {
            case vortexlab::Experiment::solve_vortex: return run_solve_vortex(cfg);
            case vortexlab::Experiment::solve_gravitating: return run_solve_gravitating(cfg);
            case vortexlab::Experiment::solve_twisted: return run_solve_twisted(cfg);
            case vortexlab::Experiment::ray_slope: return run_ray_slope(cfg);
            case vortexlab::Experiment::convexity_scan: return run_convexity_scan(cfg);
            case vortexlab::Experiment::epsilon_geodesic: return run_epsilon_geodesic(cfg);
            case vortexlab::Experiment::stability: return run_stability(cfg);
            case vortexlab::Experiment::energy_report: return run_energy_report(cfg);
        }
    } catch (const vortexlab::BradlowViolated& e) {
        std::cerr << "BradlowViolated: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

bool selftest_check(const std::string& name, bool ok, double got, double want, bool& all_ok) {
    if (ok) {
        std::cout << "[PASS] " << name << "\n";
    } else {
        std::cout << "[FAIL] " << name << " (got " << got << ", want " << want << ")\n";
        all_ok = false;
    }
    return ok;
}

int cmd_selftest() {
    using namespace vortexlab;
    bool all_ok = true;
    std::cout << kVersion << " selftest\n";

    {
        auto t = build_torus({0.0, 1.0}, 1.0, 32);
        Field u(t->npts());
        for (int i = 0; i < t->npts(); ++i) {
            SurfacePoint p = t->node_point(i);
            u[i] = std::cos(2.0 * kPi * (p.a + p.b));
        }
        Field lu;
        t->laplacian(u, lu);
        double want = 4.0 * kPi * kPi * 2.0;
        double got = 0.0;
        for (int i = 0; i < t->npts(); ++i)
            if (std::fabs(u[i]) > 0.5) got = std::max(got, std::fabs(lu[i] / u[i]));
        selftest_check("torus plane-wave eigenvalue", std::fabs(got - want) < 1e-8 * want, got,
                       want, all_ok);
    }
    {
        auto s = build_sphere(4.0 * kPi, 16);
        Field u(s->npts());
        for (int i = 0; i < s->nlat; ++i)
            for (int j = 0; j < s->nlon; ++j) u[(size_t)i * s->nlon + j] = s->glx[i];
        Field lu;
        s->laplacian(u, lu);
        double want = 2.0;  // l(l+1) 4pi/V at l=1, V=4pi
        double got = lu[s->node_index(2, 3)] / u[s->node_index(2, 3)];
        selftest_check("sphere harmonic eigenvalue", std::fabs(got - want) < 1e-10 * want, got,
                       want, all_ok);
    }
    {
        auto s = build_sphere(11.0, 24);
        SurfacePoint north;
        north.a = 0.0;
        north.b = 0.0;
        Field g = s->green(north);
        double worst = 0.0;
        for (int i = 0; i < s->npts(); ++i) {
            double x = s->glx[i / s->nlon];
            double exact = -std::log(1.0 - x) / (4.0 * kPi) - (1.0 - std::log(2.0)) / (4.0 * kPi);
            worst = std::max(worst, std::fabs(g[i] - exact));
        }
        selftest_check("sphere green closed form", worst < 1e-2, worst, 0.0, all_ok);
    }
    {
        auto t = build_torus({0.0, 1.0}, 30.0, 64);
        Divisor d;
        SurfacePoint p;
        p.a = 0.31;
        p.b = 0.57;
        d.points.push_back(p);
        d.multiplicities.push_back(1);
        HiggsData h = build_higgs_green(t, d);
        double sup = -1e300;
        for (double v : h.u0) sup = std::max(sup, v);
        selftest_check("higgs normalization sup u0 = 0", std::fabs(sup) < 1e-12, sup, 0.0, all_ok);

        VortexProblem prob{t, h, 1.0, Field()};
        VortexSolution sol = solve_vortex(prob);
        selftest_check("vortex residual", sol.residual_sup <= 1e-8, sol.residual_sup, 1e-8,
                       all_ok);
        selftest_check("vortex degree identity", sol.degree_defect <= 1e-6, sol.degree_defect,
                       1e-6, all_ok);
        selftest_check("vortex pointwise bound", sol.pointwise_max <= 1.0 + 1e-8,
                       sol.pointwise_max, 1.0, all_ok);

        double pair = k_energy(*t, Field(t->npts(), 0.0)) +
                      m_alpha_pair(*t, h, 0.25, 1.0, sol.f, Field());
        double red = k_alpha_reduced(*t, h, 0.25, 1.0, Field(t->npts(), 0.0)).k_alpha;
        selftest_check("pair/reduced energy identity",
                       std::fabs(pair - red) <= 1e-7 * (1.0 + std::fabs(red)), pair, red, all_ok);

        CounterRng rng(7, 3);
        Field dir = random_smooth_field(*t, rng, 0.3);
        Field grad = mhat_gradient(prob, sol.f);
        double lhs = 0.0;
        for (int i = 0; i < t->npts(); ++i) lhs += dir[i] * grad[i] * t->weights[i];
        double h_fd = 1e-5;
        Field fp = sol.f, fm = sol.f;
        for (int i = 0; i < t->npts(); ++i) {
            fp[i] += h_fd * dir[i];
            fm[i] -= h_fd * dir[i];
        }
        double rhs = (mhat_energy(prob, fp) - mhat_energy(prob, fm)) / (2.0 * h_fd);
        selftest_check("energy gradient consistency",
                       std::fabs(lhs - rhs) <= 1e-6 * (1.0 + std::fabs(rhs)), lhs, rhs, all_ok);

        double second = 0.0;
        {
            Field fa = random_smooth_field(*t, rng, 1.0), fb = random_smooth_field(*t, rng, 1.0);
            Field fmid(t->npts());
            for (int i = 0; i < t->npts(); ++i) fmid[i] = 0.5 * (fa[i] + fb[i]);
            second = mhat_energy(prob, fa) + mhat_energy(prob, fb) - 2.0 * mhat_energy(prob, fmid);
        }
        selftest_check("mhat midpoint convexity", second >= 0.0, second, 0.0, all_ok);
    }

    std::cout << (all_ok ? "selftest: all checks passed\n" : "selftest: FAILURES\n");
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* tv = std::getenv("VORTEXLAB_THREADS")) {
        try {
            g_threads = std::stoi(tv);
        } catch (const std::exception&) {
            std::cerr << "VORTEXLAB_THREADS must be an integer\n";
            return 1;
        }
        if (g_threads < 1) {
            std::cerr << "VORTEXLAB_THREADS must be >= 1\n";
            return 1;
        }
    }

    CLI::App app{"vortexlab: vortex and gravitating-vortex solvers on compact surfaces"};
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "execute an experiment from a config file");
    run->add_option("config", config_path, "config file path")->required();
    CLI::App* selftest = app.add_subcommand("selftest", "fast invariant checks");
    CLI::App* schema = app.add_subcommand("schema", "print the config schema");
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path);
    if (selftest->parsed()) return cmd_selftest();
    if (schema->parsed()) {
        std::cout << vortexlab::config_schema_text();
        return 0;
    }
    return 1;
}
