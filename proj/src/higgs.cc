#include "vortexlab/higgs.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kFloor = -745.0;  // below this e^{u0} underflows to exactly 0
}  // namespace

int Divisor::degree() const {
    int n = 0;
    for (int m : multiplicities) n += m;
    return n;
}

int Divisor::max_multiplicity() const {
    int m = 0;
    for (int v : multiplicities) m = std::max(m, v);
    return m;
}

void Divisor::validate() const {
    if (points.empty() || points.size() != multiplicities.size())
        throw std::invalid_argument("divisor: empty or mismatched point/multiplicity lists");
    for (int m : multiplicities)
        if (m < 1) throw std::invalid_argument("divisor: multiplicities must be positive");
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j) {
            const auto &p = points[i], &q = points[j];
            if (p.at_inf != q.at_inf) continue;
            if (p.at_inf || (std::fabs(p.a - q.a) < 1e-12 && std::fabs(p.b - q.b) < 1e-12))
                throw std::invalid_argument("divisor: coincident points");
        }
}

static void normalize_and_floor(Field& u0) {
    double sup = -1e300;
    for (double v : u0) sup = std::max(sup, v);
    for (double& v : u0) {
        v -= sup;
        if (v < kFloor || !std::isfinite(v)) v = kFloor;
    }
}

HiggsData build_higgs_green(std::shared_ptr<const Surface> geom, const Divisor& d) {
    d.validate();
    for (const auto& p : d.points)
        if (p.at_inf && geom->genus != 0)
            throw std::invalid_argument("build_higgs_green: point at infinity needs a sphere");
    HiggsData h;
    h.divisor = d;
    h.geom = geom;
    h.u0.assign(geom->npts(), 0.0);
    for (size_t j = 0; j < d.points.size(); ++j) {
        Field g = geom->green(d.points[j]);
        for (int i = 0; i < geom->npts(); ++i) h.u0[i] += -4.0 * kPi * d.multiplicities[j] * g[i];
    }
    normalize_and_floor(h.u0);
    h.curvature_density = 2.0 * kPi * d.degree() / geom->volume;
    return h;
}

HiggsData build_higgs_explicit_sphere(std::shared_ptr<const SphereSurface> geom, const Divisor& d) {
    d.validate();
    const int N = d.degree();
    HiggsData h;
    h.divisor = d;
    h.geom = geom;
    h.u0.assign(geom->npts(), 0.0);
    for (int idx = 0; idx < geom->npts(); ++idx) {
        double r2 = geom->chart_r2(idx);
        double lam = geom->lon[idx % geom->nlon];
        double zx = std::sqrt(r2) * std::cos(lam), zy = std::sqrt(r2) * std::sin(lam);
        double acc = -N * std::log1p(r2);
        for (size_t j = 0; j < d.points.size(); ++j) {
            if (d.points[j].at_inf) continue;  // enters through the degree deficit
            double dx = zx - d.points[j].a, dy = zy - d.points[j].b;
            double q = std::max(dx * dx + dy * dy, 1e-300);
            acc += d.multiplicities[j] * std::log(q);
        }
        h.u0[idx] = acc;
    }
    normalize_and_floor(h.u0);
    h.curvature_density = 2.0 * kPi * N / geom->volume;
    return h;
}

HiggsData pullback_higgs(const HiggsData& h, double t) {
    if (std::fabs(t) > 30.0) throw std::invalid_argument("pullback_higgs: |t| > 30 overflows the chart");
    auto sph = std::dynamic_pointer_cast<const SphereSurface>(h.geom);
    if (!sph) throw std::invalid_argument("pullback_higgs: sphere geometry required");
    Divisor d = h.divisor;
    const double s = std::exp(2.0 * t);
    for (auto& p : d.points) {
        if (p.at_inf) continue;
        p.a *= s;
        p.b *= s;
    }
    return build_higgs_explicit_sphere(sph, d);
}

Divisor parse_divisor(const std::string& text, int genus) {
    Divisor d;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        SurfacePoint p;
        int mult = 0;
        if (tok == "inf") {
            if (genus != 0) throw std::invalid_argument("divisor: `inf` is only valid on the sphere");
            p.at_inf = true;
            if (!(ls >> mult)) throw std::invalid_argument("divisor: missing multiplicity after `inf`");
        } else {
            p.a = std::stod(tok);
            if (!(ls >> p.b >> mult)) throw std::invalid_argument("divisor: expected `x y multiplicity`");
        }
        d.points.push_back(p);
        d.multiplicities.push_back(mult);
    }
    d.validate();
    return d;
}

std::string format_divisor(const Divisor& d) {
    std::ostringstream out;
    out.precision(17);
    for (size_t j = 0; j < d.points.size(); ++j) {
        if (d.points[j].at_inf)
            out << "inf " << d.multiplicities[j] << "\n";
        else
            out << d.points[j].a << " " << d.points[j].b << " " << d.multiplicities[j] << "\n";
    }
    return out.str();
}

// Chart distance between two lattice-coordinate points, nearest image.
static double torus_point_distance(const TorusSurface& t, const SurfacePoint& p, const SurfacePoint& q) {
    double dsl = q.a - p.a, dtl = q.b - p.b;
    dsl -= std::round(dsl);
    dtl -= std::round(dtl);
    double best = 1e300;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            best = std::min(best, std::abs(t.scale * ((dsl + a) + t.modulus * (dtl + b))));
    return best;
}

double lelong_pairing(const Surface& geom, const HiggsData& h, const Field& zeta) {
    Field lap;
    geom.laplacian(zeta, lap);
    const int npt = geom.npts();

    double point_part = 0.0;
    for (size_t j = 0; j < h.divisor.points.size(); ++j)
        point_part += 2.0 * kPi * h.divisor.multiplicities[j] * geom.eval_smooth(zeta, h.divisor.points[j]);

    // Nodal quadrature of u0 (-1/2 Delta0 zeta), with the log singularity
    // integrated on an oversampled subgrid near each divisor point (torus
    // cells are parallelograms; the sphere path keeps the plain nodal sum).
    double smooth_part = 0.0;
    const auto* torus = dynamic_cast<const TorusSurface*>(&geom);
    const double cell = torus ? 1.0 / torus->n : 0.0;
    for (int i = 0; i < npt; ++i) {
        double q = -0.5 * lap[i];
        double contrib = h.u0[i] * q * geom.weights[i];
        if (torus) {
            SurfacePoint node = torus->node_point(i);
            for (size_t j = 0; j < h.divisor.points.size(); ++j) {
                const SurfacePoint& pj = h.divisor.points[j];
                double r = torus_point_distance(*torus, pj, node);
                double hchart = torus->scale * cell;
                if (r >= 3.0 * hchart || r < hchart * 1e-6) continue;
                double nj = h.divisor.multiplicities[j];
                // Split off the local model 2 n_j log r and replace its nodal
                // sample with the exact cell average (subgrid quadrature).
                double rem = h.u0[i] - 2.0 * nj * std::log(r);
                double avg = 0.0;
                const int k = 16;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b) {
                        SurfacePoint s;
                        s.a = node.a + cell * ((a + 0.5) / k - 0.5);
                        s.b = node.b + cell * ((b + 0.5) / k - 0.5);
                        double rr = std::max(torus_point_distance(*torus, pj, s), 1e-18);
                        avg += 2.0 * nj * std::log(rr);
                    }
                avg /= (double)k * k;
                contrib = (rem + avg) * q * geom.weights[i];
            }
        }
        smooth_part += contrib;
    }
    return point_part - smooth_part;
}

}  // namespace vortexlab
