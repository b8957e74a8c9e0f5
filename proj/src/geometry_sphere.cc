#include "vortexlab/geometry.h"

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>

namespace vortexlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Coefficient packing: m-major blocks, within a block l = m..L.
inline int coef_offset(int L, int m) { return m * (L + 1) - m * (m - 1) / 2; }
inline int coef_index(int L, int l, int m) { return coef_offset(L, m) + (l - m); }
inline int coef_count(int L) { return (L + 1) * (L + 2) / 2; }

}  // namespace

// Grid: nlat = L+1 Gauss-Legendre latitudes, nlon = 2L+2 uniform longitudes.
// Transforms against the interval-orthonormal associated Legendre functions
// Ptilde_l^m (unit L^2([-1,1]) norm) are quadrature-exact through degree L,
// so analyze/synthesize round-trips are exact for band-limited fields.
struct SphereSurface::Impl {
    int L, nlat, nlon, ncoef;
    std::vector<double> P;       // nlat x ncoef, Ptilde_l^m(x_i)
    std::vector<double> dPdt;    // nlat x ncoef, d/dtheta Ptilde_l^m at x_i
    std::vector<double> costab;  // (L+1) x nlon
    std::vector<double> sintab;
    std::vector<double> eig;     // l(l+1) * 4 pi / V

    const double* prow(int i) const { return P.data() + (size_t)i * ncoef; }
    const double* drow(int i) const { return dPdt.data() + (size_t)i * ncoef; }
};

// Fills values and theta-derivatives of Ptilde_l^m at one abscissa.
// Recurrences: Ptilde_m^m = sqrt((2m+1)/(2m)) sqrt(1-x^2) Ptilde_{m-1}^{m-1},
// Ptilde_{m+1}^m = sqrt(2m+3) x Ptilde_m^m, then the three-term rule with
// a_l^m = sqrt((4l^2-1)/(l^2-m^2)), b_l^m = a_l^m / a_{l-1}^m;
// d/dtheta Ptilde_l^m = (l x Ptilde_l^m - e_l^m Ptilde_{l-1}^m)/sin(theta),
// e_l^m = sqrt((l^2-m^2)(2l+1)/(2l-1)).
static void legendre_row(int L, double x, double* val, double* dth) {
    const double sx = std::sqrt(std::max(1.0 - x * x, 0.0));
    double pmm = std::sqrt(0.5);
    for (int m = 0; m <= L; ++m) {
        if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx;
        double pl1 = 0.0, pl = pmm;
        for (int l = m; l <= L; ++l) {
            int idx = coef_index(L, l, m);
            val[idx] = pl;
            if (dth) {
                double e = l > m ? std::sqrt((double)(l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0)) : 0.0;
                dth[idx] = sx > 0.0 ? (l * x * pl - e * pl1) / sx : 0.0;
            }
            double pn;
            if (l < L) {
                if (l == m) {
                    pn = std::sqrt(2.0 * m + 3.0) * x * pl;
                } else {
                    int lp = l + 1;
                    double a = std::sqrt((4.0 * lp * lp - 1.0) / ((double)lp * lp - m * m));
                    double ap = std::sqrt((4.0 * l * l - 1.0) / ((double)l * l - m * m));
                    pn = a * (x * pl - pl1 / ap);
                }
                pl1 = pl;
                pl = pn;
            }
        }
    }
}

SphereSurface::SphereSurface(double vol, int band_limit) {
    if (band_limit < 8) throw std::invalid_argument("build_sphere: band limit must be >= 8");
    if (!(vol > 0.0)) throw std::invalid_argument("build_sphere: volume must be positive");
    L = band_limit;
    nlat = L + 1;
    nlon = 2 * L + 2;
    genus = 0;
    euler_char = 2;
    volume = vol;
    mean_curvature = 4.0 * kPi / vol;

    // Gauss-Legendre abscissas: boost gives the non-negative zeros ascending.
    auto pos = boost::math::legendre_p_zeros<double>(nlat);
    glx.assign(nlat, 0.0);
    int half = nlat / 2;
    for (int k = 0; k < (int)pos.size(); ++k) glx[half + k] = pos[k];
    if (nlat % 2 == 1) {
        // pos[0] is the zero at the origin
        for (int k = 0; k < half; ++k) glx[half - 1 - k] = -pos[k + 1];
    } else {
        for (int k = 0; k < half; ++k) glx[half - 1 - k] = -pos[k];
    }
    glw.assign(nlat, 0.0);
    for (int i = 0; i < nlat; ++i) {
        double d = boost::math::legendre_p_prime(nlat, glx[i]);
        glw[i] = 2.0 / ((1.0 - glx[i] * glx[i]) * d * d);
    }
    sin_theta.assign(nlat, 0.0);
    for (int i = 0; i < nlat; ++i) sin_theta[i] = std::sqrt(1.0 - glx[i] * glx[i]);

    lon.assign(nlon, 0.0);
    for (int j = 0; j < nlon; ++j) lon[j] = 2.0 * kPi * j / nlon;

    weights.assign((size_t)nlat * nlon, 0.0);
    for (int i = 0; i < nlat; ++i)
        for (int j = 0; j < nlon; ++j)
            weights[(size_t)i * nlon + j] = vol * glw[i] / (2.0 * nlon);

    double s = 4.0 * kPi / vol;  // round metric of area V has constant curvature
    s0.assign((size_t)nlat * nlon, s);

    impl = std::make_unique<Impl>();
    impl->L = L;
    impl->nlat = nlat;
    impl->nlon = nlon;
    impl->ncoef = coef_count(L);
    impl->P.resize((size_t)nlat * impl->ncoef);
    impl->dPdt.resize((size_t)nlat * impl->ncoef);
    for (int i = 0; i < nlat; ++i)
        legendre_row(L, glx[i], impl->P.data() + (size_t)i * impl->ncoef,
                     impl->dPdt.data() + (size_t)i * impl->ncoef);
    impl->costab.resize((size_t)(L + 1) * nlon);
    impl->sintab.resize((size_t)(L + 1) * nlon);
    for (int m = 0; m <= L; ++m)
        for (int j = 0; j < nlon; ++j) {
            impl->costab[(size_t)m * nlon + j] = std::cos(m * lon[j]);
            impl->sintab[(size_t)m * nlon + j] = std::sin(m * lon[j]);
        }
    impl->eig.resize(L + 1);
    for (int l = 0; l <= L; ++l) impl->eig[l] = (double)l * (l + 1) * 4.0 * kPi / vol;
}

SphereSurface::~SphereSurface() = default;

SphereCoef SphereSurface::analyze(const Field& u) const {
    if ((int)u.size() != npts()) throw std::invalid_argument("analyze: field size mismatch");
    const int nc = impl->ncoef;
    SphereCoef c;
    c.a.assign(nc, 0.0);
    c.b.assign(nc - (L + 1), 0.0);

    // Longitude stage: Cm(i) = (2pi/nlon) sum_j u cos(m lambda_j), same with sin.
    std::vector<double> Cm((size_t)(L + 1) * nlat), Sm((size_t)(L + 1) * nlat);
    for (int i = 0; i < nlat; ++i) {
        const double* row = u.data() + (size_t)i * nlon;
        for (int m = 0; m <= L; ++m) {
            const double* ct = impl->costab.data() + (size_t)m * nlon;
            const double* st = impl->sintab.data() + (size_t)m * nlon;
            double sc = 0.0, ss = 0.0;
            for (int j = 0; j < nlon; ++j) {
                sc += row[j] * ct[j];
                ss += row[j] * st[j];
            }
            Cm[(size_t)m * nlat + i] = sc * 2.0 * kPi / nlon;
            Sm[(size_t)m * nlat + i] = ss * 2.0 * kPi / nlon;
        }
    }
    // Latitude stage: project on Ptilde with GL weights.
    for (int m = 0; m <= L; ++m) {
        const double nm = m == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi);
        for (int i = 0; i < nlat; ++i) {
            const double* pr = impl->prow(i);
            double wc = glw[i] * Cm[(size_t)m * nlat + i] * nm;
            double ws = glw[i] * Sm[(size_t)m * nlat + i] * nm;
            for (int l = m; l <= L; ++l) {
                int idx = coef_index(L, l, m);
                c.a[idx] += pr[idx] * wc;
                if (m > 0) c.b[idx - (L + 1)] += pr[idx] * ws;
            }
        }
    }
    return c;
}

void SphereSurface::synthesize(const SphereCoef& c, Field& out) const {
    const int nc = impl->ncoef;
    if ((int)c.a.size() != nc || (int)c.b.size() != nc - (L + 1))
        throw std::invalid_argument("synthesize: coefficient size mismatch");
    // Latitude stage: A(m,i) = sum_l a_lm Ptilde(x_i) N_m, same for B.
    std::vector<double> A((size_t)(L + 1) * nlat, 0.0), B((size_t)(L + 1) * nlat, 0.0);
    for (int i = 0; i < nlat; ++i) {
        const double* pr = impl->prow(i);
        for (int m = 0; m <= L; ++m) {
            const double nm = m == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi);
            double sa = 0.0, sb = 0.0;
            for (int l = m; l <= L; ++l) {
                int idx = coef_index(L, l, m);
                sa += c.a[idx] * pr[idx];
                if (m > 0) sb += c.b[idx - (L + 1)] * pr[idx];
            }
            A[(size_t)m * nlat + i] = sa * nm;
            B[(size_t)m * nlat + i] = sb * nm;
        }
    }
    out.assign((size_t)nlat * nlon, 0.0);
    for (int i = 0; i < nlat; ++i) {
        double* row = out.data() + (size_t)i * nlon;
        for (int m = 0; m <= L; ++m) {
            const double* ct = impl->costab.data() + (size_t)m * nlon;
            const double* st = impl->sintab.data() + (size_t)m * nlon;
            double am = A[(size_t)m * nlat + i], bm = B[(size_t)m * nlat + i];
            if (am == 0.0 && bm == 0.0) continue;
            for (int j = 0; j < nlon; ++j) row[j] += am * ct[j] + bm * st[j];
        }
    }
}

void SphereSurface::laplacian(const Field& u, Field& out) const {
    SphereCoef c = analyze(u);
    for (int m = 0; m <= L; ++m)
        for (int l = m; l <= L; ++l) {
            int idx = coef_index(L, l, m);
            c.a[idx] *= impl->eig[l];
            if (m > 0) c.b[idx - (L + 1)] *= impl->eig[l];
        }
    synthesize(c, out);
}

void SphereSurface::shifted_solve(const Field& rhs, double sigma, Field& out) const {
    SphereCoef c = analyze(rhs);
    for (int m = 0; m <= L; ++m)
        for (int l = m; l <= L; ++l) {
            int idx = coef_index(L, l, m);
            double d = impl->eig[l] + sigma;
            double f = d > 0.0 ? 1.0 / d : 0.0;
            c.a[idx] *= f;
            if (m > 0) c.b[idx - (L + 1)] *= f;
        }
    synthesize(c, out);
}

// Orthonormal frame scaled for omega0 of area V: components are
// sqrt(4pi/V) (d/dtheta, (1/sin theta) d/dlambda).
void SphereSurface::grad_components(const Field& u, Field& gx, Field& gy) const {
    SphereCoef c = analyze(u);
    const double sc = std::sqrt(4.0 * kPi / volume);
    std::vector<double> At((size_t)(L + 1) * nlat, 0.0), Bt((size_t)(L + 1) * nlat, 0.0);
    std::vector<double> Al((size_t)(L + 1) * nlat, 0.0), Bl((size_t)(L + 1) * nlat, 0.0);
    for (int i = 0; i < nlat; ++i) {
        const double* pr = impl->prow(i);
        const double* dr = impl->drow(i);
        const double inv_sin = 1.0 / sin_theta[i];
        for (int m = 0; m <= L; ++m) {
            const double nm = m == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi);
            double sat = 0.0, sbt = 0.0, sal = 0.0, sbl = 0.0;
            for (int l = m; l <= L; ++l) {
                int idx = coef_index(L, l, m);
                sat += c.a[idx] * dr[idx];
                if (m > 0) {
                    double bl = c.b[idx - (L + 1)];
                    sbt += bl * dr[idx];
                    sal += c.a[idx] * pr[idx];
                    sbl += bl * pr[idx];
                }
            }
            At[(size_t)m * nlat + i] = sat * nm;
            Bt[(size_t)m * nlat + i] = sbt * nm;
            Al[(size_t)m * nlat + i] = sal * nm * m * inv_sin;
            Bl[(size_t)m * nlat + i] = sbl * nm * m * inv_sin;
        }
    }
    gx.assign((size_t)nlat * nlon, 0.0);
    gy.assign((size_t)nlat * nlon, 0.0);
    for (int i = 0; i < nlat; ++i) {
        double* rx = gx.data() + (size_t)i * nlon;
        double* ry = gy.data() + (size_t)i * nlon;
        for (int m = 0; m <= L; ++m) {
            const double* ct = impl->costab.data() + (size_t)m * nlon;
            const double* st = impl->sintab.data() + (size_t)m * nlon;
            double at = At[(size_t)m * nlat + i], bt = Bt[(size_t)m * nlat + i];
            double al = Al[(size_t)m * nlat + i], bl = Bl[(size_t)m * nlat + i];
            for (int j = 0; j < nlon; ++j) {
                // d/dtheta of (a cos + b sin) Ptilde, and d/dlambda / sin theta.
                rx[j] += at * ct[j] + bt * st[j];
                ry[j] += -al * st[j] + bl * ct[j];
            }
        }
        for (int j = 0; j < nlon; ++j) {
            rx[(size_t)j] *= sc;
            ry[(size_t)j] *= sc;
        }
    }
}

void SphereSurface::node_vector(int idx, double out[3]) const {
    int i = idx / nlon, j = idx % nlon;
    out[0] = sin_theta[i] * std::cos(lon[j]);
    out[1] = sin_theta[i] * std::sin(lon[j]);
    out[2] = glx[i];
}

void SphereSurface::point_vector(const SurfacePoint& p, double out[3]) {
    if (p.at_inf) {
        out[0] = 0.0;
        out[1] = 0.0;
        out[2] = -1.0;
        return;
    }
    double r2 = p.a * p.a + p.b * p.b;
    out[0] = 2.0 * p.a / (1.0 + r2);
    out[1] = 2.0 * p.b / (1.0 + r2);
    out[2] = (1.0 - r2) / (1.0 + r2);
}

double SphereSurface::chart_r2(int idx) const {
    int i = idx / nlon;
    return (1.0 - glx[i]) / (1.0 + glx[i]);
}

double SphereSurface::singular_distance(const SurfacePoint& p, int node) const {
    double v[3], w[3];
    point_vector(p, v);
    node_vector(node, w);
    double dot = v[0] * w[0] + v[1] * w[1] + v[2] * w[2];
    double cx = v[1] * w[2] - v[2] * w[1];
    double cy = v[2] * w[0] - v[0] * w[2];
    double cz = v[0] * w[1] - v[1] * w[0];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
}

Field SphereSurface::green(const SurfacePoint& p) const {
    const int npt = npts();
    const double r1 = 0.5, r0 = 1.5;  // cutoff angles, support well clear of the antipode
    Field loc(npt), rhs(npt);
    for (int i = 0; i < npt; ++i) {
        double g = singular_distance(p, i);
        double cg = std::cos(g), sg = std::sin(g);
        double omc = std::max(1.0 - cg, 1e-300);
        double u = -std::log(omc) / (4.0 * kPi);
        double chi = green_cutoff(g, r1, r0);
        loc[i] = u * chi;
        // Delta0 (u chi) = delta_p - chi/V + defect; move the defect to the rhs.
        double c1 = green_cutoff_d1(g, r1, r0);
        double c2 = green_cutoff_d2(g, r1, r0);
        double up = -sg / (4.0 * kPi * omc);
        double cot = (g > 1e-12) ? cg / sg : 0.0;
        rhs[i] = (chi - 1.0) / volume + (4.0 * kPi / volume) * (u * (c2 + cot * c1) + 2.0 * up * c1);
    }
    Field rem(npt);
    shifted_solve(rhs, 0.0, rem);
    Field g(npt);
    for (int i = 0; i < npt; ++i) g[i] = loc[i] + rem[i];
    double m = mean(g);
    for (int i = 0; i < npt; ++i) g[i] -= m;
    return g;
}

double SphereSurface::eval_coef(const SphereCoef& c, double x, double lambda) const {
    std::vector<double> row(impl->ncoef);
    legendre_row(L, x, row.data(), nullptr);
    double acc = 0.0;
    for (int m = 0; m <= L; ++m) {
        const double nm = m == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi);
        double sa = 0.0, sb = 0.0;
        for (int l = m; l <= L; ++l) {
            int idx = coef_index(L, l, m);
            sa += c.a[idx] * row[idx];
            if (m > 0) sb += c.b[idx - (L + 1)] * row[idx];
        }
        acc += nm * (sa * std::cos(m * lambda) + sb * std::sin(m * lambda));
    }
    return acc;
}

double SphereSurface::eval_smooth(const Field& u, const SurfacePoint& p) const {
    double v[3];
    point_vector(p, v);
    double lambda = std::atan2(v[1], v[0]);
    return eval_coef(analyze(u), v[2], lambda);
}

std::vector<double> SphereSurface::zonal_laplacian_matrix() const {
    std::vector<double> M((size_t)nlat * nlat, 0.0);
    for (int i = 0; i < nlat; ++i)
        for (int k = 0; k < nlat; ++k) {
            double s = 0.0;
            for (int l = 0; l <= L; ++l) {
                int idx = coef_index(L, l, 0);
                s += impl->prow(i)[idx] * impl->eig[l] * impl->prow(k)[idx];
            }
            M[(size_t)i * nlat + k] = s * glw[k];
        }
    return M;
}

std::vector<double> SphereSurface::zonal_ddx_matrix() const {
    // d/dx = -(1/sin theta) d/dtheta
    std::vector<double> M((size_t)nlat * nlat, 0.0);
    for (int i = 0; i < nlat; ++i)
        for (int k = 0; k < nlat; ++k) {
            double s = 0.0;
            for (int l = 0; l <= L; ++l) {
                int idx = coef_index(L, l, 0);
                s += -impl->drow(i)[idx] / sin_theta[i] * impl->prow(k)[idx];
            }
            M[(size_t)i * nlat + k] = s * glw[k];
        }
    return M;
}

std::shared_ptr<SphereSurface> build_sphere(double volume, int band_limit) {
    return std::make_shared<SphereSurface>(volume, band_limit);
}

}  // namespace vortexlab
