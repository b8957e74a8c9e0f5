#include "vortexlab/geometry.h"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace vortexlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// Plane-wave basis e^{2 pi i (m s + k t)} on lattice coordinates (s,t);
// chart point z = scale (s + mu t), flat metric omega0 = dx ^ dy, so the
// positive Laplacian eigenvalue is 4 pi^2 |m mu - k|^2 / (V Im mu).
struct TorusSurface::Impl {
    int n;
    std::vector<double> lam;                 // eigenvalues, r2c layout n x (n/2+1)
    std::vector<double> rbuf;                // n*n
    std::vector<std::complex<double>> cbuf;  // n*(n/2+1), layout-compatible with fftw_complex
    std::vector<std::complex<double>> cwork;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    mutable std::mutex mtx;

    Impl(int n_, std::complex<double> mu, double vol) : n(n_) {
        const int nc = n / 2 + 1;
        lam.resize((size_t)n * nc);
        rbuf.resize((size_t)n * n);
        cbuf.resize((size_t)n * nc);
        cwork.resize((size_t)n * nc);
        for (int k0 = 0; k0 < n; ++k0) {
            int m = k0 <= n / 2 ? k0 : k0 - n;
            for (int k1 = 0; k1 < nc; ++k1) {
                std::complex<double> q = double(m) * mu - double(k1);
                lam[(size_t)k0 * nc + k1] = 4.0 * kPi * kPi * std::norm(q) / (vol * mu.imag());
            }
        }
        fwd = fftw_plan_dft_r2c_2d(n, n, rbuf.data(), reinterpret_cast<fftw_complex*>(cbuf.data()),
                                   FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(cwork.data()), rbuf.data(),
                                   FFTW_ESTIMATE);
    }
    ~Impl() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }

    void forward(const Field& u) {
        for (size_t i = 0; i < u.size(); ++i) rbuf[i] = u[i];
        fftw_execute(fwd);
    }
    void backward(Field& out) {
        fftw_execute(bwd);
        const double inv = 1.0 / ((double)n * n);
        out.resize((size_t)n * n);
        for (size_t i = 0; i < out.size(); ++i) out[i] = rbuf[i] * inv;
    }
    int freq0(int k0) const { return k0 <= n / 2 ? k0 : k0 - n; }
};

TorusSurface::TorusSurface(std::complex<double> mu, double vol, int n_) {
    if (n_ < 16) throw std::invalid_argument("build_torus: n must be >= 16");
    if (n_ % 2 != 0) throw std::invalid_argument("build_torus: n must be even");
    if (!(mu.imag() > 1e-12)) throw std::invalid_argument("build_torus: Im(modulus) must be positive");
    if (!(vol > 0.0)) throw std::invalid_argument("build_torus: volume must be positive");
    n = n_;
    modulus = mu;
    genus = 1;
    euler_char = 0;
    volume = vol;
    mean_curvature = 0.0;
    scale = std::sqrt(vol / mu.imag());
    weights.assign((size_t)n * n, vol / ((double)n * n));
    s0.assign((size_t)n * n, 0.0);
    impl = std::make_unique<Impl>(n, mu, vol);
}

TorusSurface::~TorusSurface() = default;

void TorusSurface::laplacian(const Field& u, Field& out) const {
    std::lock_guard<std::mutex> lock(impl->mtx);
    impl->forward(u);
    for (size_t i = 0; i < impl->cbuf.size(); ++i) impl->cwork[i] = impl->cbuf[i] * impl->lam[i];
    impl->backward(out);
}

void TorusSurface::shifted_solve(const Field& rhs, double sigma, Field& out) const {
    std::lock_guard<std::mutex> lock(impl->mtx);
    impl->forward(rhs);
    for (size_t i = 0; i < impl->cbuf.size(); ++i) {
        double d = impl->lam[i] + sigma;
        impl->cwork[i] = d <= 0.0 ? 0.0 : impl->cbuf[i] / d;
    }
    impl->backward(out);
}

void TorusSurface::grad_components(const Field& u, Field& gx, Field& gy) const {
    std::lock_guard<std::mutex> lock(impl->mtx);
    const int nc = n / 2 + 1;
    impl->forward(u);
    std::vector<std::complex<double>> spec(impl->cbuf.begin(), impl->cbuf.end());

    Field ds, dt;
    // d/ds: multiply by 2 pi i m, Nyquist zeroed.
    for (int k0 = 0; k0 < n; ++k0) {
        int m = impl->freq0(k0);
        double f = (k0 == n / 2) ? 0.0 : 2.0 * kPi * m;
        for (int k1 = 0; k1 < nc; ++k1) {
            size_t idx = (size_t)k0 * nc + k1;
            impl->cwork[idx] = std::complex<double>(-f * spec[idx].imag(), f * spec[idx].real());
        }
    }
    impl->backward(ds);
    // d/dt: multiply by 2 pi i k, Nyquist zeroed.
    for (int k0 = 0; k0 < n; ++k0) {
        for (int k1 = 0; k1 < nc; ++k1) {
            double f = (k1 == n / 2) ? 0.0 : 2.0 * kPi * k1;
            size_t idx = (size_t)k0 * nc + k1;
            impl->cwork[idx] = std::complex<double>(-f * spec[idx].imag(), f * spec[idx].real());
        }
    }
    impl->backward(dt);

    // u_z = (conj(mu) d_s u - d_t u) / (scale (conj(mu) - mu)); gx + i gy = 2 u_z.
    const std::complex<double> mu = modulus;
    const std::complex<double> denom = scale * (std::conj(mu) - mu);
    gx.resize(u.size());
    gy.resize(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
        std::complex<double> uz = (std::conj(mu) * ds[i] - dt[i]) / denom;
        gx[i] = 2.0 * uz.real();
        gy[i] = 2.0 * uz.imag();
    }
}

SurfacePoint TorusSurface::node_point(int idx) const {
    SurfacePoint p;
    p.a = (double)(idx / n) / n;
    p.b = (double)(idx % n) / n;
    return p;
}

std::complex<double> TorusSurface::chart_displacement(const SurfacePoint& p, int node) const {
    double dsl = (double)(node / n) / n - p.a;
    double dtl = (double)(node % n) / n - p.b;
    dsl -= std::round(dsl);
    dtl -= std::round(dtl);
    std::complex<double> best(1e300, 0.0);
    double bn = 1e300;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
            std::complex<double> d = scale * ((dsl + a) + modulus * (dtl + b));
            double q = std::norm(d);
            if (q < bn) {
                bn = q;
                best = d;
            }
        }
    return best;
}

double TorusSurface::singular_distance(const SurfacePoint& p, int node) const {
    return std::abs(chart_displacement(p, node));
}

Field TorusSurface::green(const SurfacePoint& p) const {
    const int npt = npts();
    // Shortest nonzero lattice vector fixes the admissible cutoff radius.
    double smin = 1e300;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
            if (a == 0 && b == 0) continue;
            smin = std::min(smin, std::abs(scale * (double(a) + modulus * double(b))));
        }
    const double rmax = 0.5 * smin;
    const double r0 = 0.95 * rmax, r1 = 0.35 * rmax;

    Field split(npt), rhs(npt);
    for (int i = 0; i < npt; ++i) {
        double r = std::max(singular_distance(p, i), 1e-300);
        double chi = green_cutoff(r, r1, r0);
        double u = -std::log(r) / (2.0 * kPi);
        split[i] = u * chi;
        // Delta0 (u chi) = delta_p + s(r) with
        // s = chi'/(pi r) + log(r) (chi'' + chi'/r)/(2 pi); solve the remainder.
        double c1 = green_cutoff_d1(r, r1, r0);
        double c2 = green_cutoff_d2(r, r1, r0);
        double s = c1 / (kPi * r) + std::log(r) * (c2 + c1 / r) / (2.0 * kPi);
        rhs[i] = -1.0 / volume - s;
    }
    Field rem(npt);
    shifted_solve(rhs, 0.0, rem);
    Field g(npt);
    for (int i = 0; i < npt; ++i) g[i] = split[i] + rem[i];
    double m = mean(g);
    for (int i = 0; i < npt; ++i) g[i] -= m;
    return g;
}

double TorusSurface::eval_smooth(const Field& u, const SurfacePoint& p) const {
    const int nc = n / 2 + 1;
    std::vector<std::complex<double>> spec((size_t)n * nc);
    {
        std::lock_guard<std::mutex> lock(impl->mtx);
        impl->forward(u);
        for (size_t i = 0; i < spec.size(); ++i) spec[i] = impl->cbuf[i];
    }
    double acc = 0.0;
    for (int k0 = 0; k0 < n; ++k0) {
        int m = impl->freq0(k0);
        for (int k1 = 0; k1 < nc; ++k1) {
            double phase = 2.0 * kPi * (m * p.a + k1 * p.b);
            std::complex<double> e(std::cos(phase), std::sin(phase));
            std::complex<double> term = spec[(size_t)k0 * nc + k1] * e;
            // Interior k1 columns stand for +-k1 conjugate pairs.
            acc += (k1 == 0 || k1 == n / 2) ? term.real() : 2.0 * term.real();
        }
    }
    return acc / ((double)n * n);
}

Field TorusSurface::prolong(const TorusSurface& coarse, const Field& u) const {
    if (n % coarse.n != 0 || n < coarse.n) throw std::invalid_argument("prolong: incompatible grids");
    if (n == coarse.n) return u;
    const int ncg = coarse.n, ncc = ncg / 2 + 1;
    std::vector<std::complex<double>> cs((size_t)ncg * ncc);
    {
        std::lock_guard<std::mutex> lock(coarse.impl->mtx);
        coarse.impl->forward(u);
        for (size_t i = 0; i < cs.size(); ++i) cs[i] = coarse.impl->cbuf[i];
    }
    const int nf = n, ncf = nf / 2 + 1;
    Field out;
    {
        std::lock_guard<std::mutex> lock(impl->mtx);
        std::fill(impl->cwork.begin(), impl->cwork.end(), std::complex<double>(0.0, 0.0));
        const double inv = 1.0 / ((double)ncg * ncg);
        for (int k0 = 0; k0 < ncg; ++k0) {
            int m = k0 <= ncg / 2 ? k0 : k0 - ncg;
            int k0f = (m + nf) % nf;
            bool row_nyq = (k0 == ncg / 2);
            for (int k1 = 0; k1 < ncc; ++k1) {
                std::complex<double> c = cs[(size_t)k0 * ncc + k1] * inv;
                bool col_nyq = (k1 == ncg / 2);
                size_t dst = (size_t)k0f * ncf + k1;
                if (col_nyq) {
                    // The coarse grid stores a single real-part sample of the
                    // +-K pair; on the finer grid the column is interior, so
                    // the implicit conjugate in the inverse transform doubles
                    // it unless we halve here.
                    impl->cwork[dst] = 0.5 * c;
                } else if (row_nyq && k1 == 0) {
                    impl->cwork[dst] += 0.5 * c;
                    size_t mir = (size_t)((nf - k0f) % nf) * ncf;
                    impl->cwork[mir] += 0.5 * std::conj(c);
                } else {
                    impl->cwork[dst] = c;
                }
            }
        }
        fftw_execute(impl->bwd);
        out.assign(impl->rbuf.begin(), impl->rbuf.end());
    }
    return out;
}

std::shared_ptr<TorusSurface> build_torus(std::complex<double> modulus, double volume, int n) {
    return std::make_shared<TorusSurface>(modulus, volume, n);
}

}  // namespace vortexlab
