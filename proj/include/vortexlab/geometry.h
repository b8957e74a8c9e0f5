/// Background geometries: flat torus and round sphere of prescribed area V,
/// with spectral Laplacian, quadrature, gradients, and Green functions.
///
/// Conventions used across the whole library:
///   - Laplacian has positive spectrum: Delta u = -2 g^{zz} u_{zz} in a chart
///     omega0 = i g dz^dzbar, so Delta of a plane wave is +|k|^2-like.
///   - omega_psi = omega0 (1 - Delta0 psi), conformal factor rho = 1 - Delta0 psi.
///   - Curvature S is Gauss curvature: integral of S omega = 2 pi chi.
///   - All integrals are sums against `weights` (quadrature for omega0).

#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

namespace vortexlab {

using Field = std::vector<double>;

// Torus: chart coordinates are lattice coordinates (a,b) = (s,t) in [0,1)^2,
// the point being scale*(s + modulus*t) in the plane.
// Sphere: (a,b) = (x,y) of the affine chart z = x+iy, or at_inf for z = infinity.
struct SurfacePoint {
    double a = 0.0;
    double b = 0.0;
    bool at_inf = false;
};

class Surface {
public:
    virtual ~Surface() = default;

    int genus = 0;
    int euler_char = 2;
    double volume = 0.0;
    double mean_curvature = 0.0;  // <S> = 4 pi (1-g) / V
    Field weights;                // per-node quadrature weights, sum = V
    Field s0;                     // constant background curvature field

    int npts() const { return static_cast<int>(weights.size()); }

    double integrate(const Field& u) const;
    double mean(const Field& u) const { return integrate(u) / volume; }

    // n for the torus, band limit L for the sphere (dump header field).
    virtual int resolution() const = 0;

    virtual void laplacian(const Field& u, Field& out) const = 0;

    // Solves (Delta0 + sigma) u = rhs for sigma > 0. For sigma = 0 the constant
    // mode of rhs is discarded and the mean-zero solution is returned.
    virtual void shifted_solve(const Field& rhs, double sigma, Field& out) const = 0;

    // Orthonormal-frame gradient components: <du,dv>_0 = gx_u gx_v + gy_u gy_v
    // pointwise, |du|^2_0 = gx^2 + gy^2.
    virtual void grad_components(const Field& u, Field& gx, Field& gy) const = 0;

    // Green function with mean-zero normalization: Delta0 G(p,.) = delta_p - 1/V,
    // local behavior -(1/2pi) log d near p. Off-grid p is handled analytically.
    virtual Field green(const SurfacePoint& p) const = 0;

    // Distance-like quantity whose log carries the Green singularity
    // (torus: chart distance to the nearest lattice image; sphere: geodesic angle).
    virtual double singular_distance(const SurfacePoint& p, int node) const = 0;

    // Evaluate a grid field at an arbitrary point through the spectral basis.
    virtual double eval_smooth(const Field& u, const SurfacePoint& p) const = 0;
};

class TorusSurface final : public Surface {
public:
    TorusSurface(std::complex<double> modulus, double vol, int n);
    ~TorusSurface() override;

    int n = 0;
    std::complex<double> modulus;
    double scale = 0.0;  // z = scale*(s + modulus*t)

    int resolution() const override { return n; }
    void laplacian(const Field& u, Field& out) const override;
    void shifted_solve(const Field& rhs, double sigma, Field& out) const override;
    void grad_components(const Field& u, Field& gx, Field& gy) const override;
    Field green(const SurfacePoint& p) const override;
    double singular_distance(const SurfacePoint& p, int node) const override;
    double eval_smooth(const Field& u, const SurfacePoint& p) const override;

    SurfacePoint node_point(int idx) const;
    // Chart displacement from p to node, reduced to the nearest lattice image.
    std::complex<double> chart_displacement(const SurfacePoint& p, int node) const;
    // Spectral interpolation of a coarse-grid field onto this (finer) grid.
    Field prolong(const TorusSurface& coarse, const Field& u) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl;
};

// Coefficient layout for real spherical harmonics: a(l,m) cos-parts for
// 0 <= m <= l <= L, b(l,m) sin-parts for 1 <= m <= l <= L.
struct SphereCoef {
    std::vector<double> a;
    std::vector<double> b;
};

class SphereSurface final : public Surface {
public:
    SphereSurface(double vol, int band_limit);
    ~SphereSurface() override;

    int L = 0;
    int nlat = 0;   // Gauss-Legendre nodes in x = cos(theta)
    int nlon = 0;   // uniform longitudes
    Field glx;      // x_i = cos(theta_i), ascending
    Field glw;      // GL weights on [-1,1]
    Field sin_theta;
    std::vector<double> lon;  // lambda_j

    int resolution() const override { return L; }
    void laplacian(const Field& u, Field& out) const override;
    void shifted_solve(const Field& rhs, double sigma, Field& out) const override;
    void grad_components(const Field& u, Field& gx, Field& gy) const override;
    Field green(const SurfacePoint& p) const override;
    double singular_distance(const SurfacePoint& p, int node) const override;
    double eval_smooth(const Field& u, const SurfacePoint& p) const override;

    int node_index(int i, int j) const { return i * nlon + j; }
    // Unit 3-vector of a node / of a chart point.
    void node_vector(int idx, double out[3]) const;
    static void point_vector(const SurfacePoint& p, double out[3]);
    // |z|^2 of the affine chart coordinate at a node.
    double chart_r2(int idx) const;

    SphereCoef analyze(const Field& u) const;
    void synthesize(const SphereCoef& c, Field& out) const;
    double eval_coef(const SphereCoef& c, double x, double lambda) const;

    // Dense nodal matrices of the zonal (m = 0) restriction, (nlat x nlat):
    // the Laplacian and d/dx on axisymmetric fields sampled at the GL nodes.
    std::vector<double> zonal_laplacian_matrix() const;
    std::vector<double> zonal_ddx_matrix() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl;
};

std::shared_ptr<TorusSurface> build_torus(std::complex<double> modulus, double volume, int n);
std::shared_ptr<SphereSurface> build_sphere(double volume, int band_limit);

Field laplacian_apply(const Surface& g, const Field& u);

// Requires |integral of rhs| < 1e-8 * ||rhs||; returns the mean-zero solution.
Field poisson_solve(const Surface& g, const Field& rhs);

// (Delta0 + v) u = rhs with v >= 0, integral of v > 0; preconditioned CG.
Field helmholtz_solve(const Surface& g, const Field& v, const Field& rhs);

Field green_function(const Surface& g, const SurfacePoint& p);

// rho = 1 - Delta0 kpot; throws if min rho < 1e-8.
Field conformal_factor(const Surface& g, const Field& kpot);

// S_{omega_psi} = (S0 + Delta0 u)/rho with u = (1/2) log rho.
Field conformal_curvature(const Surface& g, const Field& kpot);

// integral of i da ^ dbar b = (1/2) integral of <da,db>_0 omega0.
double dirichlet_pairing(const Surface& g, const Field& a, const Field& b);

// Smooth cutoff used by the Green-function singularity splitting: 1 on [0,r1],
// 0 on [r0,inf), C-infinity monotone in between. Exposed for tests.
double green_cutoff(double r, double r1, double r0);
double green_cutoff_d1(double r, double r1, double r0);
double green_cutoff_d2(double r, double r1, double r0);

}  // namespace vortexlab
