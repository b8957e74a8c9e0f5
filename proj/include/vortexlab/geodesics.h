/// Geodesic rays in the space of Kaehler potentials on the sphere: the
/// explicit one-parameter-subgroup ray, the geodesic-equation residual,
/// axisymmetric epsilon-geodesics, path lengths, and K_alpha ray profiles.

#pragma once

#include "vortexlab/energy.h"

namespace vortexlab {

// phi_t = (V/4pi)(log((1+e^{4t} r^2)/(1+r^2)) - 2t) + b t in the affine chart,
// the potential of the pullback of omega0 by the automorphism z -> e^{2t} z.
Field fs_ray_potential(const SphereSurface& g, double t, double b = 0.0);

// d/dt of the above; at t=0 equals -(V/2pi) cos(theta) + b.
Field fs_ray_velocity(const SphereSurface& g, double t, double b = 0.0);

// Conformal factor of the pulled-back metric omega_{phi_t} = sigma_t^* omega0,
// in closed form: e^{4t}(1+r^2)^2/(1+e^{4t}r^2)^2. For large t the pullback
// concentrates below grid resolution and the spectral 1 - Delta0 phi_t cannot
// represent it; ray functionals use this exact density instead.
Field fs_ray_conformal(const SphereSurface& g, double t);

// d/dt J_xi(phi_t) = int phi_dot (xi - omega_{phi_t}), exact-ray densities.
double ray_j_slope(const SphereSurface& g, const Field& xi, double t, double b = 0.0);

// Sup-norm of phi_dd - |grad phi_d|^2_0 / rho from three consecutive samples.
double geodesic_residual(const Surface& g, const Field& prev, const Field& mid, const Field& next,
                         double dt);

struct EpsilonGeodesic {
    double epsilon = 0.0;
    std::vector<double> times;          // M nodes on [0,1]
    std::vector<Field> zonal;           // M profiles of nlat values each
    double residual_sup = 0.0;
    int newton_iters = 0;
};

// Expand a zonal (latitude-only) profile to a full grid field.
Field expand_zonal(const SphereSurface& g, const Field& profile);
// Longitude average; throws if the field deviates from axisymmetry.
Field zonal_profile(const SphereSurface& g, const Field& u);

EpsilonGeodesic solve_epsilon_geodesic(const SphereSurface& g, const Field& end0, const Field& end1,
                                       double epsilon, int time_nodes);

// Quadrature of int |phi_dot| omega_phi dt along a sampled path (trapezoid in
// t, centered differences for phi_dot, one-sided at the ends).
double d1_path_length(const Surface& g, const std::vector<double>& times,
                      const std::vector<Field>& kpots);

struct RayProfileRow {
    double t = 0.0;
    double k_alpha = 0.0;
    double k_alpha_prime = 0.0;
};

// K_alpha along the ray, computed in the pulled-back frame: fixed round
// background, divisor flowing by z -> e^{2t} z; K_alpha' assembled from the
// vortex solution at each t, K_alpha by cumulative quadrature anchored at t=0.
std::vector<RayProfileRow> ray_k_alpha_profile(const SphereSurface& g, const HiggsData& higgs,
                                               double alpha, double tau,
                                               const std::vector<double>& tgrid, double b = 0.0);

// Limit of a sequence from its last three terms (Aitken delta-squared).
double aitken_limit(double a, double b, double c);

}  // namespace vortexlab
