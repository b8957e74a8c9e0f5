/// Reference Higgs data built from an effective divisor: the singular density
/// log|phi|^2_{h0} with sup = 0, and the constant curvature density 2 pi N / V.

#pragma once

#include "vortexlab/geometry.h"

#include <string>

namespace vortexlab {

struct Divisor {
    std::vector<SurfacePoint> points;
    std::vector<int> multiplicities;

    int degree() const;
    int max_multiplicity() const;
    void validate() const;  // throws on empty, nonpositive, or coincident entries
};

struct HiggsData {
    Divisor divisor;
    Field u0;                  // log|phi|^2_{h0}, floored at -745, sup = 0
    double curvature_density;  // 2 pi N / V, constant density of iF_{h0} vs omega0
    std::shared_ptr<const Surface> geom;

    int degree() const { return divisor.degree(); }
};

HiggsData build_higgs_green(std::shared_ptr<const Surface> geom, const Divisor& d);

// Chart formula u0 = sum 2 n_j log|z - p_j| - N log(1+|z|^2) + C; a point at
// infinity enters through the degree deficit of the first sum.
HiggsData build_higgs_explicit_sphere(std::shared_ptr<const SphereSurface> geom, const Divisor& d);

// Divisor flow p_j -> e^{2t} p_j in the affine chart (fixed points 0 and inf).
HiggsData pullback_higgs(const HiggsData& h, double t);

// Divisor text format: one `x y multiplicity` line per point; on the sphere
// the token `inf` denotes the point at infinity.
Divisor parse_divisor(const std::string& text, int genus);
std::string format_divisor(const Divisor& d);

// Discrete Poincare-Lelong pairing: integral of zeta against the curvature
// measure of (L, h0) assembled from u0, with the log singularities of the
// analytic part integrated in closed form near divisor points. Used to test
// that the degree comes out as 2 pi N independent of the grid.
double lelong_pairing(const Surface& geom, const HiggsData& h, const Field& zeta);

}  // namespace vortexlab
