/// Vortex equation solver: Newton iteration on the strictly convex functional
/// Mhat whose critical point is the Hermitian potential f with
/// iF_{h0 e^{2f}} + (1/2)(|phi|^2_h - tau) omega_phi = 0.

#pragma once

#include "vortexlab/higgs.h"

namespace vortexlab {

struct BradlowViolated : std::runtime_error {
    explicit BradlowViolated(const std::string& msg) : std::runtime_error(msg) {}
};

struct VortexProblem {
    std::shared_ptr<const Surface> geom;
    HiggsData higgs;
    double tau = 1.0;
    Field kpot;  // background Kaehler potential; empty means 0

    Field conformal() const;  // rho = 1 - Delta0 kpot, validated
};

struct VortexSolution {
    Field f;
    double residual_sup = 0.0;
    double degree_defect = 0.0;  // |integral of |phi|^2_h omega - (tau V - 4 pi N)|
    double pointwise_max = 0.0;  // sup |phi|^2_h
    int newton_iters = 0;
};

// Mhat(f) = int i df ^ dbar f + (2 pi N / V) int f omega0
//           + (1/4) int |phi|^2_{h0} e^{2f} omega_phi
//           - (tau/2) int f omega_phi - (1/4) int |phi|^2_{h0} omega_phi.
// The curvature term pairs f with the constant density of iF_{h0} against
// omega0; all other volume terms use omega_phi, so the gradient density is
// exactly the vortex residual and Mhat(0) = 0.
double mhat_energy(const VortexProblem& prob, const Field& f);

// Density g (against omega0 weights) with d/dt Mhat(f + t fdot) = int fdot g omega0;
// g = 2piN/V + Delta0 f + (1/2)(|phi|^2_h - tau) rho. Zero iff f solves the
// vortex equation on omega_phi.
Field mhat_gradient(const VortexProblem& prob, const Field& f);

VortexSolution solve_vortex(const VortexProblem& prob, const Field* init = nullptr);

// Gradient-energy stability of the vortex map kpot -> f:
// lhs = int |grad(f_a - f_b)|^2_0 omega0,
// rhs = (tau^2/4) E + tau sqrt(2 pi N) sqrt(E), E = int |grad(kpot_a - kpot_b)|^2_0 omega0.
std::pair<double, double> vortex_stability_bound(const VortexProblem& prob, const Field& kpot_a,
                                                 const Field& kpot_b);

}  // namespace vortexlab
