/// Coupled metric-plus-Hermitian solver: continuity method in the coupling
/// constant for the system
///   Delta0 f + (1/2)(|phi|^2_h - tau) E = -2piN/V,
///   Delta0 kpot + E = 1,   E = exp(4 alpha tau f - 2 alpha |phi|^2_h - 2 c kpot),
/// plus verification against the unreduced equations, the twisted variant,
/// the closed-form Futaki invariant, and divisor polystability.

#pragma once

#include "vortexlab/energy.h"

namespace vortexlab {

struct GravConfig {
    std::shared_ptr<const Surface> geom;
    HiggsData higgs;
    double tau = 1.0;
    double alpha = 0.0;       // continuity target
    double alpha_step = 0.05; // initial step, halved on Newton failure, floor 1e-4
};

struct GravSolution {
    Field f;
    Field kpot;
    double c = 0.0;
    double res_f_sup = 0.0;
    double res_kpot_sup = 0.0;
    double k_alpha_value = 0.0;
};

struct ContinuityRow {
    double alpha = 0.0;
    int newton_iters = 0;
    double res_f = 0.0;
    double res_kpot = 0.0;
    double k_alpha = 0.0;
};

struct ContinuityTrace {
    std::vector<ContinuityRow> rows;     // accepted alpha values, strictly increasing
    bool stalled = false;
    double stall_alpha = 0.0;            // target not reached beyond this alpha
    std::vector<std::string> warnings;
    std::vector<double> mean_f_path;     // drift diagnostic, one entry per row
    std::vector<double> d1_steps;        // int |dkpot| omega_kpot per unit alpha, per row
};

struct GravOutcome {
    GravSolution sol;
    ContinuityTrace trace;
};

// Left-minus-right densities of the two equations at (f, kpot), lambda = 0.
std::pair<Field, Field> coupled_residual(const GravConfig& cfg, const Field& f, const Field& kpot);

// Continuity method from the exact alpha = 0 solution (vortex f, kpot = 0),
// warm-started Newton at each step. A stall (step floor reached below the
// target) is reported in the trace, not thrown; the outcome carries the last
// converged solution.
GravOutcome solve_gravitating(const GravConfig& cfg, const Field* init_f = nullptr,
                              const Field* init_kpot = nullptr);

struct VerifyReport {
    double res_vortex_sup = 0.0;   // curvature equation, assembled with spectral rho
    double res_scalar_sup = 0.0;   // sup |T - c|, T = S + alpha (Delta_omega + tau)(|phi|^2_h - tau)
    double scalar_spread = 0.0;    // max T - min T
    double mean_minus_c = 0.0;     // omega_kpot-average of T minus c
    double min_rho = 0.0;
};

// Residuals of the unreduced equations, discretized independently of the
// exponential form the solver iterates on (rho enters spectrally here).
VerifyReport verify_solution(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                             const GravSolution& sol);

// Scalar equation twisted by -lambda(xi/omega_kpot - 1); xi is a positive
// density against omega0 with total mass V. Solved in the same integrated
// exponential form, E = exp(4 alpha tau f - 2 alpha w + 2 lambda psi
// + 2(lambda - c) kpot) with Delta0 psi = xi - 1, so lambda = 0 is literally
// the untwisted system. When lambda = c the zeroth mode of kpot decouples and
// the solve switches to the pinned gauge AM(kpot) = 0 with a free additive
// constant in the exponent.
GravSolution solve_twisted(const GravConfig& cfg, const Field& xi, double lambda,
                           const Field* init_f = nullptr, const Field* init_kpot = nullptr);

// 2 alpha tau (N - 2 n1)(V - 4 pi N / tau).
double futaki_closed_form(double alpha, double tau, int N, int n1, double V);

enum class Stability { stable, polystable, unstable };

struct StabilityVerdict {
    Stability kind = Stability::unstable;
    int witness_index = -1;  // offending point, or first of the balanced pair
    std::string note;
};

// Stable iff every multiplicity < N/2; polystable (non-stable) iff N is even
// and the divisor is two distinct points of multiplicity N/2 each.
StabilityVerdict check_polystability(const Divisor& d);

// Rows as `alpha,newton_iters,res_f,res_kpot,k_alpha` with a header line.
std::string trace_csv(const ContinuityTrace& trace);

}  // namespace vortexlab
