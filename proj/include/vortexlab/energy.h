/// Energy functionals on the space of Kaehler potentials: the K-energy, the
/// coupling term M_alpha for a pair (f, kpot), its reduced form at the vortex
/// solution, the combined K_alpha, and the first/second variation machinery.

#pragma once

#include "vortexlab/vortex.h"

namespace vortexlab {

struct EnergyConstants {
    double alpha = 0.0;
    double tau = 1.0;
    double volume = 0.0;
    int degree = 0;
    double c = 0.0;       // 2 pi (chi - 2 alpha tau N) / V
    double mean_s = 0.0;  // <S> = 4 pi (1 - g) / V
};

struct EnergyBreakdown {
    double k_energy = 0.0;
    double m_alpha = 0.0;
    double k_alpha = 0.0;  // k_energy + m_alpha, same quadrature
    double entropy = 0.0;  // (1/V) int log(omega_psi/omega0) omega_psi
    double am = 0.0;
    EnergyConstants constants;
};

double constant_c(int genus, double alpha, double tau, int degree, double volume);

// K(kpot) = (1/2) int log(rho) omega_kpot + (<S>/2) int kpot (omega_kpot - omega0).
double k_energy(const Surface& g, const Field& kpot);

// M_alpha of an arbitrary pair (f, kpot), five-term form.
double m_alpha_pair(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                    const Field& f, const Field& kpot);

// M_alpha(kpot) with f eliminated through the vortex equation; algebraically
// equal to m_alpha_pair at the solved f.
double m_alpha_reduced(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                       const Field& kpot);

EnergyBreakdown k_alpha_reduced(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                                const Field& kpot);

// Density (against omega0 weights) of the first variation of the reduced
// K_alpha: d/dt K_alpha(kpot + t v)|_0 = sum_i v_i g_i w_i.
Field sigma_alpha_density(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                          const Field& kpot);

// First variation of the unreduced K_alpha-pair functional K + M_alpha at
// (f, kpot) in the direction (fdot, kdot).
double ktilde_first_variation(const Surface& g, const HiggsData& higgs, double alpha, double tau,
                              const Field& f, const Field& kpot, const Field& fdot,
                              const Field& kdot);

struct PathJet {
    Field f, kpot;    // base point
    Field f1, kpot1;  // first derivatives in t
    Field f2, kpot2;  // second derivatives in t
};

struct SecondVariation {
    double grad_f_term = 0.0;      // 4a |df' + eta -| iF|^2, nonnegative
    double higgs_term = 0.0;       // 4a |J eta -| d_A phi - f' phi|^2, nonnegative
    double potential_term = 0.0;   // 2 |dbar grad^{1,0} kpot'|^2, nonnegative
    double moment1_term = 0.0;     // acceleration defect against the vortex residual
    double moment2_term = 0.0;     // acceleration defect against the metric residual
    double total = 0.0;
};

SecondVariation second_variation_terms(const Surface& g, const HiggsData& higgs, double alpha,
                                       double tau, const PathJet& jet);

double am_functional(const Surface& g, const Field& kpot);
double i_functional(const Surface& g, const Field& u0, const Field& u1);
double j_xi(const Surface& g, const Field& xi, const Field& kpot);

}  // namespace vortexlab
