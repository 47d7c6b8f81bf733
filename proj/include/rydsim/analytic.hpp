#pragma once

#include <vector>

#include "rydsim/gate.hpp"
#include "rydsim/lindblad.hpp"
#include "rydsim/quantum_core.hpp"

namespace rydsim {

/// Constant-amplitude pulse parameters. Angular units (rad/us).
struct AnalyticParams {
  Complex omega0{kTwoPi * 4.0, 0.0};
  double delta = 0.0;
  double dI = 0.0;

  /// Omega' = sqrt(|Omega0|^2 (1 + dI) + Delta^2).
  double omega_prime() const;
};

/// Error-perturbed 1 <-> r rotation in the basis {0, 1, r}; equals
/// exp(+iHt) for H = (Omega/2)|r><1| + h.c. + Delta |r><r|.
CMatrix rotation_matrix(double t, const AnalyticParams& p);

/// Durations of the nominal pi and 2pi pulses, pi/|Omega0| and 2pi/|Omega0|.
struct PulseDurations {
  double t_pi = 0.0;
  double t_2pi = 0.0;
  static PulseDurations nominal(Complex omega0);
};

/// Control pi, blocked target 2pi, control pi on the 9-dim two-atom space
/// {0,1,r} x {0,1,r}, with perfect blockade.
CMatrix cz_operator(const AnalyticParams& p, const PulseDurations& d);
/// cz_operator at zero error.
CMatrix ideal_cz(Complex omega0 = {kTwoPi * 4.0, 0.0});

/// (I x H) U (I x H)(H x I)|00> on the 9-dim space.
CVector bell_state(const CMatrix& u);
/// (|01> - |10>)/sqrt2 on the 9-dim space.
CVector ideal_bell_state();

/// |<Bell'|Bell>|^2 with the errors (delta, dI) in every pulse.
double analytic_bell_fidelity(const AnalyticParams& p, const PulseDurations& d);
double analytic_bell_fidelity(const AnalyticParams& p);

/// (omega_max / delta_min)^2.
double leakage_bound(double omega_max, double delta_min);

/// Fidelity over a detuning (kHz) x intensity grid, dDelta the slow index.
std::vector<RobustnessPoint> analytic_sensitivity_grid(Complex omega0,
                                                       const std::vector<double>& dDelta_kHz,
                                                       const std::vector<double>& dI_frac);

/// The same pulse sequence integrated with the master equation: individually
/// addressed constant pulses on a decay-free one-photon scheme with blockade
/// B (rad/us). Returns the Bell-state fidelity of the final density matrix.
double numerical_sequence_fidelity(const AnalyticParams& p, double blockade,
                                   const IntegratorConfig& cfg = {});

}  // namespace rydsim
