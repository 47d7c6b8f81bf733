#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rydsim/lindblad.hpp"
#include "rydsim/pulses.hpp"
#include "rydsim/quantum_core.hpp"

namespace rydsim {

enum class Protocol { kArp, kStirapAnalytic, kStirapVasilev, kStirapSegmented };

std::string protocol_name(Protocol p);
/// Accepts "arp", "stirap-analytic", "stirap-vasilev", "stirap-segmented".
Protocol parse_protocol(const std::string& name);

/// Everything needed for one gate run. Frequencies are ordinary MHz/kHz;
/// conversion to angular units happens when the drive is built.
struct GateConfig {
  Protocol protocol = Protocol::kArp;
  LevelScheme scheme = LevelScheme::arp_default();
  ArpDriveParams arp{};
  StirapDriveParams stirap{};
  VasilevDriveParams vasilev{};
  SegmentedDriveParams segmented{};
  double blockade_MHz = 3000.0;
  double detuning_offset_kHz = 0.0;
  double intensity_offset = 0.0;
  /// Overrides the protocol's Bell target.
  std::optional<BellPair> target;
  IntegratorConfig integrator{};
  /// Trace samples per gate (uniform, end points included).
  int samples = 500;

  /// Protocol defaults, including its level scheme.
  static GateConfig defaults(Protocol p);

  double duration_us() const;
  /// Largest Rabi amplitude of the drive in MHz.
  double omega_max_MHz() const;
  /// Largest |one-photon detuning| of the drive in MHz.
  double detuning_max_MHz() const;
  /// `integrator` with max_step capped at 1/(20 * detuning_max_MHz()), so
  /// the fastest drive frequency is always resolved.
  IntegratorConfig resolved_integrator() const;
  BellPair bell_target() const;
  /// Throws ConfigError on T <= 0, B < 0, dI <= -1, an invalid scheme or
  /// a scheme that lacks the levels the protocol drives.
  void validate() const;
};

HamiltonianModel build_hamiltonian(const GateConfig& cfg);

/// Observables recorded along the gate for the population figures.
std::vector<Observable> default_observables(const GateConfig& cfg);

struct GatePhases {
  double phi1_deg = 0.0;
  double phi2_deg = 0.0;
  /// Set when |01> or |11> returned with less than half its population.
  bool ill_defined = false;
};

struct SimulationResult {
  DensityMatrix rho_final;
  double fidelity = 0.0;
  GatePhases phases;
  TimeSeries traces;
  double leak_d = 0.0;
  IntegrationStats stats;
};

/// Propagates rho0 over [0, T]; `fidelity` is taken on the final state
/// against cfg.bell_target(). Phases are left empty.
SimulationResult run_gate(const GateConfig& cfg, const DensityMatrix& rho0, bool with_traces = true);

/// Dynamical phases of |01> and |11> relative to the dark |00>, from
/// decay-free evolution of (|00> + |x>)/sqrt2. Degrees in (-180, 180].
GatePhases extract_phases(const GateConfig& cfg);

/// |11> -> H (x) H -> gate -> I (x) H, scored against the Bell target.
SimulationResult bell_sequence(const GateConfig& cfg, bool with_traces = false);

struct SweepFit {
  bool valid = false;
  double b = 0.0;
  double c = 0.0;
};

struct SweepResult {
  std::vector<double> B_MHz;
  std::vector<double> infidelity;
  SweepFit fit;
};

/// Least-squares fit of 1 - F = b + c (omega_max / B)^2 in relative
/// residuals (weights 1/(1-F)). Fewer than 3 points gives an invalid fit.
SweepFit fit_blockade_scaling(double omega_max_MHz, const std::vector<double>& B_MHz,
                              const std::vector<double>& infidelity);

SweepResult blockade_sweep(const GateConfig& cfg, const std::vector<double>& B_MHz, int workers);

struct RobustnessPoint {
  double dDelta_kHz = 0.0;
  double dI_frac = 0.0;
  double fidelity = 0.0;
};

/// Row-major over (dDelta, dI): dDelta is the slow index.
std::vector<RobustnessPoint> robustness_grid(const GateConfig& cfg,
                                             const std::vector<double>& dDelta_kHz,
                                             const std::vector<double>& dI_frac, int workers);

}  // namespace rydsim
