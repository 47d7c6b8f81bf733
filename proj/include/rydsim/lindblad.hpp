#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydsim/pulses.hpp"
#include "rydsim/quantum_core.hpp"

namespace rydsim {

/// Which atoms the lasers act on. Gates drive both; the single-atom settings
/// exist for the individually addressed reference sequence.
enum class Addressing { kBoth, kControl, kTarget };

/// (rabi/2) |upper><lower| + h.c. on each addressed atom.
struct DriveCoupling {
  std::string lower;
  std::string upper;
  Waveform rabi;
};

/// detuning |level><level| on each addressed atom.
struct DriveShift {
  std::string level;
  Waveform detuning;
};

/// Two-atom Hamiltonian H_c (x) I + I (x) H_t + B |rr><rr|.
///
/// Rates and detunings are angular (rad/us). All Rabi amplitudes are scaled
/// by sqrt(1 + intensity_offset); detuning_offset is added to the shift of
/// |r>, i.e. to Delta(t) for one-photon and to the two-photon detuning for
/// two-photon excitation.
struct HamiltonianModel {
  std::vector<DriveCoupling> couplings;
  std::vector<DriveShift> shifts;
  double blockade = 0.0;
  double detuning_offset = 0.0;
  double intensity_offset = 0.0;
  Addressing addressing = Addressing::kBoth;
  /// Times at which a drive function jumps; the integrator never steps across them.
  std::vector<double> breakpoints;

  static HamiltonianModel one_photon(const ArpDrive& drive, double blockade);
  static HamiltonianModel two_photon(const StirapDrive& drive, double blockade);
};

enum class IntegratorMethod { kDormandPrince45, kFixedRk4 };

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  /// Upper bound on the step in us; 0 means unbounded. Also the step of the
  /// fixed RK4 backend, which falls back to 1e-4 us when this is 0.
  double max_step = 0.0;
  IntegratorMethod method = IntegratorMethod::kDormandPrince45;
  long max_steps = 50'000'000;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t = " + std::to_string(time) + " us"), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// sqrt(b_jk gamma_k) |j><k| on one atom, embedded in the two-atom space.
struct LindbladOperator {
  std::string label;
  Atom atom;
  std::string lower;
  std::string upper;
  double rate;
  CMatrix matrix;
};

/// One operator per atom for every channel with b_jk gamma_k > 0.
std::vector<LindbladOperator> dissipator(const LevelScheme& scheme);

/// Right-hand side of d rho/dt = i[H, rho] + L[rho].
///
/// Uses the sparse single-atom structure of H and of the jump operators
/// instead of dense two-atom products. Safe to share between threads.
class Liouvillian {
 public:
  Liouvillian(const HamiltonianModel& h, const LevelScheme& scheme);

  void apply(double t, const CMatrix& rho, CMatrix& drho) const;
  /// Dense two-atom Hamiltonian at time t.
  CMatrix hamiltonian(double t) const;
  Eigen::Index dim() const { return n_; }

 private:
  struct Entry {
    Eigen::Index row;
    Eigen::Index col;
    double value;
  };
  struct Jump {
    Eigen::Index lower;
    Eigen::Index upper;
    double rate;
  };
  struct Coupling {
    Eigen::Index lower;
    Eigen::Index upper;
    Waveform rabi;
  };
  struct Shift {
    Eigen::Index level;
    Waveform detuning;
  };

  std::size_t single_atom_entries(double t, Entry* out) const;

  Eigen::Index d_;
  Eigen::Index n_;
  std::vector<Coupling> couplings_;
  std::vector<Shift> shifts_;
  Eigen::Index rydberg_;
  double detuning_offset_;
  double rabi_scale_;
  bool drive_control_;
  bool drive_target_;
  double blockade_;
  std::vector<Jump> jumps_;
  CVector diag_;  // B on |rr> plus i/2 times the total decay rate out of each state
};

struct TimeSeries {
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;  // rows[k][j]: observable j at times[k]

  std::vector<double> column(const std::string& label) const;
};

struct IntegrationStats {
  long accepted_steps = 0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
  /// Largest |rho - rho^dagger| seen before the per-step symmetrization.
  double max_hermiticity_drift = 0.0;
};

struct PropagationResult {
  DensityMatrix rho;
  TimeSeries series;
  IntegrationStats stats;
};

/// Integrates rho over [t0, t1]. Observables are sampled at t0 + k sample_dt
/// (and at t1) through the integrator's dense output; sample_dt <= 0 skips
/// sampling. t1 == t0 returns rho0 unchanged.
PropagationResult propagate(const DensityMatrix& rho0, const HamiltonianModel& h,
                            const LevelScheme& scheme, double t0, double t1,
                            const IntegratorConfig& cfg,
                            const std::vector<Observable>& observables = {},
                            double sample_dt = 0.0);

}  // namespace rydsim
