#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rydsim/gate.hpp"
#include "rydsim/optimizer.hpp"

namespace rydsim {

/// Which basis state simulate starts from; kBell runs the full Bell sequence.
enum class InitialState { kBell, k00, k01, k10, k11 };

/// Parsed run configuration (INI text, unit-suffixed keys).
///
///   [protocol]   name, B_MHz, dDelta_kHz, dI_frac, bell_target, initial_state
///   [scheme]     tau_r_us, tau_p_us, b_0r, b_1r, b_dr, b_pr, b_0p, b_1p, b_dp
///   [drive]      protocol-specific pulse parameters (see README)
///   [sweep]      B_MHz (list)
///   [robustness] dDelta_kHz (list), dI_frac (list)
///   [optimize]   search space, DE settings, checkpoint
///   [integrator] method, rel_tol, abs_tol, max_step_us, samples
///   [output]     dir, traces
///
/// Every key is optional except [protocol] name (and the lists a command
/// needs); omitted keys take the reference values of the chosen protocol.
/// `name = analytic` selects the constant-amplitude reference gate, whose
/// only drive key is omega0_MHz.
struct RunConfig {
  GateConfig gate;
  InitialState initial_state = InitialState::kBell;
  /// [protocol] name = analytic selects the constant-amplitude reference
  /// gate instead of a simulated protocol.
  bool analytic_model = false;

  std::vector<double> sweep_B_MHz;
  std::vector<double> robustness_dDelta_kHz;
  std::vector<double> robustness_dI_frac;

  OptimizationProblem problem;
  DEConfig de;
  std::string checkpoint;  // empty: <output dir>/checkpoint.json
  bool resume = false;

  /// Rabi frequency of the constant-amplitude reference gate (analytic command).
  double analytic_omega0_MHz = 4.0;

  std::string output_dir = ".";
  bool write_traces = true;
};

/// Throws ConfigError naming the section and key on any problem.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace rydsim
