#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydsim/gate.hpp"

namespace rydsim {

/// Symmetric segmented-pulse search space: the first-half magnitudes of
/// Omega1, Omega2 and Delta1 (MHz), N values each, in that order.
struct OptimizationProblem {
  int n_half_segments = 6;
  double omega_low_MHz = 0.0;
  double omega_high_MHz = 200.0;
  double delta1_low_MHz = 200.0;
  double delta1_high_MHz = 800.0;
  double slew_limit_MHz_per_us = 1000.0;
  double penalty_weight = 1.0;
  /// Template gate; protocol must be STIRAP-segmented. Its segment values are ignored.
  GateConfig gate = GateConfig::defaults(Protocol::kStirapSegmented);

  int dim() const { return 3 * n_half_segments; }
  std::vector<double> lower() const;
  std::vector<double> upper() const;
  void validate() const;
  /// Splits x into the three first-half segment lists.
  SegmentedDriveParams decode(const std::vector<double>& x) const;
};

/// Largest max_slew over the three decoded functions, MHz/us.
double max_slew_MHz_per_us(const SegmentedDriveParams& params);

/// Bell fidelity of the decoded pulses minus
/// penalty_weight * max(0, slew - limit) / limit. Integration failure scores 0.
double pulse_fitness(const std::vector<double>& x, const OptimizationProblem& problem);

struct DEConfig {
  /// 0 selects 10 * dim.
  int population = 0;
  double weight = 0.7;
  double crossover = 0.9;
  int generations = 100;
  std::uint64_t seed = 1;
  int workers = 1;

  void validate(int dim) const;
  int population_size(int dim) const { return population > 0 ? population : 10 * dim; }
};

/// Complete optimizer state after a finished generation.
struct DECheckpoint {
  std::uint64_t seed = 0;
  int generation = 0;  // 0 = initial population evaluated
  std::vector<std::vector<double>> population;
  std::vector<double> fitness;
  std::vector<double> history;  // best fitness after generations 0..generation
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::string& path, const DECheckpoint& cp);
/// Throws CheckpointError on unreadable, malformed or inconsistent files.
DECheckpoint load_checkpoint(const std::string& path);

struct DEResult {
  std::vector<double> best_x;
  double best_fitness = 0.0;
  std::vector<double> history;
  DECheckpoint final_state;
};

using Objective = std::function<double(const std::vector<double>&)>;
using GenerationCallback = std::function<void(const DECheckpoint&)>;

/// DE/rand/1/bin maximizing `f` within [lower, upper]. Mutants are clipped to
/// the bounds and a trial replaces its parent when it scores at least as well.
/// Every random draw is keyed by (seed, generation, candidate), so results
/// do not depend on the worker count. `resume` continues from a checkpoint.
DEResult differential_evolution(const Objective& f, const std::vector<double>& lower,
                                const std::vector<double>& upper, const DEConfig& cfg,
                                const std::optional<DECheckpoint>& resume = std::nullopt,
                                const GenerationCallback& on_generation = {});

struct PulseOptimizationResult {
  DEResult search;
  SegmentedDriveParams best;
  /// Best candidate re-scored with the template's own integrator settings.
  double final_fitness = 0.0;
  double final_fidelity = 0.0;
  double final_slew_MHz_per_us = 0.0;
};

/// Runs the search with a relaxed integrator (rel_tol 1e-7) and re-scores
/// the winner at the template tolerance.
PulseOptimizationResult optimize_pulses(const OptimizationProblem& problem, const DEConfig& cfg,
                                        const std::optional<DECheckpoint>& resume = std::nullopt,
                                        const GenerationCallback& on_generation = {});

}  // namespace rydsim
