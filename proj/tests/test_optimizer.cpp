#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "rydsim/optimizer.hpp"
#include "support.hpp"

using namespace rydsim;
namespace fs = std::filesystem;

namespace {

double sphere(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return -s;
}

/// Rastrigin: many local optima, exercises the full mutation path.
double rastrigin(const std::vector<double>& x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(kTwoPi * v);
  return -s;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("rydsim_test_" + std::to_string(::getpid()) + "_" + name);
}

DEConfig small_de(int generations, std::uint64_t seed = 7) {
  DEConfig c;
  c.population = 12;
  c.generations = generations;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(DifferentialEvolution, SphereConverges) {
  DEConfig cfg;
  cfg.population = 20;
  cfg.generations = 200;
  const DEResult r = differential_evolution(sphere, {-5, -5}, {5, 5}, cfg);
  EXPECT_LT(std::sqrt(-r.best_fitness), 1e-3);
  EXPECT_EQ(r.history.size(), 201u);
}

TEST(DifferentialEvolution, SeedDeterminismIndependentOfWorkers) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    DEConfig cfg = small_de(30, seed);
    const DEResult a = differential_evolution(rastrigin, {-5, -5, -5}, {5, 5, 5}, cfg);
    const DEResult b = differential_evolution(rastrigin, {-5, -5, -5}, {5, 5, 5}, cfg);
    cfg.workers = 4;
    const DEResult c = differential_evolution(rastrigin, {-5, -5, -5}, {5, 5, 5}, cfg);
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.history, c.history);
    EXPECT_EQ(a.best_x, c.best_x);
  }
}

TEST(DifferentialEvolution, DifferentSeedsDiffer) {
  const DEResult a = differential_evolution(rastrigin, {-5, -5}, {5, 5}, small_de(5, 1));
  const DEResult b = differential_evolution(rastrigin, {-5, -5}, {5, 5}, small_de(5, 2));
  EXPECT_NE(a.final_state.population, b.final_state.population);
}

TEST(DifferentialEvolution, HistoryMonotoneAndPopulationInBounds) {
  prop::Gen gen(91);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = gen.integer(1, 6);
    std::vector<double> lo(static_cast<std::size_t>(dim)), hi(lo.size());
    for (std::size_t j = 0; j < lo.size(); ++j) {
      lo[j] = gen.uniform(-10, 0);
      hi[j] = lo[j] + gen.uniform(0.1, 10);
    }
    DEConfig cfg = small_de(25, static_cast<std::uint64_t>(trial));
    cfg.weight = gen.uniform(0.3, 1.5);  // large weights push mutants outside the box
    cfg.crossover = gen.uniform(0, 1);
    const DEResult r = differential_evolution(rastrigin, lo, hi, cfg);
    for (std::size_t g = 1; g < r.history.size(); ++g) EXPECT_GE(r.history[g], r.history[g - 1]);
    for (const auto& x : r.final_state.population)
      for (std::size_t j = 0; j < x.size(); ++j) {
        EXPECT_GE(x[j], lo[j]);
        EXPECT_LE(x[j], hi[j]);
      }
    EXPECT_EQ(r.best_fitness, r.history.back());
  }
}

TEST(DifferentialEvolution, RejectsBadSettings) {
  DEConfig cfg = small_de(5);
  cfg.weight = 0.0;
  EXPECT_THROW(differential_evolution(sphere, {0}, {1}, cfg), ConfigError);
  cfg = small_de(5);
  cfg.crossover = 1.5;
  EXPECT_THROW(differential_evolution(sphere, {0}, {1}, cfg), ConfigError);
  cfg = small_de(5);
  cfg.population = 3;
  EXPECT_THROW(differential_evolution(sphere, {0}, {1}, cfg), ConfigError);
  EXPECT_THROW(differential_evolution(sphere, {1}, {0}, small_de(5)), ConfigError);
  EXPECT_THROW(differential_evolution(sphere, {0, 0}, {1}, small_de(5)), ConfigError);
}

TEST(Checkpoint, RoundTripIsExact) {
  const DEResult r = differential_evolution(rastrigin, {-5, -5}, {5, 5}, small_de(4));
  const fs::path p = temp_path("roundtrip.json");
  save_checkpoint(p.string(), r.final_state);
  const DECheckpoint back = load_checkpoint(p.string());
  EXPECT_EQ(back.seed, r.final_state.seed);
  EXPECT_EQ(back.generation, 4);
  EXPECT_EQ(back.population, r.final_state.population);
  EXPECT_EQ(back.fitness, r.final_state.fitness);
  EXPECT_EQ(back.history, r.final_state.history);
  fs::remove(p);
}

TEST(Checkpoint, ResumeReproducesUninterruptedRun) {
  const DEConfig cfg = small_de(12);
  const DEResult full = differential_evolution(rastrigin, {-5, -5, -5}, {5, 5, 5}, cfg);
  const fs::path p = temp_path("resume.json");
  DEConfig partial = cfg;
  partial.generations = 5;
  differential_evolution(rastrigin, {-5, -5, -5}, {5, 5, 5}, partial, std::nullopt,
                         [&](const DECheckpoint& cp) { save_checkpoint(p.string(), cp); });
  const DEResult resumed =
      differential_evolution(rastrigin, {-5, -5, -5}, {5, 5, 5}, cfg, load_checkpoint(p.string()));
  EXPECT_EQ(resumed.history, full.history);
  EXPECT_EQ(resumed.best_x, full.best_x);
  fs::remove(p);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  const DEResult r = differential_evolution(sphere, {-1}, {1}, small_de(2));
  const fs::path p = temp_path("corrupt.json");
  save_checkpoint(p.string(), r.final_state);
  std::string text;
  {
    std::ifstream is(p);
    text.assign(std::istreambuf_iterator<char>(is), {});
  }
  const std::vector<std::string> bad{text.substr(0, text.size() / 2), "{}", "not json",
                                     R"({"format":"rydsim-de-checkpoint","version":2})"};
  for (const auto& b : bad) {
    std::ofstream(p, std::ios::trunc) << b;
    EXPECT_THROW(load_checkpoint(p.string()), CheckpointError) << b;
  }
  EXPECT_THROW(load_checkpoint(temp_path("missing.json").string()), CheckpointError);

  // structurally valid but inconsistent with the run configuration
  EXPECT_THROW(differential_evolution(sphere, {-1}, {1}, small_de(4, 8), r.final_state), CheckpointError);
  DECheckpoint shrunk = r.final_state;
  shrunk.population.pop_back();
  shrunk.fitness.pop_back();
  EXPECT_THROW(differential_evolution(sphere, {-1}, {1}, small_de(4), shrunk), CheckpointError);
  EXPECT_THROW(differential_evolution(sphere, {-0.1}, {0.1}, small_de(4), r.final_state), CheckpointError);
  fs::remove(p);
}

TEST(Problem, DecodeAndBounds) {
  const OptimizationProblem prob;
  EXPECT_EQ(prob.dim(), 18);
  std::vector<double> x(18);
  for (int i = 0; i < 18; ++i) x[static_cast<std::size_t>(i)] = i;
  const SegmentedDriveParams s = prob.decode(x);
  EXPECT_EQ(s.omega1_MHz.front(), 0.0);
  EXPECT_EQ(s.omega2_MHz.front(), 6.0);
  EXPECT_EQ(s.delta1_MHz.back(), 17.0);
  EXPECT_EQ(prob.lower()[12], 200.0);
  EXPECT_EQ(prob.upper()[0], 200.0);
  EXPECT_THROW(prob.decode(std::vector<double>(5)), std::invalid_argument);

  OptimizationProblem bad;
  bad.omega_high_MHz = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.gate = GateConfig::defaults(Protocol::kArp);
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Problem, DecodedPulsesAreSymmetric) {
  prop::Gen gen(92);
  const OptimizationProblem prob;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(18);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = gen.uniform(prob.lower()[j], prob.upper()[j]);
    const SegmentedDrive d = build_segmented_pulses(prob.decode(x));
    for (const auto* f : {&d.omega1, &d.omega2, &d.delta1}) {
      EXPECT_TRUE(f->is_symmetric());
      for (int k = 0; k <= 50; ++k) EXPECT_NEAR((*f)(k / 50.0), (*f)(1.0 - k / 50.0), 1e-10 * 2e3 * kTwoPi);
    }
  }
}

TEST(Fitness, ZeroRabiSegmentsGiveQuarter) {
  OptimizationProblem prob;
  std::vector<double> x(18, 0.0);
  for (std::size_t j = 12; j < 18; ++j) x[j] = 400.0;
  EXPECT_NEAR(pulse_fitness(x, prob), 0.25, 1e-9);
}

TEST(Fitness, DoubleSlewCostsOne) {
  OptimizationProblem prob;
  prob.slew_limit_MHz_per_us = 1e9;
  std::vector<double> x;
  for (const auto* v : {&prob.gate.segmented.omega1_MHz, &prob.gate.segmented.omega2_MHz,
                        &prob.gate.segmented.delta1_MHz})
    x.insert(x.end(), v->begin(), v->end());
  const double unpenalized = pulse_fitness(x, prob);
  prob.slew_limit_MHz_per_us = 0.5 * max_slew_MHz_per_us(prob.decode(x));
  EXPECT_NEAR(pulse_fitness(x, prob), unpenalized - 1.0, 1e-9);
  prob.penalty_weight = 0.0;
  EXPECT_NEAR(pulse_fitness(x, prob), unpenalized, 1e-12);
}

TEST(Fitness, IntegrationFailureScoresZero) {
  OptimizationProblem prob;
  prob.gate.integrator.max_steps = 10;
  EXPECT_EQ(pulse_fitness(std::vector<double>(18, 300.0), prob), 0.0);
}

TEST(OptimizePulses, SmallBudgetImprovesOnInitialPopulation) {
  OptimizationProblem prob;
  DEConfig cfg;
  cfg.population = 12;
  cfg.generations = 6;
  cfg.seed = 1;
  const PulseOptimizationResult r = optimize_pulses(prob, cfg);
  EXPECT_GT(r.search.history.back(), r.search.history.front());
  for (std::size_t g = 1; g < r.search.history.size(); ++g)
    EXPECT_GE(r.search.history[g], r.search.history[g - 1]);
  EXPECT_NEAR(r.final_fitness, r.search.best_fitness, 1e-4);
}
