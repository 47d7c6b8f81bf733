#include "rydsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "json.hpp"

#include "rydsim/parallel.hpp"

namespace rydsim {

std::vector<double> OptimizationProblem::lower() const {
  std::vector<double> v(static_cast<std::size_t>(dim()));
  const auto n = static_cast<std::size_t>(n_half_segments);
  std::fill(v.begin(), v.begin() + 2 * n, omega_low_MHz);
  std::fill(v.begin() + 2 * n, v.end(), delta1_low_MHz);
  return v;
}

std::vector<double> OptimizationProblem::upper() const {
  std::vector<double> v(static_cast<std::size_t>(dim()));
  const auto n = static_cast<std::size_t>(n_half_segments);
  std::fill(v.begin(), v.begin() + 2 * n, omega_high_MHz);
  std::fill(v.begin() + 2 * n, v.end(), delta1_high_MHz);
  return v;
}

void OptimizationProblem::validate() const {
  if (n_half_segments < 1) throw ConfigError("n_half_segments must be >= 1");
  auto check = [](double lo, double hi, const char* what) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ConfigError(std::string(what) + " bounds must be finite with low < high");
  };
  check(omega_low_MHz, omega_high_MHz, "omega");
  check(delta1_low_MHz, delta1_high_MHz, "delta1");
  if (!(slew_limit_MHz_per_us > 0.0)) throw ConfigError("slew_MHz_per_us must be positive");
  if (!(penalty_weight >= 0.0)) throw ConfigError("penalty weight must be >= 0");
  if (gate.protocol != Protocol::kStirapSegmented)
    throw ConfigError("pulse optimization needs the stirap-segmented protocol");
  gate.validate();
}

SegmentedDriveParams OptimizationProblem::decode(const std::vector<double>& x) const {
  if (x.size() != static_cast<std::size_t>(dim()))
    throw std::invalid_argument("decision vector has the wrong length");
  const auto n = static_cast<std::ptrdiff_t>(n_half_segments);
  SegmentedDriveParams p = gate.segmented;
  p.omega1_MHz.assign(x.begin(), x.begin() + n);
  p.omega2_MHz.assign(x.begin() + n, x.begin() + 2 * n);
  p.delta1_MHz.assign(x.begin() + 2 * n, x.end());
  return p;
}

double max_slew_MHz_per_us(const SegmentedDriveParams& params) {
  // Slopes are unit-agnostic; the MHz values are passed through kTwoPi and back.
  const SegmentedDrive d = build_segmented_pulses(params);
  return std::max({max_slew_MHz_per_us(d.omega1), max_slew_MHz_per_us(d.omega2),
                   max_slew_MHz_per_us(d.delta1)});
}

double pulse_fitness(const std::vector<double>& x, const OptimizationProblem& problem) {
  GateConfig cfg = problem.gate;
  cfg.segmented = problem.decode(x);
  double fidelity = 0.0;
  try {
    fidelity = bell_sequence(cfg).fidelity;
  } catch (const IntegrationError&) {
    return 0.0;
  }
  const double slew = max_slew_MHz_per_us(cfg.segmented);
  const double excess = std::max(0.0, slew - problem.slew_limit_MHz_per_us);
  return fidelity - problem.penalty_weight * excess / problem.slew_limit_MHz_per_us;
}

void DEConfig::validate(int dim) const {
  if (dim < 1) throw ConfigError("optimization needs at least one variable");
  if (!(weight > 0.0 && weight <= 2.0)) throw ConfigError("DE weight F must lie in (0, 2]");
  if (!(crossover >= 0.0 && crossover <= 1.0)) throw ConfigError("DE crossover CR must lie in [0, 1]");
  if (population_size(dim) < 4) throw ConfigError("DE population must be >= 4");
  if (generations < 0) throw ConfigError("generations must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 candidate_rng(std::uint64_t seed, int generation, std::size_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(generation));
  h = splitmix64(h ^ static_cast<std::uint64_t>(index));
  return std::mt19937_64(h);
}

std::size_t best_index(const std::vector<double>& fitness) {
  return static_cast<std::size_t>(std::max_element(fitness.begin(), fitness.end()) - fitness.begin());
}

}  // namespace

DEResult differential_evolution(const Objective& f, const std::vector<double>& lower,
                                const std::vector<double>& upper, const DEConfig& cfg,
                                const std::optional<DECheckpoint>& resume,
                                const GenerationCallback& on_generation) {
  const int dim = static_cast<int>(lower.size());
  cfg.validate(dim);
  if (upper.size() != lower.size()) throw ConfigError("bound vectors differ in length");
  for (std::size_t j = 0; j < lower.size(); ++j)
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(lower[j] < upper[j]))
      throw ConfigError("every bound must be finite with low < high");

  const auto np = static_cast<std::size_t>(cfg.population_size(dim));
  const auto nd = static_cast<std::size_t>(dim);

  DECheckpoint state;
  if (resume) {
    state = *resume;
    if (state.seed != cfg.seed) throw CheckpointError("checkpoint was written with a different seed");
    if (state.population.size() != np || state.fitness.size() != np)
      throw CheckpointError("checkpoint population size does not match the configuration");
    for (const auto& x : state.population) {
      if (x.size() != nd) throw CheckpointError("checkpoint vector length does not match the problem");
      for (std::size_t j = 0; j < nd; ++j)
        if (!(x[j] >= lower[j] && x[j] <= upper[j]))
          throw CheckpointError("checkpoint population lies outside the bounds");
    }
    if (state.history.size() != static_cast<std::size_t>(state.generation) + 1)
      throw CheckpointError("checkpoint history length does not match its generation");
  } else {
    state.seed = cfg.seed;
    state.generation = 0;
    state.population.resize(np);
    for (std::size_t i = 0; i < np; ++i) {
      auto rng = candidate_rng(cfg.seed, 0, i);
      state.population[i].resize(nd);
      for (std::size_t j = 0; j < nd; ++j)
        state.population[i][j] = std::uniform_real_distribution<double>(lower[j], upper[j])(rng);
    }
    state.fitness = parallel_map<double>(np, cfg.workers, [&](std::size_t i) { return f(state.population[i]); });
    state.history = {state.fitness[best_index(state.fitness)]};
    if (on_generation) on_generation(state);
  }

  while (state.generation < cfg.generations) {
    const int g = state.generation + 1;
    std::vector<std::vector<double>> trials(np, std::vector<double>(nd));
    for (std::size_t i = 0; i < np; ++i) {
      auto rng = candidate_rng(cfg.seed, g, i);
      std::uniform_int_distribution<std::size_t> pick(0, np - 1);
      std::size_t a, b, c;
      do a = pick(rng); while (a == i);
      do b = pick(rng); while (b == i || b == a);
      do c = pick(rng); while (c == i || c == a || c == b);
      const std::size_t jrand = std::uniform_int_distribution<std::size_t>(0, nd - 1)(rng);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t j = 0; j < nd; ++j) {
        const double u = unit(rng);
        if (j == jrand || u < cfg.crossover) {
          const double v = state.population[a][j] +
                           cfg.weight * (state.population[b][j] - state.population[c][j]);
          trials[i][j] = std::clamp(v, lower[j], upper[j]);
        } else {
          trials[i][j] = state.population[i][j];
        }
      }
    }
    const std::vector<double> scores =
        parallel_map<double>(np, cfg.workers, [&](std::size_t i) { return f(trials[i]); });
    for (std::size_t i = 0; i < np; ++i) {
      if (scores[i] >= state.fitness[i]) {
        state.population[i] = std::move(trials[i]);
        state.fitness[i] = scores[i];
      }
    }
    state.generation = g;
    state.history.push_back(state.fitness[best_index(state.fitness)]);
    if (on_generation) on_generation(state);
  }

  DEResult out;
  const std::size_t best = best_index(state.fitness);
  out.best_x = state.population[best];
  out.best_fitness = state.fitness[best];
  out.history = state.history;
  out.final_state = std::move(state);
  return out;
}

void save_checkpoint(const std::string& path, const DECheckpoint& cp) {
  nlohmann::json j;
  j["format"] = "rydsim-de-checkpoint";
  j["version"] = 1;
  j["seed"] = cp.seed;
  j["generation"] = cp.generation;
  j["population"] = cp.population;
  j["fitness"] = cp.fitness;
  j["history"] = cp.history;
  // Write then rename so an interrupted run never leaves a truncated file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot write checkpoint '" + tmp + "'");
    os << j.dump(1) << '\n';
    if (!os) throw CheckpointError("cannot write checkpoint '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CheckpointError("cannot move checkpoint into place at '" + path + "'");
}

DECheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint '" + path + "'");
  DECheckpoint cp;
  try {
    const nlohmann::json j = nlohmann::json::parse(is);
    if (j.at("format").get<std::string>() != "rydsim-de-checkpoint" || j.at("version").get<int>() != 1)
      throw CheckpointError("'" + path + "' is not a version 1 optimizer checkpoint");
    cp.seed = j.at("seed").get<std::uint64_t>();
    cp.generation = j.at("generation").get<int>();
    cp.population = j.at("population").get<std::vector<std::vector<double>>>();
    cp.fitness = j.at("fitness").get<std::vector<double>>();
    cp.history = j.at("history").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("corrupt checkpoint '" + path + "': " + e.what());
  }
  if (cp.generation < 0 || cp.population.empty() || cp.population.size() != cp.fitness.size() ||
      cp.history.size() != static_cast<std::size_t>(cp.generation) + 1)
    throw CheckpointError("corrupt checkpoint '" + path + "': inconsistent sizes");
  for (double v : cp.fitness)
    if (!std::isfinite(v)) throw CheckpointError("corrupt checkpoint '" + path + "': non-finite fitness");
  return cp;
}

PulseOptimizationResult optimize_pulses(const OptimizationProblem& problem, const DEConfig& cfg,
                                        const std::optional<DECheckpoint>& resume,
                                        const GenerationCallback& on_generation) {
  problem.validate();
  OptimizationProblem search = problem;
  search.gate.integrator.rel_tol = std::max(problem.gate.integrator.rel_tol, 1e-7);
  search.gate.integrator.abs_tol = std::max(problem.gate.integrator.abs_tol, 1e-9);

  PulseOptimizationResult out;
  out.search = differential_evolution([&](const std::vector<double>& x) { return pulse_fitness(x, search); },
                                      problem.lower(), problem.upper(), cfg, resume, on_generation);
  out.best = problem.decode(out.search.best_x);
  out.final_fitness = pulse_fitness(out.search.best_x, problem);
  GateConfig g = problem.gate;
  g.segmented = out.best;
  out.final_fidelity = bell_sequence(g).fidelity;
  out.final_slew_MHz_per_us = max_slew_MHz_per_us(out.best);
  return out;
}

}  // namespace rydsim
