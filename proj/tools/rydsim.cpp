// rydsim: command-line driver for the Rydberg CZ gate simulations.
//
// Exit codes: 0 success, 1 configuration error, 2 integration failure,
// 3 corrupt optimizer checkpoint.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rydsim/analytic.hpp"
#include "rydsim/config.hpp"
#include "rydsim/csv.hpp"
#include "rydsim/gate.hpp"
#include "rydsim/optimizer.hpp"
#include "rydsim/parallel.hpp"

namespace fs = std::filesystem;
using namespace rydsim;

namespace {

struct Options {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> tol;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

RunConfig load(const Options& opt, fs::path& out_dir, int& workers) {
  RunConfig rc = load_config(opt.config);
  if (opt.seed) rc.de.seed = *opt.seed;
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw ConfigError("--integrator-tol must be positive");
    rc.gate.integrator.rel_tol = *opt.tol;
    rc.gate.integrator.abs_tol = *opt.tol * 1e-2;
    rc.problem.gate.integrator = rc.gate.integrator;
  }
  workers = opt.workers ? *opt.workers : default_workers();
  if (workers < 1) throw ConfigError("--workers must be >= 1");
  rc.de.workers = workers;
  out_dir = opt.output.empty() ? fs::path(rc.output_dir) : fs::path(opt.output);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir.string() + "'");
  return rc;
}

void require_protocol(const RunConfig& rc, const char* command) {
  if (rc.analytic_model)
    throw ConfigError(std::string(command) + " needs a simulated protocol, not name = analytic");
}

void write_robustness(const fs::path& path, const std::vector<RobustnessPoint>& pts) {
  auto os = open_output(path);
  const std::vector<std::string> header{"dDelta_kHz", "dI_frac", "fidelity"};
  csv::write_header(os, header);
  for (const auto& p : pts) {
    const std::vector<double> row{p.dDelta_kHz, p.dI_frac, p.fidelity};
    csv::write_row(os, row);
  }
}

int cmd_simulate(const Options& opt) {
  fs::path dir;
  int workers = 1;
  const RunConfig rc = load(opt, dir, workers);
  require_protocol(rc, "simulate");

  const SimulationResult r = [&] {
    if (rc.initial_state == InitialState::kBell) return bell_sequence(rc.gate, rc.write_traces);
    static const char* labels[] = {"00", "01", "10", "11"};
    const char* s = labels[static_cast<int>(rc.initial_state) - 1];
    const StateSpace space(rc.gate.scheme);
    return run_gate(rc.gate, DensityMatrix::basis(space, std::string(1, s[0]), std::string(1, s[1])),
                    rc.write_traces);
  }();
  const GatePhases ph = extract_phases(rc.gate);
  if (ph.ill_defined) std::cerr << "warning: gate phases are ill-defined (return population < 0.5)\n";

  {
    auto os = open_output(dir / "summary.csv");
    const std::vector<std::string> header{"fidelity", "phi1_deg", "phi2_deg", "leak_d"};
    csv::write_header(os, header);
    const std::vector<double> row{r.fidelity, ph.phi1_deg, ph.phi2_deg, r.leak_d};
    csv::write_row(os, row);
  }
  if (rc.write_traces) {
    auto os = open_output(dir / "traces.csv");
    std::vector<std::string> header{"time_us"};
    header.insert(header.end(), r.traces.labels.begin(), r.traces.labels.end());
    csv::write_header(os, header);
    for (std::size_t k = 0; k < r.traces.times.size(); ++k) {
      std::vector<double> row{r.traces.times[k]};
      row.insert(row.end(), r.traces.rows[k].begin(), r.traces.rows[k].end());
      csv::write_row(os, row);
    }
  }
  std::cout << "fidelity " << csv::format_double(r.fidelity) << "  phi1 " << csv::format_double(ph.phi1_deg)
            << " deg  phi2 " << csv::format_double(ph.phi2_deg) << " deg  leak_d "
            << csv::format_double(r.leak_d) << '\n';
  return 0;
}

int cmd_sweep(const Options& opt) {
  fs::path dir;
  int workers = 1;
  const RunConfig rc = load(opt, dir, workers);
  require_protocol(rc, "sweep");
  if (rc.sweep_B_MHz.empty()) throw ConfigError("missing required key [sweep] B_MHz");
  const SweepResult s = blockade_sweep(rc.gate, rc.sweep_B_MHz, workers);
  {
    auto os = open_output(dir / "sweep.csv");
    const std::vector<std::string> header{"B_MHz", "infidelity"};
    csv::write_header(os, header);
    for (std::size_t i = 0; i < s.B_MHz.size(); ++i) {
      const std::vector<double> row{s.B_MHz[i], s.infidelity[i]};
      csv::write_row(os, row);
    }
  }
  {
    auto os = open_output(dir / "sweep_fit.csv");
    const std::vector<std::string> header{"omega_max_MHz", "b", "c", "fit_valid"};
    csv::write_header(os, header);
    const std::vector<double> row{rc.gate.omega_max_MHz(), s.fit.b, s.fit.c, s.fit.valid ? 1.0 : 0.0};
    csv::write_row(os, row);
  }
  if (s.fit.valid)
    std::cout << "fit 1-F = b + c (Omega_max/B)^2: b = " << csv::format_double(s.fit.b)
              << ", c = " << csv::format_double(s.fit.c) << '\n';
  else
    std::cout << "fit skipped (fewer than 3 points)\n";
  return 0;
}

int cmd_robustness(const Options& opt) {
  fs::path dir;
  int workers = 1;
  const RunConfig rc = load(opt, dir, workers);
  require_protocol(rc, "robustness");
  if (rc.robustness_dDelta_kHz.empty()) throw ConfigError("missing required section [robustness]");
  const auto pts = robustness_grid(rc.gate, rc.robustness_dDelta_kHz, rc.robustness_dI_frac, workers);
  write_robustness(dir / "robustness.csv", pts);
  double lo = 1.0, hi = 0.0;
  for (const auto& p : pts) {
    lo = std::min(lo, p.fidelity);
    hi = std::max(hi, p.fidelity);
  }
  std::cout << "fidelity range [" << csv::format_double(lo) << ", " << csv::format_double(hi) << "]\n";
  return 0;
}

int cmd_analytic(const Options& opt) {
  fs::path dir;
  int workers = 1;
  const RunConfig rc = load(opt, dir, workers);
  if (!rc.analytic_model) throw ConfigError("analytic needs [protocol] name = analytic");
  if (rc.robustness_dDelta_kHz.empty()) throw ConfigError("missing required section [robustness]");
  const auto pts = analytic_sensitivity_grid(Complex(kTwoPi * rc.analytic_omega0_MHz, 0.0),
                                             rc.robustness_dDelta_kHz, rc.robustness_dI_frac);
  write_robustness(dir / "analytic.csv", pts);
  return 0;
}

int cmd_optimize(const Options& opt) {
  fs::path dir;
  int workers = 1;
  const RunConfig rc = load(opt, dir, workers);
  require_protocol(rc, "optimize");
  if (rc.gate.protocol != Protocol::kStirapSegmented)
    throw ConfigError("optimize needs [protocol] name = stirap-segmented");
  const fs::path cp_path = rc.checkpoint.empty() ? dir / "checkpoint.json" : fs::path(rc.checkpoint);

  std::optional<DECheckpoint> resume;
  if (rc.resume && fs::exists(cp_path)) resume = load_checkpoint(cp_path.string());

  const PulseOptimizationResult res = optimize_pulses(
      rc.problem, rc.de, resume, [&](const DECheckpoint& cp) {
        save_checkpoint(cp_path.string(), cp);
        std::cerr << "generation " << cp.generation << " best " << csv::format_double(cp.history.back()) << '\n';
      });

  {
    auto os = open_output(dir / "history.csv");
    const std::vector<std::string> header{"generation", "best_fitness"};
    csv::write_header(os, header);
    for (std::size_t g = 0; g < res.search.history.size(); ++g) {
      const std::vector<double> row{static_cast<double>(g), res.search.history[g]};
      csv::write_row(os, row);
    }
  }
  {
    auto os = open_output(dir / "segments.csv");
    const std::size_t n = 2 * res.best.omega1_MHz.size();
    std::vector<std::string> header{"function"};
    for (std::size_t i = 1; i <= n; ++i) header.push_back("seg" + std::to_string(i));
    csv::write_header(os, header);
    auto mirrored = [](const std::vector<double>& half) {
      std::vector<double> v = half;
      v.insert(v.end(), half.rbegin(), half.rend());
      return v;
    };
    csv::write_row(os, "Omega1", mirrored(res.best.omega1_MHz));
    csv::write_row(os, "Omega2", mirrored(res.best.omega2_MHz));
    csv::write_row(os, "Delta1", mirrored(res.best.delta1_MHz));
  }
  {
    auto os = open_output(dir / "summary.csv");
    const std::vector<std::string> header{"fitness", "fidelity", "max_slew_MHz_per_us"};
    csv::write_header(os, header);
    const std::vector<double> row{res.final_fitness, res.final_fidelity, res.final_slew_MHz_per_us};
    csv::write_row(os, row);
  }
  std::cout << "best fitness " << csv::format_double(res.final_fitness) << " (fidelity "
            << csv::format_double(res.final_fidelity) << ", max slew "
            << csv::format_double(res.final_slew_MHz_per_us) << " MHz/us)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg CZ gate simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "run configuration (.cfg)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", opt.output, "output directory (overrides [output] dir)");
    sub->add_option("--workers", opt.workers, "worker threads (default RYDSIM_WORKERS or 1)");
    sub->add_option("--integrator-tol", opt.tol, "relative tolerance; abs_tol is set to 1e-2 of it");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"simulate", "run one gate (Bell sequence by default)", cmd_simulate},
      {"sweep", "blockade sweep with the 1-F = b + c (Omega/B)^2 fit", cmd_sweep},
      {"robustness", "fidelity over a detuning x intensity grid", cmd_robustness},
      {"optimize", "differential-evolution search of segmented pulses", cmd_optimize},
      {"analytic", "sensitivity grid of the constant-amplitude reference gate", cmd_analytic},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string(c.name) == "optimize") sub->add_option("--seed", opt.seed, "DE seed (overrides [optimize] seed)");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) return cmd->run(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const IntegrationError& e) {
    std::cerr << "integration failure: " << e.what() << '\n';
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
