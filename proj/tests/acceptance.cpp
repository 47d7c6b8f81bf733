// Acceptance run: one PASS/FAIL line per criterion, sub-check details below it.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rydsim/analytic.hpp"
#include "rydsim/config.hpp"
#include "rydsim/gate.hpp"
#include "rydsim/lindblad.hpp"
#include "rydsim/optimizer.hpp"
#include "rydsim/parallel.hpp"
#include "rydsim/pulses.hpp"

using namespace rydsim;

namespace {

const std::string kConfigs = RYDSIM_CONFIG_DIR;

struct Check {
  std::string what;
  bool ok;
};

class Criterion {
 public:
  explicit Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  bool expect(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    checks_.push_back({buf, ok});
    return ok;
  }

  bool report() const {
    const bool ok = std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.ok; });
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id_, title_.c_str());
    for (const auto& c : checks_) std::printf("      [%s] %s\n", c.ok ? "ok" : "FAILED", c.what.c_str());
    std::fflush(stdout);
    return ok;
  }

 private:
  int id_;
  std::string title_;
  std::vector<Check> checks_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GateConfig gate_from(const std::string& name) { return load_config(kConfigs + "/" + name).gate; }

/// Distance between two angles in degrees, wrapped to [0, 180].
double angle_error(double a, double b) { return std::abs(std::remainder(a - b, 360.0)); }

/// Phase match up to the global sign convention (phi -> -phi for both).
bool phases_match(const GatePhases& ph, double phi1, double phi2, double tol, double& e1, double& e2) {
  const double direct = std::max(angle_error(ph.phi1_deg, phi1), angle_error(ph.phi2_deg, phi2));
  const double flipped = std::max(angle_error(-ph.phi1_deg, phi1), angle_error(-ph.phi2_deg, phi2));
  const int s = direct <= flipped ? 1 : -1;
  e1 = angle_error(s * ph.phi1_deg, phi1);
  e2 = angle_error(s * ph.phi2_deg, phi2);
  return e1 <= tol && e2 <= tol;
}

int workers() { return default_workers(); }

bool criterion1() {
  Criterion c(1, "ARP benchmark at B/2pi = 3 GHz");
  const auto t0 = std::chrono::steady_clock::now();
  const double f = bell_sequence(gate_from("arp_paper.cfg")).fidelity;
  const double dt = seconds_since(t0);
  c.expect(std::abs(f - 0.9994) <= 0.0005, "F = %.6f, expected 0.9994 +/- 0.0005", f);
  c.expect(dt < 30.0, "runtime %.1f s < 30 s", dt);
  return c.report();
}

bool criterion2() {
  Criterion c(2, "blockade scaling fits 1-F = b + c (Omega_max/B)^2");
  const auto t0 = std::chrono::steady_clock::now();
  const struct {
    const char* config;
    double b_ref;
  } sweeps[] = {{"arp_sweep_slow.cfg", 7.5e-4}, {"arp_sweep_mid.cfg", 3.5e-4}, {"arp_sweep_fast.cfg", 3.2e-4}};
  for (const auto& s : sweeps) {
    const RunConfig rc = load_config(kConfigs + "/" + s.config);
    const SweepResult r = blockade_sweep(rc.gate, rc.sweep_B_MHz, workers());
    c.expect(r.fit.valid, "%s: fit valid", s.config);
    c.expect(std::abs(r.fit.c - 7.0) <= 0.3 * 7.0, "%s: c = %.3f within 7 +/- 30%%", s.config, r.fit.c);
    c.expect(std::abs(r.fit.b - s.b_ref) <= 0.5 * s.b_ref, "%s: b = %.3e within %.1e +/- 50%%", s.config, r.fit.b,
             s.b_ref);
  }
  const double dt = seconds_since(t0);
  c.expect(dt < 600.0, "runtime %.1f s < 600 s", dt);
  return c.report();
}

bool criterion3() {
  Criterion c(3, "ARP robustness over +/-200 kHz x +/-5% at B/2pi = 2.5 GHz");
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig rc = load_config(kConfigs + "/arp_robustness.cfg");
  const auto pts = robustness_grid(rc.gate, rc.robustness_dDelta_kHz, rc.robustness_dI_frac, workers());
  const double dt = seconds_since(t0);
  double lo = 1.0, hi = 0.0;
  for (const auto& p : pts) lo = std::min(lo, p.fidelity), hi = std::max(hi, p.fidelity);
  c.expect(pts.size() == 121, "%zu grid points (11 x 11)", pts.size());
  c.expect(hi - lo <= 0.0003, "spread %.2e <= 3e-4", hi - lo);
  c.expect(lo > 0.999, "min F = %.6f > 0.999", lo);
  c.expect(dt < 600.0, "runtime %.1f s < 600 s", dt);
  return c.report();
}

bool criterion4() {
  Criterion c(4, "STIRAP-analytic fidelities and phases");
  GateConfig cfg = gate_from("stirap_analytic.cfg");
  const double refs[][2] = {{500, 0.976}, {1500, 0.978}, {3000, 0.979}};
  for (const auto& [B, ref] : refs) {
    cfg.blockade_MHz = B;
    const double f = bell_sequence(cfg).fidelity;
    c.expect(std::abs(f - ref) <= 0.005, "B = %.0f MHz: F = %.6f, expected %.3f +/- 0.005", B, f, ref);
  }
  cfg.blockade_MHz = 500;
  const GatePhases ph = extract_phases(cfg);
  double e1 = 0, e2 = 0;
  phases_match(ph, -18.0, -171.5, 2.0, e1, e2);
  c.expect(!ph.ill_defined, "phases well defined");
  c.expect(e1 <= 2.0, "phi1 = %.3f deg vs -18 (error %.2f deg up to global sign, tol 2)", ph.phi1_deg, e1);
  c.expect(e2 <= 2.0, "phi2 = %.3f deg vs -171.5 (error %.2f deg up to global sign, tol 2)", ph.phi2_deg, e2);
  return c.report();
}

bool criterion5() {
  Criterion c(5, "double-STIRAP fidelities");
  GateConfig cfg = gate_from("stirap_vasilev.cfg");
  const double refs[][2] = {{500, 0.990}, {1500, 0.991}};
  for (const auto& [B, ref] : refs) {
    cfg.blockade_MHz = B;
    const double f = bell_sequence(cfg).fidelity;
    c.expect(std::abs(f - ref) <= 0.005, "B = %.0f MHz: F = %.6f, expected %.3f +/- 0.005", B, f, ref);
  }
  return c.report();
}

bool criterion6() {
  Criterion c(6, "segmented optimized pulses");
  const GateConfig cfg = gate_from("stirap_table1.cfg");
  const double f = bell_sequence(cfg).fidelity;
  c.expect(std::abs(f - 0.997) <= 0.002, "F = %.6f, expected 0.997 +/- 0.002", f);
  const SegmentedDrive d = build_segmented_pulses(cfg.segmented);
  const std::pair<const char*, const SegmentedPulse*> fns[] = {
      {"Omega1", &d.omega1}, {"Omega2", &d.omega2}, {"Delta1", &d.delta1}};
  for (const auto& [name, p] : fns) {
    const double s = max_slew_MHz_per_us(*p);
    c.expect(s < 1000.0, "%s max slew %.1f MHz/us < 1000", name, s);
  }
  const GatePhases ph = extract_phases(cfg);
  double e1 = 0, e2 = 0;
  phases_match(ph, -1.3, 178.8, 1.0, e1, e2);
  c.expect(e1 <= 1.0, "phi1 = %.3f deg vs -1.3 (error %.2f up to global sign, tol 1)", ph.phi1_deg, e1);
  c.expect(e2 <= 1.0, "phi2 = %.3f deg vs 178.8 (error %.2f up to global sign, tol 1)", ph.phi2_deg, e2);
  const StirapDrive drive = build_segmented_drive(cfg.segmented);
  const double theta = mixing_angle(drive.omega1, drive.omega2, 0.5 * cfg.duration_us());
  c.expect(std::abs(theta - 0.5) <= 0.05, "mixing angle at T/2 = %.4f rad, expected 0.5 +/- 0.05", theta);
  return c.report();
}

bool criterion7() {
  Criterion c(7, "segmented pulse robustness");
  const RunConfig rc = load_config(kConfigs + "/stirap_table1_robustness.cfg");
  const double f0 = bell_sequence(rc.gate).fidelity;
  const auto detuned = robustness_grid(rc.gate, {-200.0, 200.0}, {0.0}, workers());
  const auto scaled = robustness_grid(rc.gate, {0.0}, {-0.1, 0.1}, workers());
  double dd = 0.0, di = 0.0;
  for (const auto& p : detuned) dd = std::max(dd, f0 - p.fidelity);
  for (const auto& p : scaled) di = std::max(di, f0 - p.fidelity);
  c.expect(dd >= 0.002 && dd <= 0.01, "dDelta = +/-200 kHz worst drop %.5f (F %.6f / %.6f) in [0.002, 0.01]", dd,
           detuned[0].fidelity, detuned[1].fidelity);
  c.expect(di >= 0.02 && di <= 0.05, "dI = +/-10%% worst drop %.5f (F %.6f / %.6f) in [0.02, 0.05]", di,
           scaled[0].fidelity, scaled[1].fidelity);
  return c.report();
}

bool criterion8() {
  Criterion c(8, "constant-amplitude reference model");
  const RunConfig rc = load_config(kConfigs + "/analytic_4MHz.cfg");
  const Complex omega0(kTwoPi * rc.analytic_omega0_MHz, 0.0);
  AnalyticParams ideal;
  ideal.omega0 = omega0;
  const double f00 = analytic_bell_fidelity(ideal);
  c.expect(f00 == 1.0, "F(0, 0) = %.17g, exactly 1", f00);

  const double blockade = kTwoPi * 1e6;
  const std::vector<double> dd{-200, 0, 200}, di{-0.05, 0, 0.05};
  std::vector<std::pair<double, double>> grid;
  for (double a : dd)
    for (double b : di) grid.emplace_back(a, b);
  const auto diffs = parallel_map<double>(grid.size(), workers(), [&](std::size_t k) {
    AnalyticParams p;
    p.omega0 = omega0;
    p.delta = kTwoPi * grid[k].first * 1e-3;
    p.dI = grid[k].second;
    return std::abs(numerical_sequence_fidelity(p, blockade) - analytic_bell_fidelity(p));
  });
  const double worst = *std::max_element(diffs.begin(), diffs.end());
  c.expect(worst < 1e-6, "max |F_analytic - F_numerical| over 9 points at B/2pi = 1e6 MHz: %.2e < 1e-6", worst);

  const auto surface = analytic_sensitivity_grid(omega0, rc.robustness_dDelta_kHz, rc.robustness_dI_frac);
  double lo = 1.0;
  for (const auto& p : surface) lo = std::min(lo, p.fidelity);
  c.expect(1.0 - lo > 0.005, "largest drop on the +/-200 kHz x +/-5%% grid %.5f > 0.005", 1.0 - lo);
  return c.report();
}

DensityMatrix random_qubit_state(const StateSpace& space, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(space.dim()));
  for (const char* a : {"0", "1"})
    for (const char* b : {"0", "1"}) {
      const double re = n(rng);
      psi(static_cast<Eigen::Index>(space.index(a, b))) = Complex(re, n(rng));
    }
  return DensityMatrix::from_pure(space.atom_dim(), psi / psi.norm());
}

bool criterion9() {
  Criterion c(9, "integrator property suite on every protocol");

  {  // exponential decay
    LevelScheme s;
    s.levels = {"0", "1", "r", "d"};
    s.gamma = {{"r", 2.0}};
    s.branching = {{{"0", "r"}, 0.25}, {{"1", "r"}, 0.25}, {{"d", "r"}, 0.5}};
    const StateSpace space(s);
    const auto res = propagate(DensityMatrix::basis(space, "r", "0"), HamiltonianModel::one_photon(ArpDrive{}, 0.0),
                               s, 0.0, 2.0, {}, {atom_population(space, "r", Atom::kControl),
                                                 atom_population(space, "d", Atom::kControl)},
                               0.1);
    double err = 0.0;
    for (std::size_t k = 0; k < res.series.times.size(); ++k) {
      const double t = res.series.times[k];
      err = std::max(err, std::abs(res.series.rows[k][0] - std::exp(-2.0 * t)));
      err = std::max(err, std::abs(res.series.rows[k][1] - 0.5 * (1.0 - std::exp(-2.0 * t))));
    }
    c.expect(err < 1e-8, "exponential-decay oracle: max error %.2e < 1e-8", err);
  }
  {  // Rabi oracle against the closed-form rotation
    const LevelScheme s = LevelScheme::arp_default().with_gamma_scaled(0.0);
    const StateSpace space(s);
    AnalyticParams p;
    p.omega0 = Complex(kTwoPi * 4.0, 0.0);
    p.delta = kTwoPi * 1.5;
    HamiltonianModel h = HamiltonianModel::one_photon({Waveform::constant("O", p.omega0.real()), Waveform()}, 0.0);
    h.addressing = Addressing::kControl;
    h.detuning_offset = p.delta;
    double err = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double t = 0.05 * k;
      const auto rho = propagate(DensityMatrix::basis(space, "1", "0"), h, s, 0.0, t, {}).rho;
      const CMatrix u = rotation_matrix(t, p);
      err = std::max(err, std::abs(rho(space.index("1", "0"), space.index("1", "0")).real() - std::norm(u(1, 1))));
      err = std::max(err, std::abs(rho(space.index("r", "0"), space.index("r", "0")).real() - std::norm(u(2, 1))));
      err = std::max(err, std::abs(rho(space.index("r", "0"), space.index("1", "0")) - u(2, 1) * std::conj(u(1, 1))));
    }
    c.expect(err < 1e-8, "closed-form Rabi oracle over 20 times: max error %.2e < 1e-8", err);
  }

  for (Protocol proto : {Protocol::kArp, Protocol::kStirapAnalytic, Protocol::kStirapVasilev,
                         Protocol::kStirapSegmented}) {
    const std::string name = protocol_name(proto);
    const GateConfig cfg = GateConfig::defaults(proto);
    const StateSpace space(cfg.scheme);
    const auto h = build_hamiltonian(cfg);
    const double T = cfg.duration_us();

    double trace = 0.0, herm = 0.0, mineig = 0.0, drift = 0.0;
    DensityMatrix rho = random_qubit_state(space, 7);
    for (int k = 1; k <= 8; ++k) {
      const auto r = propagate(rho, h, cfg.scheme, T * (k - 1) / 8, T * k / 8, cfg.resolved_integrator());
      rho = r.rho;
      trace = std::max(trace, std::abs(rho.trace() - 1.0));
      herm = std::max(herm, rho.hermiticity_error());
      mineig = std::min(mineig, rho.min_eigenvalue());
      drift = std::max(drift, r.stats.max_hermiticity_drift);
    }
    c.expect(trace < 1e-8, "%s: |Tr rho - 1| = %.1e < 1e-8", name.c_str(), trace);
    c.expect(herm < 1e-10 && drift < 1e-8, "%s: hermiticity %.1e < 1e-10, pre-symmetrization drift %.1e < 1e-8",
             name.c_str(), herm, drift);
    c.expect(mineig > -1e-8, "%s: min eigenvalue %.1e > -1e-8", name.c_str(), mineig);

    GateConfig pure = cfg;
    pure.scheme = cfg.scheme.with_gamma_scaled(0.0);
    const auto p = propagate(random_qubit_state(space, 8), build_hamiltonian(pure), pure.scheme, 0.0, T,
                             pure.integrator);
    c.expect(std::abs(p.rho.purity() - 1.0) < 1e-7, "%s: purity change without decay %.1e < 1e-7", name.c_str(),
             std::abs(p.rho.purity() - 1.0));

    GateConfig tight = cfg;
    tight.integrator.rel_tol *= 0.1;
    tight.integrator.abs_tol *= 0.1;
    const double df = std::abs(bell_sequence(cfg).fidelity - bell_sequence(tight).fidelity);
    c.expect(df < 1e-6, "%s: |dF| under 10x tighter tolerance %.1e < 1e-6", name.c_str(), df);
  }
  return c.report();
}

bool criterion10() {
  Criterion c(10, "optimizer property suite");
  auto sphere = [](const std::vector<double>& x) { return -(x[0] * x[0] + x[1] * x[1]); };
  DEConfig de;
  de.population = 20;
  de.generations = 200;
  const DEResult s = differential_evolution(sphere, {-5, -5}, {5, 5}, de);
  c.expect(std::sqrt(-s.best_fitness) < 1e-3, "sphere: best |x| = %.2e < 1e-3", std::sqrt(-s.best_fitness));

  bool monotone = true;
  for (std::size_t g = 1; g < s.history.size(); ++g) monotone = monotone && s.history[g] >= s.history[g - 1];

  // seeded gate search, serial vs threaded
  OptimizationProblem prob;
  DEConfig small;
  small.population = 8;
  small.generations = 2;
  small.seed = 3;
  const auto a = optimize_pulses(prob, small);
  small.workers = 4;
  const auto b = optimize_pulses(prob, small);
  c.expect(a.search.history == b.search.history && a.search.best_x == b.search.best_x,
           "gate search with seed 3: identical history for 1 and 4 workers");
  for (std::size_t g = 1; g < a.search.history.size(); ++g)
    monotone = monotone && a.search.history[g] >= a.search.history[g - 1];
  c.expect(monotone, "best-fitness history nondecreasing (sphere and gate search)");

  std::vector<double> x;
  const SegmentedDriveParams table = SegmentedDriveParams{};
  for (const auto* v : {&table.omega1_MHz, &table.omega2_MHz, &table.delta1_MHz}) x.insert(x.end(), v->begin(), v->end());
  const double fit = pulse_fitness(x, prob);
  const double slew = max_slew_MHz_per_us(table);
  c.expect(std::abs(fit - 0.997) <= 0.002, "fitness of the tabulated pulses %.6f, expected 0.997 +/- 0.002 (max slew %.1f MHz/us)",
           fit, slew);
  return c.report();
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                    criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      if (!criteria[i]()) ++failed;
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %zu: exception %s\n", i + 1, e.what());
      ++failed;
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
