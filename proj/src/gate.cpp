#include "rydsim/gate.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "rydsim/parallel.hpp"

namespace rydsim {

int default_workers() {
  if (const char* env = std::getenv("RYDSIM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::kArp:
      return "arp";
    case Protocol::kStirapAnalytic:
      return "stirap-analytic";
    case Protocol::kStirapVasilev:
      return "stirap-vasilev";
    case Protocol::kStirapSegmented:
      return "stirap-segmented";
  }
  return "unknown";
}

Protocol parse_protocol(const std::string& name) {
  for (Protocol p : {Protocol::kArp, Protocol::kStirapAnalytic, Protocol::kStirapVasilev,
                     Protocol::kStirapSegmented})
    if (protocol_name(p) == name) return p;
  throw ConfigError("unknown protocol '" + name + "'");
}

GateConfig GateConfig::defaults(Protocol p) {
  GateConfig cfg;
  cfg.protocol = p;
  switch (p) {
    case Protocol::kArp:
      cfg.scheme = LevelScheme::arp_default();
      cfg.blockade_MHz = 3000.0;
      break;
    case Protocol::kStirapAnalytic:
    case Protocol::kStirapVasilev:
    case Protocol::kStirapSegmented:
      cfg.scheme = LevelScheme::stirap_default();
      cfg.blockade_MHz = 500.0;
      break;
  }
  return cfg;
}

double GateConfig::duration_us() const {
  switch (protocol) {
    case Protocol::kArp:
      return arp.duration_us;
    case Protocol::kStirapAnalytic:
      return stirap.duration_us;
    case Protocol::kStirapVasilev:
      return vasilev.duration_us;
    case Protocol::kStirapSegmented:
      return segmented.duration_us;
  }
  return 0.0;
}

double GateConfig::omega_max_MHz() const {
  auto max_abs = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  switch (protocol) {
    case Protocol::kArp:
      return arp.omega_max_MHz;
    case Protocol::kStirapAnalytic:
      return std::max(stirap.omega1_max_MHz, stirap.omega2_max_MHz);
    case Protocol::kStirapVasilev:
      return vasilev.omega0_MHz;
    case Protocol::kStirapSegmented:
      return std::max(max_abs(segmented.omega1_MHz), max_abs(segmented.omega2_MHz));
  }
  return 0.0;
}

double GateConfig::detuning_max_MHz() const {
  double m = 0.0;
  switch (protocol) {
    case Protocol::kArp:
      m = arp.delta_max_MHz;
      break;
    case Protocol::kStirapAnalytic:
      m = std::max(std::abs(stirap.delta1_MHz), std::abs(stirap.delta_MHz));
      break;
    case Protocol::kStirapVasilev:
      m = std::abs(vasilev.delta1_MHz);
      break;
    case Protocol::kStirapSegmented:
      for (double x : segmented.delta1_MHz) m = std::max(m, std::abs(x));
      break;
  }
  return std::abs(m) + std::abs(detuning_offset_kHz) * 1e-3;
}

IntegratorConfig GateConfig::resolved_integrator() const {
  IntegratorConfig out = integrator;
  const double f = detuning_max_MHz();
  if (f > 0.0) {
    const double bound = 1.0 / (20.0 * f);
    out.max_step = out.max_step > 0.0 ? std::min(out.max_step, bound) : bound;
  }
  return out;
}

BellPair GateConfig::bell_target() const {
  if (target) return *target;
  // ARP and the double-STIRAP pulses realise diag(1, -1, -1, -1); the
  // single-STIRAP gates leave |11> with phase ~0 and prepare (|01>+|10>)/sqrt2.
  if (protocol == Protocol::kArp || protocol == Protocol::kStirapVasilev)
    return {{0, 0}, {1, 1}};
  return {{0, 1}, {1, 0}};
}

void GateConfig::validate() const {
  scheme.validate();
  if (!(duration_us() > 0.0) || !std::isfinite(duration_us()))
    throw ConfigError("gate duration T_us must be positive");
  if (!(blockade_MHz >= 0.0) || !std::isfinite(blockade_MHz))
    throw ConfigError("blockade B_MHz must be >= 0");
  if (!(intensity_offset > -1.0) || !std::isfinite(intensity_offset))
    throw ConfigError("intensity offset dI_frac must be > -1");
  if (!std::isfinite(detuning_offset_kHz)) throw ConfigError("detuning offset must be finite");
  if (samples < 2) throw ConfigError("at least 2 trace samples are needed");
  if (protocol != Protocol::kArp && !scheme.has_level("p"))
    throw ConfigError("two-photon protocols need an intermediate level 'p'");
  if (target) {
    auto ok = [](const QubitState& q) {
      return (q.control == 0 || q.control == 1) && (q.target == 0 || q.target == 1);
    };
    if (!ok(target->first) || !ok(target->second) || target->first == target->second)
      throw ConfigError("Bell target must be two distinct two-qubit basis states");
  }
}

HamiltonianModel build_hamiltonian(const GateConfig& cfg) {
  cfg.validate();
  const double B = kTwoPi * cfg.blockade_MHz;
  const double T = cfg.duration_us();
  HamiltonianModel h;
  switch (cfg.protocol) {
    case Protocol::kArp:
      h = HamiltonianModel::one_photon(build_arp_drive(cfg.arp), B);
      h.breakpoints = {0.5 * T};
      break;
    case Protocol::kStirapAnalytic:
      h = HamiltonianModel::two_photon(build_stirap_drive(cfg.stirap), B);
      break;
    case Protocol::kStirapVasilev:
      h = HamiltonianModel::two_photon(build_vasilev_drive(cfg.vasilev), B);
      h.breakpoints = {0.5 * T};
      break;
    case Protocol::kStirapSegmented:
      h = HamiltonianModel::two_photon(build_segmented_drive(cfg.segmented), B);
      break;
  }
  h.detuning_offset = kTwoPi * cfg.detuning_offset_kHz * 1e-3;
  h.intensity_offset = cfg.intensity_offset;
  return h;
}

std::vector<Observable> default_observables(const GateConfig& cfg) {
  const StateSpace space(cfg.scheme);
  std::vector<Observable> obs;
  for (const char* s : {"00", "01", "10", "11"})
    obs.push_back(population(space, std::string(1, s[0]), std::string(1, s[1])));
  if (cfg.protocol == Protocol::kArp) {
    obs.push_back(population(space, "r", "0"));
    obs.push_back(population(space, "0", "r"));
    obs.push_back(symmetric_single_excitation(space));
  } else {
    obs.push_back(level_number(space, "p"));
    obs.push_back(population(space, "p", "p"));
    obs.push_back(population(space, "r", "0"));
    obs.push_back(symmetric_single_excitation(space));
  }
  obs.push_back(population(space, "r", "r"));
  obs.push_back(leak_d(space));
  return obs;
}

SimulationResult run_gate(const GateConfig& cfg, const DensityMatrix& rho0, bool with_traces) {
  const HamiltonianModel h = build_hamiltonian(cfg);
  const double T = cfg.duration_us();
  const StateSpace space(cfg.scheme);
  std::vector<Observable> obs;
  if (with_traces) obs = default_observables(cfg);
  const double dt = with_traces ? T / static_cast<double>(cfg.samples - 1) : 0.0;
  PropagationResult pr = propagate(rho0, h, cfg.scheme, 0.0, T, cfg.resolved_integrator(), obs, dt);
  SimulationResult out{pr.rho, 0.0, {}, std::move(pr.series), 0.0, pr.stats};
  out.fidelity = bell_fidelity(out.rho_final, space, cfg.bell_target());
  out.leak_d = expectation(out.rho_final, leak_d(space));
  return out;
}

GatePhases extract_phases(const GateConfig& cfg) {
  GateConfig unitary = cfg;
  unitary.scheme = cfg.scheme.with_gamma_scaled(0.0);
  const StateSpace space(unitary.scheme);
  const auto i00 = space.index("0", "0");
  GatePhases out;
  double* slots[] = {&out.phi1_deg, &out.phi2_deg};
  const char* states[] = {"01", "11"};
  for (int k = 0; k < 2; ++k) {
    const std::string a(1, states[k][0]), b(1, states[k][1]);
    const CVector psi = (space.ket("0", "0") + space.ket(a, b)) / std::sqrt(2.0);
    const SimulationResult r = run_gate(unitary, DensityMatrix::from_pure(space.atom_dim(), psi), false);
    const auto ix = space.index(a, b);
    const Complex coherence = r.rho_final(ix, i00);
    double deg = std::arg(coherence) * 180.0 / std::numbers::pi;
    if (deg <= -180.0) deg += 360.0;
    *slots[k] = deg;
    if (2.0 * r.rho_final(ix, ix).real() < 0.5) out.ill_defined = true;
  }
  return out;
}

SimulationResult bell_sequence(const GateConfig& cfg, bool with_traces) {
  const StateSpace space(cfg.scheme);
  DensityMatrix rho = DensityMatrix::basis(space, "1", "1");
  rho = apply_hadamard(rho, cfg.scheme, Atom::kControl);
  rho = apply_hadamard(rho, cfg.scheme, Atom::kTarget);
  SimulationResult r = run_gate(cfg, rho, with_traces);
  r.rho_final = apply_hadamard(r.rho_final, cfg.scheme, Atom::kTarget);
  r.fidelity = bell_fidelity(r.rho_final, space, cfg.bell_target());
  r.leak_d = expectation(r.rho_final, leak_d(space));
  return r;
}

SweepFit fit_blockade_scaling(double omega_max_MHz, const std::vector<double>& B_MHz,
                              const std::vector<double>& infidelity) {
  if (B_MHz.size() != infidelity.size())
    throw std::invalid_argument("sweep needs one infidelity per blockade value");
  SweepFit fit;
  if (B_MHz.size() < 3) return fit;
  // Normal equations for min sum w^2 (y - b - c x)^2 with w = 1/y.
  double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = 0; i < B_MHz.size(); ++i) {
    const double x = std::pow(omega_max_MHz / B_MHz[i], 2);
    const double y = infidelity[i];
    if (!(y > 0.0)) continue;
    const double w2 = 1.0 / (y * y);
    s00 += w2;
    s01 += w2 * x;
    s11 += w2 * x * x;
    r0 += w2 * y;
    r1 += w2 * x * y;
  }
  const double det = s00 * s11 - s01 * s01;
  if (!(std::abs(det) > 1e-300 * std::max(1.0, s00 * s11))) return fit;
  fit.b = (r0 * s11 - r1 * s01) / det;
  fit.c = (s00 * r1 - s01 * r0) / det;
  fit.valid = std::isfinite(fit.b) && std::isfinite(fit.c);
  return fit;
}

SweepResult blockade_sweep(const GateConfig& cfg, const std::vector<double>& B_MHz, int workers) {
  if (B_MHz.empty()) throw ConfigError("blockade sweep needs at least one B value");
  for (double b : B_MHz)
    if (!(b > 0.0)) throw ConfigError("blockade sweep values must be positive");
  SweepResult out;
  out.B_MHz = B_MHz;
  out.infidelity = parallel_map<double>(B_MHz.size(), workers, [&](std::size_t i) {
    GateConfig c = cfg;
    c.blockade_MHz = B_MHz[i];
    return 1.0 - bell_sequence(c).fidelity;
  });
  out.fit = fit_blockade_scaling(cfg.omega_max_MHz(), out.B_MHz, out.infidelity);
  return out;
}

std::vector<RobustnessPoint> robustness_grid(const GateConfig& cfg,
                                             const std::vector<double>& dDelta_kHz,
                                             const std::vector<double>& dI_frac, int workers) {
  if (dDelta_kHz.empty() || dI_frac.empty())
    throw ConfigError("robustness grid needs non-empty offset lists");
  const std::size_t n = dDelta_kHz.size() * dI_frac.size();
  return parallel_map<RobustnessPoint>(n, workers, [&](std::size_t k) {
    GateConfig c = cfg;
    c.detuning_offset_kHz = cfg.detuning_offset_kHz + dDelta_kHz[k / dI_frac.size()];
    c.intensity_offset = dI_frac[k % dI_frac.size()];
    return RobustnessPoint{dDelta_kHz[k / dI_frac.size()], c.intensity_offset, bell_sequence(c).fidelity};
  });
}

}  // namespace rydsim
