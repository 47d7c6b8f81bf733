#include "rydsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rydsim/csv.hpp"

namespace rydsim {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kSections = {"scheme",     "protocol",   "drive",  "sweep",
                                         "robustness", "optimize",   "integrator", "output"};

std::string where(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

// One INI section. Reading a key marks it used; finish() rejects the rest.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }
  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  std::optional<std::string> text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    used_.insert(key);
    return tree_->get<std::string>(key);
  }

  std::string required_text(const std::string& key) {
    auto v = text(key);
    if (!v) throw ConfigError("missing required key " + where(name_, key));
    return *v;
  }

  std::vector<double> list(const std::string& key) {
    const std::string raw = required_text(key);
    try {
      auto v = csv::parse_number_list(raw);
      if (v.empty()) throw std::invalid_argument("empty list");
      return v;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where(name_, key) + ": expected a comma-separated number list, got '" + raw + "'");
    }
  }

  void number(const std::string& key, double& out) {
    if (auto raw = text(key)) {
      std::vector<double> v;
      try {
        v = csv::parse_number_list(*raw);
      } catch (const std::invalid_argument&) {
      }
      if (v.size() != 1) throw ConfigError(where(name_, key) + ": expected a number, got '" + *raw + "'");
      out = v.front();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (auto raw = text(key)) {
      Int v{};
      const char* b = raw->data();
      const char* e = b + raw->size();
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e)
        throw ConfigError(where(name_, key) + ": expected an integer, got '" + *raw + "'");
      out = v;
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (auto raw = text(key)) {
      if (*raw == "true" || *raw == "yes" || *raw == "1")
        out = true;
      else if (*raw == "false" || *raw == "no" || *raw == "0")
        out = false;
      else
        throw ConfigError(where(name_, key) + ": expected true or false, got '" + *raw + "'");
    }
  }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!child.empty()) throw ConfigError("nested key " + where(name_, key) + " is not allowed");
      if (!used_.count(key)) throw ConfigError("unknown key " + where(name_, key));
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> used_;
};

struct Check {
  const Section& s;

  void positive(const std::string& key, double v) const {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(where(s.name(), key) + ": must be positive (got " + csv::format_double(v) + ")");
  }
  void nonnegative(const std::string& key, double v) const {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError(where(s.name(), key) + ": must be >= 0 (got " + csv::format_double(v) + ")");
  }
  void finite(const std::string& key, double v) const {
    if (!std::isfinite(v)) throw ConfigError(where(s.name(), key) + ": must be finite");
  }
  void nonnegative_list(const std::string& key, const std::vector<double>& v) const {
    for (double x : v) nonnegative(key, x);
  }
};

QubitState parse_qubits(const std::string& text, const std::string& key) {
  if (text.size() != 2 || (text[0] != '0' && text[0] != '1') || (text[1] != '0' && text[1] != '1'))
    throw ConfigError(where("protocol", key) + ": expected two-qubit labels like 00 or 11");
  return {text[0] - '0', text[1] - '0'};
}

void read_protocol(Section& s, RunConfig& rc) {
  const std::string name = s.required_text("name");
  if (name == "analytic") {
    rc.analytic_model = true;
  } else {
    try {
      rc.gate = GateConfig::defaults(parse_protocol(name));
    } catch (const ConfigError&) {
      throw ConfigError(where("protocol", "name") + ": unknown protocol '" + name +
                        "' (arp, stirap-analytic, stirap-vasilev, stirap-segmented, analytic)");
    }
  }
  const Check c{s};
  s.number("B_MHz", rc.gate.blockade_MHz);
  c.nonnegative("B_MHz", rc.gate.blockade_MHz);
  s.number("dDelta_kHz", rc.gate.detuning_offset_kHz);
  c.finite("dDelta_kHz", rc.gate.detuning_offset_kHz);
  s.number("dI_frac", rc.gate.intensity_offset);
  if (!(rc.gate.intensity_offset > -1.0) || !std::isfinite(rc.gate.intensity_offset))
    throw ConfigError(where("protocol", "dI_frac") + ": must be > -1");
  if (auto t = s.text("bell_target")) {
    const auto comma = t->find(',');
    if (comma == std::string::npos) throw ConfigError(where("protocol", "bell_target") + ": expected e.g. 00,11");
    auto trim = [](std::string v) {
      v.erase(0, v.find_first_not_of(" \t"));
      v.erase(v.find_last_not_of(" \t") + 1);
      return v;
    };
    BellPair pair{parse_qubits(trim(t->substr(0, comma)), "bell_target"),
                  parse_qubits(trim(t->substr(comma + 1)), "bell_target")};
    if (pair.first == pair.second)
      throw ConfigError(where("protocol", "bell_target") + ": the two states must differ");
    rc.gate.target = pair;
  }
  if (auto init = s.text("initial_state")) {
    static const std::map<std::string, InitialState> names = {
        {"bell", InitialState::kBell}, {"00", InitialState::k00}, {"01", InitialState::k01},
        {"10", InitialState::k10},     {"11", InitialState::k11}};
    auto it = names.find(*init);
    if (it == names.end())
      throw ConfigError(where("protocol", "initial_state") + ": expected bell, 00, 01, 10 or 11");
    rc.initial_state = it->second;
  }
}

void read_scheme(Section& s, LevelScheme& scheme) {
  for (const char* level : {"r", "p"}) {
    const std::string key = std::string("tau_") + level + "_us";
    if (!scheme.has_level(level)) continue;
    if (!s.has(key)) continue;
    double tau = 0.0;
    s.number(key, tau);
    if (!(tau > 0.0)) throw ConfigError(where("scheme", key) + ": must be positive or inf");
    scheme.gamma[level] = std::isinf(tau) ? 0.0 : 1.0 / tau;
  }
  for (auto& [pair, b] : scheme.branching) {
    const std::string key = "b_" + pair.first + pair.second;
    s.number(key, b);
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError(where("scheme", key) + ": must lie in [0, 1]");
  }
  try {
    scheme.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[scheme] ") + e.what());
  }
}

void read_drive(Section& s, RunConfig& rc) {
  const Check c{s};
  if (rc.analytic_model) {
    s.number("omega0_MHz", rc.analytic_omega0_MHz);
    c.positive("omega0_MHz", rc.analytic_omega0_MHz);
    return;
  }
  GateConfig& g = rc.gate;
  switch (g.protocol) {
    case Protocol::kArp: {
      auto& p = g.arp;
      s.number("omega_max_MHz", p.omega_max_MHz);
      c.nonnegative("omega_max_MHz", p.omega_max_MHz);
      s.number("delta_max_MHz", p.delta_max_MHz);
      c.nonnegative("delta_max_MHz", p.delta_max_MHz);
      s.number("T_us", p.duration_us);
      c.positive("T_us", p.duration_us);
      s.number("tau_frac", p.tau_frac);
      c.positive("tau_frac", p.tau_frac);
      if (auto shape = s.text("sweep_shape")) {
        if (*shape == "chirp")
          p.variant.shape = SweepShape::kChirp;
        else if (*shape == "rise")
          p.variant.shape = SweepShape::kQuarterRise;
        else if (*shape == "fall")
          p.variant.shape = SweepShape::kQuarterFall;
        else
          throw ConfigError(where("drive", "sweep_shape") + ": expected chirp, rise or fall");
      }
      for (auto [key, sign] : {std::pair<const char*, int*>{"sweep_sign_1", &p.variant.first_sign},
                               std::pair<const char*, int*>{"sweep_sign_2", &p.variant.second_sign}}) {
        s.integer(key, *sign);
        if (*sign != 1 && *sign != -1) throw ConfigError(where("drive", key) + ": must be 1 or -1");
      }
      break;
    }
    case Protocol::kStirapAnalytic: {
      auto& p = g.stirap;
      s.number("omega1_max_MHz", p.omega1_max_MHz);
      c.nonnegative("omega1_max_MHz", p.omega1_max_MHz);
      s.number("omega2_max_MHz", p.omega2_max_MHz);
      c.nonnegative("omega2_max_MHz", p.omega2_max_MHz);
      s.number("T_us", p.duration_us);
      c.positive("T_us", p.duration_us);
      s.number("tau1_frac", p.tau1_frac);
      c.positive("tau1_frac", p.tau1_frac);
      s.number("tau2_frac", p.tau2_frac);
      c.positive("tau2_frac", p.tau2_frac);
      s.number("delta1_MHz", p.delta1_MHz);
      c.finite("delta1_MHz", p.delta1_MHz);
      s.number("delta_MHz", p.delta_MHz);
      c.finite("delta_MHz", p.delta_MHz);
      break;
    }
    case Protocol::kStirapVasilev: {
      auto& p = g.vasilev;
      s.number("omega0_MHz", p.omega0_MHz);
      c.nonnegative("omega0_MHz", p.omega0_MHz);
      s.number("t1_us", p.t1_us);
      c.finite("t1_us", p.t1_us);
      s.number("t2_us", p.t2_us);
      c.finite("t2_us", p.t2_us);
      s.number("tau_us", p.tau_us);
      c.positive("tau_us", p.tau_us);
      s.number("delta1_MHz", p.delta1_MHz);
      c.finite("delta1_MHz", p.delta1_MHz);
      s.number("T_us", p.duration_us);
      c.positive("T_us", p.duration_us);
      break;
    }
    case Protocol::kStirapSegmented: {
      auto& p = g.segmented;
      s.number("T_us", p.duration_us);
      c.positive("T_us", p.duration_us);
      if (s.has("omega1_MHz")) p.omega1_MHz = s.list("omega1_MHz");
      if (s.has("omega2_MHz")) p.omega2_MHz = s.list("omega2_MHz");
      if (s.has("delta1_MHz")) p.delta1_MHz = s.list("delta1_MHz");
      c.nonnegative_list("omega1_MHz", p.omega1_MHz);
      c.nonnegative_list("omega2_MHz", p.omega2_MHz);
      for (double v : p.delta1_MHz) c.finite("delta1_MHz", v);
      if (p.omega1_MHz.size() != p.omega2_MHz.size() || p.omega1_MHz.size() != p.delta1_MHz.size())
        throw ConfigError("[drive] omega1_MHz, omega2_MHz and delta1_MHz must have the same length");
      break;
    }
  }
}

void read_optimize(Section& s, RunConfig& rc) {
  const Check c{s};
  auto& p = rc.problem;
  s.integer("n_half_segments", p.n_half_segments);
  if (p.n_half_segments < 1) throw ConfigError(where("optimize", "n_half_segments") + ": must be >= 1");
  s.number("omega_low_MHz", p.omega_low_MHz);
  s.number("omega_high_MHz", p.omega_high_MHz);
  s.number("delta1_low_MHz", p.delta1_low_MHz);
  s.number("delta1_high_MHz", p.delta1_high_MHz);
  if (!(p.omega_low_MHz < p.omega_high_MHz))
    throw ConfigError(where("optimize", "omega_low_MHz") + ": must be below omega_high_MHz");
  if (!(p.delta1_low_MHz < p.delta1_high_MHz))
    throw ConfigError(where("optimize", "delta1_low_MHz") + ": must be below delta1_high_MHz");
  s.number("slew_MHz_per_us", p.slew_limit_MHz_per_us);
  c.positive("slew_MHz_per_us", p.slew_limit_MHz_per_us);
  s.number("penalty_weight", p.penalty_weight);
  c.nonnegative("penalty_weight", p.penalty_weight);
  s.integer("population", rc.de.population);
  if (rc.de.population != 0 && rc.de.population < 4)
    throw ConfigError(where("optimize", "population") + ": must be >= 4 (0 selects 10 x dim)");
  s.number("weight_F", rc.de.weight);
  if (!(rc.de.weight > 0.0 && rc.de.weight <= 2.0))
    throw ConfigError(where("optimize", "weight_F") + ": must lie in (0, 2]");
  s.number("crossover_CR", rc.de.crossover);
  if (!(rc.de.crossover >= 0.0 && rc.de.crossover <= 1.0))
    throw ConfigError(where("optimize", "crossover_CR") + ": must lie in [0, 1]");
  s.integer("generations", rc.de.generations);
  if (rc.de.generations < 0) throw ConfigError(where("optimize", "generations") + ": must be >= 0");
  s.integer("seed", rc.de.seed);
  if (auto cp = s.text("checkpoint")) rc.checkpoint = *cp;
  s.boolean("resume", rc.resume);
}

void read_integrator(Section& s, IntegratorConfig& cfg, int& samples) {
  const Check c{s};
  if (auto m = s.text("method")) {
    if (*m == "dopri5")
      cfg.method = IntegratorMethod::kDormandPrince45;
    else if (*m == "rk4")
      cfg.method = IntegratorMethod::kFixedRk4;
    else
      throw ConfigError(where("integrator", "method") + ": expected dopri5 or rk4");
  }
  s.number("rel_tol", cfg.rel_tol);
  c.positive("rel_tol", cfg.rel_tol);
  s.number("abs_tol", cfg.abs_tol);
  c.positive("abs_tol", cfg.abs_tol);
  s.number("max_step_us", cfg.max_step);
  c.nonnegative("max_step_us", cfg.max_step);
  s.integer("max_steps", cfg.max_steps);
  if (cfg.max_steps < 1) throw ConfigError(where("integrator", "max_steps") + ": must be >= 1");
  s.integer("samples", samples);
  if (samples < 2) throw ConfigError(where("integrator", "samples") + ": must be >= 2");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty())
      throw ConfigError("key '" + name + "' appears outside any section");
    if (!kSections.count(name)) throw ConfigError("unknown section [" + name + "]");
  }
  auto section = [&](const std::string& name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  RunConfig rc;
  Section protocol = section("protocol");
  if (!protocol.present()) throw ConfigError("missing required section [protocol]");
  read_protocol(protocol, rc);
  protocol.finish();

  Section scheme = section("scheme");
  if (scheme.present()) {
    if (rc.analytic_model) throw ConfigError("[scheme] does not apply to the analytic model");
    read_scheme(scheme, rc.gate.scheme);
  }
  scheme.finish();

  Section drive = section("drive");
  read_drive(drive, rc);
  drive.finish();

  Section integrator = section("integrator");
  read_integrator(integrator, rc.gate.integrator, rc.gate.samples);
  integrator.finish();

  Section sweep = section("sweep");
  if (sweep.has("B_MHz")) {
    rc.sweep_B_MHz = sweep.list("B_MHz");
    for (double b : rc.sweep_B_MHz) Check{sweep}.positive("B_MHz", b);
  }
  sweep.finish();

  Section robustness = section("robustness");
  if (robustness.present()) {
    rc.robustness_dDelta_kHz = robustness.list("dDelta_kHz");
    rc.robustness_dI_frac = robustness.list("dI_frac");
    for (double v : rc.robustness_dI_frac)
      if (!(v > -1.0)) throw ConfigError(where("robustness", "dI_frac") + ": values must be > -1");
  }
  robustness.finish();

  rc.problem.gate = rc.gate;
  Section optimize = section("optimize");
  read_optimize(optimize, rc);
  optimize.finish();
  if (optimize.present() && rc.gate.protocol != Protocol::kStirapSegmented)
    throw ConfigError("[optimize] needs [protocol] name = stirap-segmented");

  Section output = section("output");
  if (auto dir = output.text("dir")) rc.output_dir = *dir;
  output.boolean("traces", rc.write_traces);
  output.finish();

  if (!rc.analytic_model) {
    try {
      rc.gate.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("invalid gate configuration: ") + e.what());
    }
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace rydsim
