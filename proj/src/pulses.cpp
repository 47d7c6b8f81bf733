#include "rydsim/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "rydsim/csv.hpp"
#include "rydsim/quantum_core.hpp"

namespace rydsim {

Waveform Waveform::constant(std::string name, double value) {
  return Waveform(std::move(name), [value](double) { return value; });
}

double FlatGaussPulse::offset() const {
  const double x = (start - t0) / tau;
  return std::exp(-x * x * x * x);
}

double FlatGaussPulse::operator()(double t) const {
  if (t < start || t > stop) return 0.0;
  const double x = (t - t0) / tau;
  const double a = offset();
  return omega_max * (std::exp(-x * x * x * x) - a) / (1.0 - a);
}

void FlatGaussPulse::validate() const {
  if (!(tau > 0.0)) throw ConfigError("flat-Gauss pulse width tau must be positive");
  if (!(stop > start)) throw ConfigError("flat-Gauss pulse support must have stop > start");
  const double left = t0 - start;
  const double right = stop - t0;
  if (std::abs(left - right) > 1e-12 * std::max(1.0, std::abs(stop - start)))
    throw ConfigError("flat-Gauss pulse must be centred in its support");
}

double DetuningSweep::operator()(double t) const {
  if (t < ta || t > tb) return 0.0;
  const double x = (t - ta) / (tb - ta);
  const double s = static_cast<double>(sign);
  switch (shape) {
    case SweepShape::kQuarterRise:
      return s * delta_max * std::sin(0.5 * std::numbers::pi * x);
    case SweepShape::kQuarterFall:
      return s * delta_max * std::cos(0.5 * std::numbers::pi * x);
    case SweepShape::kChirp:
      return -s * delta_max * std::cos(std::numbers::pi * x);
  }
  return 0.0;
}

double VasilevPulsePair::envelope(double t, double tau) {
  const double x = t / (2.0 * tau);
  const double x2 = x * x;
  return std::exp(-x2 * x2 * x2);
}

double VasilevPulsePair::switching(double t, double tau) {
  return 1.0 / (1.0 + std::exp(-4.0 * t / tau));
}

double VasilevPulsePair::omega1(double t) const {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  return omega0 * envelope(t - t1, tau) * std::sin(half_pi * switching(t - t1, tau)) +
         omega0 * envelope(t - t2, tau) * std::cos(half_pi * switching(t - t2, tau));
}

double VasilevPulsePair::omega2(double t) const {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  return omega0 * envelope(t - t1, tau) * std::cos(half_pi * switching(t - t1, tau)) -
         omega0 * envelope(t - t2, tau) * std::sin(half_pi * switching(t - t2, tau));
}

double StepDetuning::operator()(double t) const {
  if (t < start || t > stop) return 0.0;
  if (t < t_switch) return -delta_max;
  if (t > t_switch) return delta_max;
  return 0.0;
}

SegmentedPulse::SegmentedPulse(std::vector<double> values, double duration)
    : values_(std::move(values)), duration_(duration) {
  if (values_.empty()) throw ConfigError("segmented pulse needs at least one segment");
  if (!(duration_ > 0.0)) throw ConfigError("segmented pulse duration must be positive");
  for (double v : values_)
    if (!std::isfinite(v)) throw ConfigError("segmented pulse values must be finite");
}

SegmentedPulse SegmentedPulse::symmetric(std::span<const double> first_half, double duration) {
  std::vector<double> v(first_half.begin(), first_half.end());
  v.insert(v.end(), first_half.rbegin(), first_half.rend());
  return SegmentedPulse(std::move(v), duration);
}

double SegmentedPulse::operator()(double t) const {
  if (t <= 0.0) return values_.front();
  if (t >= duration_) return values_.back();
  const double dt = segment_duration();
  const double k = 5.0 / dt;
  double f = values_.front();
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
    const double jump = values_[i + 1] - values_[i];
    if (jump == 0.0) continue;
    const double arg = k * (t - static_cast<double>(i + 1) * dt);
    // erf is +-1 to double precision beyond |arg| = 6
    if (arg >= 6.0)
      f += jump;
    else if (arg > -6.0)
      f += 0.5 * jump * (1.0 + std::erf(arg));
  }
  return f;
}

bool SegmentedPulse::is_symmetric() const {
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i < n / 2; ++i)
    if (values_[i] != values_[n - 1 - i]) return false;
  return true;
}

double max_slew_MHz_per_us(const SegmentedPulse& pulse) {
  const auto& v = pulse.values();
  double max_jump = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    max_jump = std::max(max_jump, std::abs(v[i + 1] - v[i]));
  const double slope = 5.0 * max_jump / (std::sqrt(std::numbers::pi) * pulse.segment_duration());
  return slope / kTwoPi;
}

double mixing_angle(const Waveform& omega1, const Waveform& omega2, double t) {
  return std::atan2(omega1(t), omega2(t));
}

double mixing_angle_rate(const Waveform& omega1, const Waveform& omega2, double t, double h) {
  return (mixing_angle(omega1, omega2, t + h) - mixing_angle(omega1, omega2, t - h)) / (2.0 * h);
}

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be >= 0");
}

void require_sign(int s) {
  if (s != 1 && s != -1) throw ConfigError("sweep sign must be +1 or -1");
}

}  // namespace

ArpDrive build_arp_drive(const ArpDriveParams& p) {
  require_positive(p.duration_us, "gate duration T");
  require_positive(p.tau_frac, "tau fraction");
  require_nonnegative(p.omega_max_MHz, "omega_max");
  require_sign(p.variant.first_sign);
  require_sign(p.variant.second_sign);
  const double T = p.duration_us;
  const double omax = kTwoPi * p.omega_max_MHz;
  const double dmax = kTwoPi * p.delta_max_MHz;
  const FlatGaussPulse first{omax, 0.25 * T, p.tau_frac * T, 0.0, 0.5 * T};
  const FlatGaussPulse second{omax, 0.75 * T, p.tau_frac * T, 0.5 * T, T};
  first.validate();
  second.validate();
  const DetuningSweep sweep1{dmax, 0.0, 0.5 * T, p.variant.shape, p.variant.first_sign};
  const DetuningSweep sweep2{dmax, 0.5 * T, T, p.variant.shape, p.variant.second_sign};
  const double half = 0.5 * T;
  return {
      Waveform("Omega", [first, second](double t) { return first(t) + second(t); }),
      Waveform("Delta", [sweep1, sweep2, half](double t) { return t < half ? sweep1(t) : sweep2(t); }),
  };
}

StirapDrive build_stirap_drive(const StirapDriveParams& p) {
  require_positive(p.duration_us, "gate duration T");
  require_positive(p.tau1_frac, "tau1 fraction");
  require_positive(p.tau2_frac, "tau2 fraction");
  require_nonnegative(p.omega1_max_MHz, "omega1_max");
  require_nonnegative(p.omega2_max_MHz, "omega2_max");
  const double T = p.duration_us;
  const FlatGaussPulse pump{kTwoPi * p.omega1_max_MHz, 0.5 * T, p.tau1_frac * T, 0.0, T};
  const FlatGaussPulse stokes1{kTwoPi * p.omega2_max_MHz, 0.25 * T, p.tau2_frac * T, 0.0, 0.5 * T};
  const FlatGaussPulse stokes2{kTwoPi * p.omega2_max_MHz, 0.75 * T, p.tau2_frac * T, 0.5 * T, T};
  pump.validate();
  stokes1.validate();
  stokes2.validate();
  const double d1 = kTwoPi * p.delta1_MHz;
  const double d = kTwoPi * p.delta_MHz;
  return {
      Waveform("Omega1", pump),
      Waveform("Omega2", [stokes1, stokes2](double t) { return stokes1(t) + stokes2(t); }),
      Waveform("Delta1", [d1, T](double t) { return (t < 0.0 || t > T) ? 0.0 : d1; }),
      Waveform("Delta", [d, T](double t) { return (t < 0.0 || t > T) ? 0.0 : d; }),
  };
}

StirapDrive build_vasilev_drive(const VasilevDriveParams& p) {
  require_positive(p.duration_us, "gate duration T");
  require_positive(p.tau_us, "tau");
  const VasilevPulsePair pair{kTwoPi * p.omega0_MHz, p.t1_us, p.t2_us, p.tau_us};
  const StepDetuning d1{kTwoPi * p.delta1_MHz, 0.5 * p.duration_us, 0.0, p.duration_us};
  return {
      Waveform("Omega1", [pair](double t) { return pair.omega1(t); }),
      Waveform("Omega2", [pair](double t) { return pair.omega2(t); }),
      Waveform("Delta1", d1),
      Waveform::constant("Delta", 0.0),
  };
}

SegmentedDrive build_segmented_pulses(const SegmentedDriveParams& p) {
  require_positive(p.duration_us, "gate duration T");
  auto scaled = [](const std::vector<double>& mhz) {
    std::vector<double> out(mhz.size());
    std::transform(mhz.begin(), mhz.end(), out.begin(), [](double v) { return kTwoPi * v; });
    return out;
  };
  if (p.omega1_MHz.size() != p.omega2_MHz.size() || p.omega1_MHz.size() != p.delta1_MHz.size())
    throw ConfigError("segmented drive needs the same number of segments for all three functions");
  return {
      SegmentedPulse::symmetric(scaled(p.omega1_MHz), p.duration_us),
      SegmentedPulse::symmetric(scaled(p.omega2_MHz), p.duration_us),
      SegmentedPulse::symmetric(scaled(p.delta1_MHz), p.duration_us),
  };
}

StirapDrive build_segmented_drive(const SegmentedDriveParams& p) {
  SegmentedDrive s = build_segmented_pulses(p);
  return {
      Waveform("Omega1", s.omega1),
      Waveform("Omega2", s.omega2),
      Waveform("Delta1", s.delta1),
      Waveform::constant("Delta", 0.0),
  };
}

void export_waveform_csv(std::ostream& os, const Waveform& wf, double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample step must be positive");
  os << "time_us,value_MHz\n";
  const auto n = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    os << csv::format_double(t) << ',' << csv::format_double(wf(t) / kTwoPi) << '\n';
  }
}

}  // namespace rydsim
