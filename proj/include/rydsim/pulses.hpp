#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rydsim {

// All waveform values are angular frequencies in rad/us (2 pi x MHz); times are in us.

/// A named real function of time.
class Waveform {
 public:
  Waveform() : name_("zero"), f_([](double) { return 0.0; }) {}
  Waveform(std::string name, std::function<double(double)> f)
      : name_(std::move(name)), f_(std::move(f)) {}

  double operator()(double t) const { return f_(t); }
  const std::string& name() const { return name_; }

  static Waveform constant(std::string name, double value);

 private:
  std::string name_;
  std::function<double(double)> f_;
};

/// Omega_max [exp(-(t-t0)^4/tau^4) - a] / (1 - a) on [start, stop], zero outside.
/// The offset a makes the pulse vanish at both ends, so the support must be
/// centred on t0.
struct FlatGaussPulse {
  double omega_max = 0.0;
  double t0 = 0.0;
  double tau = 1.0;
  double start = 0.0;
  double stop = 0.0;

  double offset() const;
  double operator()(double t) const;
  void validate() const;
};

enum class SweepShape {
  kQuarterRise,  // 0 -> sign * delta_max, quarter period of sin
  kQuarterFall,  // sign * delta_max -> 0
  kChirp,        // -sign * delta_max -> +sign * delta_max through resonance
};

/// Detuning sweep on [ta, tb], zero outside.
struct DetuningSweep {
  double delta_max = 0.0;
  double ta = 0.0;
  double tb = 1.0;
  SweepShape shape = SweepShape::kChirp;
  int sign = +1;

  double operator()(double t) const;
};

/// Double-STIRAP amplitudes
///   Omega1 = O0 F(t-t1) sin(pi/2 f(t-t1)) + O0 F(t-t2) cos(pi/2 f(t-t2))
///   Omega2 = O0 F(t-t1) cos(pi/2 f(t-t1)) - O0 F(t-t2) sin(pi/2 f(t-t2))
/// with F(t) = exp(-(t/2tau)^6), f(t) = 1/(1 + exp(-4t/tau)).
struct VasilevPulsePair {
  double omega0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double tau = 1.0;

  static double envelope(double t, double tau);
  static double switching(double t, double tau);
  double omega1(double t) const;
  double omega2(double t) const;
};

/// delta_max * sign(t - t_switch) on [start, stop], zero outside.
struct StepDetuning {
  double delta_max = 0.0;
  double t_switch = 0.0;
  double start = 0.0;
  double stop = 0.0;

  double operator()(double t) const;
};

/// 2N equal segments of length dt = T/2N joined by erf connectors.
///
/// Between the centres of segments i and i+1 the value moves from f_i to
/// f_{i+1} as (f_i+f_{i+1})/2 + (f_{i+1}-f_i)/2 erf[5/dt (t - b_i)], with b_i
/// the shared segment boundary. The connectors are summed as step functions,
/// which keeps f continuous everywhere and agrees with the piecewise form to
/// erfc(2.5). Outside [0, T] the first and last values are held.
class SegmentedPulse {
 public:
  SegmentedPulse(std::vector<double> values, double duration);
  /// Mirrors the first-half values: f_i = f_{2N+1-i}.
  static SegmentedPulse symmetric(std::span<const double> first_half, double duration);

  double operator()(double t) const;
  double duration() const { return duration_; }
  double segment_duration() const { return duration_ / static_cast<double>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  bool is_symmetric() const;

 private:
  std::vector<double> values_;
  double duration_;
};

/// Analytic maximum of |df/dt|, max_i 5|f_{i+1}-f_i| / (sqrt(pi) dt), in MHz/us.
double max_slew_MHz_per_us(const SegmentedPulse& pulse);

/// Mixing angle atan2(Omega1, Omega2) in radians.
double mixing_angle(const Waveform& omega1, const Waveform& omega2, double t);
/// Central-difference d(theta)/dt in rad/us.
double mixing_angle_rate(const Waveform& omega1, const Waveform& omega2, double t,
                         double h = 1e-5);

struct ArpSweepVariant {
  SweepShape shape = SweepShape::kChirp;
  int first_sign = +1;
  int second_sign = +1;
};

struct ArpDriveParams {
  double omega_max_MHz = 17.0;
  double delta_max_MHz = 23.0;
  double duration_us = 0.54;
  double tau_frac = 0.175;
  ArpSweepVariant variant{};
};

struct ArpDrive {
  Waveform omega;
  Waveform delta;
};

/// Two flat-Gauss pulses on [0, T/2] and [T/2, T] with a detuning sweep in each.
ArpDrive build_arp_drive(const ArpDriveParams& params);

struct StirapDriveParams {
  double omega1_max_MHz = 190.0;
  double omega2_max_MHz = 190.0;
  double duration_us = 1.0;
  double tau1_frac = 0.165;
  double tau2_frac = 0.175;
  double delta1_MHz = 750.0;
  double delta_MHz = 0.0;
};

struct StirapDrive {
  Waveform omega1;
  Waveform omega2;
  Waveform delta1;
  Waveform delta;
};

/// Counterintuitive sequence: Omega1 centred at T/2, Omega2 pulses at T/4 and 3T/4.
StirapDrive build_stirap_drive(const StirapDriveParams& params);

struct VasilevDriveParams {
  double omega0_MHz = 220.0;
  double t1_us = 0.3;
  double t2_us = 0.9;
  double tau_us = 0.1;
  double delta1_MHz = 750.0;
  double duration_us = 1.2;
};

StirapDrive build_vasilev_drive(const VasilevDriveParams& params);

/// Optimized segmented gate: first-half segment values in MHz.
struct SegmentedDriveParams {
  std::vector<double> omega1_MHz{1.38, 10.30, 25.54, 42.85, 82.50, 93.35};
  std::vector<double> omega2_MHz{165.09, 199.99, 198.14, 198.87, 200.00, 173.48};
  std::vector<double> delta1_MHz{392.57, 363.48, 364.36, 360.99, 416.45, 420.39};
  double duration_us = 1.0;
};

struct SegmentedDrive {
  SegmentedPulse omega1;
  SegmentedPulse omega2;
  SegmentedPulse delta1;
};

SegmentedDrive build_segmented_pulses(const SegmentedDriveParams& params);
StirapDrive build_segmented_drive(const SegmentedDriveParams& params);

/// Writes `time_us,value_MHz` rows at t0, t0+dt, ... up to t1 inclusive.
void export_waveform_csv(std::ostream& os, const Waveform& wf, double t0, double t1, double dt);

}  // namespace rydsim
