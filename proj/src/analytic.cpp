#include "rydsim/analytic.hpp"

#include <cmath>
#include <numbers>

namespace rydsim {

namespace {

constexpr Eigen::Index kD = 3;  // {0, 1, r}

CMatrix hadamard3() {
  CMatrix h = CMatrix::Identity(kD, kD);
  const double s = 1.0 / std::sqrt(2.0);
  h(0, 0) = s;
  h(0, 1) = s;
  h(1, 0) = s;
  h(1, 1) = -s;
  return h;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix projector3(Eigen::Index level) {
  CMatrix p = CMatrix::Zero(kD, kD);
  p(level, level) = 1.0;
  return p;
}

}  // namespace

double AnalyticParams::omega_prime() const {
  return std::sqrt(std::norm(omega0) * (1.0 + dI) + delta * delta);
}

CMatrix rotation_matrix(double t, const AnalyticParams& p) {
  if (!(1.0 + p.dI >= 0.0)) throw std::invalid_argument("intensity offset must be >= -1");
  const double op = p.omega_prime();
  const Complex i(0.0, 1.0);
  const Complex phase = std::exp(i * (p.delta * t / 2.0));
  const double c = std::cos(op * t / 2.0);
  // sin(x)/Omega' stays finite as Omega' -> 0
  const double s_over = op > 0.0 ? std::sin(op * t / 2.0) / op : t / 2.0;
  const double scale = std::sqrt(1.0 + p.dI);
  CMatrix r = CMatrix::Zero(kD, kD);
  r(0, 0) = 1.0;
  r(1, 1) = phase * (c - i * p.delta * s_over);
  r(1, 2) = i * phase * std::conj(p.omega0) * scale * s_over;
  r(2, 1) = i * phase * p.omega0 * scale * s_over;
  r(2, 2) = phase * (c + i * p.delta * s_over);
  return r;
}

PulseDurations PulseDurations::nominal(Complex omega0) {
  const double a = std::abs(omega0);
  if (!(a > 0.0)) throw std::invalid_argument("nominal pulse durations need a nonzero Rabi frequency");
  return {std::numbers::pi / a, 2.0 * std::numbers::pi / a};
}

CMatrix cz_operator(const AnalyticParams& p, const PulseDurations& d) {
  const CMatrix id = CMatrix::Identity(kD, kD);
  const CMatrix qubit = projector3(0) + projector3(1);
  const CMatrix rydberg = projector3(2);
  const CMatrix outer = kron(rotation_matrix(d.t_pi, p), qubit) + kron(id, rydberg);
  const CMatrix middle = kron(qubit, rotation_matrix(d.t_2pi, p)) + kron(rydberg, id);
  return outer * middle * outer;
}

CMatrix ideal_cz(Complex omega0) {
  AnalyticParams p;
  p.omega0 = omega0;
  return cz_operator(p, PulseDurations::nominal(omega0));
}

CVector bell_state(const CMatrix& u) {
  const CMatrix id = CMatrix::Identity(kD, kD);
  const CMatrix h = hadamard3();
  CVector psi = CVector::Zero(kD * kD);
  psi(0) = 1.0;
  return kron(id, h) * u * kron(id, h) * kron(h, id) * psi;
}

CVector ideal_bell_state() {
  CVector v = CVector::Zero(kD * kD);
  v(0 * kD + 1) = 1.0 / std::sqrt(2.0);
  v(1 * kD + 0) = -1.0 / std::sqrt(2.0);
  return v;
}

double analytic_bell_fidelity(const AnalyticParams& p, const PulseDurations& d) {
  const CVector bell = ideal_bell_state();
  const CVector out = bell_state(cz_operator(p, d));
  // Normalizing by both norms removes the rounding of 1/sqrt2 factors, so an
  // error-free gate scores exactly 1.
  return std::norm(bell.dot(out)) / (bell.squaredNorm() * out.squaredNorm());
}

double analytic_bell_fidelity(const AnalyticParams& p) {
  return analytic_bell_fidelity(p, PulseDurations::nominal(p.omega0));
}

double leakage_bound(double omega_max, double delta_min) {
  if (!(delta_min > 0.0)) throw std::invalid_argument("leakage bound needs delta_min > 0");
  const double r = omega_max / delta_min;
  return r * r;
}

std::vector<RobustnessPoint> analytic_sensitivity_grid(Complex omega0,
                                                       const std::vector<double>& dDelta_kHz,
                                                       const std::vector<double>& dI_frac) {
  const PulseDurations d = PulseDurations::nominal(omega0);
  std::vector<RobustnessPoint> out;
  out.reserve(dDelta_kHz.size() * dI_frac.size());
  for (double dd : dDelta_kHz)
    for (double di : dI_frac) {
      const AnalyticParams p{omega0, kTwoPi * dd * 1e-3, di};
      out.push_back({dd, di, analytic_bell_fidelity(p, d)});
    }
  return out;
}

double numerical_sequence_fidelity(const AnalyticParams& p, double blockade,
                                   const IntegratorConfig& cfg) {
  if (p.omega0.imag() != 0.0)
    throw std::invalid_argument("the numerical sequence uses real Rabi amplitudes");
  const LevelScheme scheme = LevelScheme::arp_default().with_gamma_scaled(0.0);
  const StateSpace space(scheme);
  const PulseDurations d = PulseDurations::nominal(p.omega0);
  const double omega = p.omega0.real();

  auto pulse = [&](Addressing who) {
    HamiltonianModel h;
    h.couplings = {{"1", "r", Waveform::constant("Omega", omega)}};
    h.shifts = {{"r", Waveform::constant("Delta", p.delta)}};
    h.blockade = blockade;
    h.intensity_offset = p.dI;
    h.addressing = who;
    return h;
  };

  DensityMatrix rho = DensityMatrix::basis(space, "0", "0");
  rho = apply_hadamard(rho, scheme, Atom::kControl);
  rho = apply_hadamard(rho, scheme, Atom::kTarget);
  rho = propagate(rho, pulse(Addressing::kControl), scheme, 0.0, d.t_pi, cfg).rho;
  rho = propagate(rho, pulse(Addressing::kTarget), scheme, 0.0, d.t_2pi, cfg).rho;
  rho = propagate(rho, pulse(Addressing::kControl), scheme, 0.0, d.t_pi, cfg).rho;
  rho = apply_hadamard(rho, scheme, Atom::kTarget);

  const CVector bell = (space.ket("0", "1") - space.ket("1", "0")) / std::sqrt(2.0);
  return (bell.adjoint() * rho.data() * bell)(0, 0).real();
}

}  // namespace rydsim
