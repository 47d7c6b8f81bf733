#include "rydsim/lindblad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace rydsim {

HamiltonianModel HamiltonianModel::one_photon(const ArpDrive& drive, double blockade) {
  HamiltonianModel h;
  h.couplings = {{"1", "r", drive.omega}};
  h.shifts = {{"r", drive.delta}};
  h.blockade = blockade;
  return h;
}

HamiltonianModel HamiltonianModel::two_photon(const StirapDrive& drive, double blockade) {
  HamiltonianModel h;
  h.couplings = {{"1", "p", drive.omega1}, {"p", "r", drive.omega2}};
  h.shifts = {{"p", drive.delta1}, {"r", drive.delta}};
  h.blockade = blockade;
  return h;
}

std::vector<LindbladOperator> dissipator(const LevelScheme& scheme) {
  scheme.validate();
  StateSpace space(scheme);
  const auto d = static_cast<Eigen::Index>(scheme.dim());
  std::vector<LindbladOperator> ops;
  for (const auto& [key, b] : scheme.branching) {
    const auto& [lower, upper] = key;
    const double rate = b * scheme.decay_rate(upper);
    if (rate <= 0.0) continue;
    CMatrix single = CMatrix::Zero(d, d);
    single(static_cast<Eigen::Index>(scheme.index(lower)),
           static_cast<Eigen::Index>(scheme.index(upper))) = std::sqrt(rate);
    for (Atom atom : {Atom::kControl, Atom::kTarget}) {
      ops.push_back({"L_" + lower + upper + (atom == Atom::kControl ? "^c" : "^t"), atom, lower,
                     upper, rate, space.embed(single, atom)});
    }
  }
  return ops;
}

Liouvillian::Liouvillian(const HamiltonianModel& h, const LevelScheme& scheme)
    : d_(static_cast<Eigen::Index>(scheme.dim())),
      n_(d_ * d_),
      rydberg_(static_cast<Eigen::Index>(scheme.index("r"))),
      detuning_offset_(h.detuning_offset),
      rabi_scale_(std::sqrt(1.0 + h.intensity_offset)),
      drive_control_(h.addressing != Addressing::kTarget),
      drive_target_(h.addressing != Addressing::kControl),
      blockade_(h.blockade) {
  scheme.validate();
  if (!(1.0 + h.intensity_offset >= 0.0))
    throw ConfigError("intensity offset must be >= -1");
  for (const auto& c : h.couplings)
    couplings_.push_back({static_cast<Eigen::Index>(scheme.index(c.lower)),
                          static_cast<Eigen::Index>(scheme.index(c.upper)), c.rabi});
  for (const auto& s : h.shifts)
    shifts_.push_back({static_cast<Eigen::Index>(scheme.index(s.level)), s.detuning});
  if (couplings_.size() * 2 + shifts_.size() + 1 > 32)
    throw ConfigError("too many drive terms");

  std::vector<double> out_rate(static_cast<std::size_t>(d_), 0.0);
  for (const auto& [key, b] : scheme.branching) {
    const double rate = b * scheme.decay_rate(key.second);
    if (rate <= 0.0) continue;
    const auto lower = static_cast<Eigen::Index>(scheme.index(key.first));
    const auto upper = static_cast<Eigen::Index>(scheme.index(key.second));
    jumps_.push_back({lower, upper, rate});
    out_rate[static_cast<std::size_t>(upper)] += rate;
  }
  diag_ = CVector::Zero(n_);
  for (Eigen::Index a = 0; a < d_; ++a)
    for (Eigen::Index b = 0; b < d_; ++b) {
      const double g = out_rate[static_cast<std::size_t>(a)] + out_rate[static_cast<std::size_t>(b)];
      diag_(a * d_ + b) = Complex(0.0, 0.5 * g);
    }
  diag_(rydberg_ * d_ + rydberg_) += blockade_;
}

std::size_t Liouvillian::single_atom_entries(double t, Entry* out) const {
  std::size_t n = 0;
  for (const auto& c : couplings_) {
    const double half = 0.5 * rabi_scale_ * c.rabi(t);
    out[n++] = {c.upper, c.lower, half};
    out[n++] = {c.lower, c.upper, half};
  }
  bool offset_applied = false;
  for (const auto& s : shifts_) {
    double v = s.detuning(t);
    if (s.level == rydberg_ && !offset_applied) {
      v += detuning_offset_;
      offset_applied = true;
    }
    out[n++] = {s.level, s.level, v};
  }
  if (!offset_applied && detuning_offset_ != 0.0) out[n++] = {rydberg_, rydberg_, detuning_offset_};
  return n;
}

void Liouvillian::apply(double t, const CMatrix& rho, CMatrix& drho) const {
  std::array<Entry, 32> entries;
  const std::size_t count = single_atom_entries(t, entries.data());

  // X = H_eff rho with H_eff = H + (i/2) sum_k L_k^dag L_k; then
  // d rho/dt = i (X - X^dag) + sum_k L_k rho L_k^dag.
  CMatrix x = diag_.asDiagonal() * rho;
  for (std::size_t e = 0; e < count; ++e) {
    const auto [a, b, v] = entries[e];
    if (v == 0.0) continue;
    for (Eigen::Index s = 0; s < d_; ++s) {
      if (drive_control_) x.row(a * d_ + s) += v * rho.row(b * d_ + s);
      if (drive_target_) x.row(s * d_ + a) += v * rho.row(s * d_ + b);
    }
  }
  drho.noalias() = Complex(0.0, 1.0) * (x - x.adjoint());

  for (const auto& j : jumps_) {
    drho.block(j.lower * d_, j.lower * d_, d_, d_) += j.rate * rho.block(j.upper * d_, j.upper * d_, d_, d_);
    for (Eigen::Index a = 0; a < d_; ++a)
      for (Eigen::Index b = 0; b < d_; ++b)
        drho(a * d_ + j.lower, b * d_ + j.lower) += j.rate * rho(a * d_ + j.upper, b * d_ + j.upper);
  }
}

CMatrix Liouvillian::hamiltonian(double t) const {
  std::array<Entry, 32> entries;
  const std::size_t count = single_atom_entries(t, entries.data());
  CMatrix h1 = CMatrix::Zero(d_, d_);
  for (std::size_t e = 0; e < count; ++e) h1(entries[e].row, entries[e].col) += entries[e].value;
  CMatrix h = CMatrix::Zero(n_, n_);
  for (Eigen::Index a = 0; a < d_; ++a)
    for (Eigen::Index b = 0; b < d_; ++b)
      for (Eigen::Index s = 0; s < d_; ++s) {
        if (drive_control_) h(a * d_ + s, b * d_ + s) += h1(a, b);
        if (drive_target_) h(s * d_ + a, s * d_ + b) += h1(a, b);
      }
  h(rydberg_ * d_ + rydberg_, rydberg_ * d_ + rydberg_) += blockade_;
  return h;
}

std::vector<double> TimeSeries::column(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument("no observable '" + label + "' in time series");
  const auto j = static_cast<std::size_t>(it - labels.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2;   // largest shrink per step is 1/5
constexpr double kFacMax = 10.0;  // largest growth per step

// Collects observables at the requested times across integration segments.
class Sampler {
 public:
  Sampler(const std::vector<Observable>& obs, double t0, double t1, double dt) : obs_(obs) {
    series_.labels.reserve(obs.size());
    for (const auto& o : obs) series_.labels.push_back(o.label);
    if (dt > 0.0 && !obs.empty()) {
      const auto n = static_cast<long>(std::floor((t1 - t0) / dt * (1.0 + 1e-12)));
      for (long k = 0; k <= n; ++k) times_.push_back(t0 + static_cast<double>(k) * dt);
      if (times_.back() < t1 - 1e-12 * std::max(1.0, std::abs(t1))) times_.push_back(t1);
    }
  }

  bool pending() const { return next_ < times_.size(); }
  double next_time() const { return times_[next_]; }

  void record(std::size_t atom_dim, const CMatrix& rho) {
    const DensityMatrix dm(atom_dim, rho);
    std::vector<double> row;
    row.reserve(obs_.size());
    for (const auto& o : obs_) row.push_back(expectation(dm, o));
    series_.times.push_back(times_[next_]);
    series_.rows.push_back(std::move(row));
    ++next_;
  }

  TimeSeries take() { return std::move(series_); }

 private:
  const std::vector<Observable>& obs_;
  std::vector<double> times_;
  std::size_t next_ = 0;
  TimeSeries series_;
};

// Max norm: an RMS over the mostly-empty density matrix would dilute the
// error of the few populated entries and loosen the effective tolerance.
double error_norm(const CMatrix& err, const CMatrix& y0, const CMatrix& y1, double atol, double rtol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    worst = std::max(worst, std::abs(err(i)) / sk);
  }
  return worst;
}

double symmetrize(CMatrix& rho) {
  const double drift = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  CMatrix sym = 0.5 * (rho + rho.adjoint());
  rho = std::move(sym);
  return drift;
}

class Integrator {
 public:
  Integrator(const Liouvillian& lv, const IntegratorConfig& cfg, std::size_t atom_dim,
             IntegrationStats& stats)
      : lv_(lv), cfg_(cfg), atom_dim_(atom_dim), stats_(stats) {
    const Eigen::Index n = lv.dim();
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &ynew_})
      *m = CMatrix::Zero(n, n);
  }

  // Integrates y over [ta, tb] (no drive discontinuity inside).
  void run(CMatrix& y, double ta, double tb, Sampler& sampler) {
    // stages on the interval ends see the one-sided limit of a jumping drive
    lo_ = std::nextafter(ta, tb);
    hi_ = std::nextafter(tb, ta);
    if (hi_ < lo_) lo_ = hi_ = 0.5 * (ta + tb);
    if (cfg_.method == IntegratorMethod::kFixedRk4)
      run_rk4(y, ta, tb, sampler);
    else
      run_dopri(y, ta, tb, sampler);
  }

 private:
  void eval(double t, const CMatrix& y, CMatrix& out) {
    lv_.apply(std::clamp(t, lo_, hi_), y, out);
    ++stats_.rhs_evaluations;
  }

  double initial_step(double t, const CMatrix& y, double span) {
    auto norm = [&](const CMatrix& v) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y(i));
        sum += std::norm(v(i)) / (sk * sk);
      }
      return std::sqrt(sum / static_cast<double>(v.size()));
    };
    const double dy = norm(y);
    const double df = norm(k1_);
    double h0 = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
    h0 = std::min(h0, span);
    ytmp_ = y + h0 * k1_;
    eval(t + h0, ytmp_, k2_);
    const double ddf = norm(k2_ - k1_) / h0;
    const double m = std::max(df, ddf);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    double h = std::min(100.0 * h0, h1);
    if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
    return std::min(h, span);
  }

  void run_dopri(CMatrix& y, double t, double tend, Sampler& sampler) {
    const double span = tend - t;
    eval(t, y, k1_);
    if (!k1_.allFinite()) throw IntegrationError("non-finite derivative", t);
    double h = last_h_ > 0.0 ? std::min(last_h_, span) : initial_step(t, y, span);
    double facold = 1e-4;
    bool last_rejected = false;
    const double expo = 0.2 - kBeta * 0.75;

    while (t < tend) {
      if (stats_.accepted_steps + stats_.rejected_steps >= cfg_.max_steps)
        throw IntegrationError("step budget exhausted", t);
      if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
      bool final_step = false;
      if (t + 1.01 * h >= tend) {
        h = tend - t;
        final_step = true;
      }
      if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
        throw IntegrationError("step size underflow", t);

      ytmp_ = y + h * a21 * k1_;
      eval(t + c2 * h, ytmp_, k2_);
      ytmp_ = y + h * (a31 * k1_ + a32 * k2_);
      eval(t + c3 * h, ytmp_, k3_);
      ytmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      eval(t + c4 * h, ytmp_, k4_);
      ytmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      eval(t + c5 * h, ytmp_, k5_);
      ytmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      const double tnew = final_step ? tend : t + h;
      eval(tnew, ytmp_, k6_);
      ynew_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
      eval(tnew, ynew_, k7_);

      if (!ynew_.allFinite() || !k7_.allFinite()) {
        ++stats_.rejected_steps;
        h *= 0.1;
        last_rejected = true;
        continue;
      }

      ytmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
      const double err = error_norm(ytmp_, y, ynew_, cfg_.abs_tol, cfg_.rel_tol);
      const double fac11 = std::pow(err, expo);

      if (err <= 1.0) {
        ++stats_.accepted_steps;
        if (sampler.pending() && sampler.next_time() <= tnew) dense_output(y, h, t, tnew, sampler);
        y.swap(ynew_);
        stats_.max_hermiticity_drift = std::max(stats_.max_hermiticity_drift, symmetrize(y));
        // k7 was evaluated before symmetrization; the difference is rounding-level.
        k1_.swap(k7_);
        t = tnew;
        double fac = fac11 / std::pow(facold, kBeta);
        facold = std::max(err, 1e-4);
        fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
        double hnew = h / fac;
        if (last_rejected) hnew = std::min(hnew, h);
        last_rejected = false;
        if (!final_step) last_h_ = h;
        h = hnew;
      } else {
        ++stats_.rejected_steps;
        h /= std::min(1.0 / kFacMin, fac11 / kSafety);
        last_rejected = true;
      }
    }
  }

  void dense_output(const CMatrix& y, double h, double t, double tnew, Sampler& sampler) {
    const CMatrix r1 = y;
    const CMatrix r2 = ynew_ - y;
    const CMatrix r3 = h * k1_ - r2;
    const CMatrix r4 = r2 - h * k7_ - r3;
    const CMatrix r5 = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
    while (sampler.pending() && sampler.next_time() <= tnew) {
      const double theta = std::clamp((sampler.next_time() - t) / h, 0.0, 1.0);
      const double theta1 = 1.0 - theta;
      CMatrix ys = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
      symmetrize(ys);
      sampler.record(atom_dim_, ys);
    }
  }

  void run_rk4(CMatrix& y, double t, double tend, Sampler& sampler) {
    const double hmax = cfg_.max_step > 0.0 ? cfg_.max_step : 1e-4;
    const auto steps = static_cast<long>(std::ceil((tend - t) / hmax - 1e-9));
    const double h = (tend - t) / static_cast<double>(std::max(1L, steps));
    const double t_start = t;
    for (long s = 0; s < std::max(1L, steps); ++s) {
      if (stats_.accepted_steps >= cfg_.max_steps) throw IntegrationError("step budget exhausted", t);
      eval(t, y, k1_);
      if (!k1_.allFinite()) throw IntegrationError("non-finite derivative", t);
      ytmp_ = y + 0.5 * h * k1_;
      eval(t + 0.5 * h, ytmp_, k2_);
      ytmp_ = y + 0.5 * h * k2_;
      eval(t + 0.5 * h, ytmp_, k3_);
      ytmp_ = y + h * k3_;
      const double tnew = (s + 1 == std::max(1L, steps)) ? tend : t_start + static_cast<double>(s + 1) * h;
      eval(tnew, ytmp_, k4_);
      ynew_ = y + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
      if (!ynew_.allFinite()) throw IntegrationError("non-finite state", tnew);
      ++stats_.accepted_steps;
      if (sampler.pending() && sampler.next_time() <= tnew) {
        // cubic Hermite interpolation between the step end points
        eval(tnew, ynew_, k5_);
        while (sampler.pending() && sampler.next_time() <= tnew) {
          const double th = std::clamp((sampler.next_time() - t) / h, 0.0, 1.0);
          const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
          const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
          CMatrix ys = h00 * y + (h10 * h) * k1_ + h01 * ynew_ + (h11 * h) * k5_;
          symmetrize(ys);
          sampler.record(atom_dim_, ys);
        }
      }
      y.swap(ynew_);
      stats_.max_hermiticity_drift = std::max(stats_.max_hermiticity_drift, symmetrize(y));
      t = tnew;
    }
  }

  const Liouvillian& lv_;
  const IntegratorConfig& cfg_;
  std::size_t atom_dim_;
  IntegrationStats& stats_;
  CMatrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
  double last_h_ = 0.0;
  double lo_ = 0.0, hi_ = 0.0;
};

}  // namespace

PropagationResult propagate(const DensityMatrix& rho0, const HamiltonianModel& h,
                            const LevelScheme& scheme, double t0, double t1,
                            const IntegratorConfig& cfg, const std::vector<Observable>& observables,
                            double sample_dt) {
  if (rho0.atom_dim() != scheme.dim())
    throw std::invalid_argument("initial state does not match the level scheme");
  if (t1 < t0) throw std::invalid_argument("propagation needs t1 >= t0");
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0))
    throw ConfigError("integrator tolerances must be positive");

  Liouvillian lv(h, scheme);
  IntegrationStats stats;
  Sampler sampler(observables, t0, t1, sample_dt);
  CMatrix y = rho0.data();
  if (sampler.pending() && sampler.next_time() <= t0) sampler.record(rho0.atom_dim(), y);

  if (t1 > t0) {
    std::vector<double> cuts{t0};
    for (double b : h.breakpoints)
      if (b > t0 && b < t1) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(t1);

    Integrator integrator(lv, cfg, rho0.atom_dim(), stats);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) integrator.run(y, cuts[i], cuts[i + 1], sampler);
  }
  while (sampler.pending()) sampler.record(rho0.atom_dim(), y);

  return {DensityMatrix(rho0.atom_dim(), std::move(y)), sampler.take(), stats};
}

}  // namespace rydsim
