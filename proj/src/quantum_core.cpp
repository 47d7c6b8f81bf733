#include "rydsim/quantum_core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace rydsim {

namespace {

// Energy rank used to decide which decays point "downward". Ground-manifold
// levels share rank 0.
int energy_rank(const std::string& label) {
  if (label == "0" || label == "1" || label == "d") return 0;
  if (label == "p") return 1;
  if (label == "r") return 2;
  return -1;
}

}  // namespace

LevelScheme LevelScheme::arp_default() {
  LevelScheme s;
  s.levels = {"0", "1", "r", "d"};
  s.gamma = {{"r", 1.0 / 540.0}};
  s.branching = {{{"0", "r"}, 1.0 / 16.0}, {{"1", "r"}, 1.0 / 16.0}, {{"d", "r"}, 7.0 / 8.0}};
  return s;
}

LevelScheme LevelScheme::stirap_default() {
  LevelScheme s;
  s.levels = {"0", "1", "p", "r", "d"};
  s.gamma = {{"p", 1.0 / 0.155}, {"r", 1.0 / 540.0}};
  s.branching = {
      {{"0", "p"}, 1.0 / 16.0}, {{"1", "p"}, 1.0 / 16.0}, {{"d", "p"}, 7.0 / 8.0},
      {{"0", "r"}, 1.0 / 32.0}, {{"1", "r"}, 1.0 / 32.0}, {{"d", "r"}, 7.0 / 16.0},
      {{"p", "r"}, 1.0 / 2.0},
  };
  return s;
}

std::size_t LevelScheme::index(const std::string& label) const {
  auto it = std::find(levels.begin(), levels.end(), label);
  if (it == levels.end()) throw ConfigError("unknown level '" + label + "'");
  return static_cast<std::size_t>(it - levels.begin());
}

bool LevelScheme::has_level(const std::string& label) const {
  return std::find(levels.begin(), levels.end(), label) != levels.end();
}

double LevelScheme::decay_rate(const std::string& label) const {
  auto it = gamma.find(label);
  return it == gamma.end() ? 0.0 : it->second;
}

LevelScheme LevelScheme::with_gamma_scaled(double factor) const {
  LevelScheme s = *this;
  for (auto& [level, rate] : s.gamma) rate *= factor;
  return s;
}

void LevelScheme::validate() const {
  for (const auto& l : levels) {
    if (energy_rank(l) < 0) throw ConfigError("unsupported level label '" + l + "'");
    if (std::count(levels.begin(), levels.end(), l) != 1)
      throw ConfigError("duplicate level '" + l + "'");
  }
  for (const char* required : {"0", "1", "r", "d"}) {
    if (!has_level(required))
      throw ConfigError(std::string("level scheme is missing level '") + required + "'");
  }
  for (const auto& [level, rate] : gamma) {
    if (!has_level(level)) throw ConfigError("decay rate given for unknown level '" + level + "'");
    if (!(rate >= 0.0) || !std::isfinite(rate))
      throw ConfigError("decay rate of '" + level + "' must be finite and >= 0");
    if (energy_rank(level) == 0 && rate != 0.0)
      throw ConfigError("level '" + level + "' is stable and cannot decay");
  }
  std::map<std::string, double> row_sum;
  for (const auto& [key, b] : branching) {
    const auto& [lower, upper] = key;
    if (!has_level(lower) || !has_level(upper))
      throw ConfigError("branching ratio b_" + lower + upper + " refers to an unknown level");
    if (energy_rank(lower) >= energy_rank(upper))
      throw ConfigError("branching ratio b_" + lower + upper + " must point to a lower level");
    if (!(b >= 0.0 && b <= 1.0))
      throw ConfigError("branching ratio b_" + lower + upper + " must lie in [0, 1]");
    row_sum[upper] += b;
  }
  for (const auto& level : levels) {
    if (energy_rank(level) == 0) continue;
    double sum = row_sum.count(level) ? row_sum[level] : 0.0;
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("branching ratios out of level '" + level + "' sum to " +
                        std::to_string(sum) + ", expected 1");
  }
}

StateSpace::StateSpace(LevelScheme scheme) : scheme_(std::move(scheme)), d_(scheme_.dim()) {}

std::size_t StateSpace::index(const std::string& l1, const std::string& l2) const {
  return index(level(l1), level(l2));
}

CVector StateSpace::ket(const std::string& l1, const std::string& l2) const {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim()));
  v(static_cast<Eigen::Index>(index(l1, l2))) = 1.0;
  return v;
}

CMatrix StateSpace::embed(const CMatrix& single, Atom atom) const {
  const auto d = static_cast<Eigen::Index>(d_);
  CMatrix out = CMatrix::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index s = 0; s < d; ++s) {
        if (atom == Atom::kControl)
          out(a * d + s, b * d + s) = single(a, b);
        else
          out(s * d + a, s * d + b) = single(a, b);
      }
  return out;
}

CMatrix StateSpace::projector(const std::string& label, Atom atom) const {
  const auto d = static_cast<Eigen::Index>(d_);
  CMatrix p = CMatrix::Zero(d, d);
  const auto l = static_cast<Eigen::Index>(level(label));
  p(l, l) = 1.0;
  return embed(p, atom);
}

StateSpace build_space(const LevelScheme& scheme) {
  scheme.validate();
  return StateSpace(scheme);
}

DensityMatrix::DensityMatrix(std::size_t atom_dim, CMatrix data)
    : d_(atom_dim), data_(std::move(data)) {
  const auto n = static_cast<Eigen::Index>(d_ * d_);
  if (data_.rows() != n || data_.cols() != n)
    throw std::invalid_argument("density matrix has wrong dimension");
}

DensityMatrix DensityMatrix::from_pure(std::size_t atom_dim, const CVector& psi) {
  return DensityMatrix(atom_dim, psi * psi.adjoint());
}

DensityMatrix DensityMatrix::basis(const StateSpace& space, const std::string& l1,
                                   const std::string& l2) {
  return from_pure(space.atom_dim(), space.ket(l1, l2));
}

double DensityMatrix::purity() const { return (data_ * data_).trace().real(); }

double DensityMatrix::hermiticity_error() const {
  return (data_ - data_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  CMatrix h = 0.5 * (data_ + data_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Observable population(const StateSpace& space, const std::string& l1, const std::string& l2) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  CMatrix m = CMatrix::Zero(n, n);
  const auto i = static_cast<Eigen::Index>(space.index(l1, l2));
  m(i, i) = 1.0;
  return {"P_" + l1 + l2, m};
}

Observable symmetric_single_excitation(const StateSpace& space) {
  CVector v = (space.ket("1", "r") + space.ket("r", "1")) / std::sqrt(2.0);
  return {"P_1r+r1", v * v.adjoint()};
}

Observable level_number(const StateSpace& space, const std::string& label) {
  return {"N_" + label, space.projector(label, Atom::kControl) +
                            space.projector(label, Atom::kTarget)};
}

Observable leak_d(const StateSpace& space) {
  const auto d = space.atom_dim();
  const auto n = static_cast<Eigen::Index>(space.dim());
  const std::size_t ld = space.level("d");
  CMatrix m = CMatrix::Zero(n, n);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      if (a == ld || b == ld) {
        const auto i = static_cast<Eigen::Index>(space.index(a, b));
        m(i, i) = 1.0;
      }
  return {"leak_d", m};
}

Observable atom_population(const StateSpace& space, const std::string& label, Atom atom) {
  return {std::string(atom == Atom::kControl ? "Pc_" : "Pt_") + label,
          space.projector(label, atom)};
}

double expectation(const DensityMatrix& rho, const Observable& obs) {
  if (obs.matrix.rows() != rho.data().rows() || obs.matrix.cols() != rho.data().cols())
    throw std::invalid_argument("observable '" + obs.label + "' does not match the state dimension");
  // Tr[A rho] without forming the product.
  return (obs.matrix.transpose().cwiseProduct(rho.data())).sum().real();
}

CMatrix hadamard_matrix(const LevelScheme& scheme) {
  const auto d = static_cast<Eigen::Index>(scheme.dim());
  const auto i0 = static_cast<Eigen::Index>(scheme.index("0"));
  const auto i1 = static_cast<Eigen::Index>(scheme.index("1"));
  CMatrix h = CMatrix::Identity(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  h(i0, i0) = s;
  h(i0, i1) = s;
  h(i1, i0) = s;
  h(i1, i1) = -s;
  return h;
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u) {
  return DensityMatrix(rho.atom_dim(), u * rho.data() * u.adjoint());
}

DensityMatrix apply_hadamard(const DensityMatrix& rho, const LevelScheme& scheme, Atom atom) {
  if (scheme.dim() != rho.atom_dim())
    throw std::invalid_argument("level scheme does not match the density matrix");
  StateSpace space(scheme);
  return apply_unitary(rho, space.embed(hadamard_matrix(scheme), atom));
}

double bell_fidelity(const DensityMatrix& rho, const StateSpace& space, const BellPair& pair) {
  if (pair.first == pair.second)
    throw std::invalid_argument("Bell fidelity needs two distinct basis states");
  auto label = [](int bit) -> std::string {
    if (bit != 0 && bit != 1) throw std::invalid_argument("qubit value must be 0 or 1");
    return bit == 0 ? "0" : "1";
  };
  const auto u = space.index(label(pair.first.control), label(pair.first.target));
  const auto x = space.index(label(pair.second.control), label(pair.second.target));
  return 0.5 * (rho(u, u).real() + rho(x, x).real()) + std::abs(rho(u, x));
}

}  // namespace rydsim
