#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rydsim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised for invalid level schemes, drive parameters and run configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-atom level structure with spontaneous decay data.
///
/// Levels are identified by short labels ("0", "1", "p", "r", "d"); their
/// order in `levels` fixes the basis ordering. `branching[{j, k}]` is the
/// probability that a decay out of `k` lands in `j`, and `gamma[k]` is the
/// population decay rate of `k` in 1/us.
struct LevelScheme {
  std::vector<std::string> levels;
  std::map<std::string, double> gamma;
  std::map<std::pair<std::string, std::string>, double> branching;

  /// Cs 107p3/2 one-photon scheme (0, 1, r, d), tau_r = 540 us.
  static LevelScheme arp_default();
  /// Two-photon scheme (0, 1, p, r, d), tau_p = 0.155 us, tau_r = 540 us.
  static LevelScheme stirap_default();

  std::size_t dim() const { return levels.size(); }
  std::size_t index(const std::string& label) const;
  bool has_level(const std::string& label) const;
  double decay_rate(const std::string& label) const;

  /// Copy with every decay rate multiplied by `factor` (0 switches decay off).
  LevelScheme with_gamma_scaled(double factor) const;

  /// Throws ConfigError when a branching row does not sum to one, a ratio is
  /// outside [0, 1], a decay points upward, or a stable level decays.
  void validate() const;
};

enum class Atom { kControl, kTarget };

/// Basis bookkeeping for the two-atom tensor-product space.
///
/// Two-atom state |a1 a2> sits at index a1 * d + a2 (row-major, control first).
class StateSpace {
 public:
  explicit StateSpace(LevelScheme scheme);

  const LevelScheme& scheme() const { return scheme_; }
  std::size_t atom_dim() const { return d_; }
  std::size_t dim() const { return d_ * d_; }

  std::size_t index(std::size_t a1, std::size_t a2) const { return a1 * d_ + a2; }
  std::size_t index(const std::string& l1, const std::string& l2) const;
  std::size_t level(const std::string& label) const { return scheme_.index(label); }

  CVector ket(const std::string& l1, const std::string& l2) const;
  /// |l><l| acting on one atom, embedded in the two-atom space.
  CMatrix projector(const std::string& label, Atom atom) const;
  /// A (x) I or I (x) A for a single-atom operator A.
  CMatrix embed(const CMatrix& single, Atom atom) const;

 private:
  LevelScheme scheme_;
  std::size_t d_;
};

/// Validates the scheme and returns its two-atom state space.
StateSpace build_space(const LevelScheme& scheme);

/// Two-atom density matrix; entry <a1 a2|rho|b1 b2> at (a1*d+a2, b1*d+b2).
class DensityMatrix {
 public:
  DensityMatrix(std::size_t atom_dim, CMatrix data);

  static DensityMatrix from_pure(std::size_t atom_dim, const CVector& psi);
  static DensityMatrix basis(const StateSpace& space, const std::string& l1,
                             const std::string& l2);

  std::size_t atom_dim() const { return d_; }
  std::size_t dim() const { return d_ * d_; }
  const CMatrix& data() const { return data_; }
  CMatrix& data() { return data_; }

  Complex operator()(std::size_t row, std::size_t col) const { return data_(row, col); }

  Complex trace() const { return data_.trace(); }
  double purity() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

 private:
  std::size_t d_;
  CMatrix data_;
};

struct Observable {
  std::string label;
  CMatrix matrix;
};

/// Population of the two-atom basis state |l1 l2>.
Observable population(const StateSpace& space, const std::string& l1, const std::string& l2);
/// Projector onto (|1r> + |r1>)/sqrt2.
Observable symmetric_single_excitation(const StateSpace& space);
/// n_p (x) I + I (x) n_p, i.e. 2 rho_pppp + sum_j (rho_jjpp + rho_ppjj).
Observable level_number(const StateSpace& space, const std::string& label);
/// Population with at least one atom in |d>, equal to 1 - Tr over non-d levels.
Observable leak_d(const StateSpace& space);
/// Total population of `label` on one atom.
Observable atom_population(const StateSpace& space, const std::string& label, Atom atom);

double expectation(const DensityMatrix& rho, const Observable& obs);

/// Single-atom Hadamard on {|0>, |1>}, identity on the remaining levels.
CMatrix hadamard_matrix(const LevelScheme& scheme);
DensityMatrix apply_hadamard(const DensityMatrix& rho, const LevelScheme& scheme, Atom atom);
DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u);

/// Computational basis state |u v> of the qubit pair, u, v in {0, 1}.
struct QubitState {
  int control = 0;
  int target = 0;
  friend bool operator==(const QubitState&, const QubitState&) = default;
};

struct BellPair {
  QubitState first;
  QubitState second;
};

/// (<uv|rho|uv> + <xy|rho|xy>)/2 + |<uv|rho|xy>|.
///
/// With pair (|00>, |11>) the coherence term is the element often written
/// rho_1010, read here as <00|rho|11>; this is the only place that mapping lives.
double bell_fidelity(const DensityMatrix& rho, const StateSpace& space, const BellPair& pair);

}  // namespace rydsim
