#pragma once

// Exact dense simulation of small qubit registers: density matrices, the
// disordered transverse-field Ising Hamiltonian, propagators, the input
// injection map, dephasing channels and local observables.
//
// Conventions:
//  * Qubits are indexed 0..N-1. Qubit 0 is the input qubit and is the most
//    significant bit of a computational-basis index, so a basis index b has
//    qubit q in state (b >> (N-1-q)) & 1.
//  * Energies and times are dimensionless (the energy scale is fixed to 1).

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "qrc/rng.hpp"

namespace qrc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kDefaultMaxQubits = 12;

constexpr std::size_t hilbert_dim(int n_qubits) noexcept { return std::size_t{1} << n_qubits; }

class DensityMatrix {
 public:
  // Takes ownership of `data`; checks shape only. Use check_density_matrix()
  // for the full invariant set.
  DensityMatrix(int n_qubits, CMatrix data);

  static DensityMatrix maximally_mixed(int n_qubits);
  static DensityMatrix basis_state(int n_qubits, std::size_t index);
  // |psi><psi|; psi must have unit norm.
  static DensityMatrix pure(const CVector& psi);
  // Normalised G G^dagger for a complex Gaussian G (full-rank mixed state).
  static DensityMatrix random(int n_qubits, Rng& rng);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return hilbert_dim(n_qubits_); }
  const CMatrix& matrix() const noexcept { return data_; }
  Complex trace() const { return data_.trace(); }

  // rho <- (rho + rho^dagger) / 2
  void hermitize();

 private:
  int n_qubits_;
  CMatrix data_;
};

enum class Topology { kFullyConnected, kOneDNearestNeighbour };
enum class PauliAxis { kX, kZ };

std::string_view to_string(Topology t) noexcept;
std::string_view to_string(PauliAxis a) noexcept;
Topology parse_topology(std::string_view s);
PauliAxis parse_axis(std::string_view s);

struct Hamiltonian {
  int n_qubits = 0;
  Matrix couplings;  // symmetric N x N, zero diagonal
  double field = 0.0;
  Topology topology = Topology::kFullyConnected;
  CMatrix matrix;  // sum_{i<j} J_ij X_i X_j + h sum_i Z_i

  // Rebuild the matrix from the stored couplings and field.
  CMatrix reconstruct() const;
};

// Draws J_ij uniformly from [-J/2, J/2] (i<j, row-major order of pairs; only
// j = i+1 for the nearest-neighbour chain, open boundary).
Hamiltonian build_hamiltonian(int n_qubits, double coupling_scale, double field, Topology topology,
                              Rng& rng, int max_qubits = kDefaultMaxQubits);

Hamiltonian hamiltonian_from_couplings(const Matrix& couplings, double field, Topology topology);

// Eigendecomposition of a Hermitian H = V diag(lambda) V^dagger, shared between
// propagators built from the same Hamiltonian.
struct SpectralDecomposition {
  Vector eigenvalues;
  CMatrix eigenvectors;
};

std::shared_ptr<const SpectralDecomposition> decompose(const CMatrix& hermitian);

class Propagator {
 public:
  Propagator(std::shared_ptr<const SpectralDecomposition> spectrum, double dt);

  // Same Hamiltonian, different time step; reuses the cached decomposition.
  Propagator at(double dt) const { return Propagator(spectrum_, dt); }

  double dt() const noexcept { return dt_; }
  const CMatrix& matrix() const noexcept { return u_; }
  const SpectralDecomposition& spectrum() const noexcept { return *spectrum_; }

 private:
  std::shared_ptr<const SpectralDecomposition> spectrum_;
  double dt_;
  CMatrix u_;
};

// exp(-i H dt)
Propagator propagator(const Hamiltonian& h, double dt);

struct NoiseSpec {
  double dephasing_rate = 0.0;  // gamma
  PauliAxis dephasing_axis = PauliAxis::kZ;
  // Discretisation interval of the dephasing channel; unset means tau / V.
  std::optional<double> dephasing_dt;
  double observation_sigma = 0.0;  // standard deviation of additive signal noise

  void validate() const;
};

DensityMatrix evolve(const DensityMatrix& rho, const Propagator& u);

// Conjugation by an arbitrary unitary; throws ValidationError if
// max|U U^dagger - I| > 1e-9.
DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u);

// Amplitudes (sqrt(1-s), sqrt(s)) of the injected single-qubit state.
Eigen::Vector2d input_amplitudes(double s);

// rho -> |psi_s><psi_s| (x) Tr_0[rho]. Works for N = 1 as well.
DensityMatrix inject_input(const DensityMatrix& rho, double s);

// Trace over qubit 0. Requires N >= 2.
DensityMatrix partial_trace_first(const DensityMatrix& rho);

double expect_z(const DensityMatrix& rho, int qubit);
// (<Z_q> + 1) / 2, the probability of finding qubit q in |0>.
double signal(const DensityMatrix& rho, int qubit);

// Independent single-qubit flip channel on every qubit:
// E(rho) = p+ rho + p- P rho P with p- = (1 - exp(-2 gamma dt)) / 2.
DensityMatrix dephase(const DensityMatrix& rho, double gamma, double dt, PauliAxis axis);
// In-place variant on a raw 2^N x 2^N matrix.
void dephase_in_place(CMatrix& rho, int n_qubits, double gamma, double dt, PauliAxis axis);

double purity(const DensityMatrix& rho);

// --- operator helpers -------------------------------------------------------

// Tensor product of single-qubit Paulis, e.g. "XIZ" (leftmost = qubit 0).
CMatrix pauli_string(std::string_view ops);
// Diagonal of Z_q in the computational basis (entries +-1).
Vector z_diagonal(int n_qubits, int qubit);
CMatrix cnot(int n_qubits, int control, int target);

double max_unitarity_error(const CMatrix& u);
double max_hermiticity_error(const CMatrix& m);
double min_eigenvalue(const DensityMatrix& rho);

// Real 4^N x 4^N matrix (U)_{ji} = Tr[B_j U B_i U^dagger] / 2^N over the
// Pauli-string basis. Orthogonal when U is unitary. Small N only.
Matrix operator_space_map(const CMatrix& u, int n_qubits);

struct DensityReport {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  std::optional<double> min_eigenvalue;
  bool ok = true;
};

// Trace and Hermiticity within 1e-10; smallest eigenvalue >= -1e-9 when
// check_positivity is set (O(d^3)).
DensityReport check_density_matrix(const DensityMatrix& rho, bool check_positivity);

}  // namespace qrc
