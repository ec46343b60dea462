#include "qrc/qcore.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qrc/error.hpp"

namespace qrc {

namespace {

constexpr double kUnitarityTol = 1e-9;

std::size_t qubit_mask(int n_qubits, int qubit) { return std::size_t{1} << (n_qubits - 1 - qubit); }

void check_qubit(int n_qubits, int qubit) {
  if (qubit < 0 || qubit >= n_qubits)
    throw DimensionError("qubit index " + std::to_string(qubit) + " out of range for " +
                         std::to_string(n_qubits) + " qubits");
}

int log2_dim(Eigen::Index dim) {
  if (dim <= 1 || !std::has_single_bit(static_cast<std::size_t>(dim)))
    throw DimensionError("dimension " + std::to_string(dim) + " is not 2^N with N >= 1");
  return std::countr_zero(static_cast<std::size_t>(dim));
}

Eigen::Matrix2cd single_pauli(char c) {
  Eigen::Matrix2cd m;
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw DomainError(std::string("unknown Pauli symbol '") + c + "'");
  }
  return m;
}

}  // namespace

// --- DensityMatrix ----------------------------------------------------------

DensityMatrix::DensityMatrix(int n_qubits, CMatrix data) : n_qubits_(n_qubits), data_(std::move(data)) {
  if (n_qubits < 1) throw DimensionError("density matrix needs at least one qubit");
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n_qubits));
  if (data_.rows() != d || data_.cols() != d)
    throw DimensionError("density matrix for " + std::to_string(n_qubits) + " qubits must be " +
                         std::to_string(d) + "x" + std::to_string(d));
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  if (n_qubits < 1) throw DimensionError("density matrix needs at least one qubit");
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n_qubits));
  return DensityMatrix(n_qubits, CMatrix::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::basis_state(int n_qubits, std::size_t index) {
  if (n_qubits < 1) throw DimensionError("density matrix needs at least one qubit");
  const auto d = hilbert_dim(n_qubits);
  if (index >= d) throw DimensionError("basis index out of range");
  CMatrix m = CMatrix::Zero(d, d);
  m(index, index) = 1.0;
  return DensityMatrix(n_qubits, std::move(m));
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  const int n = log2_dim(psi.size());
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw DomainError("state vector must have unit norm");
  return DensityMatrix(n, psi * psi.adjoint());
}

DensityMatrix DensityMatrix::random(int n_qubits, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n_qubits));
  std::normal_distribution<double> normal;
  CMatrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = Complex(normal(rng), normal(rng));
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  DensityMatrix out(n_qubits, std::move(rho));
  out.hermitize();
  return out;
}

void DensityMatrix::hermitize() {
  CMatrix adj = data_.adjoint();
  data_ = (data_ + adj) * 0.5;
}

// --- enums ------------------------------------------------------------------

std::string_view to_string(Topology t) noexcept {
  return t == Topology::kFullyConnected ? "full" : "1dnn";
}

std::string_view to_string(PauliAxis a) noexcept { return a == PauliAxis::kZ ? "z" : "x"; }

Topology parse_topology(std::string_view s) {
  if (s == "full" || s == "fully_connected" || s == "FullyConnected") return Topology::kFullyConnected;
  if (s == "1dnn" || s == "chain" || s == "OneDNearestNeighbour") return Topology::kOneDNearestNeighbour;
  throw ParameterError("unknown topology '" + std::string(s) + "' (expected full or 1dnn)");
}

PauliAxis parse_axis(std::string_view s) {
  if (s == "z" || s == "Z") return PauliAxis::kZ;
  if (s == "x" || s == "X") return PauliAxis::kX;
  throw ParameterError("unknown dephasing axis '" + std::string(s) + "' (expected z or x)");
}

// --- Hamiltonian ------------------------------------------------------------

namespace {

CMatrix ising_matrix(const Matrix& couplings, double field) {
  const int n = static_cast<int>(couplings.rows());
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n));
  CMatrix h = CMatrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    double diag = 0.0;
    for (int q = 0; q < n; ++q) diag += (static_cast<std::size_t>(b) & qubit_mask(n, q)) ? -field : field;
    h(b, b) = diag;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double jij = couplings(i, j);
      if (jij == 0.0) continue;
      const std::size_t flip = qubit_mask(n, i) | qubit_mask(n, j);
      for (Eigen::Index b = 0; b < d; ++b) h(static_cast<Eigen::Index>(static_cast<std::size_t>(b) ^ flip), b) += jij;
    }
  }
  return h;
}

}  // namespace

CMatrix Hamiltonian::reconstruct() const { return ising_matrix(couplings, field); }

Hamiltonian build_hamiltonian(int n_qubits, double coupling_scale, double field, Topology topology, Rng& rng,
                              int max_qubits) {
  if (n_qubits < 1) throw DimensionError("Hamiltonian needs at least one qubit");
  if (n_qubits > max_qubits)
    throw DimensionError(std::to_string(n_qubits) + " qubits exceeds the configured maximum of " +
                         std::to_string(max_qubits));
  if (!(coupling_scale >= 0.0) || !std::isfinite(coupling_scale))
    throw ParameterError("coupling scale J must be finite and non-negative");
  if (!std::isfinite(field)) throw ParameterError("field h must be finite");

  std::uniform_real_distribution<double> draw(-coupling_scale / 2.0, coupling_scale / 2.0);
  Matrix couplings = Matrix::Zero(n_qubits, n_qubits);
  for (int i = 0; i < n_qubits; ++i) {
    for (int j = i + 1; j < n_qubits; ++j) {
      if (topology == Topology::kOneDNearestNeighbour && j != i + 1) continue;
      couplings(i, j) = couplings(j, i) = draw(rng);
    }
  }
  return hamiltonian_from_couplings(couplings, field, topology);
}

Hamiltonian hamiltonian_from_couplings(const Matrix& couplings, double field, Topology topology) {
  if (couplings.rows() != couplings.cols() || couplings.rows() < 1)
    throw DimensionError("coupling matrix must be square and non-empty");
  if ((couplings - couplings.transpose()).cwiseAbs().maxCoeff() > 0.0)
    throw ValidationError("coupling matrix must be symmetric");
  Hamiltonian h;
  h.n_qubits = static_cast<int>(couplings.rows());
  h.couplings = couplings;
  h.couplings.diagonal().setZero();
  h.field = field;
  h.topology = topology;
  h.matrix = ising_matrix(h.couplings, field);
  return h;
}

// --- Propagator -------------------------------------------------------------

std::shared_ptr<const SpectralDecomposition> decompose(const CMatrix& hermitian) {
  if (hermitian.rows() != hermitian.cols()) throw DimensionError("Hamiltonian must be square");
  auto out = std::make_shared<SpectralDecomposition>();
  Eigen::ComputationInfo info;
  if (hermitian.imag().cwiseAbs().maxCoeff() == 0.0) {
    // Real symmetric: real orthogonal eigenvectors.
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian.real());
    info = solver.info();
    if (info == Eigen::Success) {
      out->eigenvalues = solver.eigenvalues();
      out->eigenvectors = solver.eigenvectors().cast<Complex>();
    }
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
    info = solver.info();
    if (info == Eigen::Success) {
      out->eigenvalues = solver.eigenvalues();
      out->eigenvectors = solver.eigenvectors();
    }
  }
  if (info != Eigen::Success) {
    std::ostringstream msg;
    msg << "Hermitian eigendecomposition failed (dim " << hermitian.rows() << ", Frobenius norm "
        << hermitian.norm() << ", hermiticity error " << max_hermiticity_error(hermitian) << ")";
    throw NumericalError(msg.str());
  }
  return out;
}

Propagator::Propagator(std::shared_ptr<const SpectralDecomposition> spectrum, double dt)
    : spectrum_(std::move(spectrum)), dt_(dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw DomainError("propagator time step must be finite and >= 0");
  const auto& s = *spectrum_;
  CVector phases(s.eigenvalues.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -s.eigenvalues(i) * dt);
  u_ = s.eigenvectors * phases.asDiagonal() * s.eigenvectors.adjoint();
}

Propagator propagator(const Hamiltonian& h, double dt) { return Propagator(decompose(h.matrix), dt); }

void NoiseSpec::validate() const {
  if (!std::isfinite(dephasing_rate) || dephasing_rate < 0.0)
    throw ParameterError("dephasing rate must be finite and non-negative");
  if (!std::isfinite(observation_sigma) || observation_sigma < 0.0)
    throw ParameterError("observation sigma must be finite and non-negative");
  if (dephasing_dt && !(*dephasing_dt > 0.0 && std::isfinite(*dephasing_dt)))
    throw ParameterError("dephasing interval must be positive");
}

// --- state maps -------------------------------------------------------------

DensityMatrix evolve(const DensityMatrix& rho, const Propagator& u) {
  if (u.matrix().rows() != rho.matrix().rows())
    throw DimensionError("propagator and density matrix dimensions differ");
  DensityMatrix out(rho.n_qubits(), u.matrix() * rho.matrix() * u.matrix().adjoint());
  out.hermitize();
  return out;
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const CMatrix& u) {
  if (u.rows() != rho.matrix().rows() || u.cols() != rho.matrix().cols())
    throw DimensionError("unitary and density matrix dimensions differ");
  const double err = max_unitarity_error(u);
  if (err > kUnitarityTol)
    throw ValidationError("matrix is not unitary (max |UU^dagger - I| = " + std::to_string(err) + ")");
  DensityMatrix out(rho.n_qubits(), u * rho.matrix() * u.adjoint());
  out.hermitize();
  return out;
}

Eigen::Vector2d input_amplitudes(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("input value must lie in [0, 1], got " + std::to_string(s));
  return {std::sqrt(1.0 - s), std::sqrt(s)};
}

DensityMatrix inject_input(const DensityMatrix& rho, double s) {
  const Eigen::Vector2d psi = input_amplitudes(s);
  const auto half = static_cast<Eigen::Index>(rho.dim() / 2);
  const auto& m = rho.matrix();
  const CMatrix reduced = m.topLeftCorner(half, half) + m.bottomRightCorner(half, half);
  CMatrix out(2 * half, 2 * half);
  out.topLeftCorner(half, half) = psi(0) * psi(0) * reduced;
  out.topRightCorner(half, half) = psi(0) * psi(1) * reduced;
  out.bottomLeftCorner(half, half) = psi(1) * psi(0) * reduced;
  out.bottomRightCorner(half, half) = psi(1) * psi(1) * reduced;
  DensityMatrix result(rho.n_qubits(), std::move(out));
  result.hermitize();
  return result;
}

DensityMatrix partial_trace_first(const DensityMatrix& rho) {
  if (rho.n_qubits() < 2) throw DimensionError("partial trace over qubit 0 needs at least two qubits");
  const auto half = static_cast<Eigen::Index>(rho.dim() / 2);
  const auto& m = rho.matrix();
  return DensityMatrix(rho.n_qubits() - 1, m.topLeftCorner(half, half) + m.bottomRightCorner(half, half));
}

double expect_z(const DensityMatrix& rho, int qubit) {
  check_qubit(rho.n_qubits(), qubit);
  const std::size_t mask = qubit_mask(rho.n_qubits(), qubit);
  double acc = 0.0;
  const auto& m = rho.matrix();
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    const double p = m(b, b).real();
    acc += (static_cast<std::size_t>(b) & mask) ? -p : p;
  }
  return acc;
}

double signal(const DensityMatrix& rho, int qubit) { return 0.5 * (expect_z(rho, qubit) + 1.0); }

void dephase_in_place(CMatrix& rho, int n_qubits, double gamma, double dt, PauliAxis axis) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("dephasing rate must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dephasing interval must be > 0");
  if (gamma == 0.0) return;
  const double decay = std::exp(-2.0 * gamma * dt);  // p+ - p-
  const auto d = rho.rows();
  if (axis == PauliAxis::kZ) {
    std::vector<double> powers(static_cast<std::size_t>(n_qubits) + 1, 1.0);
    for (std::size_t k = 1; k < powers.size(); ++k) powers[k] = powers[k - 1] * decay;
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index a = 0; a < d; ++a)
        rho(a, b) *= powers[static_cast<std::size_t>(std::popcount(static_cast<std::size_t>(a ^ b)))];
    return;
  }
  const double p_minus = 0.5 * (1.0 - decay);
  const double p_plus = 1.0 - p_minus;
  CMatrix flipped(d, d);
  for (int q = 0; q < n_qubits; ++q) {
    const std::size_t mask = qubit_mask(n_qubits, q);
    for (Eigen::Index b = 0; b < d; ++b)
      for (Eigen::Index a = 0; a < d; ++a)
        flipped(a, b) = rho(static_cast<Eigen::Index>(static_cast<std::size_t>(a) ^ mask),
                            static_cast<Eigen::Index>(static_cast<std::size_t>(b) ^ mask));
    rho = p_plus * rho + p_minus * flipped;
  }
}

DensityMatrix dephase(const DensityMatrix& rho, double gamma, double dt, PauliAxis axis) {
  CMatrix m = rho.matrix();
  dephase_in_place(m, rho.n_qubits(), gamma, dt, axis);
  return DensityMatrix(rho.n_qubits(), std::move(m));
}

double purity(const DensityMatrix& rho) { return (rho.matrix() * rho.matrix()).trace().real(); }

// --- operators --------------------------------------------------------------

CMatrix pauli_string(std::string_view ops) {
  if (ops.empty()) throw DimensionError("empty Pauli string");
  CMatrix out = single_pauli(ops.front());
  for (std::size_t i = 1; i < ops.size(); ++i) {
    CMatrix next = Eigen::kroneckerProduct(out, single_pauli(ops[i])).eval();
    out = std::move(next);
  }
  return out;
}

Vector z_diagonal(int n_qubits, int qubit) {
  check_qubit(n_qubits, qubit);
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n_qubits));
  const std::size_t mask = qubit_mask(n_qubits, qubit);
  Vector z(d);
  for (Eigen::Index b = 0; b < d; ++b) z(b) = (static_cast<std::size_t>(b) & mask) ? -1.0 : 1.0;
  return z;
}

CMatrix cnot(int n_qubits, int control, int target) {
  check_qubit(n_qubits, control);
  check_qubit(n_qubits, target);
  if (control == target) throw DomainError("control and target must differ");
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n_qubits));
  const std::size_t cmask = qubit_mask(n_qubits, control);
  const std::size_t tmask = qubit_mask(n_qubits, target);
  CMatrix u = CMatrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const std::size_t out = (ub & cmask) ? (ub ^ tmask) : ub;
    u(static_cast<Eigen::Index>(out), b) = 1.0;
  }
  return u;
}

double max_unitarity_error(const CMatrix& u) {
  if (u.rows() != u.cols()) throw DimensionError("unitary must be square");
  return (u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

double max_hermiticity_error(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix must be square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return solver.eigenvalues().minCoeff();
}

Matrix operator_space_map(const CMatrix& u, int n_qubits) {
  if (n_qubits < 1 || n_qubits > 4) throw DimensionError("operator-space map supports 1..4 qubits");
  const auto d = static_cast<Eigen::Index>(hilbert_dim(n_qubits));
  if (u.rows() != d || u.cols() != d) throw DimensionError("unitary dimension mismatch");
  const std::size_t count = std::size_t{1} << (2 * n_qubits);
  static constexpr char kSymbols[] = {'I', 'X', 'Y', 'Z'};
  std::vector<CMatrix> basis;
  basis.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::string label(static_cast<std::size_t>(n_qubits), 'I');
    std::size_t rest = idx;
    for (int q = n_qubits - 1; q >= 0; --q) {
      label[static_cast<std::size_t>(q)] = kSymbols[rest & 3U];
      rest >>= 2;
    }
    basis.push_back(pauli_string(label));
  }
  const auto n = static_cast<Eigen::Index>(count);
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const CMatrix evolved = u * basis[static_cast<std::size_t>(i)] * u.adjoint();
    for (Eigen::Index j = 0; j < n; ++j)
      out(j, i) = (basis[static_cast<std::size_t>(j)] * evolved).trace().real() / static_cast<double>(d);
  }
  return out;
}

DensityReport check_density_matrix(const DensityMatrix& rho, bool check_positivity) {
  DensityReport r;
  r.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  r.hermiticity_error = max_hermiticity_error(rho.matrix());
  r.ok = r.trace_error <= 1e-10 && r.hermiticity_error <= 1e-10;
  if (check_positivity) {
    r.min_eigenvalue = min_eigenvalue(rho);
    r.ok = r.ok && *r.min_eigenvalue >= -1e-9;
  }
  return r;
}

}  // namespace qrc
