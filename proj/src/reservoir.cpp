#include "qrc/reservoir.hpp"

#include <cmath>
#include <string>

#include "qrc/error.hpp"

namespace qrc {

struct ReservoirSystem::Impl {
  ReservoirConfig config;
  Hamiltonian hamiltonian;
  int n = 0;
  Eigen::Index dim = 0;
  int v = 1;
  double substep_dt = 0.0;
  bool eigenbasis = true;

  // Eigenbasis engine.
  Matrix basis;              // real orthogonal eigenvectors, columns
  Matrix basis_top;          // rows with qubit 0 in |0>
  Matrix basis_bottom;       // rows with qubit 0 in |1>
  Matrix cos_step, sin_step; // e^{-i (l_j - l_k) dt} split into cos / sin
  Matrix z_stack;            // N x dim^2, row q = vec(V^T Z_q V)

  // Dense engine.
  CMatrix slice_unitary;
  int slices_per_substep = 1;
  double slice_dt = 0.0;
  Matrix z_diag;  // dim x N
};

void ReservoirConfig::validate() const {
  if (n_qubits < 1) throw ParameterError("n_qubits must be >= 1");
  if (n_qubits > max_qubits)
    throw DimensionError(std::to_string(n_qubits) + " qubits exceeds the configured maximum of " +
                         std::to_string(max_qubits));
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be finite and > 0");
  if (virtual_nodes < 1) throw ParameterError("virtual_nodes must be >= 1");
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw ParameterError("coupling J must be finite and >= 0");
  if (!std::isfinite(field)) throw ParameterError("field h must be finite");
  noise.validate();
  if (engine == Engine::kEigenbasis && noise.dephasing_rate > 0.0)
    throw ParameterError("the eigenbasis engine does not support dephasing; use the dense engine");
}

namespace {

std::shared_ptr<const ReservoirSystem::Impl> build_impl(const ReservoirConfig& config, Hamiltonian h) {
  config.validate();
  if (h.n_qubits != config.n_qubits) throw DimensionError("Hamiltonian qubit count differs from config");
  auto impl = std::make_shared<ReservoirSystem::Impl>();
  impl->config = config;
  impl->n = config.n_qubits;
  impl->dim = static_cast<Eigen::Index>(hilbert_dim(config.n_qubits));
  impl->v = config.virtual_nodes;
  impl->substep_dt = config.tau / config.virtual_nodes;
  impl->eigenbasis = config.engine == Engine::kEigenbasis ||
                     (config.engine == Engine::kAuto && config.noise.dephasing_rate == 0.0);

  if (h.matrix.imag().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("reservoir Hamiltonian must be real");
  const auto spectrum = decompose(h.matrix);
  const Eigen::Index d = impl->dim;
  const Eigen::Index half = d / 2;

  if (impl->eigenbasis) {
    impl->basis = spectrum->eigenvectors.real();
    impl->basis_top = impl->basis.topRows(half);
    impl->basis_bottom = impl->basis.bottomRows(half);
    impl->cos_step.resize(d, d);
    impl->sin_step.resize(d, d);
    const Vector& lambda = spectrum->eigenvalues;
    for (Eigen::Index k = 0; k < d; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double theta = (lambda(j) - lambda(k)) * impl->substep_dt;
        impl->cos_step(j, k) = std::cos(theta);
        impl->sin_step(j, k) = std::sin(theta);
      }
    }
    impl->z_stack.resize(impl->n, d * d);
    for (int q = 0; q < impl->n; ++q) {
      const Vector z = z_diagonal(impl->n, q);
      const Matrix zt = impl->basis.transpose() * z.asDiagonal() * impl->basis;
      impl->z_stack.row(q) = Eigen::Map<const RowVector>(zt.data(), d * d);
    }
  } else {
    const double dt_sub = impl->substep_dt;
    const double dephasing_dt = config.noise.dephasing_dt.value_or(dt_sub);
    const double ratio = dt_sub / dephasing_dt;
    const long slices = std::max(1L, std::lround(ratio));
    if (std::abs(static_cast<double>(slices) - ratio) > 1e-9 * std::max(1.0, ratio))
      throw ParameterError("dephasing interval must divide tau / V");
    impl->slices_per_substep = static_cast<int>(slices);
    impl->slice_dt = dt_sub / static_cast<double>(slices);
    impl->slice_unitary = Propagator(spectrum, impl->slice_dt).matrix();
    impl->z_diag.resize(d, impl->n);
    for (int q = 0; q < impl->n; ++q) impl->z_diag.col(q) = z_diagonal(impl->n, q);
  }
  impl->hamiltonian = std::move(h);
  return impl;
}

Hamiltonian draw_hamiltonian(const ReservoirConfig& config) {
  config.validate();
  Rng rng = make_rng(config.seed, Stream::kHamiltonian);
  return build_hamiltonian(config.n_qubits, config.coupling, config.field, config.topology, rng, config.max_qubits);
}

}  // namespace

ReservoirSystem::ReservoirSystem(const ReservoirConfig& config)
    : impl_(build_impl(config, draw_hamiltonian(config))) {}

ReservoirSystem::ReservoirSystem(const ReservoirConfig& config, Hamiltonian hamiltonian)
    : impl_(build_impl(config, std::move(hamiltonian))) {}

const ReservoirConfig& ReservoirSystem::config() const noexcept { return impl_->config; }
const Hamiltonian& ReservoirSystem::hamiltonian() const noexcept { return impl_->hamiltonian; }
int ReservoirSystem::n_qubits() const noexcept { return impl_->n; }
int ReservoirSystem::virtual_nodes() const noexcept { return impl_->v; }
double ReservoirSystem::tau() const noexcept { return impl_->config.tau; }
double ReservoirSystem::substep_dt() const noexcept { return impl_->substep_dt; }
const NoiseSpec& ReservoirSystem::noise() const noexcept { return impl_->config.noise; }
bool ReservoirSystem::uses_eigenbasis() const noexcept { return impl_->eigenbasis; }
Eigen::Index ReservoirSystem::row_width() const noexcept {
  return static_cast<Eigen::Index>(impl_->n) * impl_->v + 1;
}

// --- state ------------------------------------------------------------------

DensityMatrix ReservoirState::density_matrix() const {
  const auto& sys = *system_;
  if (!sys.eigenbasis) return DensityMatrix(sys.n, rho_);
  CMatrix rho(sys.dim, sys.dim);
  rho.real() = sys.basis * re_ * sys.basis.transpose();
  rho.imag() = sys.basis * im_ * sys.basis.transpose();
  return DensityMatrix(sys.n, std::move(rho));
}

ReservoirState init_state(const ReservoirSystem& system) {
  return init_state(system, DensityMatrix::maximally_mixed(system.n_qubits()));
}

ReservoirState init_state(const ReservoirSystem& system, const DensityMatrix& rho0) {
  if (rho0.n_qubits() != system.n_qubits()) throw DimensionError("initial state has the wrong number of qubits");
  ReservoirState state;
  const auto& impl = system.impl();
  state.system_ = system.shared_impl();
  if (impl.eigenbasis) {
    state.re_ = impl.basis.transpose() * rho0.matrix().real() * impl.basis;
    state.im_ = impl.basis.transpose() * rho0.matrix().imag() * impl.basis;
  } else {
    state.rho_ = rho0.matrix();
  }
  state.step_ = 0;
  return state;
}

namespace {

void add_observation_noise(Eigen::Ref<RowVector> signals, double sigma, Rng* rng) {
  if (sigma == 0.0) return;
  if (rng == nullptr) throw ParameterError("observation noise requested but no noise stream supplied");
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < signals.size(); ++i) signals(i) += normal(*rng);
}

}  // namespace

void step_in_place(ReservoirState& state, double s, const ReservoirSystem& system, Eigen::Ref<RowVector> signals,
                   Rng* observation_noise) {
  const auto& sys = system.impl();
  if (state.system_.get() != &sys) throw DimensionError("state was initialised for a different reservoir system");
  if (signals.size() != static_cast<Eigen::Index>(sys.n) * sys.v)
    throw DimensionError("signal buffer must hold N*V values");
  const Eigen::Vector2d psi = input_amplitudes(s);
  const Eigen::Index d = sys.dim;
  const Eigen::Index half = d / 2;

  if (sys.eigenbasis) {
    // Reduced state of qubits 1..N-1 in the computational basis:
    // R = V0 rho V0^T + V1 rho V1^T, then rho' = K^T R K with K = psi0 V0 + psi1 V1.
    Matrix r_re = sys.basis_top * state.re_ * sys.basis_top.transpose();
    r_re.noalias() += sys.basis_bottom * state.re_ * sys.basis_bottom.transpose();
    Matrix r_im = sys.basis_top * state.im_ * sys.basis_top.transpose();
    r_im.noalias() += sys.basis_bottom * state.im_ * sys.basis_bottom.transpose();
    // Hermitian part only.
    Matrix tmp = r_re.transpose();
    r_re = 0.5 * (r_re + tmp);
    tmp = r_im.transpose();
    r_im = 0.5 * (r_im - tmp);

    const Matrix k = psi(0) * sys.basis_top + psi(1) * sys.basis_bottom;
    state.re_.noalias() = k.transpose() * (r_re * k);
    state.im_.noalias() = k.transpose() * (r_im * k);

    Matrix next_re(d, d);
    for (int v = 0; v < sys.v; ++v) {
      // rho_jk <- rho_jk e^{-i theta_jk}
      next_re = state.re_.cwiseProduct(sys.cos_step) + state.im_.cwiseProduct(sys.sin_step);
      state.im_ = state.im_.cwiseProduct(sys.cos_step) - state.re_.cwiseProduct(sys.sin_step);
      state.re_.swap(next_re);
      // <Z_q> = sum_jk Zt_q(j,k) Re rho_jk  (Zt symmetric, Im rho antisymmetric)
      const Eigen::Map<const Vector> flat(state.re_.data(), d * d);
      const Vector z = sys.z_stack * flat;
      signals.segment(static_cast<Eigen::Index>(v) * sys.n, sys.n) = (0.5 * (z.array() + 1.0)).transpose();
    }
  } else {
    const CMatrix reduced = state.rho_.topLeftCorner(half, half) + state.rho_.bottomRightCorner(half, half);
    state.rho_.topLeftCorner(half, half) = psi(0) * psi(0) * reduced;
    state.rho_.topRightCorner(half, half) = psi(0) * psi(1) * reduced;
    state.rho_.bottomLeftCorner(half, half) = psi(1) * psi(0) * reduced;
    state.rho_.bottomRightCorner(half, half) = psi(1) * psi(1) * reduced;

    const auto& noise = sys.config.noise;
    CMatrix tmp(d, d);
    for (int v = 0; v < sys.v; ++v) {
      for (int sl = 0; sl < sys.slices_per_substep; ++sl) {
        tmp.noalias() = sys.slice_unitary * state.rho_;
        state.rho_.noalias() = tmp * sys.slice_unitary.adjoint();
        if (noise.dephasing_rate > 0.0)
          dephase_in_place(state.rho_, sys.n, noise.dephasing_rate, sys.slice_dt, noise.dephasing_axis);
        tmp = state.rho_.adjoint();
        state.rho_ = 0.5 * (state.rho_ + tmp);
      }
      const Vector populations = state.rho_.diagonal().real();
      const Vector z = sys.z_diag.transpose() * populations;
      signals.segment(static_cast<Eigen::Index>(v) * sys.n, sys.n) = (0.5 * (z.array() + 1.0)).transpose();
    }
  }
  add_observation_noise(signals, sys.config.noise.observation_sigma, observation_noise);
  ++state.step_;
}

StepResult step(const ReservoirState& state, double s, const ReservoirSystem& system, Rng* observation_noise) {
  StepResult out{state, Matrix()};
  RowVector flat(static_cast<Eigen::Index>(system.n_qubits()) * system.virtual_nodes());
  step_in_place(out.state, s, system, flat, observation_noise);
  out.signals = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), system.virtual_nodes(), system.n_qubits());
  return out;
}

// --- signal matrix ----------------------------------------------------------

std::vector<std::string> SignalMatrix::column_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(virtual_nodes) + 1);
  names.emplace_back("bias");
  for (int v = 1; v <= virtual_nodes; ++v)
    for (int q = 1; q <= n_nodes; ++q) names.push_back("q" + std::to_string(q) + "v" + std::to_string(v));
  return names;
}

SignalMatrix SignalMatrix::subsample(int target) const {
  if (target < 1 || virtual_nodes % target != 0)
    throw ParameterError("target virtual-node count must divide " + std::to_string(virtual_nodes));
  const int stride = virtual_nodes / target;
  SignalMatrix out;
  out.n_nodes = n_nodes;
  out.virtual_nodes = target;
  out.phases = phases;
  out.data.resize(data.rows(), static_cast<Eigen::Index>(n_nodes) * target + 1);
  out.data.col(0) = data.col(0);
  for (int v = 1; v <= target; ++v) {
    const int src_v = v * stride;
    out.data.middleCols(1 + static_cast<Eigen::Index>(v - 1) * n_nodes, n_nodes) =
        data.middleCols(1 + static_cast<Eigen::Index>(src_v - 1) * n_nodes, n_nodes);
  }
  return out;
}

// --- driver & run -----------------------------------------------------------

Reservoir::Reservoir(ReservoirSystem system, std::uint64_t noise_seed)
    : system_(std::move(system)), state_(init_state(system_)), noise_(noise_seed) {}

Reservoir::Reservoir(ReservoirSystem system, const DensityMatrix& rho0, std::uint64_t noise_seed)
    : system_(std::move(system)), state_(init_state(system_, rho0)), noise_(noise_seed) {}

void Reservoir::step_into(double s, Eigen::Ref<RowVector> row) {
  if (row.size() != system_.row_width()) throw DimensionError("row buffer must hold N*V + 1 values");
  row(0) = 1.0;
  step_in_place(state_, s, system_, row.tail(row.size() - 1), &noise_);
}

RowVector Reservoir::step(double s) {
  RowVector row(system_.row_width());
  step_into(s, row);
  return row;
}

namespace {

SignalMatrix run_driver(Reservoir& driver, std::span<const double> inputs, const Phases& phases) {
  if (inputs.size() < phases.total())
    throw DimensionError("input sequence has " + std::to_string(inputs.size()) + " steps but phases need " +
                         std::to_string(phases.total()));
  const auto& sys = driver.system();
  SignalMatrix out;
  out.n_nodes = sys.n_qubits();
  out.virtual_nodes = sys.virtual_nodes();
  out.phases = phases;
  // Row-major scratch so each step writes a contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
      static_cast<Eigen::Index>(inputs.size()), sys.row_width());
  for (std::size_t k = 0; k < inputs.size(); ++k) driver.step_into(inputs[k], rows.row(static_cast<Eigen::Index>(k)));
  out.data = rows;
  return out;
}

}  // namespace

SignalMatrix run(const ReservoirSystem& system, std::span<const double> inputs, const Phases& phases,
                 std::uint64_t noise_seed) {
  Reservoir driver(system, noise_seed);
  return run_driver(driver, inputs, phases);
}

SignalMatrix run(const ReservoirSystem& system, std::span<const double> inputs, const Phases& phases,
                 std::uint64_t noise_seed, const DensityMatrix& rho0) {
  Reservoir driver(system, rho0, noise_seed);
  return run_driver(driver, inputs, phases);
}

SignalMatrix run(const ReservoirConfig& config, std::span<const double> inputs) {
  const ReservoirSystem system(config);
  return run(system, inputs, config.phases, stream_seed(config.seed, Stream::kObservationNoise));
}

}  // namespace qrc
