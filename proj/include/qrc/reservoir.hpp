#pragma once

// Driving a quantum register with an input sequence and recording
// time-multiplexed single-qubit signals ("virtual nodes").
//
// One input step: inject s_k into qubit 0, then V substeps of length tau/V;
// after substep v (v = 1..V) every qubit's signal (<Z_q> + 1)/2 is sampled.
// A row of the signal matrix is [1, x(q=0,v=1), ..., x(q=N-1,v=1), x(q=0,v=2), ...].

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrc/qcore.hpp"
#include "qrc/rng.hpp"

namespace qrc {

using RowVector = Eigen::RowVectorXd;

struct Phases {
  std::size_t washout = 0;
  std::size_t train = 0;
  std::size_t eval = 0;

  std::size_t total() const noexcept { return washout + train + eval; }
  std::size_t train_begin() const noexcept { return washout; }
  std::size_t eval_begin() const noexcept { return washout + train; }
};

// kAuto uses the eigenbasis engine when there is no dephasing, the dense
// engine otherwise. kDense is the straightforward reference implementation.
enum class Engine { kAuto, kEigenbasis, kDense };

struct ReservoirConfig {
  int n_qubits = 5;
  double tau = 1.0;
  int virtual_nodes = 10;
  double coupling = 1.0;  // J
  double field = 0.5;     // h
  Topology topology = Topology::kFullyConnected;
  NoiseSpec noise;
  Phases phases{1000, 3000, 1000};
  std::uint64_t seed = 0;
  int max_qubits = kDefaultMaxQubits;
  Engine engine = Engine::kAuto;

  void validate() const;
};

// Immutable once built; cheap to copy and safe to share across threads.
class ReservoirSystem {
 public:
  // Draws the Hamiltonian from the kHamiltonian stream of config.seed.
  explicit ReservoirSystem(const ReservoirConfig& config);
  ReservoirSystem(const ReservoirConfig& config, Hamiltonian hamiltonian);

  const ReservoirConfig& config() const noexcept;
  const Hamiltonian& hamiltonian() const noexcept;
  int n_qubits() const noexcept;
  int virtual_nodes() const noexcept;
  double tau() const noexcept;
  double substep_dt() const noexcept;
  const NoiseSpec& noise() const noexcept;
  bool uses_eigenbasis() const noexcept;
  // Width of a signal row including the bias column: N*V + 1.
  Eigen::Index row_width() const noexcept;

  struct Impl;
  const Impl& impl() const noexcept { return *impl_; }
  const std::shared_ptr<const Impl>& shared_impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

class ReservoirState {
 public:
  // The state in the computational basis.
  DensityMatrix density_matrix() const;
  std::size_t step_index() const noexcept { return step_; }

 private:
  friend ReservoirState init_state(const ReservoirSystem&, const DensityMatrix&);
  friend void step_in_place(ReservoirState&, double, const ReservoirSystem&, Eigen::Ref<RowVector>, Rng*);

  std::shared_ptr<const ReservoirSystem::Impl> system_;
  // Eigenbasis engine: rho = re + i im expressed in the Hamiltonian eigenbasis.
  Matrix re_, im_;
  // Dense engine: rho in the computational basis.
  CMatrix rho_;
  std::size_t step_ = 0;
};

// Maximally mixed I / 2^N.
ReservoirState init_state(const ReservoirSystem& system);
ReservoirState init_state(const ReservoirSystem& system, const DensityMatrix& rho0);

// Advances by one input symbol and writes the N*V signals (no bias) into
// `signals`. Observation noise is drawn from `observation_noise` when the
// system has sigma > 0; it never touches the state.
void step_in_place(ReservoirState& state, double s, const ReservoirSystem& system, Eigen::Ref<RowVector> signals,
                   Rng* observation_noise = nullptr);

struct StepResult {
  ReservoirState state;
  Matrix signals;  // V x N, signals(v-1, q)
};

StepResult step(const ReservoirState& state, double s, const ReservoirSystem& system,
                Rng* observation_noise = nullptr);

// L x (N*V + 1) design matrix; column 0 is the constant bias.
struct SignalMatrix {
  Matrix data;
  int n_nodes = 0;
  int virtual_nodes = 1;
  Phases phases;

  Eigen::Index rows() const noexcept { return data.rows(); }
  Eigen::Index cols() const noexcept { return data.cols(); }
  auto train_rows() const {
    return data.middleRows(static_cast<Eigen::Index>(phases.train_begin()), static_cast<Eigen::Index>(phases.train));
  }
  auto eval_rows() const {
    return data.middleRows(static_cast<Eigen::Index>(phases.eval_begin()), static_cast<Eigen::Index>(phases.eval));
  }
  // "bias", "q1v1", "q2v1", ..., "qNvV"
  std::vector<std::string> column_names() const;
  // Keeps the virtual nodes that coincide with a coarser sampling of V' = target
  // (target must divide virtual_nodes).
  SignalMatrix subsample(int target_virtual_nodes) const;
};

// Stateful driver for loops that need to interleave stepping with other work
// (closed-loop generation). Owns its state and observation-noise stream.
class Reservoir {
 public:
  Reservoir(ReservoirSystem system, std::uint64_t noise_seed);
  Reservoir(ReservoirSystem system, const DensityMatrix& rho0, std::uint64_t noise_seed);

  // Full row including the bias entry.
  RowVector step(double s);
  void step_into(double s, Eigen::Ref<RowVector> row_with_bias);

  const ReservoirSystem& system() const noexcept { return system_; }
  const ReservoirState& state() const noexcept { return state_; }

 private:
  ReservoirSystem system_;
  ReservoirState state_;
  Rng noise_;
};

// Builds the system from the config (Hamiltonian from config.seed) and runs
// all inputs from the maximally mixed state. inputs.size() must cover the phases.
SignalMatrix run(const ReservoirConfig& config, std::span<const double> inputs);
SignalMatrix run(const ReservoirSystem& system, std::span<const double> inputs, const Phases& phases,
                 std::uint64_t noise_seed);
SignalMatrix run(const ReservoirSystem& system, std::span<const double> inputs, const Phases& phases,
                 std::uint64_t noise_seed, const DensityMatrix& rho0);

}  // namespace qrc
