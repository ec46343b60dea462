#pragma once

// Echo state network baseline: x_k = tanh(W x_{k-1} + w_in s_k), readout as
// for the quantum reservoir.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qrc/qcore.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/tasks.hpp"

namespace qrc {

// kCaseI feeds -1 in place of a 0 input symbol; kCaseII feeds the raw value.
enum class InputCase { kCaseI, kCaseII };

std::string to_string(InputCase c);
InputCase parse_input_case(const std::string& text);

struct EsnSystem {
  int n_nodes = 0;
  Matrix internal_weights;
  Vector input_weights;
  double spectral_radius = 0.0;  // target the internal matrix was rescaled to
  InputCase input_case = InputCase::kCaseII;
};

// Largest |eigenvalue| of a square real matrix.
double spectral_radius(const Matrix& w);

EsnSystem esn_build(int n_nodes, double spectral_radius, InputCase input_case, std::uint64_t seed);

// Mapped input value for one symbol under the system's input case.
double esn_input(double s, InputCase input_case);

Vector esn_step(const Vector& state, double s, const EsnSystem& system);

// Zero initial state; rows are [1, x_1 .. x_N].
SignalMatrix esn_run(const EsnSystem& system, std::span<const double> inputs, const Phases& phases);

// 0.05, 0.15, ..., 1.95
std::vector<double> default_radius_grid();

enum class EsnTask { kCapacity, kNarma };

struct EsnRadiusResult {
  double radius = 0.0;
  CapacityStats stm;
  CapacityStats pc;
  // NARMA: mean/std NMSE per order over samples.
  std::array<double, 5> narma_mean{};
  std::array<double, 5> narma_std{};
  int failures = 0;
};

struct EsnBenchmarkResult {
  std::vector<EsnRadiusResult> per_radius;
  // Index into per_radius: largest mean C_STM + C_PC, or smallest mean
  // NMSE (per order) for NARMA.
  std::size_t best_capacity = 0;
  std::array<std::size_t, 5> best_narma{};
};

struct EsnBenchmarkOptions {
  EsnTask task = EsnTask::kCapacity;
  int n_nodes = 50;
  std::vector<double> radius_grid = default_radius_grid();
  int samples = 100;
  InputCase input_case = InputCase::kCaseII;
  Phases phases{1000, 3000, 1000};
  int max_delay = 500;
  InputKind narma_input = InputKind::kSine;
  std::uint64_t seed = 0;
};

struct EsnSample {
  CapacityResult capacity;  // filled for EsnTask::kCapacity
  NarmaResult narma;        // filled for EsnTask::kNarma
};

// One network and one input draw, both from `seed`.
EsnSample esn_sample(const EsnBenchmarkOptions& options, double radius, std::uint64_t seed);

// Sample i of radius r uses derive_seed(seed, {double_bits(r), i}).
EsnBenchmarkResult esn_benchmark(const EsnBenchmarkOptions& options);

}  // namespace qrc
