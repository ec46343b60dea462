#pragma once

// Benchmark input streams, target functions and the experiment protocols
// built on them (memory/parity capacity, timer, NARMA multitask, Mackey-Glass
// closed-loop prediction), plus the divergence-rate estimator.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"

namespace qrc {

struct TaskStream {
  std::string name;
  std::vector<double> inputs;      // injected values, within [0, 1]
  std::vector<double> raw_inputs;  // before any rescaling
  std::vector<std::vector<double>> targets;
  std::vector<std::string> target_names;
  Phases phases;
  std::map<std::string, double> metadata;
};

// --- timer ------------------------------------------------------------------

// s_k = [k >= cue], target_k = [k == cue + delay]. Phases: washout = discard,
// the rest split evenly is not meaningful here, so train = total - discard.
TaskStream timer_stream(std::size_t cue, std::size_t delay, std::size_t total, std::size_t discard = 400);

// --- NARMA ------------------------------------------------------------------

inline constexpr std::array<int, 5> kNarmaOrders{2, 5, 10, 15, 20};

// y_{k+1} = 0.4 y_k + 0.4 y_k y_{k-1} + 0.6 s_k^3 + 0.1
double narma2_step(double y_k, double y_km1, double s_k);

// y_{k+1} = 0.3 y_k + 0.05 y_k sum_{j<n} y_{k-j} + 1.5 s_{k-n+1} s_k + 0.1.
// Both spans are chronological (last element = time k) and hold >= n values.
double narma_n_step(std::span<const double> y_history, std::span<const double> s_window, int order);

// Drives the order-n system with `inputs` from zero history (zero-padded
// before k = 0). Element k is y_{k+1}, the value produced from s_k.
std::vector<double> narma_series(int order, std::span<const double> inputs);

// 0.1 (sin(2 pi 2.11 k/100) sin(2 pi 3.73 k/100) sin(2 pi 4.11 k/100) + 1)
double sine_input(std::size_t k);

enum class InputKind { kSine, kUniformRandom };

// Raw inputs in [0, 0.2] drive the five NARMA systems; injected inputs are
// raw * 5. The rng is only used for kUniformRandom.
TaskStream narma_suite_stream(InputKind kind, Rng& rng, Phases phases = {1000, 3000, 1000});

// --- Mackey-Glass -----------------------------------------------------------

struct MackeyGlassOptions {
  double step = 0.1;
  int subsample = 10;
  double initial_value = 1.2;
  // Discarded subsampled steps before collection.
  std::size_t washout = 1000;
};

// One Euler-type step of the discretised delay equation.
double mackey_glass_step(double y, double y_delayed, double step);

// Subsampled series (unscaled). `history_offset` is added to the initial
// history, which is how perturbed twins are produced.
std::vector<double> mackey_glass_series(double tau_mg, std::size_t count, const MackeyGlassOptions& options = {},
                                        double history_offset = 0.0);

// Linearly rescaled to [0, 1]; metadata records mg_min / mg_max. Phases
// default to 10000 teacher-forced + 2000 autonomous.
TaskStream mackey_glass_stream(double tau_mg, std::size_t total = 12000, const MackeyGlassOptions& options = {},
                               Phases phases = {0, 10000, 2000});

// --- memory / parity --------------------------------------------------------

std::vector<double> random_binary_inputs(std::size_t count, Rng& rng);
// y_k = s_{k-delay}; s_k = 0 for k < 0.
std::vector<double> stm_target(std::span<const double> s, int delay);
// y_k = (s_k + ... + s_{k-delay}) mod 2.
std::vector<double> pc_target(std::span<const double> s, int delay);

enum class CapacityTask { kStm, kPc };

struct CapacityCurve {
  std::vector<double> raw;        // C(d) as measured
  std::vector<double> corrected;  // C(d) - C(max_delay)
  double total = 0.0;             // sum of corrected
};

struct CapacityResult {
  CapacityCurve stm;
  CapacityCurve pc;
};

// Trains one readout per delay on the training rows and measures C(d) on the
// evaluation rows. Shared by the quantum reservoir and the ESN baseline.
CapacityResult capacity_from_signals(const SignalMatrix& signals, std::span<const double> inputs, int max_delay);

// One reservoir sample: Hamiltonian and inputs drawn from sample_seed.
CapacityResult capacity_sample(const ReservoirConfig& config, std::uint64_t sample_seed, int max_delay = 500);

struct CapacityStats {
  std::vector<double> mean_per_delay;
  std::vector<double> std_per_delay;
  std::vector<double> per_sample;
  double mean = 0.0;
  double stddev = 0.0;
};

CapacityStats summarize(const std::vector<CapacityCurve>& curves);

// `samples` reservoirs with seeds derive_seed(config.seed, {sample}).
CapacityStats capacity_curve(const ReservoirConfig& config, CapacityTask task, int max_delay = 500, int samples = 20);

// --- divergence rate --------------------------------------------------------

// d_k = || y[k, k+window) - y'[k, k+window) ||,  lambda = (log d_h - log d_0) / h.
double lyapunov_estimate(std::span<const double> reference, std::span<const double> perturbed,
                         std::size_t window = 17, std::size_t horizon = 500);

// Divergence rate of the Mackey-Glass series itself (history perturbed by 1e-8).
double mackey_glass_lyapunov(double tau_mg, const MackeyGlassOptions& options = {}, std::size_t window = 17,
                             std::size_t horizon = 500);

// --- baselines and protocols ------------------------------------------------

// y_{k+1} = w1 s_k + w0 trained on the training phase, NMSE on evaluation.
EvalReport linear_regression_baseline(std::span<const double> inputs, std::span<const double> targets,
                                      const Phases& phases);

struct NarmaResult {
  std::array<double, 5> nmse{};
  std::array<double, 5> baseline_nmse{};
};

// Five readouts on one shared signal matrix.
NarmaResult narma_from_signals(const SignalMatrix& signals, const TaskStream& stream);
NarmaResult narma_sample(const ReservoirSystem& system, const TaskStream& stream, std::uint64_t noise_seed);

struct TimerOptions {
  std::size_t total = 800;
  std::size_t discard = 400;
  std::size_t cue = 500;
  int train_trials = 5;
  int eval_trials = 5;
  int max_delay = 299;
};

struct TimerResult {
  std::vector<double> per_delay;
  double capacity = 0.0;
};

// Trials start from random mixed states drawn from `seed`.
TimerResult timer_capacity(const ReservoirSystem& system, const TimerOptions& options, std::uint64_t seed);

struct MackeyGlassTrialOptions {
  double train_noise = 1e-5;
  // Leading teacher-forced rows excluded from regression.
  std::size_t reservoir_washout = 100;
  // Amplitude of the uniform signal perturbation for the twin run.
  double perturbation = 1e-5;
  std::size_t lyapunov_window = 17;
  std::size_t lyapunov_horizon = 500;
  double tolerance = 0.1;  // for stable_steps
  ClosedLoopOptions loop;
};

struct MackeyGlassTrialResult {
  bool diverged = false;
  double nmse = 0.0;
  double lyapunov = 0.0;
  // Autonomous steps until |y - target| first exceeds the tolerance.
  std::size_t stable_steps = 0;
  std::vector<double> outputs;   // predictions of the evaluation-phase targets
  std::vector<double> targets;
};

MackeyGlassTrialResult mackey_glass_trial(const ReservoirSystem& system, const TaskStream& stream,
                                          const MackeyGlassTrialOptions& options, std::uint64_t seed);

}  // namespace qrc
