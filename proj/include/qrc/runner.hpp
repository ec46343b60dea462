#pragma once

// Parameter sweeps: configuration files, per-cell seed derivation, parallel
// execution over (cell, sample) units, and result files.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrc/esn.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/tasks.hpp"
#include "qrc/validate.hpp"

namespace qrc {

enum class ExperimentKind { kCapacity, kNarma, kTimer, kMg, kEsn, kValidate };

std::string_view to_string(ExperimentKind k) noexcept;
ExperimentKind parse_kind(std::string_view s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kCapacity;

  // Reservoir grids; every combination is one cell.
  std::vector<int> n_qubits{5};
  std::vector<double> tau{1.0};
  std::vector<int> virtual_nodes{10};
  std::vector<double> coupling{1.0};
  std::vector<double> field{0.5};
  std::vector<Topology> topology{Topology::kFullyConnected};
  std::vector<double> dephasing{0.0};
  std::vector<double> observation_sigma{0.0};
  PauliAxis dephasing_axis = PauliAxis::kZ;
  std::optional<double> dephasing_dt;
  Phases phases{1000, 3000, 1000};

  // Echo state network (kind = esn); cells are the radius grid.
  std::vector<double> spectral_radius = default_radius_grid();
  int esn_nodes = 50;
  InputCase input_case = InputCase::kCaseII;
  EsnTask esn_task = EsnTask::kCapacity;

  int max_delay = 500;
  InputKind narma_input = InputKind::kSine;
  std::vector<double> tau_mg{17.0};
  std::vector<double> train_noise{1e-5};
  int timer_max_delay = 299;

  int samples = 20;
  std::uint64_t seed = 0;
  std::string output_dir = "results";
  int threads = 1;
  bool dump_signals = false;

  // Throws ConfigError.
  void validate() const;
};

// Defaults that match the published protocol of each experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

// `key = value` lines, comma-separated lists, '#' comments. The kind comes
// from a `kind` line or from `kind_hint`; they must agree when both are set.
// Errors carry the offending line number.
ExperimentConfig parse_config(std::istream& in, std::optional<ExperimentKind> kind_hint = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> kind_hint = std::nullopt);

struct Cell {
  std::vector<std::pair<std::string, std::string>> params;  // display form
  ReservoirConfig reservoir;
  double radius = 0.0;
  double tau_mg = 0.0;
  double train_noise = 0.0;
  std::uint64_t seed = 0;
};

// Cells in coordinate order. cell.seed = derive_seed(master, {kind, N, J, h, topology})
// with reals hashed by their IEEE-754 bit pattern; protocol axes share draws.
std::vector<Cell> expand_cells(const ExperimentConfig& config);
std::uint64_t sample_seed(const Cell& cell, int sample);

struct MetricSummary {
  std::string name;
  std::vector<double> values;  // one per sample, NaN where the sample failed
  double mean = 0.0;           // over successful samples
  double stddev = 0.0;
};

struct CurveSummary {
  std::string name;
  std::vector<double> mean;  // per delay
  std::vector<double> stddev;
};

struct ResultRecord {
  Cell cell;
  std::vector<std::uint64_t> sample_seeds;
  std::vector<MetricSummary> metrics;
  std::vector<CurveSummary> curves;
  int failures = 0;
  std::vector<std::string> failure_messages;  // "sample i: message"
  double wall_seconds = 0.0;                  // summed over samples
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRecord> records;
  std::optional<ValidationReport> validation;
  double wall_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const ValidateOptions& validate_options = {});

// Deterministic for a given config and seed (no timings).
std::string summary_json(const ExperimentResult& result);
// One row per cell: parameters, <metric>_mean, <metric>_std, failures.
std::string curve_csv(const ExperimentResult& result);
// Per-delay curves: parameters, curve, delay, mean, std.
std::string delay_csv(const ExperimentResult& result);

// summary.json, curve.csv, delays.csv (when curves exist), timing.json and,
// with dump_signals, signals.csv/.json for sample 0 of the first cell.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir);

// Signal matrix that sample `sample` of `cell` trains on.
SignalMatrix sample_signals(const ExperimentConfig& config, const Cell& cell, int sample);

}  // namespace qrc
