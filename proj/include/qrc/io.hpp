#pragma once

// CSV / JSON persistence for signal matrices, readout weights, evaluation
// reports and task streams. Numbers are written with 17 significant digits so
// files round-trip exactly.

#include <filesystem>
#include <string>

#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/tasks.hpp"

namespace qrc {

std::string format_double(double v);

// <name>.csv with a "bias,q1v1,..." header plus <name>.json holding the shape
// and phase boundaries.
void write_signals(const std::filesystem::path& csv_path, const SignalMatrix& signals);
SignalMatrix read_signals(const std::filesystem::path& csv_path);

void write_weights(const std::filesystem::path& json_path, const ReadoutWeights& weights);
ReadoutWeights read_weights(const std::filesystem::path& json_path);

void write_eval_report_json(const std::filesystem::path& path, const EvalReport& report);
// k, output, target
void write_eval_report_csv(const std::filesystem::path& path, const EvalReport& report);

// CSV columns k, s, <target names...>; metadata JSON next to it.
void write_task_stream(const std::filesystem::path& csv_path, const TaskStream& stream);

std::string config_summary_json(const ReservoirConfig& config);

}  // namespace qrc
