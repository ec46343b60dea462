#include "qrc/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qrc/error.hpp"

namespace qrc {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionError("sequence lengths differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  if (a == 0) throw DimensionError("sequences are empty");
}

}  // namespace

LeastSquares::LeastSquares(const Eigen::Ref<const Matrix>& x, TrainOptions options) : x_(x) {
  if (x_.rows() < x_.cols())
    throw UnderdeterminedError("design matrix has " + std::to_string(x_.rows()) + " rows but " +
                               std::to_string(x_.cols()) + " columns");
  if (x_.cols() == 0) throw DimensionError("design matrix has no columns");
  if (!x_.allFinite()) throw ValidationError("design matrix contains non-finite values");
  if (!(options.rcond >= 0.0) || !(options.ridge >= 0.0)) throw ParameterError("rcond and ridge must be >= 0");

  Eigen::BDCSVD<Matrix> svd(x_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = options.rcond * (sigma.size() > 0 ? sigma(0) : 0.0);
  rank_ = 0;
  while (rank_ < sigma.size() && sigma(rank_) > cutoff) ++rank_;

  u_ = svd.matrixU().leftCols(rank_);
  Vector filter(rank_);
  for (int i = 0; i < rank_; ++i) {
    const double s = sigma(i);
    filter(i) = s / (s * s + options.ridge);
  }
  v_scaled_ = svd.matrixV().leftCols(rank_) * filter.asDiagonal();
}

ReadoutWeights LeastSquares::solve(const Eigen::Ref<const Vector>& targets) const {
  if (targets.size() != x_.rows()) throw DimensionError("target length differs from design-matrix rows");
  if (!targets.allFinite()) throw ValidationError("targets contain non-finite values");
  ReadoutWeights w;
  w.weights = v_scaled_ * (u_.transpose() * targets);
  w.training_residual = (x_ * w.weights - targets).squaredNorm() / static_cast<double>(x_.rows());
  w.rank = rank_;
  return w;
}

Matrix LeastSquares::solve_many(const Eigen::Ref<const Matrix>& targets) const {
  if (targets.rows() != x_.rows()) throw DimensionError("target rows differ from design-matrix rows");
  if (!targets.allFinite()) throw ValidationError("targets contain non-finite values");
  return v_scaled_ * (u_.transpose() * targets);
}

ReadoutWeights train(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& targets,
                     TrainOptions options) {
  if (targets.size() != x.rows()) throw DimensionError("target length differs from design-matrix rows");
  return LeastSquares(x, options).solve(targets);
}

Vector predict(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& weights) {
  if (x.cols() != weights.size())
    throw DimensionError("weight vector has " + std::to_string(weights.size()) + " entries but rows have " +
                         std::to_string(x.cols()));
  return x * weights;
}

double mean_square_error(std::span<const double> outputs, std::span<const double> targets) {
  require_same_length(outputs.size(), targets.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) acc += (outputs[i] - targets[i]) * (outputs[i] - targets[i]);
  return acc / static_cast<double>(outputs.size());
}

double nmse(std::span<const double> outputs, std::span<const double> targets) {
  require_same_length(outputs.size(), targets.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    num += (targets[i] - outputs[i]) * (targets[i] - outputs[i]);
    den += targets[i] * targets[i];
  }
  if (den == 0.0) throw UndefinedMeasureError("NMSE is undefined for all-zero targets");
  return num / den;
}

double capacity_single(std::span<const double> outputs, std::span<const double> targets) {
  require_same_length(outputs.size(), targets.size());
  const auto n = static_cast<double>(outputs.size());
  double my = 0.0;
  double mt = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    my += outputs[i];
    mt += targets[i];
  }
  my /= n;
  mt /= n;
  double cov = 0.0;
  double vy = 0.0;
  double vt = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double dy = outputs[i] - my;
    const double dt = targets[i] - mt;
    cov += dy * dt;
    vy += dy * dy;
    vt += dt * dt;
  }
  constexpr double kTiny = 1e-28;
  if (vy <= kTiny * n * std::max(1.0, my * my) || vt <= kTiny * n * std::max(1.0, mt * mt))
    throw UndefinedMeasureError("capacity is undefined for a constant sequence");
  return (cov * cov) / (vy * vt);
}

double capacity_sum(const std::map<int, double>& per_delay, int max_delay) {
  if (max_delay < 0) throw ParameterError("max delay must be >= 0");
  std::vector<double> dense(static_cast<std::size_t>(max_delay) + 1);
  for (int d = 0; d <= max_delay; ++d) {
    const auto it = per_delay.find(d);
    if (it == per_delay.end()) throw ParameterError("capacity for delay " + std::to_string(d) + " is missing");
    dense[static_cast<std::size_t>(d)] = it->second;
  }
  return capacity_sum(dense);
}

double capacity_sum(std::span<const double> per_delay) {
  if (per_delay.empty()) throw ParameterError("capacity curve is empty");
  const double floor = per_delay.back();
  double acc = 0.0;
  for (double c : per_delay) acc += c - floor;
  return acc;
}

EvalReport evaluate(std::span<const double> outputs, std::span<const double> targets) {
  EvalReport r;
  r.nmse = nmse(outputs, targets);
  try {
    r.capacity_value = capacity_single(outputs, targets);
  } catch (const UndefinedMeasureError&) {
    r.capacity_value = std::numeric_limits<double>::quiet_NaN();
  }
  r.outputs.assign(outputs.begin(), outputs.end());
  r.targets.assign(targets.begin(), targets.end());
  return r;
}

// --- closed loop ------------------------------------------------------------

Matrix teacher_force(Reservoir& reservoir, std::span<const double> teacher, std::size_t count) {
  if (teacher.size() < count) throw DimensionError("teacher sequence is shorter than the forced phase");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(static_cast<Eigen::Index>(count),
                                                                              reservoir.system().row_width());
  for (std::size_t k = 0; k < count; ++k) reservoir.step_into(teacher[k], rows.row(static_cast<Eigen::Index>(k)));
  return rows;
}

void add_training_noise(Matrix& rows, double amplitude, Rng& rng) {
  if (!(amplitude >= 0.0)) throw ParameterError("training noise amplitude must be >= 0");
  if (amplitude == 0.0) return;
  std::uniform_real_distribution<double> draw(-amplitude, amplitude);
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 1; c < rows.cols(); ++c) rows(r, c) += draw(rng);
}

std::vector<double> run_autonomous(Reservoir& reservoir, const ReadoutWeights& weights, double first_input,
                                   std::size_t steps, const ClosedLoopOptions& options) {
  if (weights.weights.size() != reservoir.system().row_width())
    throw DimensionError("readout weights do not match the reservoir row width");
  std::vector<double> outputs;
  outputs.reserve(steps);
  RowVector row(reservoir.system().row_width());
  double input = first_input;
  for (std::size_t j = 0; j < steps; ++j) {
    reservoir.step_into(std::clamp(input, options.clip_low, options.clip_high), row);
    const double y = row.dot(weights.weights);
    if (!std::isfinite(y) || std::abs(y) > options.divergence_bound)
      throw DivergenceError("closed-loop output diverged at autonomous step " + std::to_string(j));
    outputs.push_back(y);
    input = y;
  }
  return outputs;
}

std::vector<double> closed_loop_generate(const ReservoirSystem& system, const ReadoutWeights& weights,
                                         std::span<const double> teacher, std::size_t switch_step,
                                         std::size_t total_steps, std::uint64_t noise_seed,
                                         const ClosedLoopOptions& options) {
  if (switch_step > teacher.size()) throw DimensionError("switch step lies beyond the teacher sequence");
  if (switch_step > total_steps) throw DimensionError("switch step lies beyond the total step count");
  if (weights.weights.size() != system.row_width())
    throw DimensionError("readout weights do not match the reservoir row width");
  Reservoir reservoir(system, noise_seed);
  std::vector<double> outputs;
  outputs.reserve(total_steps);
  RowVector row(system.row_width());
  for (std::size_t j = 0; j < switch_step; ++j) {
    reservoir.step_into(teacher[j], row);
    const double y = row.dot(weights.weights);
    if (!std::isfinite(y) || std::abs(y) > options.divergence_bound)
      throw DivergenceError("output diverged during teacher forcing at step " + std::to_string(j));
    outputs.push_back(y);
  }
  if (total_steps == switch_step) return outputs;
  const double first = switch_step == 0 ? teacher.empty() ? 0.0 : teacher[0] : outputs.back();
  const auto tail = run_autonomous(reservoir, weights, first, total_steps - switch_step, options);
  outputs.insert(outputs.end(), tail.begin(), tail.end());
  return outputs;
}

}  // namespace qrc
