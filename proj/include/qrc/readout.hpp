#pragma once

// Linear readout: least-squares training over a signal matrix, prediction,
// error and capacity measures, and closed-loop (output-fed-back) generation.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qrc/reservoir.hpp"

namespace qrc {

struct TrainOptions {
  // Singular values below rcond * sigma_max are treated as zero.
  double rcond = 1e-12;
  // Tikhonov parameter; 0 is plain least squares.
  double ridge = 0.0;
};

struct ReadoutWeights {
  Vector weights;
  double training_residual = 0.0;  // mean square error over the training rows
  int rank = 0;
};

// Pseudoinverse factorisation of one design matrix, reusable for any number of
// target columns (one SVD for all delays of a capacity curve).
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::Ref<const Matrix>& x, TrainOptions options = {});

  ReadoutWeights solve(const Eigen::Ref<const Vector>& targets) const;
  // Column j of the result holds the weights for column j of `targets`.
  Matrix solve_many(const Eigen::Ref<const Matrix>& targets) const;

  int rank() const noexcept { return rank_; }
  Eigen::Index rows() const noexcept { return x_.rows(); }
  Eigen::Index cols() const noexcept { return x_.cols(); }

 private:
  Matrix x_;
  Matrix u_;          // thin U restricted to the retained rank
  Matrix v_scaled_;   // V * diag(filter factors / sigma)
  int rank_ = 0;
};

ReadoutWeights train(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& targets,
                     TrainOptions options = {});

Vector predict(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& weights);
inline Vector predict(const Eigen::Ref<const Matrix>& x, const ReadoutWeights& w) { return predict(x, w.weights); }

double mean_square_error(std::span<const double> outputs, std::span<const double> targets);

// sum (target - output)^2 / sum target^2
double nmse(std::span<const double> outputs, std::span<const double> targets);

// Squared Pearson correlation cov^2 / (var_y var_t).
double capacity_single(std::span<const double> outputs, std::span<const double> targets);

// sum_{d=0}^{max_delay} [C(d) - C(max_delay)], no clamping of negative terms.
double capacity_sum(const std::map<int, double>& per_delay, int max_delay);
double capacity_sum(std::span<const double> per_delay);

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

struct EvalReport {
  double nmse = 0.0;
  double capacity_value = 0.0;
  std::vector<double> outputs;
  std::vector<double> targets;
};

EvalReport evaluate(std::span<const double> outputs, std::span<const double> targets);

// --- closed loop ------------------------------------------------------------

struct ClosedLoopOptions {
  // Autonomous inputs are clipped to this interval before injection.
  double clip_low = 0.0;
  double clip_high = 1.0;
  // |y| beyond this marks the run as diverged.
  double divergence_bound = 10.0;
};

// Output of the autonomous loop: outputs[j] = w . row_j where row_j is the
// signal row after injecting u_j. For j < switch_step, u_j = teacher[j];
// afterwards u_j = clip(outputs[j-1]). Throws DivergenceError on |y| > bound.
std::vector<double> closed_loop_generate(const ReservoirSystem& system, const ReadoutWeights& weights,
                                         std::span<const double> teacher, std::size_t switch_step,
                                         std::size_t total_steps, std::uint64_t noise_seed,
                                         const ClosedLoopOptions& options = {});

// The same loop on an already-driven reservoir: continues from its current
// state with first_input, feeding outputs back. Returns the `steps` outputs.
std::vector<double> run_autonomous(Reservoir& reservoir, const ReadoutWeights& weights, double first_input,
                                   std::size_t steps, const ClosedLoopOptions& options = {});

// Teacher forcing for count steps: injects teacher[0..count) and returns the
// clean signal rows (with bias).
Matrix teacher_force(Reservoir& reservoir, std::span<const double> teacher, std::size_t count);

// Uniform noise in [-amplitude, amplitude] added to every non-bias entry.
void add_training_noise(Matrix& rows, double amplitude, Rng& rng);

}  // namespace qrc
