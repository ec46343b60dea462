#include "qrc/esn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "qrc/error.hpp"
#include "qrc/rng.hpp"

namespace qrc {

std::string to_string(InputCase c) { return c == InputCase::kCaseI ? "case1" : "case2"; }

InputCase parse_input_case(const std::string& text) {
  if (text == "case1" || text == "I" || text == "1") return InputCase::kCaseI;
  if (text == "case2" || text == "II" || text == "2") return InputCase::kCaseII;
  throw ParameterError("unknown ESN input case '" + text + "' (expected case1 or case2)");
}

double spectral_radius(const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0) throw DimensionError("spectral radius needs a non-empty square matrix");
  Eigen::EigenSolver<Matrix> solver(w, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation did not converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

EsnSystem esn_build(int n_nodes, double radius, InputCase input_case, std::uint64_t seed) {
  if (n_nodes < 1) throw ParameterError("ESN needs at least one node");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ParameterError("spectral radius must be positive");
  Rng rng = make_rng(seed, Stream::kEsnWeights);
  std::uniform_real_distribution<double> draw(-1.0, 1.0);
  EsnSystem e;
  e.n_nodes = n_nodes;
  e.spectral_radius = radius;
  e.input_case = input_case;
  e.internal_weights.resize(n_nodes, n_nodes);
  double current = 0.0;
  // A zero spectral radius has probability zero; redraw if it ever happens.
  while (current == 0.0) {
    for (Eigen::Index i = 0; i < n_nodes; ++i)
      for (Eigen::Index j = 0; j < n_nodes; ++j) e.internal_weights(i, j) = draw(rng);
    current = spectral_radius(e.internal_weights);
  }
  e.internal_weights *= radius / current;
  e.input_weights.resize(n_nodes);
  for (Eigen::Index i = 0; i < n_nodes; ++i) e.input_weights(i) = draw(rng);
  return e;
}

double esn_input(double s, InputCase input_case) {
  return input_case == InputCase::kCaseI && s == 0.0 ? -1.0 : s;
}

Vector esn_step(const Vector& state, double s, const EsnSystem& system) {
  if (state.size() != system.n_nodes) throw DimensionError("ESN state has the wrong length");
  Vector pre = system.internal_weights * state + system.input_weights * esn_input(s, system.input_case);
  return pre.array().tanh().matrix();
}

SignalMatrix esn_run(const EsnSystem& system, std::span<const double> inputs, const Phases& phases) {
  if (inputs.size() < phases.total()) throw DimensionError("input sequence shorter than the phases");
  SignalMatrix out;
  out.n_nodes = system.n_nodes;
  out.virtual_nodes = 1;
  out.phases = phases;
  out.data.resize(static_cast<Eigen::Index>(phases.total()), system.n_nodes + 1);
  Vector x = Vector::Zero(system.n_nodes);
  for (std::size_t k = 0; k < phases.total(); ++k) {
    x = esn_step(x, inputs[k], system);
    const auto r = static_cast<Eigen::Index>(k);
    out.data(r, 0) = 1.0;
    out.data.row(r).tail(system.n_nodes) = x.transpose();
  }
  return out;
}

std::vector<double> default_radius_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(0.05 + 0.1 * i);
  return grid;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x / static_cast<double>(v.size());
  return m;
}

double std_of(const std::vector<double>& v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

EsnSample esn_sample(const EsnBenchmarkOptions& o, double radius, std::uint64_t seed) {
  const EsnSystem esn = esn_build(o.n_nodes, radius, o.input_case, seed);
  Rng rng = make_rng(seed, Stream::kInputs);
  EsnSample out;
  if (o.task == EsnTask::kCapacity) {
    const auto inputs = random_binary_inputs(o.phases.total(), rng);
    out.capacity = capacity_from_signals(esn_run(esn, inputs, o.phases), inputs, o.max_delay);
  } else {
    const auto stream = narma_suite_stream(o.narma_input, rng, o.phases);
    out.narma = narma_from_signals(esn_run(esn, stream.inputs, o.phases), stream);
  }
  return out;
}

EsnBenchmarkResult esn_benchmark(const EsnBenchmarkOptions& o) {
  if (o.radius_grid.empty()) throw ParameterError("radius grid is empty");
  if (o.samples < 1) throw ParameterError("samples must be >= 1");
  EsnBenchmarkResult result;
  for (double radius : o.radius_grid) {
    EsnRadiusResult rr;
    rr.radius = radius;
    std::vector<CapacityCurve> stm;
    std::vector<CapacityCurve> pc;
    std::array<std::vector<double>, 5> narma;
    for (int i = 0; i < o.samples; ++i) {
      const std::uint64_t seed = derive_seed(o.seed, {double_bits(radius), static_cast<std::uint64_t>(i)});
      try {
        auto r = esn_sample(o, radius, seed);
        if (o.task == EsnTask::kCapacity) {
          stm.push_back(std::move(r.capacity.stm));
          pc.push_back(std::move(r.capacity.pc));
        } else {
          for (std::size_t j = 0; j < 5; ++j) narma[j].push_back(r.narma.nmse[j]);
        }
      } catch (const Error&) {
        ++rr.failures;
      }
    }
    if (o.task == EsnTask::kCapacity) {
      rr.stm = summarize(stm);
      rr.pc = summarize(pc);
    } else {
      for (std::size_t j = 0; j < 5; ++j) {
        rr.narma_mean[j] = narma[j].empty() ? std::numeric_limits<double>::quiet_NaN() : mean_of(narma[j]);
        rr.narma_std[j] = std_of(narma[j], rr.narma_mean[j]);
      }
    }
    result.per_radius.push_back(std::move(rr));
  }

  const auto& pr = result.per_radius;
  for (std::size_t i = 1; i < pr.size(); ++i) {
    if (pr[i].stm.mean + pr[i].pc.mean > pr[result.best_capacity].stm.mean + pr[result.best_capacity].pc.mean)
      result.best_capacity = i;
    for (std::size_t j = 0; j < 5; ++j)
      if (pr[i].narma_mean[j] < pr[result.best_narma[j]].narma_mean[j]) result.best_narma[j] = i;
  }
  return result;
}

}  // namespace qrc
