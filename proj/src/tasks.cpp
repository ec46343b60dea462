#include "qrc/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qrc/error.hpp"

namespace qrc {

namespace {

constexpr double kNarmaBound = 10.0;

void check_narma(double y) {
  if (!std::isfinite(y) || std::abs(y) > kNarmaBound)
    throw DivergenceError("NARMA output left [-10, 10] (y = " + std::to_string(y) + ")");
}

// One column per target, over the rows [begin, begin + count).
Matrix target_block(const std::vector<std::vector<double>>& targets, std::size_t begin, std::size_t count) {
  Matrix y(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(targets.size()));
  for (std::size_t j = 0; j < targets.size(); ++j)
    for (std::size_t r = 0; r < count; ++r)
      y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = targets[j][begin + r];
  return y;
}

// Squared correlation, with a constant output counted as zero capacity.
double capacity_or_zero(std::span<const double> outputs, std::span<const double> targets) {
  try {
    return capacity_single(outputs, targets);
  } catch (const UndefinedMeasureError&) {
    return 0.0;
  }
}

CapacityCurve curve_from(std::vector<double> raw) {
  CapacityCurve c;
  c.total = capacity_sum(raw);
  const double floor = raw.back();
  c.corrected.reserve(raw.size());
  for (double v : raw) c.corrected.push_back(v - floor);
  c.raw = std::move(raw);
  return c;
}

std::vector<double> per_delay_capacity(const Matrix& predicted, const Matrix& targets) {
  std::vector<double> raw(static_cast<std::size_t>(targets.cols()));
  std::vector<double> out(static_cast<std::size_t>(targets.rows()));
  std::vector<double> tgt(out.size());
  for (Eigen::Index d = 0; d < targets.cols(); ++d) {
    for (Eigen::Index r = 0; r < targets.rows(); ++r) {
      out[static_cast<std::size_t>(r)] = predicted(r, d);
      tgt[static_cast<std::size_t>(r)] = targets(r, d);
    }
    raw[static_cast<std::size_t>(d)] = capacity_or_zero(out, tgt);
  }
  return raw;
}

}  // namespace

// --- timer ------------------------------------------------------------------

TaskStream timer_stream(std::size_t cue, std::size_t delay, std::size_t total, std::size_t discard) {
  if (cue + delay >= total)
    throw ParameterError("timer target step " + std::to_string(cue + delay) + " lies beyond the trial length " +
                         std::to_string(total));
  if (discard > total) throw ParameterError("timer discard exceeds the trial length");
  TaskStream t;
  t.name = "timer";
  t.inputs.resize(total);
  for (std::size_t k = 0; k < total; ++k) t.inputs[k] = k >= cue ? 1.0 : 0.0;
  t.raw_inputs = t.inputs;
  std::vector<double> target(total, 0.0);
  target[cue + delay] = 1.0;
  t.targets.push_back(std::move(target));
  t.target_names.push_back("timer" + std::to_string(delay));
  t.phases = {discard, total - discard, 0};
  t.metadata = {{"cue", static_cast<double>(cue)}, {"delay", static_cast<double>(delay)}};
  return t;
}

// --- NARMA ------------------------------------------------------------------

double narma2_step(double y_k, double y_km1, double s_k) {
  const double y = 0.4 * y_k + 0.4 * y_k * y_km1 + 0.6 * s_k * s_k * s_k + 0.1;
  check_narma(y);
  return y;
}

double narma_n_step(std::span<const double> y_history, std::span<const double> s_window, int order) {
  if (order != 5 && order != 10 && order != 15 && order != 20)
    throw ParameterError("NARMA order must be one of 5, 10, 15, 20 (got " + std::to_string(order) + ")");
  const auto n = static_cast<std::size_t>(order);
  if (y_history.size() < n || s_window.size() < n)
    throw DimensionError("NARMA" + std::to_string(order) + " needs " + std::to_string(order) + " past values");
  const double y_k = y_history.back();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += y_history[y_history.size() - 1 - j];
  const double s_k = s_window.back();
  const double s_old = s_window[s_window.size() - n];
  const double y = 0.3 * y_k + 0.05 * y_k * sum + 1.5 * s_old * s_k + 0.1;
  check_narma(y);
  return y;
}

std::vector<double> narma_series(int order, std::span<const double> inputs) {
  const std::size_t pad = order == 2 ? 2 : static_cast<std::size_t>(order);
  // y_hist[pad - 1 + k] holds y_k; s_hist likewise.
  std::vector<double> y_hist(pad, 0.0);
  std::vector<double> s_hist(pad - 1, 0.0);
  y_hist.reserve(pad + inputs.size());
  s_hist.reserve(pad + inputs.size());
  std::vector<double> out;
  out.reserve(inputs.size());
  for (double s : inputs) {
    s_hist.push_back(s);
    double y;
    if (order == 2) {
      y = narma2_step(y_hist.back(), y_hist[y_hist.size() - 2], s);
    } else {
      y = narma_n_step(std::span<const double>(y_hist).last(pad), std::span<const double>(s_hist).last(pad), order);
    }
    y_hist.push_back(y);
    out.push_back(y);
  }
  return out;
}

double sine_input(std::size_t k) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double t = static_cast<double>(k) / 100.0;
  return 0.1 * (std::sin(two_pi * 2.11 * t) * std::sin(two_pi * 3.73 * t) * std::sin(two_pi * 4.11 * t) + 1.0);
}

TaskStream narma_suite_stream(InputKind kind, Rng& rng, Phases phases) {
  TaskStream t;
  const std::size_t total = phases.total();
  t.raw_inputs.resize(total);
  if (kind == InputKind::kSine) {
    t.name = "narma-sine";
    for (std::size_t k = 0; k < total; ++k) t.raw_inputs[k] = sine_input(k);
  } else {
    t.name = "narma-random";
    std::uniform_real_distribution<double> draw(0.0, 0.2);
    for (auto& s : t.raw_inputs) s = draw(rng);
  }
  constexpr double scale = 5.0;
  t.inputs.resize(total);
  for (std::size_t k = 0; k < total; ++k) t.inputs[k] = std::clamp(scale * t.raw_inputs[k], 0.0, 1.0);
  for (int order : kNarmaOrders) {
    t.targets.push_back(narma_series(order, t.raw_inputs));
    t.target_names.push_back("narma" + std::to_string(order));
  }
  t.phases = phases;
  t.metadata = {{"input_scale", scale}};
  return t;
}

// --- Mackey-Glass -----------------------------------------------------------

double mackey_glass_step(double y, double y_delayed, double step) {
  const double p = y_delayed * y_delayed;
  const double p10 = p * p * p * p * p;
  return y + step * (0.2 * y_delayed / (1.0 + p10) - 0.1 * y);
}

std::vector<double> mackey_glass_series(double tau_mg, std::size_t count, const MackeyGlassOptions& options,
                                        double history_offset) {
  if (!(options.step > 0.0) || options.subsample < 1) throw ParameterError("invalid Mackey-Glass step/subsample");
  if (!(tau_mg > 0.0)) throw ParameterError("tau_MG must be positive");
  const double ratio = tau_mg / options.step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw ParameterError("tau_MG / step = " + std::to_string(ratio) + " is not an integer");
  const auto delay = static_cast<std::size_t>(rounded);

  // Ring buffer of the last delay+1 fine-step values; history[head] is y_{k-delay}.
  std::vector<double> history(delay + 1, options.initial_value + history_offset);
  std::size_t head = 0;
  double y = history.back();

  const auto sub = static_cast<std::size_t>(options.subsample);
  const std::size_t skip = options.washout * sub;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t fine = 0; out.size() < count; ++fine) {
    if (fine >= skip && (fine - skip) % sub == 0) out.push_back(y);
    const double y_delayed = history[head];
    y = mackey_glass_step(y, y_delayed, options.step);
    history[head] = y;
    head = (head + 1) % history.size();
  }
  return out;
}

TaskStream mackey_glass_stream(double tau_mg, std::size_t total, const MackeyGlassOptions& options, Phases phases) {
  if (phases.total() > total) throw ParameterError("Mackey-Glass phases exceed the series length");
  TaskStream t;
  t.name = "mackey-glass";
  t.raw_inputs = mackey_glass_series(tau_mg, total, options);
  const auto [lo, hi] = std::minmax_element(t.raw_inputs.begin(), t.raw_inputs.end());
  const double mn = *lo;
  const double mx = *hi;
  if (!(mx > mn)) throw NumericalError("Mackey-Glass series is constant; cannot rescale");
  t.inputs.resize(total);
  for (std::size_t k = 0; k < total; ++k) t.inputs[k] = (t.raw_inputs[k] - mn) / (mx - mn);
  t.targets.push_back(t.inputs);
  t.target_names.push_back("mg");
  t.phases = phases;
  t.metadata = {{"tau_mg", tau_mg}, {"mg_min", mn}, {"mg_max", mx}, {"step", options.step},
                {"subsample", static_cast<double>(options.subsample)}};
  return t;
}

// --- memory / parity --------------------------------------------------------

std::vector<double> random_binary_inputs(std::size_t count, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<double> s(count);
  for (auto& v : s) v = coin(rng) ? 1.0 : 0.0;
  return s;
}

std::vector<double> stm_target(std::span<const double> s, int delay) {
  if (delay < 0) throw ParameterError("delay must be >= 0");
  const auto d = static_cast<std::size_t>(delay);
  std::vector<double> y(s.size(), 0.0);
  for (std::size_t k = d; k < s.size(); ++k) y[k] = s[k - d];
  return y;
}

std::vector<double> pc_target(std::span<const double> s, int delay) {
  if (delay < 0) throw ParameterError("delay must be >= 0");
  const auto d = static_cast<std::size_t>(delay);
  std::vector<double> y(s.size(), 0.0);
  // Running window sum of s_{k-d..k}.
  long window = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    window += std::lround(s[k]);
    if (k > d) window -= std::lround(s[k - d - 1]);
    y[k] = static_cast<double>(window % 2);
  }
  return y;
}

CapacityResult capacity_from_signals(const SignalMatrix& signals, std::span<const double> inputs, int max_delay) {
  if (max_delay < 0) throw ParameterError("max delay must be >= 0");
  if (inputs.size() < static_cast<std::size_t>(signals.rows()))
    throw DimensionError("input sequence shorter than the signal matrix");
  const auto delays = static_cast<std::size_t>(max_delay) + 1;
  const Phases& ph = signals.phases;

  std::vector<std::vector<double>> stm(delays);
  std::vector<std::vector<double>> pc(delays);
  for (std::size_t d = 0; d < delays; ++d) {
    stm[d] = stm_target(inputs, static_cast<int>(d));
    pc[d] = pc_target(inputs, static_cast<int>(d));
  }
  stm.insert(stm.end(), std::make_move_iterator(pc.begin()), std::make_move_iterator(pc.end()));

  const LeastSquares ls(signals.train_rows());
  const Matrix w = ls.solve_many(target_block(stm, ph.train_begin(), ph.train));
  const Matrix predicted = signals.eval_rows() * w;
  const std::vector<double> raw = per_delay_capacity(predicted, target_block(stm, ph.eval_begin(), ph.eval));

  CapacityResult r;
  r.stm = curve_from({raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(delays)});
  r.pc = curve_from({raw.begin() + static_cast<std::ptrdiff_t>(delays), raw.end()});
  return r;
}

CapacityResult capacity_sample(const ReservoirConfig& config, std::uint64_t sample_seed, int max_delay) {
  ReservoirConfig c = config;
  c.seed = sample_seed;
  Rng rng = make_rng(sample_seed, Stream::kInputs);
  const auto inputs = random_binary_inputs(c.phases.total(), rng);
  const SignalMatrix signals = run(c, inputs);
  return capacity_from_signals(signals, inputs, max_delay);
}

CapacityStats summarize(const std::vector<CapacityCurve>& curves) {
  CapacityStats st;
  if (curves.empty()) return st;
  const std::size_t n = curves.size();
  const std::size_t delays = curves.front().corrected.size();
  st.mean_per_delay.assign(delays, 0.0);
  st.std_per_delay.assign(delays, 0.0);
  for (const auto& c : curves) {
    st.per_sample.push_back(c.total);
    for (std::size_t d = 0; d < delays; ++d) st.mean_per_delay[d] += c.corrected[d] / static_cast<double>(n);
  }
  for (double v : st.per_sample) st.mean += v / static_cast<double>(n);
  if (n > 1) {
    for (const auto& c : curves)
      for (std::size_t d = 0; d < delays; ++d) {
        const double e = c.corrected[d] - st.mean_per_delay[d];
        st.std_per_delay[d] += e * e / static_cast<double>(n - 1);
      }
    for (auto& v : st.std_per_delay) v = std::sqrt(v);
    for (double v : st.per_sample) st.stddev += (v - st.mean) * (v - st.mean) / static_cast<double>(n - 1);
    st.stddev = std::sqrt(st.stddev);
  }
  return st;
}

CapacityStats capacity_curve(const ReservoirConfig& config, CapacityTask task, int max_delay, int samples) {
  if (samples < 1) throw ParameterError("samples must be >= 1");
  std::vector<CapacityCurve> curves;
  for (int i = 0; i < samples; ++i) {
    auto r = capacity_sample(config, derive_seed(config.seed, {static_cast<std::uint64_t>(i)}), max_delay);
    curves.push_back(task == CapacityTask::kStm ? std::move(r.stm) : std::move(r.pc));
  }
  return summarize(curves);
}

// --- divergence rate --------------------------------------------------------

double lyapunov_estimate(std::span<const double> reference, std::span<const double> perturbed, std::size_t window,
                         std::size_t horizon) {
  if (window == 0 || horizon == 0) throw ParameterError("window and horizon must be positive");
  const std::size_t need = horizon + window;
  if (reference.size() < need || perturbed.size() < need)
    throw DimensionError("sequences need at least " + std::to_string(need) + " values");
  auto distance = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t i = k; i < k + window; ++i) acc += (reference[i] - perturbed[i]) * (reference[i] - perturbed[i]);
    return std::sqrt(acc);
  };
  const double d0 = distance(0);
  const double dh = distance(horizon);
  if (d0 == 0.0) throw UndefinedMeasureError("initial separation d_0 is zero; a perturbation is required");
  if (dh == 0.0) throw UndefinedMeasureError("separation collapsed to zero at the horizon");
  return (std::log(dh) - std::log(d0)) / static_cast<double>(horizon);
}

double mackey_glass_lyapunov(double tau_mg, const MackeyGlassOptions& options, std::size_t window,
                             std::size_t horizon) {
  const std::size_t count = horizon + window;
  const auto a = mackey_glass_series(tau_mg, count, options);
  const auto b = mackey_glass_series(tau_mg, count, options, 1e-8);
  return lyapunov_estimate(a, b, window, horizon);
}

// --- baselines and protocols ------------------------------------------------

EvalReport linear_regression_baseline(std::span<const double> inputs, std::span<const double> targets,
                                      const Phases& phases) {
  if (inputs.size() < phases.total() || targets.size() < phases.total())
    throw DimensionError("inputs/targets shorter than the phases");
  Matrix x(static_cast<Eigen::Index>(phases.total()), 2);
  for (std::size_t k = 0; k < phases.total(); ++k) {
    x(static_cast<Eigen::Index>(k), 0) = 1.0;
    x(static_cast<Eigen::Index>(k), 1) = inputs[k];
  }
  const auto tb = static_cast<Eigen::Index>(phases.train_begin());
  const auto eb = static_cast<Eigen::Index>(phases.eval_begin());
  const Eigen::Map<const Vector> y(targets.data(), static_cast<Eigen::Index>(phases.total()));
  const auto w = train(x.middleRows(tb, static_cast<Eigen::Index>(phases.train)),
                       y.segment(tb, static_cast<Eigen::Index>(phases.train)));
  const Vector out = predict(x.middleRows(eb, static_cast<Eigen::Index>(phases.eval)), w);
  return evaluate(as_span(out), targets.subspan(phases.eval_begin(), phases.eval));
}

NarmaResult narma_from_signals(const SignalMatrix& signals, const TaskStream& stream) {
  if (stream.targets.size() != kNarmaOrders.size()) throw DimensionError("expected five NARMA targets");
  const Phases& ph = signals.phases;
  const LeastSquares ls(signals.train_rows());
  const Matrix w = ls.solve_many(target_block(stream.targets, ph.train_begin(), ph.train));
  const Matrix predicted = signals.eval_rows() * w;
  NarmaResult r;
  std::vector<double> out(ph.eval);
  for (std::size_t j = 0; j < kNarmaOrders.size(); ++j) {
    for (std::size_t i = 0; i < ph.eval; ++i) out[i] = predicted(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const std::span<const double> tgt(stream.targets[j].data() + ph.eval_begin(), ph.eval);
    r.nmse[j] = nmse(out, tgt);
    r.baseline_nmse[j] = linear_regression_baseline(stream.raw_inputs, stream.targets[j], ph).nmse;
  }
  return r;
}

NarmaResult narma_sample(const ReservoirSystem& system, const TaskStream& stream, std::uint64_t noise_seed) {
  return narma_from_signals(run(system, stream.inputs, stream.phases, noise_seed), stream);
}

TimerResult timer_capacity(const ReservoirSystem& system, const TimerOptions& o, std::uint64_t seed) {
  if (o.train_trials < 1 || o.eval_trials < 1) throw ParameterError("timer needs at least one trial per phase");
  if (o.max_delay < 0 || o.cue + static_cast<std::size_t>(o.max_delay) >= o.total)
    throw ParameterError("timer max delay does not fit in the trial");
  if (o.discard >= o.total || o.discard > o.cue) throw ParameterError("timer discard must precede the cue");

  const auto base = timer_stream(o.cue, 0, o.total, o.discard);
  const Phases phases{0, o.total, 0};
  const std::size_t kept = o.total - o.discard;
  const int trials = o.train_trials + o.eval_trials;
  Matrix rows(static_cast<Eigen::Index>(kept) * trials, system.row_width());
  Rng init = make_rng(seed, Stream::kInitialState);
  for (int t = 0; t < trials; ++t) {
    const auto rho0 = DensityMatrix::random(system.n_qubits(), init);
    const auto noise_seed = derive_seed(stream_seed(seed, Stream::kObservationNoise), {static_cast<std::uint64_t>(t)});
    const SignalMatrix s = run(system, base.inputs, phases, noise_seed, rho0);
    rows.middleRows(static_cast<Eigen::Index>(kept) * t, static_cast<Eigen::Index>(kept)) =
        s.data.bottomRows(static_cast<Eigen::Index>(kept));
  }

  // Every trial shares the same targets; the cue is at a fixed step.
  const auto delays = static_cast<Eigen::Index>(o.max_delay) + 1;
  auto stacked = [&](int count) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(kept) * count, delays);
    for (int t = 0; t < count; ++t)
      for (Eigen::Index d = 0; d < delays; ++d)
        y(static_cast<Eigen::Index>(kept) * t + static_cast<Eigen::Index>(o.cue - o.discard) + d, d) = 1.0;
    return y;
  };
  const auto train_n = static_cast<Eigen::Index>(kept) * o.train_trials;
  const auto eval_n = static_cast<Eigen::Index>(kept) * o.eval_trials;
  const LeastSquares ls(rows.topRows(train_n));
  const Matrix w = ls.solve_many(stacked(o.train_trials));
  const Matrix predicted = rows.bottomRows(eval_n) * w;

  TimerResult r;
  r.per_delay = per_delay_capacity(predicted, stacked(o.eval_trials));
  for (double c : r.per_delay) r.capacity += c;
  return r;
}

MackeyGlassTrialResult mackey_glass_trial(const ReservoirSystem& system, const TaskStream& stream,
                                          const MackeyGlassTrialOptions& o, std::uint64_t seed) {
  const std::size_t forced = stream.phases.washout + stream.phases.train;
  const std::size_t eval = stream.phases.eval;
  const auto& teacher = stream.inputs;
  if (teacher.size() < forced + eval) throw DimensionError("teacher sequence shorter than the phases");
  if (o.reservoir_washout + 2 > forced) throw ParameterError("reservoir washout leaves no training rows");
  if (eval == 0) throw ParameterError("Mackey-Glass evaluation phase is empty");

  Reservoir reservoir(system, stream_seed(seed, Stream::kObservationNoise));
  const Matrix rows = teacher_force(reservoir, teacher, forced);

  // Row j (after injecting teacher[j]) predicts teacher[j+1]. The last forced
  // row predicts the first evaluation value, so it is not trained on.
  const std::size_t first = o.reservoir_washout;
  const std::size_t n_train = forced - 1 - first;
  Matrix x = rows.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(n_train));
  Rng train_rng = make_rng(seed, Stream::kTrainingNoise);
  add_training_noise(x, o.train_noise, train_rng);
  const Eigen::Map<const Vector> y(teacher.data() + first + 1, static_cast<Eigen::Index>(n_train));
  const ReadoutWeights w = train(x, y);

  MackeyGlassTrialResult r;
  r.targets.assign(teacher.begin() + static_cast<std::ptrdiff_t>(forced),
                   teacher.begin() + static_cast<std::ptrdiff_t>(forced + eval));

  const RowVector last = rows.row(static_cast<Eigen::Index>(forced - 1));
  RowVector perturbed_last = last;
  Rng perturb = make_rng(seed, Stream::kPerturbation);
  std::uniform_real_distribution<double> draw(-o.perturbation, o.perturbation);
  for (Eigen::Index c = 1; c < perturbed_last.size(); ++c) perturbed_last(c) += draw(perturb);

  Reservoir twin = reservoir;
  try {
    const double y0 = last.dot(w.weights);
    r.outputs.push_back(y0);
    const auto tail = run_autonomous(reservoir, w, y0, eval - 1, o.loop);
    r.outputs.insert(r.outputs.end(), tail.begin(), tail.end());
  } catch (const DivergenceError&) {
    r.diverged = true;
  }
  if (r.diverged || r.outputs.size() != eval) {
    r.diverged = true;
    r.nmse = std::numeric_limits<double>::infinity();
    r.lyapunov = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.nmse = nmse(r.outputs, r.targets);
  while (r.stable_steps < eval && std::abs(r.outputs[r.stable_steps] - r.targets[r.stable_steps]) <= o.tolerance)
    ++r.stable_steps;

  r.lyapunov = std::numeric_limits<double>::quiet_NaN();
  if (eval >= o.lyapunov_horizon + o.lyapunov_window) {
    try {
      const double y0 = perturbed_last.dot(w.weights);
      std::vector<double> other{y0};
      const auto tail = run_autonomous(twin, w, y0, eval - 1, o.loop);
      other.insert(other.end(), tail.begin(), tail.end());
      r.lyapunov = lyapunov_estimate(r.outputs, other, o.lyapunov_window, o.lyapunov_horizon);
    } catch (const Error&) {
      // Perturbed twin diverged or collapsed; rate stays undefined.
    }
  }
  return r;
}

}  // namespace qrc
