#include "qrc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qrc/error.hpp"
#include "qrc/io.hpp"

namespace qrc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ExperimentKind k) noexcept {
  switch (k) {
    case ExperimentKind::kCapacity: return "capacity";
    case ExperimentKind::kNarma: return "narma";
    case ExperimentKind::kTimer: return "timer";
    case ExperimentKind::kMg: return "mg";
    case ExperimentKind::kEsn: return "esn";
    case ExperimentKind::kValidate: return "validate";
  }
  return "?";
}

ExperimentKind parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::kCapacity, ExperimentKind::kNarma, ExperimentKind::kTimer, ExperimentKind::kMg,
                 ExperimentKind::kEsn, ExperimentKind::kValidate})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

// --- configuration ----------------------------------------------------------

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (samples < 1) fail("samples must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (kind == ExperimentKind::kValidate) return;
  if (kind == ExperimentKind::kEsn) {
    if (spectral_radius.empty()) fail("spectral_radius grid is empty");
    for (double r : spectral_radius)
      if (!(r > 0.0)) fail("spectral radii must be positive");
    if (esn_nodes < 1) fail("esn_nodes must be >= 1");
  } else {
    if (n_qubits.empty() || tau.empty() || virtual_nodes.empty() || coupling.empty() || field.empty() ||
        topology.empty() || dephasing.empty() || observation_sigma.empty())
      fail("every parameter grid needs at least one value");
  }
  if (kind == ExperimentKind::kMg && (tau_mg.empty() || train_noise.empty())) fail("tau_mg / train_noise grid is empty");
  if (max_delay < 0) fail("max_delay must be >= 0");
  if (timer_max_delay < 0 || timer_max_delay > 299) fail("timer_max_delay must lie in [0, 299]");
  if (phases.train == 0 || phases.eval == 0) fail("train and eval phases must be non-empty");
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kNarma:
      c.n_qubits = {6};
      break;
    case ExperimentKind::kTimer:
      c.n_qubits = {6};
      c.virtual_nodes = {1, 2, 5, 10};
      c.samples = 10;
      break;
    case ExperimentKind::kMg:
      c.n_qubits = {7};
      c.tau = {2.0};
      c.samples = 10;
      break;
    case ExperimentKind::kEsn:
      c.samples = 100;
      break;
    default:
      break;
  }
  return c;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

struct Entry {
  std::string value;
  int line;
};

double to_double(const Entry& e, const std::string& text) {
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError("'" + text + "' is not a number", e.line);
  return v;
}

long long to_integer(const Entry& e, const std::string& text) {
  long long v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw ConfigError("'" + text + "' is not an integer", e.line);
  return v;
}

std::vector<std::string> items(const Entry& e) {
  auto list = split_list(e.value);
  if (list.empty() || std::any_of(list.begin(), list.end(), [](const auto& s) { return s.empty(); }))
    throw ConfigError("empty list element", e.line);
  return list;
}

std::vector<double> double_list(const Entry& e) {
  std::vector<double> out;
  for (const auto& s : items(e)) out.push_back(to_double(e, s));
  return out;
}

std::vector<int> int_list(const Entry& e) {
  std::vector<int> out;
  for (const auto& s : items(e)) out.push_back(static_cast<int>(to_integer(e, s)));
  return out;
}

double single_double(const Entry& e) {
  const auto v = double_list(e);
  if (v.size() != 1) throw ConfigError("expected a single value", e.line);
  return v.front();
}

int single_int(const Entry& e) {
  const auto v = int_list(e);
  if (v.size() != 1) throw ConfigError("expected a single value", e.line);
  return v.front();
}

bool to_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError("expected true or false", e.line);
}

template <class F>
auto wrap(const Entry& e, F&& f) {
  try {
    return f();
  } catch (const ConfigError& err) {
    if (err.line() > 0) throw;
    throw ConfigError(err.what(), e.line);
  } catch (const Error& err) {
    throw ConfigError(err.what(), e.line);
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, std::optional<ExperimentKind> kind_hint) {
  std::vector<std::pair<std::string, Entry>> entries;
  std::string raw;
  int line_no = 0;
  std::optional<ExperimentKind> kind;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key", line_no);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no);
    for (const auto& [k, e] : entries)
      if (k == key) throw ConfigError("duplicate key '" + key + "' (first on line " + std::to_string(e.line) + ")", line_no);
    if (key == "kind") {
      kind = wrap(Entry{value, line_no}, [&] { return parse_kind(value); });
      if (kind_hint && *kind_hint != *kind)
        throw ConfigError("config is for '" + value + "' but the command is '" + std::string(to_string(*kind_hint)) + "'",
                          line_no);
    }
    entries.emplace_back(std::move(key), Entry{std::move(value), line_no});
  }
  if (!kind) kind = kind_hint.value_or(ExperimentKind::kCapacity);

  ExperimentConfig c = default_config(*kind);
  for (const auto& [key, e] : entries) {
    if (key == "kind") continue;
    if (key == "n_qubits") c.n_qubits = int_list(e);
    else if (key == "tau") c.tau = double_list(e);
    else if (key == "virtual_nodes") c.virtual_nodes = int_list(e);
    else if (key == "coupling") c.coupling = double_list(e);
    else if (key == "field") c.field = double_list(e);
    else if (key == "topology") {
      c.topology.clear();
      for (const auto& s : items(e)) c.topology.push_back(wrap(e, [&] { return parse_topology(s); }));
    } else if (key == "dephasing") c.dephasing = double_list(e);
    else if (key == "dephasing_axis") c.dephasing_axis = wrap(e, [&] { return parse_axis(e.value); });
    else if (key == "dephasing_dt") c.dephasing_dt = single_double(e);
    else if (key == "observation_sigma") c.observation_sigma = double_list(e);
    else if (key == "phases") {
      const auto p = int_list(e);
      if (p.size() != 3 || std::any_of(p.begin(), p.end(), [](int v) { return v < 0; }))
        throw ConfigError("phases needs three non-negative lengths (washout, train, eval)", e.line);
      c.phases = {static_cast<std::size_t>(p[0]), static_cast<std::size_t>(p[1]), static_cast<std::size_t>(p[2])};
    } else if (key == "spectral_radius") c.spectral_radius = double_list(e);
    else if (key == "esn_nodes") c.esn_nodes = single_int(e);
    else if (key == "input_case") c.input_case = wrap(e, [&] { return parse_input_case(e.value); });
    else if (key == "esn_task") {
      if (e.value == "capacity") c.esn_task = EsnTask::kCapacity;
      else if (e.value == "narma") c.esn_task = EsnTask::kNarma;
      else throw ConfigError("esn_task must be capacity or narma", e.line);
    } else if (key == "max_delay") c.max_delay = single_int(e);
    else if (key == "narma_input") {
      if (e.value == "sine") c.narma_input = InputKind::kSine;
      else if (e.value == "random") c.narma_input = InputKind::kUniformRandom;
      else throw ConfigError("narma_input must be sine or random", e.line);
    } else if (key == "tau_mg") c.tau_mg = double_list(e);
    else if (key == "train_noise") c.train_noise = double_list(e);
    else if (key == "timer_max_delay") c.timer_max_delay = single_int(e);
    else if (key == "samples") c.samples = single_int(e);
    else if (key == "seed") {
      std::uint64_t v = 0;
      const auto r = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
      if (r.ec != std::errc() || r.ptr != e.value.data() + e.value.size())
        throw ConfigError("seed must be an unsigned 64-bit integer", e.line);
      c.seed = v;
    } else if (key == "output_dir") c.output_dir = e.value;
    else if (key == "threads") c.threads = single_int(e);
    else if (key == "dump_signals") c.dump_signals = to_bool(e);
    else throw ConfigError("unknown key '" + key + "'", e.line);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path, std::optional<ExperimentKind> kind_hint) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, kind_hint);
}

// --- cells ------------------------------------------------------------------

namespace {

std::string show(double v) { return format_double(v); }

}  // namespace

std::vector<Cell> expand_cells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  const auto kind_tag = static_cast<std::uint64_t>(c.kind);
  if (c.kind == ExperimentKind::kValidate) return cells;
  if (c.kind == ExperimentKind::kEsn) {
    for (double r : c.spectral_radius) {
      Cell cell;
      cell.radius = r;
      cell.params = {{"spectral_radius", show(r)}, {"esn_nodes", std::to_string(c.esn_nodes)}};
      cell.seed = derive_seed(c.seed, {kind_tag, double_bits(r), static_cast<std::uint64_t>(c.esn_nodes)});
      cells.push_back(std::move(cell));
    }
    return cells;
  }
  const std::vector<double> mg_taus = c.kind == ExperimentKind::kMg ? c.tau_mg : std::vector<double>{0.0};
  const std::vector<double> noises = c.kind == ExperimentKind::kMg ? c.train_noise : std::vector<double>{0.0};
  for (int n : c.n_qubits)
    for (double tau : c.tau)
      for (int v : c.virtual_nodes)
        for (double j : c.coupling)
          for (double h : c.field)
            for (Topology topo : c.topology)
              for (double gamma : c.dephasing)
                for (double sigma : c.observation_sigma)
                  for (double tmg : mg_taus)
                    for (double tn : noises) {
                      Cell cell;
                      ReservoirConfig& r = cell.reservoir;
                      r.n_qubits = n;
                      r.tau = tau;
                      r.virtual_nodes = v;
                      r.coupling = j;
                      r.field = h;
                      r.topology = topo;
                      r.noise.dephasing_rate = gamma;
                      r.noise.dephasing_axis = c.dephasing_axis;
                      r.noise.dephasing_dt = c.dephasing_dt;
                      r.noise.observation_sigma = sigma;
                      r.phases = c.phases;
                      cell.tau_mg = tmg;
                      cell.train_noise = tn;
                      cell.params = {{"n_qubits", std::to_string(n)}, {"tau", show(tau)},
                                     {"virtual_nodes", std::to_string(v)}, {"coupling", show(j)},
                                     {"field", show(h)}, {"topology", std::string(to_string(topo))},
                                     {"dephasing", show(gamma)}, {"observation_sigma", show(sigma)}};
                      if (c.kind == ExperimentKind::kMg) {
                        cell.params.emplace_back("tau_mg", show(tmg));
                        cell.params.emplace_back("train_noise", show(tn));
                      }
                      // Only the system coordinates enter the seed: cells that differ in
                      // tau, V, noise or task settings reuse the same reservoir draws and
                      // inputs, so sweeps along those axes are paired comparisons.
                      cell.seed = derive_seed(c.seed, {kind_tag, static_cast<std::uint64_t>(n), double_bits(j),
                                                       double_bits(h), static_cast<std::uint64_t>(topo)});
                      cells.push_back(std::move(cell));
                    }
  return cells;
}

std::uint64_t sample_seed(const Cell& cell, int sample) {
  return derive_seed(cell.seed, {static_cast<std::uint64_t>(sample)});
}

// --- execution --------------------------------------------------------------

namespace {

struct SampleOut {
  std::vector<double> metrics;
  std::vector<std::vector<double>> curves;
  std::string error;
  double seconds = 0.0;
};

std::vector<std::string> metric_names(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::kCapacity: return {"c_stm", "c_pc"};
    case ExperimentKind::kTimer: return {"capacity"};
    case ExperimentKind::kMg: return {"nmse", "lyapunov", "stable_steps"};
    case ExperimentKind::kNarma: {
      std::vector<std::string> n;
      for (int o : kNarmaOrders) n.push_back("nmse_narma" + std::to_string(o));
      for (int o : kNarmaOrders) n.push_back("lr_nmse_narma" + std::to_string(o));
      return n;
    }
    case ExperimentKind::kEsn:
      if (c.esn_task == EsnTask::kCapacity) return {"c_stm", "c_pc"};
      else {
        std::vector<std::string> n;
        for (int o : kNarmaOrders) n.push_back("nmse_narma" + std::to_string(o));
        return n;
      }
    default: return {};
  }
}

std::vector<std::string> curve_names(const ExperimentConfig& c) {
  if (c.kind == ExperimentKind::kCapacity) return {"stm", "pc"};
  if (c.kind == ExperimentKind::kEsn && c.esn_task == EsnTask::kCapacity) return {"stm", "pc"};
  if (c.kind == ExperimentKind::kTimer) return {"timer"};
  return {};
}

EsnBenchmarkOptions esn_options(const ExperimentConfig& c) {
  EsnBenchmarkOptions o;
  o.task = c.esn_task;
  o.n_nodes = c.esn_nodes;
  o.input_case = c.input_case;
  o.phases = c.phases;
  o.max_delay = c.max_delay;
  o.narma_input = c.narma_input;
  return o;
}

TaskStream narma_stream(const ExperimentConfig& c, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kInputs);
  return narma_suite_stream(c.narma_input, rng, c.phases);
}

SampleOut run_sample(const ExperimentConfig& c, const Cell& cell, std::uint64_t seed,
                     const std::map<double, TaskStream>& mg_streams) {
  SampleOut out;
  switch (c.kind) {
    case ExperimentKind::kCapacity: {
      auto r = capacity_sample(cell.reservoir, seed, c.max_delay);
      out.metrics = {r.stm.total, r.pc.total};
      out.curves = {std::move(r.stm.corrected), std::move(r.pc.corrected)};
      break;
    }
    case ExperimentKind::kNarma: {
      ReservoirConfig rc = cell.reservoir;
      rc.seed = seed;
      const ReservoirSystem sys(rc);
      const auto r = narma_sample(sys, narma_stream(c, seed), stream_seed(seed, Stream::kObservationNoise));
      out.metrics.assign(r.nmse.begin(), r.nmse.end());
      out.metrics.insert(out.metrics.end(), r.baseline_nmse.begin(), r.baseline_nmse.end());
      break;
    }
    case ExperimentKind::kTimer: {
      ReservoirConfig rc = cell.reservoir;
      rc.seed = seed;
      const ReservoirSystem sys(rc);
      TimerOptions o;
      o.max_delay = c.timer_max_delay;
      auto r = timer_capacity(sys, o, seed);
      out.metrics = {r.capacity};
      out.curves = {std::move(r.per_delay)};
      break;
    }
    case ExperimentKind::kMg: {
      ReservoirConfig rc = cell.reservoir;
      rc.seed = seed;
      const ReservoirSystem sys(rc);
      MackeyGlassTrialOptions o;
      o.train_noise = cell.train_noise;
      const auto r = mackey_glass_trial(sys, mg_streams.at(cell.tau_mg), o, seed);
      if (r.diverged) throw DivergenceError("closed-loop output diverged");
      out.metrics = {r.nmse, r.lyapunov, static_cast<double>(r.stable_steps)};
      break;
    }
    case ExperimentKind::kEsn: {
      auto r = esn_sample(esn_options(c), cell.radius, seed);
      if (c.esn_task == EsnTask::kCapacity) {
        out.metrics = {r.capacity.stm.total, r.capacity.pc.total};
        out.curves = {std::move(r.capacity.stm.corrected), std::move(r.capacity.pc.corrected)};
      } else {
        out.metrics.assign(r.narma.nmse.begin(), r.narma.nmse.end());
      }
      break;
    }
    default:
      break;
  }
  return out;
}

void reduce(ResultRecord& rec, const std::vector<SampleOut>& outs, const std::vector<std::string>& names,
            const std::vector<std::string>& curves) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t m = 0; m < names.size(); ++m) {
    MetricSummary s;
    s.name = names[m];
    std::vector<double> ok;
    for (const auto& o : outs) {
      const double v = o.error.empty() ? o.metrics[m] : nan;
      s.values.push_back(v);
      if (std::isfinite(v)) ok.push_back(v);
    }
    s.mean = ok.empty() ? nan : 0.0;
    for (double v : ok) s.mean += v / static_cast<double>(ok.size());
    if (ok.size() > 1) {
      for (double v : ok) s.stddev += (v - s.mean) * (v - s.mean);
      s.stddev = std::sqrt(s.stddev / static_cast<double>(ok.size() - 1));
    }
    rec.metrics.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < curves.size(); ++k) {
    CurveSummary cs;
    cs.name = curves[k];
    std::vector<const std::vector<double>*> ok;
    for (const auto& o : outs)
      if (o.error.empty()) ok.push_back(&o.curves[k]);
    if (!ok.empty()) {
      const std::size_t len = ok.front()->size();
      cs.mean.assign(len, 0.0);
      cs.stddev.assign(len, 0.0);
      for (const auto* v : ok)
        for (std::size_t d = 0; d < len; ++d) cs.mean[d] += (*v)[d] / static_cast<double>(ok.size());
      if (ok.size() > 1) {
        for (const auto* v : ok)
          for (std::size_t d = 0; d < len; ++d) cs.stddev[d] += ((*v)[d] - cs.mean[d]) * ((*v)[d] - cs.mean[d]);
        for (auto& s : cs.stddev) s = std::sqrt(s / static_cast<double>(ok.size() - 1));
      }
    }
    rec.curves.push_back(std::move(cs));
  }
  for (std::size_t i = 0; i < outs.size(); ++i) {
    rec.wall_seconds += outs[i].seconds;
    if (!outs[i].error.empty()) {
      ++rec.failures;
      rec.failure_messages.push_back("sample " + std::to_string(i) + ": " + outs[i].error);
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const ValidateOptions& validate_options) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = config;
  if (config.kind == ExperimentKind::kValidate) {
    ValidateOptions vo = validate_options;
    vo.seed = config.seed;
    result.validation = validate(vo);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  const auto cells = expand_cells(config);
  std::map<double, TaskStream> mg_streams;
  if (config.kind == ExperimentKind::kMg)
    for (double t : config.tau_mg) mg_streams.emplace(t, mackey_glass_stream(t));

  const auto samples = static_cast<std::size_t>(config.samples);
  std::vector<std::vector<SampleOut>> outs(cells.size(), std::vector<SampleOut>(samples));
  std::atomic<std::size_t> next{0};
  const std::size_t units = cells.size() * samples;
  auto worker = [&] {
    for (std::size_t u = next++; u < units; u = next++) {
      const std::size_t ci = u / samples;
      const std::size_t si = u % samples;
      const auto start = std::chrono::steady_clock::now();
      SampleOut out;
      try {
        out = run_sample(config, cells[ci], sample_seed(cells[ci], static_cast<int>(si)), mg_streams);
      } catch (const std::exception& e) {
        out = SampleOut{};
        out.error = e.what();
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      outs[ci][si] = std::move(out);
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), std::max<std::size_t>(units, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto names = metric_names(config);
  const auto curves = curve_names(config);
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    ResultRecord rec;
    rec.cell = cells[ci];
    for (std::size_t si = 0; si < samples; ++si) rec.sample_seeds.push_back(sample_seed(cells[ci], static_cast<int>(si)));
    reduce(rec, outs[ci], names, curves);
    result.records.push_back(std::move(rec));
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

SignalMatrix sample_signals(const ExperimentConfig& c, const Cell& cell, int sample) {
  const std::uint64_t seed = sample_seed(cell, sample);
  ReservoirConfig rc = cell.reservoir;
  rc.seed = seed;
  switch (c.kind) {
    case ExperimentKind::kCapacity: {
      Rng rng = make_rng(seed, Stream::kInputs);
      return run(rc, random_binary_inputs(rc.phases.total(), rng));
    }
    case ExperimentKind::kNarma:
      return run(rc, narma_stream(c, seed).inputs);
    case ExperimentKind::kTimer: {
      const TimerOptions o;
      const auto t = timer_stream(o.cue, 0, o.total, o.discard);
      rc.phases = t.phases;
      return run(rc, t.inputs);
    }
    case ExperimentKind::kMg: {
      const auto t = mackey_glass_stream(cell.tau_mg);
      rc.phases = t.phases;
      rc.phases.eval = 0;
      return run(ReservoirSystem(rc), t.inputs, rc.phases, stream_seed(seed, Stream::kObservationNoise));
    }
    case ExperimentKind::kEsn: {
      const auto o = esn_options(c);
      const EsnSystem esn = esn_build(o.n_nodes, cell.radius, o.input_case, seed);
      Rng rng = make_rng(seed, Stream::kInputs);
      if (c.esn_task == EsnTask::kCapacity) return esn_run(esn, random_binary_inputs(o.phases.total(), rng), o.phases);
      return esn_run(esn, narma_suite_stream(o.narma_input, rng, o.phases).inputs, o.phases);
    }
    default:
      throw ParameterError("no signals for this experiment kind");
  }
}

// --- output -----------------------------------------------------------------

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  if (c.kind == ExperimentKind::kValidate) return j;
  if (c.kind == ExperimentKind::kEsn) {
    j["spectral_radius"] = c.spectral_radius;
    j["esn_nodes"] = c.esn_nodes;
    j["input_case"] = to_string(c.input_case);
    j["esn_task"] = c.esn_task == EsnTask::kCapacity ? "capacity" : "narma";
  } else {
    j["n_qubits"] = c.n_qubits;
    j["tau"] = c.tau;
    j["virtual_nodes"] = c.virtual_nodes;
    j["coupling"] = c.coupling;
    j["field"] = c.field;
    std::vector<std::string> topo;
    for (auto t : c.topology) topo.emplace_back(to_string(t));
    j["topology"] = topo;
    j["dephasing"] = c.dephasing;
    j["dephasing_axis"] = std::string(to_string(c.dephasing_axis));
    if (c.dephasing_dt) j["dephasing_dt"] = *c.dephasing_dt;
    j["observation_sigma"] = c.observation_sigma;
  }
  j["phases"] = {c.phases.washout, c.phases.train, c.phases.eval};
  switch (c.kind) {
    case ExperimentKind::kCapacity: j["max_delay"] = c.max_delay; break;
    case ExperimentKind::kNarma: j["narma_input"] = c.narma_input == InputKind::kSine ? "sine" : "random"; break;
    case ExperimentKind::kTimer: j["timer_max_delay"] = c.timer_max_delay; break;
    case ExperimentKind::kMg:
      j["tau_mg"] = c.tau_mg;
      j["train_noise"] = c.train_noise;
      break;
    case ExperimentKind::kEsn:
      if (c.esn_task == EsnTask::kCapacity) j["max_delay"] = c.max_delay;
      else j["narma_input"] = c.narma_input == InputKind::kSine ? "sine" : "random";
      break;
    default: break;
  }
  return j;
}

std::string csv_header_params(const ExperimentResult& r) {
  std::string h;
  if (r.records.empty()) return h;
  for (const auto& [k, v] : r.records.front().cell.params) h += k + ",";
  return h;
}

std::string csv_params(const ResultRecord& rec) {
  std::string s;
  for (const auto& [k, v] : rec.cell.params) s += v + ",";
  return s;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

}  // namespace

std::string summary_json(const ExperimentResult& r) {
  json j;
  j["kind"] = std::string(to_string(r.config.kind));
  j["master_seed"] = r.config.seed;
  j["seed_derivation"] =
      "derive(s, parts): h = splitmix64(s); for p in parts: h = splitmix64(h xor p). "
      "cell_seed = derive(master_seed, [kind_index, n_qubits, coupling, field, topology]) with reals as IEEE-754 bit "
      "patterns (tau, V, noise and task settings share draws); "
      "sample_seed = derive(cell_seed, [sample_index]); each random consumer uses derive(sample_seed, [stream_id]).";
  j["config"] = config_json(r.config);
  if (r.validation) {
    json groups = json::array();
    for (const auto& g : r.validation->groups) groups.push_back({{"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
    j["validation"] = {{"passed", r.validation->passed()}, {"groups", groups}};
    return j.dump(2);
  }
  json cells = json::array();
  for (const auto& rec : r.records) {
    json cell;
    json params = json::object();
    for (const auto& [k, v] : rec.cell.params) params[k] = v;
    cell["params"] = params;
    cell["cell_seed"] = rec.cell.seed;
    cell["sample_seeds"] = rec.sample_seeds;
    cell["samples"] = rec.sample_seeds.size();
    cell["failures"] = rec.failures;
    cell["failure_messages"] = rec.failure_messages;
    json metrics = json::object();
    for (const auto& m : rec.metrics) {
      json values = json::array();
      for (double v : m.values) values.push_back(number(v));
      metrics[m.name] = {{"mean", number(m.mean)}, {"std", number(m.stddev)}, {"values", values}};
    }
    cell["metrics"] = metrics;
    cells.push_back(std::move(cell));
  }
  j["cells"] = cells;
  return j.dump(2);
}

std::string curve_csv(const ExperimentResult& r) {
  std::ostringstream out;
  if (r.validation) {
    out << "invariant,passed\n";
    for (const auto& g : r.validation->groups) out << g.name << ',' << (g.passed ? 1 : 0) << '\n';
    return out.str();
  }
  if (r.records.empty()) return {};
  out << csv_header_params(r);
  for (const auto& m : r.records.front().metrics) out << m.name << "_mean," << m.name << "_std,";
  out << "failures\n";
  for (const auto& rec : r.records) {
    out << csv_params(rec);
    for (const auto& m : rec.metrics) out << csv_number(m.mean) << ',' << csv_number(m.stddev) << ',';
    out << rec.failures << '\n';
  }
  return out.str();
}

std::string delay_csv(const ExperimentResult& r) {
  std::ostringstream out;
  if (r.records.empty() || r.records.front().curves.empty()) return {};
  out << csv_header_params(r) << "curve,delay,mean,std\n";
  for (const auto& rec : r.records)
    for (const auto& c : rec.curves)
      for (std::size_t d = 0; d < c.mean.size(); ++d)
        out << csv_params(rec) << c.name << ',' << d << ',' << csv_number(c.mean[d]) << ',' << csv_number(c.stddev[d])
            << '\n';
  return out.str();
}

void write_results(const ExperimentResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    out << text;
  };
  write("summary.json", summary_json(r) + "\n");
  write("curve.csv", curve_csv(r));
  const auto delays = delay_csv(r);
  if (!delays.empty()) write("delays.csv", delays);

  json timing;
  timing["total_seconds"] = r.wall_seconds;
  timing["threads"] = r.config.threads;
  json cells = json::array();
  for (const auto& rec : r.records) cells.push_back(rec.wall_seconds);
  timing["cell_seconds"] = cells;
  write("timing.json", timing.dump(2) + "\n");

  if (r.config.dump_signals && !r.records.empty())
    write_signals(dir / "signals.csv", sample_signals(r.config, r.records.front().cell, 0));
}

}  // namespace qrc
