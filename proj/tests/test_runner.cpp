#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qrc/error.hpp"
#include "qrc/io.hpp"
#include "qrc/runner.hpp"

using namespace qrc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, std::optional<ExperimentKind> hint = std::nullopt) {
  std::istringstream in(text);
  return parse_config(in, hint);
}

int error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

ExperimentConfig small_capacity() {
  return parse(
      "kind = capacity\n"
      "n_qubits = 2, 3\n"
      "virtual_nodes = 1, 2\n"
      "phases = 50, 300, 200\n"
      "max_delay = 15\n"
      "samples = 3\n"
      "seed = 11\n");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qrc_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config: values, lists and comments") {
  const auto c = parse(
      "# sweep\n"
      "kind = capacity   # trailing comment\n"
      "\n"
      "n_qubits = 3, 4\n"
      "tau = 0.5, 1, 2\n"
      "topology = full, 1dnn\n"
      "dephasing_axis = x\n"
      "seed = 18446744073709551615\n");
  CHECK(c.kind == ExperimentKind::kCapacity);
  CHECK(c.n_qubits == std::vector<int>{3, 4});
  CHECK(c.tau == std::vector<double>{0.5, 1, 2});
  CHECK(c.topology.size() == 2);
  CHECK(c.dephasing_axis == PauliAxis::kX);
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.virtual_nodes == std::vector<int>{10});  // default kept
}

TEST_CASE("config: errors carry line numbers") {
  CHECK(error_line("kind = capacity\nfoo = 1\n") == 2);
  CHECK(error_line("n_qubits = 3\n\nn_qubits = 4\n") == 3);
  CHECK(error_line("# c\nvirtual_nodes = ten\n") == 2);
  CHECK(error_line("tau = 1,,2\n") == 1);
  CHECK(error_line("novalue\n") == 1);
  CHECK(error_line("kind = nope\n") == 1);
  CHECK(error_line("samples = 1, 2\n") == 1);
  std::istringstream in("kind = narma\n");
  CHECK_THROWS_AS(parse_config(in, ExperimentKind::kTimer), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
  auto bad = default_config(ExperimentKind::kTimer);
  bad.timer_max_delay = 300;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config: defaults per kind") {
  CHECK(default_config(ExperimentKind::kNarma).n_qubits == std::vector<int>{6});
  const auto t = default_config(ExperimentKind::kTimer);
  CHECK(t.virtual_nodes == std::vector<int>{1, 2, 5, 10});
  CHECK(t.samples == 10);
  const auto mg = default_config(ExperimentKind::kMg);
  CHECK(mg.n_qubits == std::vector<int>{7});
  CHECK(mg.tau == std::vector<double>{2.0});
  CHECK(default_config(ExperimentKind::kEsn).samples == 100);
  CHECK(default_config(ExperimentKind::kCapacity).samples == 20);
}

TEST_CASE("cells: count, order and seeds") {
  const auto c = small_capacity();
  const auto cells = expand_cells(c);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].reservoir.n_qubits == 2);
  CHECK(cells[0].reservoir.virtual_nodes == 1);
  CHECK(cells[1].reservoir.virtual_nodes == 2);
  CHECK(cells[2].reservoir.n_qubits == 3);
  // V is a protocol axis: both V cells of one N see the same reservoirs.
  CHECK(cells[0].seed == cells[1].seed);
  CHECK(cells[2].seed == cells[3].seed);
  std::set<std::uint64_t> seeds;
  for (const auto& cell : cells) {
    seeds.insert(cell.seed);
    for (int i = 0; i < 3; ++i) seeds.insert(sample_seed(cell, i));
  }
  CHECK(seeds.size() == 8);
  // Seeds depend on the coordinates, not on the grid they came from.
  auto other = c;
  other.n_qubits = {3};
  CHECK(expand_cells(other)[0].seed == cells[2].seed);
  // System axes change the draws.
  auto coupled = c;
  coupled.coupling = {2.0};
  CHECK(expand_cells(coupled)[0].seed != cells[0].seed);
  CHECK(sample_seed(cells[1], 2) == derive_seed(cells[1].seed, {2}));
}

TEST_CASE("run: deterministic and thread-count independent") {
  auto c = small_capacity();
  const auto a = run_experiment(c);
  const auto b = run_experiment(c);
  c.threads = 3;
  const auto d = run_experiment(c);
  CHECK(summary_json(a) == summary_json(b));
  CHECK(summary_json(a) == summary_json(d));
  CHECK(curve_csv(a) == curve_csv(d));
  CHECK(delay_csv(a) == delay_csv(d));
  REQUIRE(a.records.size() == 4);
  for (const auto& r : a.records) {
    CHECK(r.failures == 0);
    REQUIRE(r.metrics.size() == 2);
    CHECK(r.metrics[0].name == "c_stm");
    CHECK(r.metrics[0].values.size() == 3);
  }
  c.seed = 12;
  CHECK(summary_json(run_experiment(c)) != summary_json(a));
}

TEST_CASE("run: sample metrics match the library directly") {
  const auto c = small_capacity();
  const auto res = run_experiment(c);
  const auto& rec = res.records[3];
  for (int i = 0; i < 3; ++i) {
    const auto direct = capacity_sample(rec.cell.reservoir, sample_seed(rec.cell, i), c.max_delay);
    CHECK(rec.metrics[0].values[static_cast<std::size_t>(i)] == direct.stm.total);
    CHECK(rec.metrics[1].values[static_cast<std::size_t>(i)] == direct.pc.total);
  }
  double mean = 0.0;
  for (double v : rec.metrics[0].values) mean += v / 3.0;
  CHECK(rec.metrics[0].mean == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("run: failures are recorded, not fatal") {
  auto c = small_capacity();
  c.n_qubits = {2};
  c.virtual_nodes = {3};
  c.dephasing = {0.01};
  c.dephasing_dt = 0.25;  // does not divide 1/3
  const auto r = run_experiment(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].failures == 3);
  CHECK(r.records[0].failure_messages.at(0).rfind("sample 0: ", 0) == 0);
  CHECK(std::isnan(r.records[0].metrics[0].values[0]));
  const auto j = nlohmann::json::parse(summary_json(r));
  CHECK(j["cells"][0]["metrics"]["c_stm"]["values"][0].is_null());
}

TEST_CASE("write_results and signal round trip") {
  auto c = small_capacity();
  c.n_qubits = {2};
  c.virtual_nodes = {2};
  c.dump_signals = true;
  const auto r = run_experiment(c);
  const auto dir = scratch("results");
  write_results(r, dir);
  for (const char* f : {"summary.json", "curve.csv", "delays.csv", "timing.json", "signals.csv", "signals.json"})
    CHECK(fs::exists(dir / f));
  const auto j = nlohmann::json::parse(std::ifstream(dir / "summary.json"));
  CHECK(j["cells"].size() == 1);
  CHECK(j["master_seed"] == 11);

  const auto sig = sample_signals(c, expand_cells(c)[0], 0);
  const auto back = read_signals(dir / "signals.csv");
  CHECK(back.rows() == sig.rows());
  CHECK((back.data - sig.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.phases.train == 300);
  CHECK(back.virtual_nodes == 2);
  fs::remove_all(dir);
}

TEST_CASE("io: weights and reports") {
  const auto dir = scratch("io");
  ReadoutWeights w;
  w.weights = Eigen::Vector3d(0.1, -1.0 / 3.0, 2e-17);
  w.training_residual = 1.25e-4;
  w.rank = 3;
  write_weights(dir / "w.json", w);
  const auto back = read_weights(dir / "w.json");
  CHECK((back.weights - w.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.rank == 3);

  const auto rep = evaluate(std::vector<double>{1, 1, 1}, std::vector<double>{0.5, 1, 2});
  write_eval_report_json(dir / "r.json", rep);
  const auto j = nlohmann::json::parse(std::ifstream(dir / "r.json"));
  CHECK(j["capacity"].is_null());
  write_eval_report_csv(dir / "r.csv", rep);
  std::ifstream csv(dir / "r.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "k,output,target");
  CHECK(format_double(0.1) == "0.10000000000000001");
  fs::remove_all(dir);
}

TEST_CASE("other kinds run end to end at small size") {
  auto n = parse("kind = narma\nn_qubits = 2\nvirtual_nodes = 2\nphases = 100, 300, 100\nsamples = 2\n");
  auto rn = run_experiment(n);
  CHECK(rn.records[0].failures == 0);
  CHECK(rn.records[0].metrics.size() == 10);

  auto t = parse("kind = timer\nn_qubits = 2\nvirtual_nodes = 1\nsamples = 2\ntimer_max_delay = 20\n");
  auto rt = run_experiment(t);
  CHECK(rt.records[0].failures == 0);
  CHECK(rt.records[0].metrics[0].name == "capacity");

  auto e = parse("kind = esn\nspectral_radius = 0.5\nesn_nodes = 5\nphases = 50, 300, 200\nmax_delay = 10\nsamples = 2\n");
  auto re = run_experiment(e);
  CHECK(re.records.size() == 1);
  CHECK(re.records[0].failures == 0);
}

TEST_CASE("validate: passes clean, names the broken group under a fault") {
  auto c = default_config(ExperimentKind::kValidate);
  ValidateOptions o;
  o.density_steps = 400;
  const auto ok = run_experiment(c, o);
  REQUIRE(ok.validation);
  CHECK(ok.validation->passed());
  CHECK(ok.validation->groups.size() == invariant_groups().size());

  o.inject_fault = "trace";
  const auto bad = run_experiment(c, o);
  CHECK_FALSE(bad.validation->passed());
  for (const auto& g : bad.validation->groups) CHECK(g.passed == (g.name != "density-matrix"));

  o.inject_fault = "unitarity";
  const auto bad2 = run_experiment(c, o);
  for (const auto& g : bad2.validation->groups) CHECK(g.passed == (g.name != "propagator-unitarity"));
  o.inject_fault = "nope";
  CHECK_THROWS(run_experiment(c, o));
}
