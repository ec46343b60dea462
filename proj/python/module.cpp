#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qrc/error.hpp"
#include "qrc/esn.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/runner.hpp"
#include "qrc/tasks.hpp"
#include "qrc/validate.hpp"

namespace py = pybind11;
using namespace qrc;

namespace {

// std::span has no caster; take vectors at the boundary
using Vec = std::vector<double>;

ReservoirConfig make_config(int n_qubits, double tau, int virtual_nodes, double coupling, double field,
                            const std::string& topology, double dephasing, const std::string& dephasing_axis,
                            double observation_sigma, std::uint64_t seed) {
  ReservoirConfig c;
  c.n_qubits = n_qubits;
  c.tau = tau;
  c.virtual_nodes = virtual_nodes;
  c.coupling = coupling;
  c.field = field;
  c.topology = parse_topology(topology);
  c.noise.dephasing_rate = dephasing;
  c.noise.dephasing_axis = parse_axis(dephasing_axis);
  c.noise.observation_sigma = observation_sigma;
  c.seed = seed;
  return c;
}

#define QRC_CONFIG_ARGS                                                                                      \
  py::arg("n_qubits") = 5, py::arg("tau") = 1.0, py::arg("virtual_nodes") = 10, py::arg("coupling") = 1.0, \
      py::arg("field") = 0.5, py::arg("topology") = "full", py::arg("dephasing") = 0.0,                    \
      py::arg("dephasing_axis") = "z", py::arg("observation_sigma") = 0.0, py::arg("seed") = 0

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantum reservoir computing core";

  py::register_exception<Error>(m, "QrcError", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "hamiltonian",
      [](int n, double coupling, double field, const std::string& topology, std::uint64_t seed) {
        Rng rng = make_rng(seed, Stream::kHamiltonian);
        const auto h = build_hamiltonian(n, coupling, field, parse_topology(topology), rng);
        return py::make_tuple(h.matrix, h.couplings);
      },
      py::arg("n_qubits"), py::arg("coupling") = 1.0, py::arg("field") = 0.5, py::arg("topology") = "full",
      py::arg("seed") = 0, "Ising Hamiltonian matrix and coupling matrix drawn as the reservoir does.");

  m.def(
      "run_reservoir",
      [](const std::vector<double>& inputs, int n_qubits, double tau, int virtual_nodes, double coupling,
         double field, const std::string& topology, double dephasing, const std::string& axis, double sigma,
         std::uint64_t seed) {
        auto c = make_config(n_qubits, tau, virtual_nodes, coupling, field, topology, dephasing, axis, sigma, seed);
        c.phases = {0, inputs.size(), 0};
        py::gil_scoped_release release;
        return run(c, inputs).data;
      },
      py::arg("inputs"), QRC_CONFIG_ARGS,
      "Drive a reservoir with inputs in [0, 1]; returns rows [1, signals...] of width N*V + 1.");

  m.def(
      "capacity",
      [](int n_qubits, double tau, int virtual_nodes, double coupling, double field, const std::string& topology,
         double dephasing, const std::string& axis, double sigma, std::uint64_t seed, int max_delay,
         std::array<std::size_t, 3> phases) {
        auto c = make_config(n_qubits, tau, virtual_nodes, coupling, field, topology, dephasing, axis, sigma, seed);
        c.phases = {phases[0], phases[1], phases[2]};
        CapacityResult r;
        {
          py::gil_scoped_release release;
          r = capacity_sample(c, seed, max_delay);
        }
        py::dict d;
        d["stm"] = r.stm.total;
        d["pc"] = r.pc.total;
        d["stm_curve"] = r.stm.raw;
        d["pc_curve"] = r.pc.raw;
        return d;
      },
      QRC_CONFIG_ARGS, py::arg("max_delay") = 500, py::arg("phases") = std::array<std::size_t, 3>{1000, 3000, 1000},
      "STM and PC capacity of one reservoir sample (bias-corrected totals and raw curves).");

  m.def(
      "train",
      [](const Matrix& x, const Vector& y, double ridge) {
        TrainOptions o;
        o.ridge = ridge;
        const auto w = train(x, y, o);
        return py::make_tuple(w.weights, w.training_residual, w.rank);
      },
      py::arg("x"), py::arg("y"), py::arg("ridge") = 0.0, "Least-squares readout: (weights, residual, rank).");
  m.def("predict", [](const Matrix& x, const Vector& w) { return Vector(predict(x, w)); }, py::arg("x"),
        py::arg("weights"));
  m.def(
      "nmse", [](const Vec& y, const Vec& t) { return nmse(y, t); }, py::arg("outputs"), py::arg("targets"));
  m.def(
      "capacity_single", [](const Vec& y, const Vec& t) { return capacity_single(y, t); }, py::arg("outputs"),
      py::arg("targets"));

  m.def("sine_input", &sine_input, py::arg("k"));
  m.def(
      "narma_series", [](int order, const Vec& s) { return narma_series(order, s); }, py::arg("order"),
      py::arg("inputs"));
  m.def(
      "narma_lr_baseline",
      []() {
        Rng unused(0);
        const auto st = narma_suite_stream(InputKind::kSine, unused);
        std::vector<double> out;
        for (std::size_t i = 0; i < st.targets.size(); ++i)
          out.push_back(linear_regression_baseline(st.raw_inputs, st.targets[i], st.phases).nmse);
        return out;
      },
      "Linear-regression NMSE on the sine-input NARMA2/5/10/15/20 suite.");
  m.def(
      "mackey_glass_series",
      [](double tau_mg, std::size_t count) { return mackey_glass_series(tau_mg, count); }, py::arg("tau_mg") = 17.0,
      py::arg("count") = 12000);
  m.def(
      "lyapunov_estimate",
      [](const Vec& ref, const Vec& per, int window, int horizon) { return lyapunov_estimate(ref, per, window, horizon); },
      py::arg("reference"), py::arg("perturbed"), py::arg("window") = 17, py::arg("horizon") = 500);

  m.def(
      "esn_run",
      [](const std::vector<double>& inputs, int n_nodes, double radius, const std::string& input_case,
         std::uint64_t seed) {
        const auto e = esn_build(n_nodes, radius, parse_input_case(input_case), seed);
        return esn_run(e, inputs, Phases{0, inputs.size(), 0}).data;
      },
      py::arg("inputs"), py::arg("n_nodes") = 50, py::arg("radius") = 0.9, py::arg("input_case") = "case2",
      py::arg("seed") = 0);

  m.def(
      "validate",
      [](std::uint64_t seed, int density_steps) {
        ValidateOptions o;
        o.seed = seed;
        o.density_steps = density_steps;
        ValidationReport r;
        {
          py::gil_scoped_release release;
          r = validate(o);
        }
        py::dict d;
        for (const auto& g : r.groups) d[py::str(g.name)] = py::make_tuple(g.passed, g.detail);
        return d;
      },
      py::arg("seed") = 0, py::arg("density_steps") = 10000, "Run the invariant groups; name -> (passed, detail).");

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::string& kind) {
        std::istringstream in(config_text);
        const auto c = kind.empty() ? parse_config(in) : parse_config(in, parse_kind(kind));
        c.validate();
        std::string json;
        {
          py::gil_scoped_release release;
          json = summary_json(run_experiment(c));
        }
        return json;
      },
      py::arg("config"), py::arg("kind") = "",
      "Run a sweep from `key = value` text; returns the summary JSON string.");
}
