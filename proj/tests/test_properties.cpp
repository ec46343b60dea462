// Randomised invariant checks. Each case draws its inputs from oracle::Gen
// with a fixed seed so failures reproduce; the trial index is in the message.

#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qrc/esn.hpp"
#include "qrc/qcore.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/tasks.hpp"

using namespace qrc;

namespace {

constexpr int kTrials = 40;

DensityMatrix random_state(oracle::Gen& g, int n) {
  Rng rng(g.next());
  return DensityMatrix::random(n, rng);
}

Hamiltonian random_hamiltonian(oracle::Gen& g, int n) {
  Rng rng(g.next());
  const auto topo = g.integer(0, 1) ? Topology::kFullyConnected : Topology::kOneDNearestNeighbour;
  return build_hamiltonian(n, g.uniform(0, 3), g.uniform(-2, 2), topo, rng);
}

std::vector<double> random_seq(oracle::Gen& g, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("property: evolution keeps density matrices valid") {
  oracle::Gen g(1);
  for (int t = 0; t < kTrials; ++t) {
    CAPTURE(t);
    const int n = g.integer(1, 4);
    const auto rho = random_state(g, n);
    const auto h = random_hamiltonian(g, n);
    const auto out = evolve(rho, propagator(h, g.uniform(0, 10)));
    const auto rep = check_density_matrix(out, true);
    CHECK(rep.trace_error < 1e-10);
    CHECK(rep.hermiticity_error < 1e-10);
    CHECK(*rep.min_eigenvalue > -1e-10);
    CHECK(std::abs(purity(out) - purity(rho)) < 1e-10);
  }
}

TEST_CASE("property: propagators are unitary and compose") {
  oracle::Gen g(2);
  for (int t = 0; t < kTrials; ++t) {
    CAPTURE(t);
    const int n = g.integer(1, 5);
    const auto h = random_hamiltonian(g, n);
    const double a = g.uniform(0, 5), b = g.uniform(0, 5);
    const auto u = propagator(h, a);
    CHECK(max_unitarity_error(u.matrix()) < 1e-9);
    CHECK((u.at(a + b).matrix() - u.at(b).matrix() * u.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("property: injection is idempotent, keeps the rest, fixes qubit 0") {
  oracle::Gen g(3);
  for (int t = 0; t < kTrials; ++t) {
    CAPTURE(t);
    const int n = g.integer(2, 4);
    const auto rho = random_state(g, n);
    const double s = g.uniform();
    const auto once = inject_input(rho, s);
    CHECK((inject_input(once, s).matrix() - once.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(signal(once, 0) - (1 - s)) < 1e-12);
    CHECK((partial_trace_first(once).matrix() - oracle::partial_trace_first(rho.matrix())).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(check_density_matrix(once, true).ok);
  }
}

TEST_CASE("property: dephasing is linear, trace preserving, purity non-increasing") {
  oracle::Gen g(4);
  for (int t = 0; t < kTrials; ++t) {
    CAPTURE(t);
    const int n = g.integer(1, 4);
    const auto r1 = random_state(g, n);
    const auto r2 = random_state(g, n);
    const double a = g.uniform();
    const double gamma = g.uniform(0, 2), dt = g.uniform(0.01, 2);
    const auto axis = g.integer(0, 1) ? PauliAxis::kZ : PauliAxis::kX;
    const DensityMatrix mix(n, a * r1.matrix() + (1 - a) * r2.matrix());
    const CMatrix lhs = dephase(mix, gamma, dt, axis).matrix();
    const CMatrix rhs = a * dephase(r1, gamma, dt, axis).matrix() + (1 - a) * dephase(r2, gamma, dt, axis).matrix();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    const auto d1 = dephase(r1, gamma, dt, axis);
    CHECK(std::abs(d1.trace() - Complex(1, 0)) < 1e-10);
    CHECK(purity(d1) <= purity(r1) + 1e-10);
  }
}

TEST_CASE("property: noiseless reservoir signals stay in [0, 1]") {
  oracle::Gen g(5);
  for (int t = 0; t < 12; ++t) {
    CAPTURE(t);
    ReservoirConfig c;
    c.n_qubits = g.integer(1, 4);
    c.virtual_nodes = g.integer(1, 4);
    c.tau = g.uniform(0.1, 5);
    c.coupling = g.uniform(0, 2);
    c.field = g.uniform(-1, 1);
    c.seed = g.next();
    if (g.integer(0, 1)) c.noise.dephasing_rate = g.uniform(0, 0.1);
    c.phases = {0, 200, 0};
    const auto m = run(c, random_seq(g, 200, 0, 1));
    CHECK(m.data.rightCols(m.cols() - 1).minCoeff() >= -1e-10);
    CHECK(m.data.rightCols(m.cols() - 1).maxCoeff() <= 1 + 1e-10);
    CHECK((m.data.col(0).array() == 1.0).all());
  }
}

TEST_CASE("property: step index counts inputs") {
  oracle::Gen g(6);
  ReservoirConfig c;
  c.n_qubits = 2;
  c.virtual_nodes = 2;
  const ReservoirSystem sys(c);
  auto st = init_state(sys);
  const int steps = g.integer(5, 50);
  for (int k = 0; k < steps; ++k) st = step(st, g.uniform(), sys).state;
  CHECK(st.step_index() == static_cast<std::size_t>(steps));
}

TEST_CASE("property: least squares beats every perturbation") {
  oracle::Gen g(7);
  for (int t = 0; t < kTrials; ++t) {
    CAPTURE(t);
    const int rows = g.integer(12, 120);
    const int cols = g.integer(1, 10);
    Matrix x(rows, cols);
    for (auto& v : x.reshaped()) v = g.uniform(-1, 1);
    if (cols > 2 && g.integer(0, 1)) x.col(cols - 1) = x.col(0) + x.col(1);  // rank deficient
    Vector y(rows);
    for (auto& v : y) v = g.uniform(-1, 1);
    const auto w = train(x, y);
    CHECK(std::abs((x * w.weights - y).squaredNorm() / rows - w.training_residual) < 1e-12);
    for (int p = 0; p < 10; ++p) {
      Vector d(cols);
      for (auto& v : d) v = g.uniform(-1, 1);
      const double eps = std::pow(10.0, g.uniform(-6, 0));
      CHECK((x * (w.weights + eps * d) - y).squaredNorm() / rows >= w.training_residual - 1e-15);
    }
  }
}

TEST_CASE("property: capacity is affine invariant, nmse scales quadratically") {
  oracle::Gen g(8);
  for (int t = 0; t < kTrials; ++t) {
    CAPTURE(t);
    const auto n = static_cast<std::size_t>(g.integer(5, 300));
    const auto a = random_seq(g, n, -1, 1);
    const auto b = random_seq(g, n, -1, 1);
    double slope = g.uniform(-5, 5);
    if (std::abs(slope) < 1e-3) slope = 1.0;
    const double shift = g.uniform(-10, 10);
    std::vector<double> a2(n);
    for (std::size_t i = 0; i < n; ++i) a2[i] = slope * a[i] + shift;
    CHECK(std::abs(capacity_single(a2, b) - capacity_single(a, b)) < 1e-10);
    CHECK(std::abs(capacity_single(b, a2) - oracle::r2(a, b)) < 1e-10);
    const double c = g.uniform(-3, 3);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i) scaled[i] = c * b[i];
    CHECK(std::abs(nmse(scaled, b) - (c - 1) * (c - 1)) < 1e-10);
  }
}

TEST_CASE("property: parity equals memory at delay zero, targets binary") {
  oracle::Gen g(9);
  for (int t = 0; t < kTrials; ++t) {
    Rng rng(g.next());
    const auto s = random_binary_inputs(static_cast<std::size_t>(g.integer(1, 100)), rng);
    CHECK(pc_target(s, 0) == stm_target(s, 0));
    const int d = g.integer(0, 20);
    const auto pc = pc_target(s, d);
    for (std::size_t k = 0; k < s.size(); ++k) {
      int acc = 0;
      for (int m = 0; m <= d; ++m)
        if (static_cast<long>(k) - m >= 0) acc += static_cast<int>(s[k - static_cast<std::size_t>(m)]);
      CHECK(pc[k] == acc % 2);
    }
  }
}

TEST_CASE("property: ESN states bounded, radius exact") {
  oracle::Gen g(10);
  for (int t = 0; t < 20; ++t) {
    CAPTURE(t);
    const int n = g.integer(1, 30);
    const double r = g.uniform(0.05, 2.0);
    const auto e = esn_build(n, r, g.integer(0, 1) ? InputCase::kCaseI : InputCase::kCaseII, g.next());
    CHECK(std::abs(spectral_radius(e.internal_weights) - r) < 1e-8);
    Vector x = Vector::Zero(n);
    for (int k = 0; k < 100; ++k) {
      x = esn_step(x, static_cast<double>(g.integer(0, 1)), e);
      CHECK(x.cwiseAbs().maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("property: Lyapunov estimator recovers planted rates") {
  oracle::Gen g(11);
  for (int t = 0; t < kTrials; ++t) {
    const double lambda = g.uniform(-0.004, 0.01);
    const double d0 = std::pow(10.0, g.uniform(-5, -3));
    std::vector<double> y(520), yp(520);
    for (std::size_t k = 0; k < 520; ++k) {
      y[k] = g.uniform();
      yp[k] = y[k] + d0 * std::exp(lambda * static_cast<double>(k));
    }
    CHECK(std::abs(lyapunov_estimate(y, yp) - lambda) < 1e-9);
  }
}
