#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qrc/error.hpp"
#include "qrc/tasks.hpp"

using namespace qrc;

TEST_CASE("timer stream") {
  const auto t0 = timer_stream(500, 0, 800);
  CHECK(t0.targets.at(0)[500] == 1.0);
  const auto t = timer_stream(500, 10, 800);
  double sum = 0.0;
  for (std::size_t k = 0; k < 800; ++k) {
    CHECK(t.inputs[k] == (k >= 500 ? 1.0 : 0.0));
    CHECK(t.targets[0][k] == (k == 510 ? 1.0 : 0.0));
    sum += t.targets[0][k];
  }
  CHECK(sum == 1.0);
  CHECK(t.phases.washout == 400);
  CHECK_THROWS_AS(timer_stream(500, 300, 800), ParameterError);
}

TEST_CASE("narma2: one step and fixed point") {
  CHECK(narma2_step(0.0, 0.0, 0.2) == doctest::Approx(0.1048).epsilon(1e-15));
  double y = 0.0, prev = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double next = narma2_step(y, prev, 0.0);
    prev = y;
    y = next;
  }
  CHECK(std::abs(y - (0.6 - std::sqrt(0.2)) / 0.8) < 1e-9);
  CHECK(std::abs(y - 0.19098) < 1e-5);
  CHECK_THROWS_AS(narma2_step(20.0, 20.0, 0.1), DivergenceError);
}

TEST_CASE("narma n: zero history gives delta") {
  for (int n : {5, 10, 15, 20}) {
    const std::vector<double> y(static_cast<std::size_t>(n), 0.0), s(static_cast<std::size_t>(n), 0.0);
    CHECK(narma_n_step(y, s, n) == doctest::Approx(0.1));
  }
  CHECK_THROWS_AS(narma_n_step(std::vector<double>(3, 0.0), std::vector<double>(3, 0.0), 3), ParameterError);
}

TEST_CASE("narma n: hand-evaluated step") {
  // order 5, history y_{k-4..k}, inputs s_{k-4..k}; oldest first.
  const std::vector<double> y{0.10, 0.12, 0.15, 0.11, 0.13};
  const std::vector<double> s{0.05, 0.10, 0.02, 0.18, 0.07};
  const double sum = 0.10 + 0.12 + 0.15 + 0.11 + 0.13;
  const double want = 0.3 * 0.13 + 0.05 * 0.13 * sum + 1.5 * 0.05 * 0.07 + 0.1;
  CHECK(narma_n_step(y, s, 5) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("narma series: independent recursion") {
  oracle::Gen g(1);
  std::vector<double> s(300);
  for (auto& v : s) v = g.uniform(0, 0.2);
  for (int order : {2, 5, 10, 15, 20}) {
    const auto series = narma_series(order, s);
    // Reference: element k is y_{k+1}, built from y_k history with zero padding.
    std::vector<double> y(s.size() + 1, 0.0);  // y[0] = y_0 = 0
    auto yy = [&](long i) { return i < 0 ? 0.0 : y[static_cast<std::size_t>(i)]; };
    auto ss = [&](long i) { return i < 0 ? 0.0 : s[static_cast<std::size_t>(i)]; };
    for (long k = 0; k < static_cast<long>(s.size()); ++k) {
      double next;
      if (order == 2) {
        next = 0.4 * yy(k) + 0.4 * yy(k) * yy(k - 1) + 0.6 * ss(k) * ss(k) * ss(k) + 0.1;
      } else {
        double acc = 0.0;
        for (long j = 0; j < order; ++j) acc += yy(k - j);
        next = 0.3 * yy(k) + 0.05 * yy(k) * acc + 1.5 * ss(k - order + 1) * ss(k) + 0.1;
      }
      y[static_cast<std::size_t>(k + 1)] = next;
    }
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(series[k] == doctest::Approx(y[k + 1]).epsilon(1e-14));
  }
}

TEST_CASE("narma bounded over 1e5 steps") {
  oracle::Gen g(2);
  std::vector<double> s(100000);
  for (auto& v : s) v = g.uniform(0, 0.2);
  for (int order : {2, 5, 10, 15, 20}) {
    const auto y = narma_series(order, s);
    CHECK(*std::max_element(y.begin(), y.end()) < 1.0);
    CHECK(*std::min_element(y.begin(), y.end()) > -1.0);
  }
}

TEST_CASE("sine input") {
  CHECK(sine_input(0) == doctest::Approx(0.1));
  const double pi = std::numbers::pi;
  const double want = 0.1 * (std::sin(pi * 2.11 / 2) * std::sin(pi * 3.73 / 2) * std::sin(pi * 4.11 / 2) + 1);
  CHECK(sine_input(25) == doctest::Approx(want).epsilon(1e-14));
  for (std::size_t k = 0; k < 10000; ++k) {
    CHECK(sine_input(k) >= 0.0);
    CHECK(sine_input(k) <= 0.2);
  }
}

TEST_CASE("narma suite stream") {
  Rng rng(3);
  const auto st = narma_suite_stream(InputKind::kSine, rng);
  CHECK(st.inputs.size() == 5000);
  CHECK(st.targets.size() == 5);
  for (std::size_t k = 0; k < 5000; ++k) CHECK(st.inputs[k] == doctest::Approx(5 * st.raw_inputs[k]));
  CHECK(st.targets[1] == narma_series(5, st.raw_inputs));
  Rng r1(4), r2(4);
  const auto a = narma_suite_stream(InputKind::kUniformRandom, r1);
  const auto b = narma_suite_stream(InputKind::kUniformRandom, r2);
  CHECK(a.inputs == b.inputs);
  CHECK(*std::max_element(a.raw_inputs.begin(), a.raw_inputs.end()) <= 0.2);
  CHECK(*std::min_element(a.inputs.begin(), a.inputs.end()) >= 0.0);
}

TEST_CASE("mackey glass: fixed point and step") {
  CHECK(mackey_glass_step(1.0, 1.0, 0.1) == 1.0);
  const double y = 0.8, yd = 1.3;
  CHECK(mackey_glass_step(y, yd, 0.1) == doctest::Approx(y + 0.1 * (0.2 * yd / (1 + std::pow(yd, 10)) - 0.1 * y)));
  MackeyGlassOptions o;
  o.initial_value = 1.0;
  const auto s = mackey_glass_series(17, 500, o);
  for (double v : s) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("mackey glass: independent integration") {
  MackeyGlassOptions o;
  o.washout = 50;
  const auto s = mackey_glass_series(17, 300, o);
  // Plain vector history, delay 170 fine steps; h[170 + f] is y_f.
  std::vector<double> h(171, 1.2);
  const std::size_t fine = (50 + 300) * 10;
  for (std::size_t i = 0; i < fine; ++i) {
    const double y = h.back(), yd = h[h.size() - 171];
    h.push_back(y + 0.1 * (0.2 * yd / (1 + std::pow(yd, 10)) - 0.1 * y));
  }
  for (std::size_t k = 0; k < 300; ++k) CHECK(std::abs(s[k] - h[170 + 500 + 10 * k]) < 1e-12);
}

TEST_CASE("mackey glass stream and errors") {
  const auto st = mackey_glass_stream(17.0, 3000, {}, Phases{0, 2000, 1000});
  CHECK(*std::min_element(st.inputs.begin(), st.inputs.end()) == 0.0);
  CHECK(*std::max_element(st.inputs.begin(), st.inputs.end()) == 1.0);
  CHECK(st.metadata.at("mg_max") > st.metadata.at("mg_min"));
  CHECK_THROWS_AS(mackey_glass_series(17.05, 10), ParameterError);
  CHECK(mackey_glass_lyapunov(17.0) > 0.0);
}

TEST_CASE("stm and pc targets") {
  const std::vector<double> s{1, 1, 0, 1};
  CHECK(stm_target(s, 0) == s);
  CHECK(pc_target(s, 0) == s);
  CHECK(pc_target(s, 1) == std::vector<double>{1, 0, 1, 1});
  CHECK(stm_target(s, 2) == std::vector<double>{0, 0, 1, 1});
  const std::vector<double> w{1, 0, 1};
  CHECK(pc_target(w, 2)[2] == 0.0);
  CHECK_THROWS_AS(stm_target(s, -1), ParameterError);
}

TEST_CASE("capacity: perfect memory oracle reservoir") {
  Rng rng(5);
  const Phases ph{100, 3000, 10000};
  const auto s = random_binary_inputs(ph.total(), rng);
  SignalMatrix m;
  m.n_nodes = 11;
  m.virtual_nodes = 1;
  m.phases = ph;
  m.data.resize(static_cast<Eigen::Index>(ph.total()), 12);
  m.data.col(0).setOnes();
  for (int d = 0; d <= 10; ++d) {
    const auto t = stm_target(s, d);
    for (std::size_t k = 0; k < t.size(); ++k) m.data(static_cast<Eigen::Index>(k), d + 1) = t[k];
  }
  const auto r = capacity_from_signals(m, s, 40);
  CHECK(r.stm.total == doctest::Approx(11.0).epsilon(0.1 / 11));
  for (int d = 0; d <= 10; ++d) CHECK(r.stm.raw[static_cast<std::size_t>(d)] == doctest::Approx(1.0));
  CHECK(r.stm.corrected.back() == 0.0);
  // Parity at delay 0 equals STM at delay 0.
  CHECK(r.pc.raw[0] == doctest::Approx(r.stm.raw[0]));
}

TEST_CASE("capacity curve bias correction zeroes the last delay") {
  ReservoirConfig c;
  c.n_qubits = 2;
  c.virtual_nodes = 2;
  c.phases = {50, 300, 200};
  const auto st = capacity_curve(c, CapacityTask::kStm, 30, 2);
  CHECK(st.per_sample.size() == 2);
  CHECK(st.mean_per_delay.back() == 0.0);
  CHECK(st.mean_per_delay.size() == 31);
}

TEST_CASE("lyapunov examples") {
  std::vector<double> y(600), off(600), grow(600);
  for (std::size_t k = 0; k < 600; ++k) {
    // small magnitudes keep y + 1e-8 free of visible rounding
    y[k] = 1e-3 * std::sin(0.1 * static_cast<double>(k));
    off[k] = y[k] + 1e-8;
    grow[k] = y[k] + 1e-8 * std::exp(0.003 * static_cast<double>(k));
  }
  CHECK(std::abs(lyapunov_estimate(y, off)) < 1e-12);
  CHECK(std::abs(lyapunov_estimate(y, grow) - 0.003) < 1e-9);
  CHECK_THROWS_AS(lyapunov_estimate(y, y), UndefinedMeasureError);
  CHECK_THROWS_AS(lyapunov_estimate(std::vector<double>(100, 0.0), std::vector<double>(100, 1.0)), DimensionError);
}

TEST_CASE("linear regression baseline: affine target") {
  oracle::Gen g(6);
  std::vector<double> s(500), t(500);
  for (std::size_t k = 0; k < 500; ++k) {
    s[k] = g.uniform(0, 0.2);
    t[k] = 0.3 + 2.0 * s[k];
  }
  const auto r = linear_regression_baseline(s, t, Phases{50, 300, 150});
  CHECK(r.nmse <= 1e-20);
  CHECK(r.outputs.size() == 150);
}

TEST_CASE("narma from signals: five readouts on one design") {
  Rng rng(7);
  const auto st = narma_suite_stream(InputKind::kSine, rng, Phases{100, 400, 200});
  ReservoirConfig c;
  c.n_qubits = 3;
  c.virtual_nodes = 2;
  c.phases = st.phases;
  const ReservoirSystem sys(c);
  const auto sig = run(sys, st.inputs, st.phases, 1);
  const auto r = narma_from_signals(sig, st);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& y = st.targets[i];
    const Vector tgt = Eigen::Map<const Vector>(y.data() + 100, 400);
    const auto w = train(sig.train_rows(), tgt);
    const Vector pred = predict(sig.eval_rows(), w);
    const std::vector<double> out(pred.data(), pred.data() + pred.size());
    const std::vector<double> ev(y.begin() + 500, y.begin() + 700);
    CHECK(r.nmse[i] == doctest::Approx(nmse(out, ev)).epsilon(1e-9));
    CHECK(r.baseline_nmse[i] > 0.0);
  }
}
