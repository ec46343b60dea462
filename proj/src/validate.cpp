#include "qrc/validate.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "qrc/error.hpp"
#include "qrc/qcore.hpp"
#include "qrc/readout.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/tasks.hpp"

namespace qrc {

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail << what;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

Check density_matrix_group(const ValidateOptions& o) {
  Check c;
  double worst_trace = 0.0;
  double worst_herm = 0.0;
  double worst_eig = 0.0;
  // Half the steps on the unitary (eigenbasis) engine, half with dephasing.
  const int half = o.density_steps / 2;
  for (int variant = 0; variant < 2 && c.ok; ++variant) {
    ReservoirConfig cfg;
    cfg.n_qubits = 3;
    cfg.virtual_nodes = 4;
    cfg.seed = derive_seed(o.seed, {11, static_cast<std::uint64_t>(variant)});
    if (variant == 1) {
      cfg.noise.dephasing_rate = 0.05;
      cfg.noise.dephasing_axis = PauliAxis::kX;
    }
    const ReservoirSystem sys(cfg);
    Rng rng = make_rng(cfg.seed, Stream::kInputs);
    Rng init = make_rng(cfg.seed, Stream::kInitialState);
    std::uniform_real_distribution<double> draw(0.0, 1.0);
    ReservoirState state = init_state(sys, DensityMatrix::random(cfg.n_qubits, init));
    RowVector signals(cfg.n_qubits * cfg.virtual_nodes);
    const int steps = variant == 0 ? half : o.density_steps - half;
    for (int k = 0; k < steps; ++k) {
      step_in_place(state, draw(rng), sys, signals);
      DensityMatrix rho = state.density_matrix();
      if (o.inject_fault == "trace" && k == steps / 2) {
        CMatrix m = rho.matrix() * 1.01;
        rho = DensityMatrix(rho.n_qubits(), std::move(m));
      }
      const auto r = check_density_matrix(rho, true);
      worst_trace = std::max(worst_trace, r.trace_error);
      worst_herm = std::max(worst_herm, r.hermiticity_error);
      worst_eig = std::min(worst_eig, r.min_eigenvalue.value_or(0.0));
      c.require(r.trace_error <= 1e-10, "trace error " + fmt(r.trace_error) + " at step " + std::to_string(k));
      c.require(r.hermiticity_error <= 1e-10, "Hermiticity error " + fmt(r.hermiticity_error));
      c.require(r.min_eigenvalue.value_or(0.0) >= -1e-9, "negative eigenvalue " + fmt(*r.min_eigenvalue));
      for (Eigen::Index i = 0; i < signals.size(); ++i)
        c.require(signals(i) >= -1e-9 && signals(i) <= 1.0 + 1e-9, "signal outside [0, 1]");
      if (!c.ok) break;
    }
  }
  if (c.ok)
    c.detail << o.density_steps << " steps; max trace err " << fmt(worst_trace) << ", max herm err "
             << fmt(worst_herm) << ", min eig " << fmt(worst_eig);
  return c;
}

Check unitarity_group(const ValidateOptions& o) {
  Check c;
  double worst = 0.0;
  Rng rng(derive_seed(o.seed, {12}));
  for (int n = 1; n <= 6; ++n) {
    for (Topology t : {Topology::kFullyConnected, Topology::kOneDNearestNeighbour}) {
      const auto h = build_hamiltonian(n, 1.0, 0.5, t, rng);
      for (double dt : {0.01, 0.1, 1.0, 2.56, 128.0}) {
        CMatrix u = propagator(h, dt).matrix();
        if (o.inject_fault == "unitarity" && n == 3) u *= 1.0 + 1e-6;
        const double err = max_unitarity_error(u);
        worst = std::max(worst, err);
        c.require(err <= 1e-9, "N=" + std::to_string(n) + " dt=" + fmt(dt) + ": error " + fmt(err));
      }
    }
  }
  if (c.ok) c.detail << "N=1..6, 5 time steps; max |UU^dagger - I| " << fmt(worst);
  return c;
}

Check operator_space_group(const ValidateOptions& o) {
  Check c;
  Rng rng(derive_seed(o.seed, {13}));
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = build_hamiltonian(2, 1.0, 0.5, Topology::kFullyConnected, rng);
    const Matrix m = operator_space_map(propagator(h, 1.0).matrix(), 2);
    const double err = (m * m.transpose() - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    c.require(err <= 1e-8, "U U^T deviates from I by " + fmt(err));
  }
  if (c.ok) c.detail << "5 random N=2 Hamiltonians; max |U U^T - I| " << fmt(worst);
  return c;
}

Check nonlinearity_group() {
  Check c;
  double worst = 0.0;
  const CMatrix gate = cnot(2, 0, 1);
  for (double s1 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double s2 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Eigen::Vector2d a = input_amplitudes(s1);
      const Eigen::Vector2d b = input_amplitudes(s2);
      CVector psi(4);
      psi << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
      const auto out = apply_unitary(DensityMatrix::pure(psi), gate);
      const double err = std::abs(expect_z(out, 1) - (1.0 - 2.0 * s1) * (1.0 - 2.0 * s2));
      worst = std::max(worst, err);
      c.require(err <= 1e-12, "(s1, s2) = (" + std::to_string(s1) + ", " + std::to_string(s2) + "): error " +
                                  fmt(err));
    }
  }
  if (c.ok) c.detail << "25 grid points; max error " << fmt(worst);
  return c;
}

Check pseudoinverse_group(const ValidateOptions& o) {
  Check c;
  Rng rng(derive_seed(o.seed, {14}));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    Matrix x(200, 12);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    if (trial == 2) x.col(11) = x.col(3);  // rank deficient
    Vector y(200);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = gauss(rng);
    const auto w = train(x, y);
    const double base = (x * w.weights - y).squaredNorm();
    const double grad = (x.transpose() * (x * w.weights - y)).cwiseAbs().maxCoeff();
    c.require(grad <= 1e-9 * y.norm() * x.norm(), "normal equations violated by " + fmt(grad));
    for (int p = 0; p < 20; ++p) {
      Vector dw(12);
      for (Eigen::Index i = 0; i < dw.size(); ++i) dw(i) = 1e-3 * gauss(rng);
      c.require((x * (w.weights + dw) - y).squaredNorm() >= base - 1e-12 * base,
                "perturbed weights reduced the residual");
    }
    if (trial == 2) c.require(w.rank == 11, "rank-deficient design reported rank " + std::to_string(w.rank));
  }
  if (c.ok) c.detail << "3 designs x 20 perturbations, including a rank-deficient one";
  return c;
}

Check dephasing_group(const ValidateOptions& o) {
  Check c;
  Rng rng(derive_seed(o.seed, {15}));
  const auto random = DensityMatrix::random(3, rng);
  CMatrix diag = CMatrix::Zero(8, 8);
  diag.diagonal() = random.matrix().diagonal();
  const DensityMatrix classical(3, diag);
  const double zfix = (dephase(classical, 0.3, 0.7, PauliAxis::kZ).matrix() - diag).cwiseAbs().maxCoeff();
  c.require(zfix <= 1e-14, "z-dephasing moved a diagonal state by " + fmt(zfix));
  const auto mixed = DensityMatrix::maximally_mixed(3);
  for (PauliAxis axis : {PauliAxis::kX, PauliAxis::kZ}) {
    const double err = (dephase(mixed, 0.3, 0.7, axis).matrix() - mixed.matrix()).cwiseAbs().maxCoeff();
    c.require(err <= 1e-14, "dephasing moved the maximally mixed state by " + fmt(err));
  }
  CVector plus = CVector::Constant(8, 1.0 / std::sqrt(8.0));
  const auto xstate = DensityMatrix::pure(plus);
  const double xfix = (dephase(xstate, 0.3, 0.7, PauliAxis::kX).matrix() - xstate.matrix()).cwiseAbs().maxCoeff();
  c.require(xfix <= 1e-14, "x-dephasing moved |+++> by " + fmt(xfix));
  CVector one_plus = CVector::Constant(2, 1.0 / std::sqrt(2.0));
  const auto p = dephase(DensityMatrix::pure(one_plus), 0.25, 2.0, PauliAxis::kZ);
  const double coh = std::abs(p.matrix()(0, 1) - 0.5 * std::exp(-1.0));
  c.require(coh <= 1e-14, "coherence decay off by " + fmt(coh));
  if (c.ok) c.detail << "diagonal, maximally mixed and |+> fixed points; coherence decay exp(-2 gamma t)";
  return c;
}

Check narma_group() {
  Check c;
  const double fixed = (0.6 - std::sqrt(0.2)) / 0.8;
  double y = 0.0;
  double prev = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double next = narma2_step(y, prev, 0.0);
    prev = y;
    y = next;
  }
  c.require(std::abs(y - fixed) <= 1e-9, "NARMA2 fixed point off by " + fmt(std::abs(y - fixed)));
  c.require(std::abs(narma2_step(0.0, 0.0, 0.2) - 0.1048) <= 1e-15, "NARMA2 one-step value wrong");
  const std::vector<double> zeros(5, 0.0);
  c.require(narma_n_step(zeros, zeros, 5) == 0.1, "NARMA5 from rest differs from 0.1");
  if (c.ok) c.detail << "y* = " << fixed << " reached to " << fmt(std::abs(y - fixed));
  return c;
}

Check mackey_glass_group() {
  Check c;
  double worst = 0.0;
  double y = 1.0;
  for (int k = 0; k < 1000; ++k) {
    const double next = mackey_glass_step(y, 1.0, 0.1);
    worst = std::max(worst, std::abs(next - y));
    y = next;
  }
  c.require(worst <= 1e-12, "constant-1 history drifted by " + fmt(worst));
  if (c.ok) c.detail << "y* = 1 stationary; max step change " << fmt(worst);
  return c;
}

Check lyapunov_group() {
  Check c;
  constexpr double rate = 0.003;
  std::vector<double> y(600);
  std::vector<double> yp(600);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = 0.3 + 0.1 * std::sin(0.37 * static_cast<double>(i));
    yp[i] = y[i] + 1e-6 * std::exp(rate * static_cast<double>(i));
  }
  const double est = lyapunov_estimate(y, yp, 17, 500);
  c.require(std::abs(est - rate) <= 1e-9, "estimated " + fmt(est) + " instead of 0.003");
  if (c.ok) c.detail << "recovered " << est;
  return c;
}

}  // namespace

bool ValidationReport::passed() const {
  for (const auto& g : groups)
    if (!g.passed) return false;
  return !groups.empty();
}

std::vector<std::string> invariant_groups() {
  return {"density-matrix",        "propagator-unitarity",   "operator-space-orthogonality",
          "nonlinearity-identity", "pseudoinverse-optimality", "dephasing-fixed-points",
          "narma-fixed-point",     "mackey-glass-fixed-point", "lyapunov-synthetic"};
}

ValidationReport validate(const ValidateOptions& o) {
  if (!o.inject_fault.empty() && o.inject_fault != "trace" && o.inject_fault != "unitarity")
    throw ParameterError("unknown fault '" + o.inject_fault + "' (expected trace or unitarity)");
  const std::vector<std::function<Check()>> runs{
      [&] { return density_matrix_group(o); }, [&] { return unitarity_group(o); },
      [&] { return operator_space_group(o); }, [] { return nonlinearity_group(); },
      [&] { return pseudoinverse_group(o); },  [&] { return dephasing_group(o); },
      [] { return narma_group(); },            [] { return mackey_glass_group(); },
      [] { return lyapunov_group(); }};
  const auto names = invariant_groups();
  ValidationReport report;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    InvariantResult r;
    r.name = names[i];
    try {
      Check c = runs[i]();
      r.passed = c.ok;
      r.detail = c.detail.str();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    report.groups.push_back(std::move(r));
  }
  return report;
}

}  // namespace qrc
