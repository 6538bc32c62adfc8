#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "selmeta/dynamics.hpp"
#include "selmeta/errors.hpp"

using namespace selmeta;

namespace {

PhaseState one(Point2 q, Vec2 p) { return PhaseState{{q}, {p}}; }

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("rhs of a lone landmark") {
  const KernelParams kp{0.5};
  auto v = rhs(one({0, 0}, {1, 0}), NuField::zero(), kp);
  CHECK(v.dq[0] == Vec2(1, 0));
  CHECK(v.dp[0] == Vec2(0, 0));

  // centroid under the landmark: nu = 1 there (plus a floor), grad nu = 0
  NuField f{{{0, 0}}, 0.04, 0.04};
  v = rhs(one({0, 0}, {1, 0}), f, kp);
  CHECK(v.dq[0].x() == doctest::Approx(2.04));
  CHECK(v.dq[0].y() == 0.0);
  CHECK(v.dp[0] == Vec2(0, 0));

  // constant field only rescales the velocity
  v = rhs(one({0.3, 0.2}, {1, 0}), NuField::constant(0.04), kp);
  CHECK(v.dq[0].x() == doctest::Approx(1.04).epsilon(1e-15));
  CHECK(v.dp[0] == Vec2(0, 0));
}

TEST_CASE("rhs is the symplectic gradient of the hamiltonian") {
  std::mt19937_64 rng(101);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 100; ++trial) {
    const PhaseState s = oracle::random_state(rng, 3);
    const NuField f = oracle::random_field(rng, 2);
    const PhaseVelocity v = rhs(s, f, kp);
    const double h = 1e-6;
    for (std::size_t i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        PhaseState a = s, b = s;
        a.p[i][c] += h;
        b.p[i][c] -= h;
        const double dh_dp = (hamiltonian(a, f, kp) - hamiltonian(b, f, kp)) / (2 * h);
        a = s;
        b = s;
        a.q[i][c] += h;
        b.q[i][c] -= h;
        const double dh_dq = (hamiltonian(a, f, kp) - hamiltonian(b, f, kp)) / (2 * h);
        CHECK(std::abs(v.dq[i][c] - dh_dp) <= 1e-5 * std::max(1.0, std::abs(dh_dp)));
        CHECK(std::abs(v.dp[i][c] + dh_dq) <= 1e-5 * std::max(1.0, std::abs(dh_dq)));
      }
    }
  }
}

TEST_CASE("hamiltonian closed forms") {
  const KernelParams kp{0.5};
  CHECK(hamiltonian(one({0, 0}, {1, 0}), NuField::zero(), kp) == 0.5);
  CHECK(hamiltonian(one({0, 0}, {1, 0}), NuField::constant(1.0), kp) == 1.0);
  std::mt19937_64 rng(1);
  PhaseState s = oracle::random_state(rng, 4);
  for (auto& p : s.p) p.setZero();
  CHECK(hamiltonian(s, oracle::random_field(rng, 3), kp) == 0.0);
}

TEST_CASE("rhs jacobian against central differences") {
  std::mt19937_64 rng(202);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const PhaseState s = oracle::random_state(rng, m);
    const NuField f = oracle::random_field(rng, trial % 3);
    const Eigen::MatrixXd jac = rhs_jacobian(s, f, kp);
    const Eigen::VectorXd y = s.flatten();
    auto flat = [&](const Eigen::VectorXd& z) {
      const PhaseVelocity v = rhs(PhaseState::unflatten(z), f, kp);
      Eigen::VectorXd out(4 * m);
      for (std::size_t i = 0; i < m; ++i) {
        out.segment<2>(2 * i) = v.dq[i];
        out.segment<2>(2 * (m + i)) = v.dp[i];
      }
      return out;
    };
    for (Eigen::Index c = 0; c < y.size(); ++c) {
      Eigen::VectorXd a = y, b = y;
      a[c] += 1e-6;
      b[c] -= 1e-6;
      const Eigen::VectorXd col = (flat(a) - flat(b)) / 2e-6;
      CHECK((jac.col(c) - col).norm() <= 1e-6 * std::max(1.0, col.norm()));
    }
  }
}

TEST_CASE("constant nu reduces to classical metamorphosis") {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> sig(0.01, 1.0);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 100; ++trial) {
    const PhaseState s = oracle::random_state(rng, 1 + trial % 5);
    const double sigma2 = sig(rng);
    const PhaseVelocity v = rhs(s, NuField::constant(sigma2), kp);
    const oracle::State ref = oracle::metamorphosis_rhs(oracle::from_phase(s), sigma2, kp.sigma_k_sq);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(v.dq[i][c] - ref.q[i][c]) <= 1e-12);
        CHECK(std::abs(v.dp[i][c] - ref.p[i][c]) <= 1e-12);
      }
  }
}

TEST_CASE("zero nu matches an independent landmark integrator") {
  std::mt19937_64 rng(404);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 20; ++trial) {
    const PhaseState s = oracle::random_state(rng, 1 + trial % 5);
    const PhaseState end = flow(s, NuField::zero(), kp);
    const oracle::State ref = oracle::lddmm_flow(oracle::from_phase(s), kp.sigma_k_sq, 100);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(end.q[i][c] - ref.q[i][c]) <= 1e-10);
        CHECK(std::abs(end.p[i][c] - ref.p[i][c]) <= 1e-10);
      }
  }
}

TEST_CASE("straight-line geodesic is exact") {
  const Trajectory t = integrate(one({0, 0}, {1, 0}), NuField::zero(), KernelParams{0.5});
  CHECK(t.states.size() == 101);
  CHECK(t.times.size() == 101);
  CHECK(t.hamiltonian_series.size() == 101);
  CHECK(t.times.front() == 0.0);
  CHECK(t.times.back() == 1.0);
  CHECK((t.final_state().q[0] - Vec2(1, 0)).norm() < 1e-12);
  CHECK((t.final_state().p[0] - Vec2(1, 0)).norm() < 1e-12);
  CHECK(t.action == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(action(t, NuField::zero(), KernelParams{0.5}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("hamiltonian is conserved and the drift is fourth order") {
  std::mt19937_64 rng(505);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 50; ++trial) {
    const PhaseState s = oracle::random_state(rng, 1 + trial % 5);
    const NuField f = oracle::random_field(rng, trial % 3);
    auto drift = [&](int n) {
      const Trajectory t = integrate(s, f, kp, IntegratorParams{n, 0.0, 1.0});
      double d = 0;
      for (double h : t.hamiltonian_series) d = std::max(d, std::abs(h - t.hamiltonian_series.front()));
      return d / std::max(1.0, std::abs(t.hamiltonian_series.front()));
    };
    CHECK(drift(100) < 1e-6);
  }
}

TEST_CASE("hamiltonian series and action agree with the stored states") {
  std::mt19937_64 rng(606);
  const KernelParams kp{0.49};
  const PhaseState s = oracle::random_state(rng, 3);
  const NuField f = oracle::random_field(rng, 2);
  const Trajectory t = integrate(s, f, kp, IntegratorParams{37, 0.5, 2.0});
  CHECK(t.states.size() == 38);
  for (std::size_t i = 0; i < t.states.size(); ++i) CHECK(t.hamiltonian_series[i] == hamiltonian(t.states[i], f, kp));
  for (std::size_t i = 1; i < t.times.size(); ++i) CHECK(t.times[i] > t.times[i - 1]);
  CHECK(t.times.back() == 2.0);
  CHECK(t.action == doctest::Approx(action(t, f, kp)).epsilon(1e-15));
  CHECK(t.action == doctest::Approx(1.5 * t.hamiltonian_series.front()).epsilon(1e-6));
}

TEST_CASE("zero momenta give zero action") {
  std::mt19937_64 rng(707);
  PhaseState s = oracle::random_state(rng, 3);
  for (auto& p : s.p) p.setZero();
  const Trajectory t = integrate(s, oracle::random_field(rng, 1), KernelParams{0.49});
  CHECK(t.action == 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.final_state().q[i] == s.q[i]);
}

TEST_CASE("geodesics are time reversible") {
  std::mt19937_64 rng(808);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 20; ++trial) {
    const PhaseState s = oracle::random_state(rng, 1 + trial % 4);
    const NuField f = oracle::random_field(rng, 1 + trial % 2);
    PhaseState back = flow(s, f, kp);
    for (auto& p : back.p) p = -p;
    const PhaseState again = flow(back, f, kp);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK((again.q[i] - s.q[i]).norm() < 1e-6);
      CHECK((again.p[i] + s.p[i]).norm() < 1e-6);
    }
  }
}

TEST_CASE("flow endpoint matches the stored trajectory") {
  std::mt19937_64 rng(909);
  const KernelParams kp{0.49};
  const PhaseState s = oracle::random_state(rng, 3);
  const NuField f = oracle::random_field(rng, 2);
  const Trajectory t = integrate(s, f, kp);
  const PhaseState e = flow(s, f, kp);
  const FlowSensitivity fs = flow_with_sensitivity(s, f, kp);
  CHECK(max_abs_diff(e.flatten(), t.final_state().flatten()) == 0.0);
  CHECK(max_abs_diff(fs.final_state.flatten(), e.flatten()) < 1e-13);
}

TEST_CASE("flow sensitivity against central differences") {
  std::mt19937_64 rng(1001);
  const KernelParams kp{0.49};
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const PhaseState s = oracle::random_state(rng, m);
    const NuField f = oracle::random_field(rng, trial % 3);
    const FlowSensitivity fs = flow_with_sensitivity(s, f, kp);
    REQUIRE(fs.jacobian.rows() == static_cast<Eigen::Index>(4 * m));
    REQUIRE(fs.jacobian.cols() == static_cast<Eigen::Index>(2 * m));
    for (std::size_t i = 0; i < m; ++i)
      for (int c = 0; c < 2; ++c) {
        PhaseState a = s, b = s;
        a.p[i][c] += 1e-6;
        b.p[i][c] -= 1e-6;
        const Eigen::VectorXd col = (flow(a, f, kp).flatten() - flow(b, f, kp).flatten()) / 2e-6;
        const Eigen::VectorXd got = fs.jacobian.col(static_cast<Eigen::Index>(2 * i + c));
        CHECK((got - col).norm() <= 1e-6 * std::max(1.0, col.norm()));
      }
  }
}

TEST_CASE("blow-up is reported with the step index") {
  // huge momenta in a sharp nu bump overflow within a few steps
  PhaseState s{{{0, 0}, {0.01, 0}}, {{1e150, 1e150}, {-1e150, 1e150}}};
  try {
    integrate(s, NuField{{{0, 0}}, 0.04, 0.0}, KernelParams{0.49});
    FAIL("expected BlowUp");
  } catch (const BlowUp& e) {
    CHECK(e.step() >= 1);
    CHECK(e.step() <= 100);
  }
}

TEST_CASE("invalid states and integrator settings are rejected") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const KernelParams kp{0.5};
  CHECK_THROWS_AS(rhs(PhaseState{}, NuField::zero(), kp), InvalidInput);
  CHECK_THROWS_AS(rhs(PhaseState{{{0, 0}}, {}}, NuField::zero(), kp), InvalidInput);
  CHECK_THROWS_AS(hamiltonian(one({nan, 0}, {1, 0}), NuField::zero(), kp), InvalidInput);
  CHECK_THROWS_AS(integrate(one({0, 0}, {1, 0}), NuField::zero(), kp, IntegratorParams{0, 0, 1}), InvalidInput);
  CHECK_THROWS_AS(integrate(one({0, 0}, {1, 0}), NuField::zero(), kp, IntegratorParams{10, 1, 1}), InvalidInput);
  CHECK_THROWS_AS(action(Trajectory{}, NuField::zero(), kp), InvalidInput);
}
