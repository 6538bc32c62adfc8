#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "selmeta/errors.hpp"
#include "selmeta/io.hpp"
#include "selmeta/shooting.hpp"

using namespace selmeta;

namespace {

ShootingProblem line_problem() {
  ShootingProblem prob;
  prob.q0 = {{0, 0}};
  prob.q1 = {{1, 0}};
  prob.field = NuField::zero();
  prob.kp = KernelParams{0.5};
  return prob;
}

double residual_of(const ShootingProblem& prob, const std::vector<Vec2>& p0) {
  PhaseState s{prob.q0, p0};
  const PhaseState e = flow(s, prob.field, prob.kp, prob.ip);
  double r = 0;
  for (std::size_t i = 0; i < prob.size(); ++i) r += (e.q[i] - prob.q1[i]).squaredNorm();
  return std::sqrt(r);
}

}  // namespace

TEST_CASE("objective closed forms") {
  ShootingProblem still = line_problem();
  still.q1 = still.q0;
  CHECK(objective({{0, 0}}, still) == 0.0);

  const ShootingProblem prob = line_problem();
  CHECK(objective({{1, 0}}, prob) < 1e-12);
  CHECK(objective({{0, 0}}, prob) == 0.5);
  CHECK_THROWS_AS(objective({{0, 0}, {1, 1}}, prob), InvalidInput);
}

TEST_CASE("endpoint jacobian of a lone landmark is the identity") {
  const ShootingProblem prob = line_problem();
  for (const Vec2& p : {Vec2(0, 0), Vec2(1, 0), Vec2(-0.7, 2.3)}) {
    const Eigen::MatrixXd j = endpoint_jacobian({p}, prob);
    CHECK(j.rows() == 2);
    CHECK(j.cols() == 2);
    CHECK((j - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  }
}

TEST_CASE("endpoint jacobian against central differences") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> mom(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const PhaseState s = oracle::random_state(rng, m);
    ShootingProblem prob;
    prob.q0 = s.q;
    prob.q1 = s.q;
    prob.kp = KernelParams{0.49};
    prob.field = trial % 2 ? oracle::random_field(rng, 1 + trial % 2) : NuField::zero();
    const Eigen::MatrixXd j = endpoint_jacobian(s.p, prob);
    for (std::size_t i = 0; i < m; ++i)
      for (int c = 0; c < 2; ++c) {
        auto a = s.p, b = s.p;
        a[i][c] += 1e-6;
        b[i][c] -= 1e-6;
        const PhaseState ea = flow(PhaseState{s.q, a}, prob.field, prob.kp);
        const PhaseState eb = flow(PhaseState{s.q, b}, prob.field, prob.kp);
        Eigen::VectorXd col(2 * m);
        for (std::size_t k = 0; k < m; ++k) col.segment<2>(2 * k) = (ea.q[k] - eb.q[k]) / 2e-6;
        const Eigen::VectorXd got = j.col(static_cast<Eigen::Index>(2 * i + c));
        CHECK((got - col).norm() <= 1e-5 * std::max(1.0, col.norm()));
      }
  }
}

TEST_CASE("identity match needs no motion") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const PhaseState s = oracle::random_state(rng, 1 + trial);
    ShootingProblem prob;
    prob.q0 = s.q;
    prob.q1 = s.q;
    prob.kp = KernelParams{0.49};
    prob.field = oracle::random_field(rng, trial % 3);
    const ShootingResult r = solve_bvp(prob);
    CHECK(r.converged);
    CHECK(r.iterations <= 1);
    CHECK(r.residual == 0.0);
    for (const auto& p : r.p0) CHECK(p.norm() == 0.0);
  }
}

TEST_CASE("straight line solves in one step") {
  const ShootingResult r = solve_bvp(line_problem());
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.p0[0] - Vec2(1, 0)).norm() < 1e-8);
  CHECK(r.residual <= 1e-6);
  CHECK(r.action == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("crisscross with a centroid at the origin") {
  ShootingProblem prob = preset_scenario("crisscross");
  prob.field.centroids = {{0, 0}};
  const ShootingResult r = solve_bvp(prob);
  REQUIRE(r.converged);
  CHECK(r.residual <= 1e-6);
  CHECK(r.iterations <= 200);
  // self-certifying: an independent re-integration lands on the target
  CHECK(residual_of(prob, r.p0) <= 1e-6);
  const double h0 = hamiltonian(PhaseState{prob.q0, r.p0}, prob.field, prob.kp);
  CHECK(std::abs(r.action - h0) < 1e-6);
  CHECK(r.action == r.trajectory.action);
  // regression value of this build
  CHECK(r.action == doctest::Approx(4.662293).epsilon(1e-6));
}

TEST_CASE("returned residual never exceeds the initial guess") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const PhaseState a = oracle::random_state(rng, 2);
    const PhaseState b = oracle::random_state(rng, 2);
    ShootingProblem prob;
    prob.q0 = a.q;
    prob.q1 = b.q;
    prob.kp = KernelParams{0.49};
    prob.field = oracle::random_field(rng, 1);
    prob.max_iters = 5;
    prob.p0_init = a.p;
    const ShootingResult r = solve_bvp(prob);
    CHECK(r.residual <= residual_of(prob, a.p) + 1e-15);
    CHECK(r.converged == (r.residual <= prob.tol));
    CHECK(r.action == r.trajectory.action);
  }
}

TEST_CASE("non-convergence is a flag, not an error") {
  ShootingProblem prob = preset_scenario("crisscross");
  prob.field = NuField::zero();
  prob.max_iters = 3;
  const ShootingResult r = solve_bvp(prob);
  CHECK_FALSE(r.converged);
  CHECK(r.residual > prob.tol);
  CHECK(r.iterations <= 3);
}

TEST_CASE("blown-up initial guess is a solver failure") {
  ShootingProblem prob = line_problem();
  prob.q0 = {{0.01, 0}};
  prob.field = NuField{{{0, 0}}, 0.04, 0.0};
  prob.p0_init = std::vector<Vec2>{{1e200, 1e200}};
  CHECK_THROWS_AS(solve_bvp(prob), SolverFailure);
}

TEST_CASE("multistart keeps the lowest converged action") {
  ShootingProblem prob = preset_scenario("crisscross");
  prob.field = NuField::zero();
  const ShootingResult single = solve_bvp(prob);
  CHECK_FALSE(single.converged);  // symmetric collision from zero momenta
  const ShootingResult best = solve_bvp_multistart(prob, MultiStartOptions{8, 2.0, 20190611});
  REQUIRE(best.converged);
  CHECK(residual_of(prob, best.p0) <= 1e-6);

  // no candidate beats the chosen one
  MultiStartOptions none{0, 2.0, 1};
  ShootingProblem warm = prob;
  warm.p0_init = best.p0;
  const ShootingResult again = solve_bvp_multistart(warm, none);
  CHECK(again.action == doctest::Approx(best.action).epsilon(1e-9));

  // deterministic
  const ShootingResult twice = solve_bvp_multistart(prob, MultiStartOptions{8, 2.0, 20190611});
  CHECK(twice.action == best.action);
  CHECK(twice.p0 == best.p0);
}

TEST_CASE("invalid problems are rejected") {
  ShootingProblem prob = line_problem();
  prob.q1 = {{1, 0}, {2, 0}};
  CHECK_THROWS_AS(solve_bvp(prob), InvalidInput);
  prob = line_problem();
  prob.tol = 0;
  CHECK_THROWS_AS(solve_bvp(prob), InvalidInput);
  prob = line_problem();
  prob.max_iters = 0;
  CHECK_THROWS_AS(solve_bvp(prob), InvalidInput);
  prob = line_problem();
  prob.p0_init = std::vector<Vec2>{{0, 0}, {0, 0}};
  CHECK_THROWS_AS(solve_bvp(prob), InvalidInput);
  CHECK_THROWS_AS(solve_bvp(ShootingProblem{}), InvalidInput);
}
