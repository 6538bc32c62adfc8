#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "selmeta/dynamics.hpp"
#include "selmeta/geometry.hpp"

namespace selmeta {

/// Two-point boundary value problem: find p0 so the geodesic from q0 ends at q1.
struct ShootingProblem {
  std::vector<Point2> q0;
  std::vector<Point2> q1;
  NuField field;
  KernelParams kp;
  IntegratorParams ip;
  double tol = 1e-6;
  int max_iters = 200;
  std::optional<std::vector<Vec2>> p0_init;

  std::size_t size() const { return q0.size(); }
  void validate() const;
};

struct ShootingResult {
  std::vector<Vec2> p0;
  Trajectory trajectory;
  double residual = 0.0;
  double action = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// 1/2 sum_i |q_i(1; p0) - q1_i|^2.
double objective(const std::vector<Vec2>& p0, const ShootingProblem& prob);

/// d q(1) / d p0, 2M x 2M, differentiated exactly through the RK4 stages.
Eigen::MatrixXd endpoint_jacobian(const std::vector<Vec2>& p0, const ShootingProblem& prob);

/// Damped Gauss-Newton on the endpoint residual.
///
/// Each iteration first tries the undamped Gauss-Newton step; if that does
/// not reduce the residual, Levenberg steps (J^T J + mu I) are tried with mu
/// growing x4 per failure and shrinking x0.5 after a success (mu starts at
/// 1e-3). Non-convergence is reported through the flag, never thrown; the
/// best iterate is always returned. Throws SolverFailure when the initial
/// guess, or every trial step of an iteration, blows up.
ShootingResult solve_bvp(const ShootingProblem& prob);

/// Extra initial guesses for problems with several geodesic branches.
///
/// Candidates are the problem's own warm start (if any), zero momenta, and
/// `n_random` draws p_i ~ N(0, spread^2 I) from a generator seeded with `seed`.
/// The draws do not depend on the problem, so every cold solve sees the same
/// candidate set.
struct MultiStartOptions {
  int n_random = 8;
  double spread = 2.0;
  std::uint64_t seed = 20190611;

  bool operator==(const MultiStartOptions&) const = default;
};

/// Runs solve_bvp from every candidate and keeps the converged result with the
/// lowest action (earliest candidate on ties). If nothing converges, returns
/// the result with the smallest residual. Candidates that throw SolverFailure
/// are skipped; if all of them do, the last failure is rethrown.
ShootingResult solve_bvp_multistart(const ShootingProblem& prob, const MultiStartOptions& opts = {});

}  // namespace selmeta
