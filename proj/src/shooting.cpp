#include "selmeta/shooting.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "selmeta/errors.hpp"

namespace selmeta {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInitialDamping = 1e-3;
constexpr double kDampingDecrease = 0.5;
constexpr double kDampingIncrease = 4.0;
constexpr double kMaxDamping = 1e12;
// Give up when the residual shrinks by less than kStallFactor over kStallWindow iterations.
constexpr int kStallWindow = 20;
constexpr double kStallFactor = 0.999;

PhaseState initial_state(const std::vector<Vec2>& p0, const ShootingProblem& prob) {
  if (p0.size() != prob.size()) throw InvalidInput("shooting: |p0| != M");
  return PhaseState{prob.q0, p0};
}

VectorXd endpoint_residual(const PhaseState& final_state, const ShootingProblem& prob) {
  const std::size_t m = prob.size();
  VectorXd r(static_cast<Eigen::Index>(2 * m));
  for (std::size_t i = 0; i < m; ++i) r.segment<2>(static_cast<Eigen::Index>(2 * i)) = final_state.q[i] - prob.q1[i];
  return r;
}

VectorXd pack(const std::vector<Vec2>& p) {
  VectorXd v(static_cast<Eigen::Index>(2 * p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) v.segment<2>(static_cast<Eigen::Index>(2 * i)) = p[i];
  return v;
}

std::vector<Vec2> unpack(const VectorXd& v) {
  std::vector<Vec2> p(static_cast<std::size_t>(v.size()) / 2);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = v.segment<2>(static_cast<Eigen::Index>(2 * i));
  return p;
}

// Residual norm at p0, or nullopt if the trajectory blows up.
std::optional<double> try_residual(const VectorXd& p0, const ShootingProblem& prob) {
  if (!p0.allFinite()) return std::nullopt;
  try {
    return endpoint_residual(flow(PhaseState{prob.q0, unpack(p0)}, prob.field, prob.kp, prob.ip), prob).norm();
  } catch (const BlowUp&) {
    return std::nullopt;
  }
}

}  // namespace

void ShootingProblem::validate() const {
  if (q0.empty()) throw InvalidInput("shooting: no landmarks");
  if (q0.size() != q1.size()) throw InvalidInput("shooting: |q0| != |q1|");
  for (std::size_t i = 0; i < q0.size(); ++i) {
    if (!is_finite(q0[i]) || !is_finite(q1[i])) throw InvalidInput("shooting: non-finite boundary landmark");
  }
  field.validate();
  kp.validate();
  ip.validate();
  if (!(tol > 0.0)) throw InvalidInput("shooting: tol must be positive");
  if (max_iters < 1) throw InvalidInput("shooting: max_iters must be >= 1");
  if (p0_init) {
    if (p0_init->size() != q0.size()) throw InvalidInput("shooting: warm start has wrong length");
    for (const auto& p : *p0_init)
      if (!is_finite(p)) throw InvalidInput("shooting: non-finite warm start");
  }
}

double objective(const std::vector<Vec2>& p0, const ShootingProblem& prob) {
  prob.validate();
  const PhaseState end = flow(initial_state(p0, prob), prob.field, prob.kp, prob.ip);
  return 0.5 * endpoint_residual(end, prob).squaredNorm();
}

Eigen::MatrixXd endpoint_jacobian(const std::vector<Vec2>& p0, const ShootingProblem& prob) {
  prob.validate();
  const auto sens = flow_with_sensitivity(initial_state(p0, prob), prob.field, prob.kp, prob.ip);
  return sens.jacobian.topRows(static_cast<Eigen::Index>(2 * prob.size()));
}

ShootingResult solve_bvp(const ShootingProblem& prob) {
  prob.validate();
  const std::size_t m = prob.size();
  const auto n = static_cast<Eigen::Index>(2 * m);

  VectorXd p = prob.p0_init ? pack(*prob.p0_init) : VectorXd::Zero(n);
  FlowSensitivity sens;
  try {
    sens = flow_with_sensitivity(PhaseState{prob.q0, unpack(p)}, prob.field, prob.kp, prob.ip);
  } catch (const BlowUp& e) {
    throw SolverFailure(std::string("shooting: initial guess blows up: ") + e.what());
  }
  VectorXd r = endpoint_residual(sens.final_state, prob);
  double res = r.norm();

  double mu = kInitialDamping;
  int iterations = 0;
  std::vector<double> history{res};
  while (res > prob.tol && iterations < prob.max_iters) {
    if (iterations >= kStallWindow && res > kStallFactor * history[static_cast<std::size_t>(iterations - kStallWindow)]) break;
    ++iterations;
    const MatrixXd J = sens.jacobian.topRows(n);
    const MatrixXd JtJ = J.transpose() * J;
    const VectorXd g = J.transpose() * r;

    bool improved = false;
    bool any_finite = false;

    // Undamped step first; exact in one iteration whenever the endpoint map is affine.
    const VectorXd gn_step = J.colPivHouseholderQr().solve(r);
    if (auto trial = try_residual(p - gn_step, prob)) {
      any_finite = true;
      if (*trial < res) {
        p -= gn_step;
        improved = true;
      }
    }

    while (!improved && mu <= kMaxDamping) {
      const MatrixXd A = JtJ + mu * MatrixXd::Identity(n, n);
      const VectorXd step = A.ldlt().solve(g);
      if (auto trial = try_residual(p - step, prob)) {
        any_finite = true;
        if (*trial < res) {
          p -= step;
          mu *= kDampingDecrease;
          improved = true;
          break;
        }
      }
      mu *= kDampingIncrease;
    }

    if (!improved) {
      if (!any_finite) throw SolverFailure("shooting: every trial step blew up at iteration " + std::to_string(iterations));
      break;  // stagnated; p is the best iterate
    }

    try {
      sens = flow_with_sensitivity(PhaseState{prob.q0, unpack(p)}, prob.field, prob.kp, prob.ip);
    } catch (const BlowUp&) {
      // the state is finite (try_residual checked it) but its derivative overflowed;
      // no further Gauss-Newton step is possible from here
      break;
    }
    r = endpoint_residual(sens.final_state, prob);
    res = r.norm();
    history.push_back(res);
  }

  ShootingResult out;
  out.p0 = unpack(p);
  out.trajectory = integrate(PhaseState{prob.q0, out.p0}, prob.field, prob.kp, prob.ip);
  out.residual = endpoint_residual(out.trajectory.final_state(), prob).norm();
  out.action = out.trajectory.action;
  out.iterations = iterations;
  out.converged = out.residual <= prob.tol;
  return out;
}

ShootingResult solve_bvp_multistart(const ShootingProblem& prob, const MultiStartOptions& opts) {
  prob.validate();
  if (opts.n_random < 0) throw InvalidInput("multistart: n_random must be >= 0");
  if (!(opts.spread > 0.0)) throw InvalidInput("multistart: spread must be positive");

  const std::size_t m = prob.size();
  std::vector<std::vector<Vec2>> starts;
  if (prob.p0_init) starts.push_back(*prob.p0_init);
  starts.emplace_back(m, Vec2::Zero());
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, opts.spread);
  for (int k = 0; k < opts.n_random; ++k) {
    std::vector<Vec2> p(m);
    for (auto& v : p) v = Vec2(normal(rng), normal(rng));
    starts.push_back(std::move(p));
  }

  std::optional<ShootingResult> best;
  std::optional<SolverFailure> last_failure;
  ShootingProblem trial = prob;
  for (auto& start : starts) {
    trial.p0_init = std::move(start);
    ShootingResult r;
    try {
      r = solve_bvp(trial);
    } catch (const SolverFailure& e) {
      last_failure = e;
      continue;
    }
    const bool better = !best || (r.converged && (!best->converged || r.action < best->action)) ||
                        (!r.converged && !best->converged && r.residual < best->residual);
    if (better) best = std::move(r);
  }
  if (!best) throw *last_failure;
  return *best;
}

}  // namespace selmeta
