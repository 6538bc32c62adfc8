#include "selmeta/dynamics.hpp"

#include <cmath>
#include <string>

#include "selmeta/errors.hpp"

namespace selmeta {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Vec2 q_of(const VectorXd& y, std::size_t i) { return y.segment<2>(2 * i); }
Vec2 p_of(const VectorXd& y, std::size_t m, std::size_t i) { return y.segment<2>(2 * m + 2 * i); }

// Right-hand side on the flattened state; fills the Jacobian when requested.
void flat_rhs(const VectorXd& y, const NuField& field, const KernelParams& kp, VectorXd& out, MatrixXd* jac) {
  const std::size_t m = static_cast<std::size_t>(y.size()) / 4;
  const double s = kp.sigma_k_sq;
  const auto P = static_cast<Eigen::Index>(2 * m);
  out.resize(y.size());
  out.setZero();
  if (jac) {
    jac->resize(y.size(), y.size());
    jac->setZero();
  }

  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 qi = q_of(y, i);
    const Vec2 pi = p_of(y, m, i);
    const double nui = detail::nu(qi, field);
    const Vec2 gnui = field.is_constant() ? Vec2::Zero() : detail::nu_grad(qi, field);
    const auto ri = static_cast<Eigen::Index>(2 * i);

    Vec2 dq = (1.0 + nui) * pi;
    Vec2 dp = -0.5 * pi.squaredNorm() * gnui;

    if (jac) {
      jac->block<2, 2>(ri, ri) += pi * gnui.transpose();
      jac->block<2, 2>(ri, P + ri) += (1.0 + nui) * Mat2::Identity();
      if (!field.is_constant())
        jac->block<2, 2>(P + ri, ri) -= 0.5 * pi.squaredNorm() * detail::nu_hessian(qi, field);
      jac->block<2, 2>(P + ri, P + ri) -= gnui * pi.transpose();
    }

    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const Vec2 pj = p_of(y, m, j);
      const Vec2 r = qi - q_of(y, j);
      const double k = detail::kernel(r, s);
      const Vec2 gk = (-k / s) * r;
      const double pipj = pi.dot(pj);
      dq += k * pj;
      dp -= pipj * gk;

      if (jac) {
        const auto rj = static_cast<Eigen::Index>(2 * j);
        const Mat2 hk = k * (r * r.transpose() / (s * s) - Mat2::Identity() / s);
        jac->block<2, 2>(ri, ri) += pj * gk.transpose();
        jac->block<2, 2>(ri, rj) -= pj * gk.transpose();
        jac->block<2, 2>(ri, P + rj) += k * Mat2::Identity();
        jac->block<2, 2>(P + ri, ri) -= pipj * hk;
        jac->block<2, 2>(P + ri, rj) += pipj * hk;
        jac->block<2, 2>(P + ri, P + ri) -= gk * pj.transpose();
        jac->block<2, 2>(P + ri, P + rj) -= gk * pi.transpose();
      }
    }
    out.segment<2>(ri) = dq;
    out.segment<2>(P + ri) = dp;
  }
}

void check_finite_step(const VectorXd& y, std::size_t step) {
  if (!y.allFinite()) throw BlowUp(step, "non-finite landmark state during integration");
}

void validate_inputs(const PhaseState& s, const NuField& field, const KernelParams& kp) {
  s.validate();
  field.validate();
  kp.validate();
}

}  // namespace

void PhaseState::validate() const {
  if (q.size() != p.size()) throw InvalidInput("phase state: |q| != |p|");
  if (q.empty()) throw InvalidInput("phase state: no landmarks");
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!is_finite(q[i]) || !is_finite(p[i]))
      throw InvalidInput("phase state: non-finite entry for landmark " + std::to_string(i));
  }
}

Eigen::VectorXd PhaseState::flatten() const {
  const std::size_t m = size();
  VectorXd y(static_cast<Eigen::Index>(4 * m));
  for (std::size_t i = 0; i < m; ++i) {
    y.segment<2>(static_cast<Eigen::Index>(2 * i)) = q[i];
    y.segment<2>(static_cast<Eigen::Index>(2 * m + 2 * i)) = p[i];
  }
  return y;
}

PhaseState PhaseState::unflatten(const Eigen::VectorXd& y) {
  if (y.size() == 0 || y.size() % 4 != 0) throw InvalidInput("flattened phase state must have length 4M");
  const std::size_t m = static_cast<std::size_t>(y.size()) / 4;
  PhaseState s;
  s.q.reserve(m);
  s.p.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    s.q.push_back(q_of(y, i));
    s.p.push_back(p_of(y, m, i));
  }
  return s;
}

void IntegratorParams::validate() const {
  if (n_steps < 1) throw InvalidInput("n_steps must be >= 1");
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) throw InvalidInput("integration interval must satisfy t1 > t0");
}

PhaseVelocity rhs(const PhaseState& s, const NuField& field, const KernelParams& kp) {
  validate_inputs(s, field, kp);
  VectorXd out;
  flat_rhs(s.flatten(), field, kp, out, nullptr);
  const PhaseState packed = PhaseState::unflatten(out);
  return {packed.q, packed.p};
}

Eigen::MatrixXd rhs_jacobian(const PhaseState& s, const NuField& field, const KernelParams& kp) {
  validate_inputs(s, field, kp);
  VectorXd out;
  MatrixXd jac;
  flat_rhs(s.flatten(), field, kp, out, &jac);
  return jac;
}

double hamiltonian(const PhaseState& s, const NuField& field, const KernelParams& kp) {
  validate_inputs(s, field, kp);
  const std::size_t m = s.size();
  double kinetic = 0.0;
  double meta = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      kinetic += detail::kernel(s.q[i] - s.q[j], kp.sigma_k_sq) * s.p[i].dot(s.p[j]);
    meta += detail::nu(s.q[i], field) * s.p[i].squaredNorm();
  }
  return 0.5 * (kinetic + meta);
}

double trapezoid(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw InvalidInput("trapezoid: size mismatch");
  if (times.empty()) throw InvalidInput("trapezoid: empty series");
  double sum = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) sum += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  return sum;
}

Trajectory integrate(const PhaseState& s0, const NuField& field, const KernelParams& kp, const IntegratorParams& ip) {
  validate_inputs(s0, field, kp);
  ip.validate();
  const double h = ip.step();
  const auto n = static_cast<std::size_t>(ip.n_steps);

  Trajectory traj;
  traj.states.reserve(n + 1);
  traj.times.reserve(n + 1);
  traj.hamiltonian_series.reserve(n + 1);

  VectorXd y = s0.flatten();
  VectorXd k1, k2, k3, k4, stage(y.size());
  traj.states.push_back(s0);
  traj.times.push_back(ip.t0);
  traj.hamiltonian_series.push_back(hamiltonian(s0, field, kp));

  for (std::size_t step = 1; step <= n; ++step) {
    flat_rhs(y, field, kp, k1, nullptr);
    stage.noalias() = y + (0.5 * h) * k1;
    flat_rhs(stage, field, kp, k2, nullptr);
    stage.noalias() = y + (0.5 * h) * k2;
    flat_rhs(stage, field, kp, k3, nullptr);
    stage.noalias() = y + h * k3;
    flat_rhs(stage, field, kp, k4, nullptr);
    y.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite_step(y, step);

    traj.states.push_back(PhaseState::unflatten(y));
    traj.times.push_back(step == n ? ip.t1 : ip.t0 + static_cast<double>(step) * h);
    traj.hamiltonian_series.push_back(hamiltonian(traj.states.back(), field, kp));
  }
  traj.action = trapezoid(traj.times, traj.hamiltonian_series);
  return traj;
}

double action(const Trajectory& traj, const NuField& field, const KernelParams& kp) {
  if (traj.states.empty()) throw InvalidInput("action: empty trajectory");
  if (traj.times.size() != traj.states.size()) throw InvalidInput("action: times and states differ in length");
  std::vector<double> integrand;
  integrand.reserve(traj.states.size());
  for (const auto& s : traj.states) integrand.push_back(hamiltonian(s, field, kp));
  return trapezoid(traj.times, integrand);
}

PhaseState flow(const PhaseState& s0, const NuField& field, const KernelParams& kp, const IntegratorParams& ip) {
  validate_inputs(s0, field, kp);
  ip.validate();
  const double h = ip.step();
  VectorXd y = s0.flatten();
  VectorXd k1, k2, k3, k4, stage(y.size());
  for (std::size_t step = 1; step <= static_cast<std::size_t>(ip.n_steps); ++step) {
    flat_rhs(y, field, kp, k1, nullptr);
    stage.noalias() = y + (0.5 * h) * k1;
    flat_rhs(stage, field, kp, k2, nullptr);
    stage.noalias() = y + (0.5 * h) * k2;
    flat_rhs(stage, field, kp, k3, nullptr);
    stage.noalias() = y + h * k3;
    flat_rhs(stage, field, kp, k4, nullptr);
    y.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite_step(y, step);
  }
  return PhaseState::unflatten(y);
}

FlowSensitivity flow_with_sensitivity(const PhaseState& s0, const NuField& field, const KernelParams& kp,
                                      const IntegratorParams& ip) {
  validate_inputs(s0, field, kp);
  ip.validate();
  const double h = ip.step();
  const auto m2 = static_cast<Eigen::Index>(2 * s0.size());

  VectorXd y = s0.flatten();
  MatrixXd Y = MatrixXd::Zero(2 * m2, m2);
  Y.bottomRows(m2).setIdentity();

  VectorXd k1, k2, k3, k4, stage(y.size());
  MatrixXd J(2 * m2, 2 * m2), A1(2 * m2, m2), A2(2 * m2, m2), A3(2 * m2, m2), A4(2 * m2, m2), S(2 * m2, m2);
  for (std::size_t step = 1; step <= static_cast<std::size_t>(ip.n_steps); ++step) {
    flat_rhs(y, field, kp, k1, &J);
    A1.noalias() = J * Y;

    stage.noalias() = y + (0.5 * h) * k1;
    flat_rhs(stage, field, kp, k2, &J);
    S.noalias() = Y + (0.5 * h) * A1;
    A2.noalias() = J * S;

    stage.noalias() = y + (0.5 * h) * k2;
    flat_rhs(stage, field, kp, k3, &J);
    S.noalias() = Y + (0.5 * h) * A2;
    A3.noalias() = J * S;

    stage.noalias() = y + h * k3;
    flat_rhs(stage, field, kp, k4, &J);
    S.noalias() = Y + h * A3;
    A4.noalias() = J * S;

    y.noalias() += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Y.noalias() += (h / 6.0) * (A1 + 2.0 * A2 + 2.0 * A3 + A4);
    check_finite_step(y, step);
    if (!Y.allFinite()) throw BlowUp(step, "non-finite sensitivity during integration");
  }
  return {PhaseState::unflatten(y), std::move(Y)};
}

}  // namespace selmeta
