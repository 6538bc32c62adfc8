#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "selmeta/geometry.hpp"

namespace selmeta {

/// Positions and momenta of M planar landmarks.
struct PhaseState {
  std::vector<Point2> q;
  std::vector<Vec2> p;

  std::size_t size() const { return q.size(); }
  void validate() const;

  /// Packs as [q_1x, q_1y, ..., q_Mx, q_My, p_1x, ..., p_My].
  Eigen::VectorXd flatten() const;
  static PhaseState unflatten(const Eigen::VectorXd& y);
};

struct PhaseVelocity {
  std::vector<Vec2> dq;
  std::vector<Vec2> dp;
};

struct IntegratorParams {
  int n_steps = 100;
  double t0 = 0.0;
  double t1 = 1.0;

  double step() const { return (t1 - t0) / n_steps; }
  void validate() const;
  bool operator==(const IntegratorParams&) const = default;
};

struct Trajectory {
  std::vector<PhaseState> states;
  std::vector<double> times;
  std::vector<double> hamiltonian_series;
  double action = 0.0;

  const PhaseState& final_state() const { return states.back(); }
};

/// Selective-metamorphosis geodesic equations:
///   dq_i/dt = sum_j K(q_i - q_j) p_j + nu(q_i) p_i
///   dp_i/dt = -sum_j (p_i . p_j) grad K(q_i - q_j) - 1/2 grad nu(q_i) |p_i|^2
PhaseVelocity rhs(const PhaseState& s, const NuField& field, const KernelParams& kp);

/// d(rhs)/d(state) in the flattened layout, 4M x 4M.
Eigen::MatrixXd rhs_jacobian(const PhaseState& s, const NuField& field, const KernelParams& kp);

/// h(q, p) = 1/2 sum_ij K(q_i - q_j) p_i . p_j + 1/2 sum_i nu(q_i) |p_i|^2.
double hamiltonian(const PhaseState& s, const NuField& field, const KernelParams& kp);

/// Fixed-step classical RK4. Throws BlowUp if a non-finite state appears.
Trajectory integrate(const PhaseState& s0, const NuField& field, const KernelParams& kp,
                     const IntegratorParams& ip = {});

/// Trapezoidal quadrature of 1/2 (|u|_V^2 + sum_i nu(q_i) |p_i|^2) over the stored states.
double action(const Trajectory& traj, const NuField& field, const KernelParams& kp);

/// Trapezoidal rule over an arbitrary sampled series.
double trapezoid(const std::vector<double>& times, const std::vector<double>& values);

struct FlowSensitivity {
  PhaseState final_state;
  /// d(final state)/d(p0) in the flattened layout, 4M x 2M.
  Eigen::MatrixXd jacobian;
};

/// Final state only, without storing the path.
PhaseState flow(const PhaseState& s0, const NuField& field, const KernelParams& kp,
                const IntegratorParams& ip = {});

/// Final state together with the exact derivative of the discrete RK4 map
/// with respect to the initial momenta (forward variational equations).
FlowSensitivity flow_with_sensitivity(const PhaseState& s0, const NuField& field, const KernelParams& kp,
                                      const IntegratorParams& ip = {});

}  // namespace selmeta
