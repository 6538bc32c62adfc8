#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace selmeta {

using Point2 = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Gaussian velocity kernel K(r) = exp(-|r|^2 / (2 sigma_k_sq)).
struct KernelParams {
  double sigma_k_sq = 0.5;

  void validate() const;
  bool operator==(const KernelParams&) const = default;
};

/// Control field nu(x) = floor + sum_k exp(-|h_k - x|^2 / sigma_nu_sq).
///
/// No centroids and a zero floor gives nu == 0, i.e. plain LDDMM. A constant
/// field nu == c (classical metamorphosis) is an empty centroid list with
/// floor = c.
struct NuField {
  std::vector<Point2> centroids;
  double sigma_nu_sq = 0.04;
  double floor = 0.0;

  static NuField zero() { return NuField{{}, 1.0, 0.0}; }
  static NuField constant(double value) { return NuField{{}, 1.0, value}; }

  bool is_constant() const { return centroids.empty(); }
  void validate() const;
  bool operator==(const NuField&) const = default;
};

bool is_finite(const Vec2& v);

double kernel_eval(const Vec2& r, const KernelParams& params);
Vec2 kernel_grad(const Vec2& r, const KernelParams& params);
Mat2 kernel_hessian(const Vec2& r, const KernelParams& params);

double nu_eval(const Point2& x, const NuField& field);
Vec2 nu_grad(const Point2& x, const NuField& field);
Mat2 nu_hessian(const Point2& x, const NuField& field);

/// u(x) = sum_i p_i K(x - q_i).
Vec2 velocity_field_eval(const Point2& x, std::span<const Point2> q, std::span<const Vec2> p,
                         const KernelParams& params);

namespace detail {

// Unchecked evaluations for inner loops whose inputs are validated upstream.

inline double kernel(const Vec2& r, double sigma_k_sq) {
  return std::exp(-r.squaredNorm() / (2.0 * sigma_k_sq));
}

inline Vec2 kernel_grad(const Vec2& r, double sigma_k_sq) {
  return (-kernel(r, sigma_k_sq) / sigma_k_sq) * r;
}

inline Mat2 kernel_hessian(const Vec2& r, double sigma_k_sq) {
  const double k = kernel(r, sigma_k_sq);
  return k * (r * r.transpose() / (sigma_k_sq * sigma_k_sq) - Mat2::Identity() / sigma_k_sq);
}

inline double nu(const Point2& x, const NuField& field) {
  double value = field.floor;
  for (const auto& h : field.centroids) value += std::exp(-(h - x).squaredNorm() / field.sigma_nu_sq);
  return value;
}

inline Vec2 nu_grad(const Point2& x, const NuField& field) {
  Vec2 g = Vec2::Zero();
  for (const auto& h : field.centroids) {
    const Vec2 d = h - x;
    g += (2.0 / field.sigma_nu_sq) * std::exp(-d.squaredNorm() / field.sigma_nu_sq) * d;
  }
  return g;
}

inline Mat2 nu_hessian(const Point2& x, const NuField& field) {
  Mat2 hess = Mat2::Zero();
  const double s = field.sigma_nu_sq;
  for (const auto& h : field.centroids) {
    const Vec2 d = h - x;
    const double g = std::exp(-d.squaredNorm() / s);
    hess += g * ((4.0 / (s * s)) * d * d.transpose() - (2.0 / s) * Mat2::Identity());
  }
  return hess;
}

}  // namespace detail

}  // namespace selmeta
