#include "selmeta/geometry.hpp"

#include <cmath>
#include <string>

#include "selmeta/errors.hpp"

namespace selmeta {

namespace {

void require_finite(const Vec2& v, const char* what) {
  if (!is_finite(v)) throw InvalidInput(std::string(what) + " has non-finite components");
}

}  // namespace

bool is_finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

void KernelParams::validate() const {
  if (!(sigma_k_sq > 0.0) || !std::isfinite(sigma_k_sq)) throw InvalidInput("sigma_k_sq must be positive and finite");
}

void NuField::validate() const {
  if (!(sigma_nu_sq > 0.0) || !std::isfinite(sigma_nu_sq)) throw InvalidInput("sigma_nu_sq must be positive and finite");
  if (!(floor >= 0.0) || !std::isfinite(floor)) throw InvalidInput("nu floor must be nonnegative and finite");
  for (const auto& h : centroids) require_finite(h, "nu centroid");
}

double kernel_eval(const Vec2& r, const KernelParams& params) {
  params.validate();
  require_finite(r, "kernel displacement");
  return detail::kernel(r, params.sigma_k_sq);
}

Vec2 kernel_grad(const Vec2& r, const KernelParams& params) {
  params.validate();
  require_finite(r, "kernel displacement");
  return detail::kernel_grad(r, params.sigma_k_sq);
}

Mat2 kernel_hessian(const Vec2& r, const KernelParams& params) {
  params.validate();
  require_finite(r, "kernel displacement");
  return detail::kernel_hessian(r, params.sigma_k_sq);
}

double nu_eval(const Point2& x, const NuField& field) {
  field.validate();
  require_finite(x, "nu evaluation point");
  return detail::nu(x, field);
}

Vec2 nu_grad(const Point2& x, const NuField& field) {
  field.validate();
  require_finite(x, "nu evaluation point");
  return detail::nu_grad(x, field);
}

Mat2 nu_hessian(const Point2& x, const NuField& field) {
  field.validate();
  require_finite(x, "nu evaluation point");
  return detail::nu_hessian(x, field);
}

Vec2 velocity_field_eval(const Point2& x, std::span<const Point2> q, std::span<const Vec2> p,
                         const KernelParams& params) {
  params.validate();
  if (q.size() != p.size()) throw InvalidInput("velocity field: |q| != |p|");
  if (q.empty()) throw InvalidInput("velocity field: no landmarks");
  require_finite(x, "velocity evaluation point");
  Vec2 u = Vec2::Zero();
  for (std::size_t i = 0; i < q.size(); ++i) {
    require_finite(q[i], "landmark position");
    require_finite(p[i], "landmark momentum");
    u += detail::kernel(x - q[i], params.sigma_k_sq) * p[i];
  }
  return u;
}

}  // namespace selmeta
