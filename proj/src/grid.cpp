#include "selmeta/grid.hpp"

#include <cmath>

#include "selmeta/errors.hpp"

namespace selmeta {

void GridSpec::validate() const {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) throw InvalidInput("grid: need x_max > x_min");
  if (!std::isfinite(y_min) || !std::isfinite(y_max) || !(y_max > y_min)) throw InvalidInput("grid: need y_max > y_min");
  if (nx < 1 || ny < 1) throw InvalidInput("grid: nx and ny must be >= 1");
}

Point2 GridSpec::centre(int ix, int iy) const {
  return {x_min + (ix + 0.5) * dx(), y_min + (iy + 0.5) * dy()};
}

std::optional<std::pair<int, int>> GridSpec::locate(const Point2& x) const {
  if (!is_finite(x)) return std::nullopt;
  if (x.x() < x_min || x.x() >= x_max || x.y() < y_min || x.y() >= y_max) return std::nullopt;
  int ix = static_cast<int>(std::floor((x.x() - x_min) / dx()));
  int iy = static_cast<int>(std::floor((x.y() - y_min) / dy()));
  // rounding at the upper edge
  if (ix >= nx) ix = nx - 1;
  if (iy >= ny) iy = ny - 1;
  return std::make_pair(ix, iy);
}

}  // namespace selmeta
