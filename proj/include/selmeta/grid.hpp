#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "selmeta/geometry.hpp"

namespace selmeta {

/// Regular nx x ny grid of cells over [x_min, x_max) x [y_min, y_max).
struct GridSpec {
  double x_min = -2.0;
  double x_max = 2.0;
  double y_min = -2.0;
  double y_max = 2.0;
  int nx = 40;
  int ny = 40;

  void validate() const;

  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix); }

  /// Cell centre, x_min + (ix + 1/2) dx.
  Point2 centre(int ix, int iy) const;

  /// Half-open cell lookup; nullopt outside the bounds.
  std::optional<std::pair<int, int>> locate(const Point2& x) const;

  bool operator==(const GridSpec&) const = default;
};

}  // namespace selmeta
