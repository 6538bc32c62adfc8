#pragma once

#include <cstddef>
#include <vector>

#include "selmeta/grid.hpp"
#include "selmeta/shooting.hpp"

namespace selmeta {

/// Optimal action for a single nu centroid placed at each grid cell centre.
/// Storage is row-major: cell (ix, iy) lives at grid.index(ix, iy).
struct ScanResult {
  GridSpec grid;
  std::vector<double> actions;  // NaN where shooting failed
  std::vector<bool> converged;

  double action(int ix, int iy) const { return actions[grid.index(ix, iy)]; }
  bool cell_converged(int ix, int iy) const { return converged[grid.index(ix, iy)]; }
};

enum class ScanMode {
  /// Row-major sweep, each cell warm-started from the last converged cell.
  sequential_warm,
  /// Independent cold starts, cells distributed over worker threads.
  parallel_cold,
};

struct ScanOptions {
  ScanMode mode = ScanMode::sequential_warm;
  int workers = 1;
  MultiStartOptions multistart;
  // After the first pass, re-shoot each cell from the momenta of lower
  // neighbours until nothing improves. Makes both modes land on the same
  // branch where the first pass missed it.
  bool polish = true;
  int max_polish_sweeps = 50;
};

ScanResult scan_grid(const ShootingProblem& prob_template, const GridSpec& grid, double sigma_nu_sq,
                     const ScanOptions& opts = {});

/// Cold-start optimal action for one centroid; what every scan cell computes.
ShootingResult solve_single_centroid(const ShootingProblem& prob_template, const Point2& centroid,
                                     double sigma_nu_sq, const MultiStartOptions& opts = {});

struct LocalMinimum {
  int ix = 0;
  int iy = 0;
  Point2 position;
  double action = 0.0;
};

/// Converged cells strictly below every converged 8-neighbour, ascending by action.
std::vector<LocalMinimum> find_local_minima(const ScanResult& scan);

/// Cells whose action is at or below the `fraction` quantile of the converged actions.
std::vector<bool> lowest_quantile_region(const ScanResult& scan, double fraction);

/// Whether x falls in a grid cell flagged by `region`.
bool region_contains(const ScanResult& scan, const std::vector<bool>& region, const Point2& x);

}  // namespace selmeta
