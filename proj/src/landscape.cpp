#include "selmeta/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "selmeta/errors.hpp"

namespace selmeta {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ShootingProblem single_centroid_problem(const ShootingProblem& tmpl, const Point2& centroid, double sigma_nu_sq) {
  ShootingProblem prob = tmpl;
  prob.field.centroids = {centroid};
  prob.field.sigma_nu_sq = sigma_nu_sq;
  return prob;
}

// Shooting failures are recorded per cell, never propagated.
std::optional<ShootingResult> solve_cell(const ShootingProblem& prob, const MultiStartOptions& opts) {
  try {
    return solve_bvp_multistart(prob, opts);
  } catch (const SolverFailure&) {
    return std::nullopt;
  } catch (const BlowUp&) {
    return std::nullopt;
  }
}

}  // namespace

ShootingResult solve_single_centroid(const ShootingProblem& prob_template, const Point2& centroid,
                                     double sigma_nu_sq, const MultiStartOptions& opts) {
  ShootingProblem prob = single_centroid_problem(prob_template, centroid, sigma_nu_sq);
  prob.p0_init.reset();
  return solve_bvp_multistart(prob, opts);
}

namespace {

struct CellSolution {
  double action = kNaN;
  bool ok = false;
  std::vector<Vec2> p0;
};

// Runs body(i) for i in [0, n) on `workers` threads; body must only touch slot i.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body body) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
}

// Jacobi-style sweeps: every cell reads the previous sweep's solutions, so
// the outcome does not depend on the worker count or the visiting order.
void polish(const ShootingProblem& tmpl, const GridSpec& grid, double sigma_nu_sq, int workers, int max_sweeps,
            std::vector<CellSolution>& cells) {
  std::vector<std::size_t> dirty(grid.cell_count());
  for (std::size_t i = 0; i < dirty.size(); ++i) dirty[i] = i;

  for (int sweep = 0; sweep < max_sweeps && !dirty.empty(); ++sweep) {
    std::vector<CellSolution> next = cells;
    std::vector<char> changed(grid.cell_count(), 0);
    parallel_for(dirty.size(), workers, [&](std::size_t k) {
      const std::size_t cell = dirty[k];
      const int ix = static_cast<int>(cell % static_cast<std::size_t>(grid.nx));
      const int iy = static_cast<int>(cell / static_cast<std::size_t>(grid.nx));
      CellSolution best = cells[cell];
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int jx = ix + dx;
          const int jy = iy + dy;
          if ((dx == 0 && dy == 0) || jx < 0 || jy < 0 || jx >= grid.nx || jy >= grid.ny) continue;
          const CellSolution& nb = cells[grid.index(jx, jy)];
          if (!nb.ok || (best.ok && !(nb.action < best.action))) continue;
          ShootingProblem prob = single_centroid_problem(tmpl, grid.centre(ix, iy), sigma_nu_sq);
          prob.p0_init = nb.p0;
          try {
            ShootingResult r = solve_bvp(prob);
            // the margin keeps roundoff-level wobble from ping-ponging
            if (r.converged && (!best.ok || r.action < best.action - 1e-9 * (1.0 + std::abs(best.action)))) {
              best = CellSolution{r.action, true, std::move(r.p0)};
              changed[cell] = 1;
            }
          } catch (const SolverFailure&) {
          } catch (const BlowUp&) {
          }
        }
      }
      next[cell] = std::move(best);
    });
    cells = std::move(next);

    std::vector<char> mark(grid.cell_count(), 0);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        if (!changed[grid.index(ix, iy)]) continue;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int jx = ix + dx;
            const int jy = iy + dy;
            if ((dx == 0 && dy == 0) || jx < 0 || jy < 0 || jx >= grid.nx || jy >= grid.ny) continue;
            mark[grid.index(jx, jy)] = 1;
          }
      }
    dirty.clear();
    for (std::size_t i = 0; i < mark.size(); ++i)
      if (mark[i]) dirty.push_back(i);
  }
}

}  // namespace

ScanResult scan_grid(const ShootingProblem& prob_template, const GridSpec& grid, double sigma_nu_sq,
                     const ScanOptions& opts) {
  grid.validate();
  prob_template.validate();
  if (!(sigma_nu_sq > 0.0)) throw InvalidInput("scan: sigma_nu_sq must be positive");
  if (opts.mode == ScanMode::parallel_cold && opts.workers < 1) throw InvalidInput("scan: workers must be >= 1");
  if (opts.max_polish_sweeps < 0) throw InvalidInput("scan: max_polish_sweeps must be >= 0");

  std::vector<CellSolution> cells(grid.cell_count());
  auto record = [&](std::size_t cell, const std::optional<ShootingResult>& r) {
    if (r && r->converged) cells[cell] = CellSolution{r->action, true, r->p0};
  };

  int workers = 1;
  if (opts.mode == ScanMode::sequential_warm) {
    std::optional<std::vector<Vec2>> warm = prob_template.p0_init;
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        ShootingProblem prob = single_centroid_problem(prob_template, grid.centre(ix, iy), sigma_nu_sq);
        prob.p0_init = warm;
        const std::size_t cell = grid.index(ix, iy);
        record(cell, solve_cell(prob, opts.multistart));
        if (cells[cell].ok) warm = cells[cell].p0;
      }
    }
  } else {
    workers = opts.workers;
    parallel_for(grid.cell_count(), workers, [&](std::size_t cell) {
      const int ix = static_cast<int>(cell % static_cast<std::size_t>(grid.nx));
      const int iy = static_cast<int>(cell / static_cast<std::size_t>(grid.nx));
      ShootingProblem prob = single_centroid_problem(prob_template, grid.centre(ix, iy), sigma_nu_sq);
      prob.p0_init.reset();
      record(cell, solve_cell(prob, opts.multistart));
    });
  }

  if (opts.polish) polish(prob_template, grid, sigma_nu_sq, workers, opts.max_polish_sweeps, cells);

  ScanResult out{grid, std::vector<double>(grid.cell_count(), kNaN), std::vector<bool>(grid.cell_count(), false)};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].ok) continue;
    out.actions[i] = cells[i].action;
    out.converged[i] = true;
  }
  return out;
}

std::vector<LocalMinimum> find_local_minima(const ScanResult& scan) {
  const GridSpec& g = scan.grid;
  if (scan.actions.size() != g.cell_count() || scan.converged.size() != g.cell_count())
    throw InvalidInput("find_local_minima: scan storage does not match its grid");
  if (std::none_of(scan.converged.begin(), scan.converged.end(), [](bool c) { return c; }))
    throw InvalidInput("find_local_minima: no converged cells");

  std::vector<LocalMinimum> minima;
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (!scan.cell_converged(ix, iy)) continue;
      const double a = scan.action(ix, iy);
      bool strict = true;
      for (int dy = -1; dy <= 1 && strict; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int jx = ix + dx;
          const int jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= g.nx || jy >= g.ny || !scan.cell_converged(jx, jy)) continue;
          if (!(a < scan.action(jx, jy))) {
            strict = false;
            break;
          }
        }
      }
      if (strict) minima.push_back({ix, iy, g.centre(ix, iy), a});
    }
  }
  std::stable_sort(minima.begin(), minima.end(),
                   [](const LocalMinimum& a, const LocalMinimum& b) { return a.action < b.action; });
  return minima;
}

std::vector<bool> lowest_quantile_region(const ScanResult& scan, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidInput("lowest_quantile_region: fraction must be in (0,1]");
  std::vector<double> values;
  for (std::size_t i = 0; i < scan.actions.size(); ++i)
    if (scan.converged[i]) values.push_back(scan.actions[i]);
  if (values.empty()) throw InvalidInput("lowest_quantile_region: no converged cells");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(values.size())));
  const double threshold = values[std::max<std::size_t>(rank, 1) - 1];

  std::vector<bool> region(scan.actions.size(), false);
  for (std::size_t i = 0; i < scan.actions.size(); ++i) region[i] = scan.converged[i] && scan.actions[i] <= threshold;
  return region;
}

bool region_contains(const ScanResult& scan, const std::vector<bool>& region, const Point2& x) {
  const auto cell = scan.grid.locate(x);
  return cell && region[scan.grid.index(cell->first, cell->second)];
}

}  // namespace selmeta
