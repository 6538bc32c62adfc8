#pragma once

#include <cstddef>
#include <vector>

#include "selmeta/grid.hpp"
#include "selmeta/sampler.hpp"

namespace selmeta {

struct AcfResult {
  std::vector<int> lags;
  std::vector<double> values;
};

/// Biased autocorrelation, normalised by the full-series sum of squares.
/// Throws DegenerateSeries for a constant series.
AcfResult autocorrelation(const std::vector<double>& series, int max_lag);

/// Smallest lag with |acf| < threshold, or -1 if none within the computed range.
int decorrelation_lag(const AcfResult& acf, double threshold = 0.1);

struct Histogram2D {
  GridSpec grid;
  std::vector<long> counts;  // row-major, grid.index(ix, iy)
  long n_out_of_bounds = 0;

  long count(int ix, int iy) const { return counts[grid.index(ix, iy)]; }
};

Histogram2D heatmap(const std::vector<Point2>& points, const GridSpec& grid);

/// Positions of centroid k across the chain.
std::vector<Point2> centroid_track(const Chain& chain, std::size_t k);

enum class MapObjective {
  /// action + 1/2 |h|^2 / prior_scale^2
  posterior,
  /// action only
  likelihood,
};

/// Converged sample minimising the negative log posterior (earliest on ties).
ChainSample map_estimate(const Chain& chain, MapObjective objective = MapObjective::posterior);

struct Histogram1D {
  std::vector<double> edges;  // n_bins + 1
  std::vector<long> counts;
};

/// Uniform bins between the min and max action of the converged samples.
Histogram1D action_histogram(const Chain& chain, int n_bins);

}  // namespace selmeta
