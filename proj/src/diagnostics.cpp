#include "selmeta/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selmeta/errors.hpp"

namespace selmeta {

AcfResult autocorrelation(const std::vector<double>& series, int max_lag) {
  if (max_lag < 0) throw InvalidInput("autocorrelation: max_lag must be >= 0");
  const std::size_t n = series.size();
  if (n < static_cast<std::size_t>(max_lag) + 2) throw InvalidInput("autocorrelation: series shorter than max_lag + 2");

  double mean = 0.0;
  for (double s : series) mean += s;
  mean /= static_cast<double>(n);

  double denom = 0.0;
  for (double s : series) denom += (s - mean) * (s - mean);
  if (!(denom > 0.0)) throw DegenerateSeries("autocorrelation: series has zero variance");

  AcfResult out;
  for (int k = 0; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t)
      num += (series[t] - mean) * (series[t + static_cast<std::size_t>(k)] - mean);
    out.lags.push_back(k);
    out.values.push_back(num / denom);
  }
  return out;
}

int decorrelation_lag(const AcfResult& acf, double threshold) {
  for (std::size_t i = 0; i < acf.values.size(); ++i)
    if (std::abs(acf.values[i]) < threshold) return acf.lags[i];
  return -1;
}

Histogram2D heatmap(const std::vector<Point2>& points, const GridSpec& grid) {
  grid.validate();
  Histogram2D hist{grid, std::vector<long>(grid.cell_count(), 0), 0};
  for (const auto& x : points) {
    if (const auto cell = grid.locate(x)) {
      ++hist.counts[grid.index(cell->first, cell->second)];
    } else {
      ++hist.n_out_of_bounds;
    }
  }
  return hist;
}

std::vector<Point2> centroid_track(const Chain& chain, std::size_t k) {
  std::vector<Point2> track;
  track.reserve(chain.samples.size());
  for (const auto& s : chain.samples) {
    if (k >= s.centroids.size()) throw InvalidInput("centroid_track: centroid index out of range");
    track.push_back(s.centroids[k]);
  }
  return track;
}

ChainSample map_estimate(const Chain& chain, MapObjective objective) {
  const double scale_sq = chain.config.prior_scale * chain.config.prior_scale;
  const ChainSample* best = nullptr;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& s : chain.samples) {
    if (!s.shooting_converged) continue;
    double value = s.action;
    if (objective == MapObjective::posterior) value += 0.5 * pack_centroids(s.centroids).squaredNorm() / scale_sq;
    if (!best || value < best_value) {
      best = &s;
      best_value = value;
    }
  }
  if (!best) throw InvalidInput("map_estimate: no converged samples");
  return *best;
}

Histogram1D action_histogram(const Chain& chain, int n_bins) {
  if (n_bins < 1) throw InvalidInput("action_histogram: n_bins must be >= 1");
  std::vector<double> actions;
  for (const auto& s : chain.samples)
    if (s.shooting_converged) actions.push_back(s.action);
  if (actions.empty()) throw InvalidInput("action_histogram: no converged samples");

  const auto [lo_it, hi_it] = std::minmax_element(actions.begin(), actions.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / n_bins;

  Histogram1D hist;
  hist.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (int b = 0; b <= n_bins; ++b) hist.edges.push_back(b == n_bins ? hi : lo + b * width);
  for (double a : actions) {
    int b = width > 0.0 ? static_cast<int>(std::floor((a - lo) / width)) : 0;
    b = std::clamp(b, 0, n_bins - 1);
    ++hist.counts[static_cast<std::size_t>(b)];
  }
  return hist;
}

}  // namespace selmeta
