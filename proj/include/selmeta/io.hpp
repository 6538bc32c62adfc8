#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "selmeta/diagnostics.hpp"
#include "selmeta/landscape.hpp"
#include "selmeta/sampler.hpp"
#include "selmeta/shooting.hpp"

namespace selmeta {

/// Names accepted by preset_scenario.
std::vector<std::string> preset_names();

/// Landmark scenario with its default kernel, nu length-scale and step count.
/// The returned field has no centroids (nu == 0); callers place them.
ShootingProblem preset_scenario(const std::string& name);

/// Everything a CLI run needs. Defaults reproduce the crisscross experiment.
struct RunConfig {
  std::string scenario = "crisscross";  // empty when q0/q1 are given inline
  std::vector<Point2> q0{{-1.0, 0.5}, {-1.0, -0.5}};
  std::vector<Point2> q1{{1.0, -0.5}, {1.0, 0.5}};

  KernelParams kernel{0.49};
  NuField nu{{Point2::Zero()}, 0.04, 0.0};
  IntegratorParams integrator;

  double tol = 1e-6;
  int max_iters = 200;
  MultiStartOptions multistart;

  double beta = 0.2;
  int n_samples = 5000;
  double prior_scale = 1.0;
  std::uint64_t seed = 0;

  GridSpec grid;

  int max_lag = 200;
  int hist_bins = 30;

  std::string output_dir = "out";

  ShootingProblem problem() const;
  SamplerConfig sampler() const;

  bool operator==(const RunConfig&) const = default;
};

/// Every violated constraint, one message each; empty means valid.
std::vector<std::string> validate(const RunConfig& cfg);

/// Parses a JSON config: preset first, then explicit overrides. Throws
/// UsageError carrying the line/column of a syntax error, or listing every
/// schema and validation violation at once.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

void save_config(const RunConfig& cfg, const std::filesystem::path& path);
std::string dump_config(const RunConfig& cfg);

// Delimited-text outputs, 17 significant digits, "nan" for missing values.

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

void write_chain(const Chain& chain, const std::filesystem::path& path);
/// The config is not stored in the file; n_centroids and n_samples are
/// recovered from the columns, the rest is left at defaults.
Chain read_chain(const std::filesystem::path& path);

void write_scan(const ScanResult& scan, const std::filesystem::path& path);
/// Grid bounds are rebuilt from the cell centres unless `grid` is given; an
/// axis with a single cell needs the explicit grid.
ScanResult read_scan(const std::filesystem::path& path, const std::optional<GridSpec>& grid = std::nullopt);

void write_minima(const std::vector<LocalMinimum>& minima, const std::filesystem::path& path);
void write_acf(const std::vector<std::string>& names, const std::vector<AcfResult>& series,
               const std::filesystem::path& path);
void write_heatmap(const Histogram2D& hist, const std::filesystem::path& path);
void write_histogram(const Histogram1D& hist, const std::filesystem::path& path);

}  // namespace selmeta
