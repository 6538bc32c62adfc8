// Command-line front end: one command per invocation, files under --out.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "selmeta/diagnostics.hpp"
#include "selmeta/errors.hpp"
#include "selmeta/io.hpp"
#include "selmeta/landscape.hpp"
#include "selmeta/sampler.hpp"
#include "selmeta/shooting.hpp"

namespace fs = std::filesystem;
using namespace selmeta;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int workers = 0;
};

RunConfig resolve(const Globals& g, const std::optional<std::string>& scenario = std::nullopt, bool apply_out = true) {
  RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (scenario) {
    const ShootingProblem preset = preset_scenario(*scenario);
    cfg.scenario = *scenario;
    cfg.q0 = preset.q0;
    cfg.q1 = preset.q1;
  }
  if (apply_out && !g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.seed) cfg.seed = *g.seed;
  if (const auto v = validate(cfg); !v.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw UsageError(msg);
  }
  return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

int resolved_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void print_result(const char* label, const ShootingResult& r) {
  std::printf("%s: converged=%d iterations=%d residual=%.3e action=%.10g\n", label, r.converged ? 1 : 0, r.iterations,
              r.residual, r.action);
}

int cmd_match(const RunConfig& cfg, bool lddmm) {
  const fs::path dir = prepare_out(cfg);
  ShootingProblem prob = cfg.problem();
  if (lddmm) prob.field = NuField::zero();
  const ShootingResult r = solve_bvp_multistart(prob, cfg.multistart);
  const fs::path file = dir / (lddmm ? "trajectory_lddmm.csv" : "trajectory.csv");
  write_trajectory(r.trajectory, file);
  print_result(lddmm ? "lddmm" : "selective", r);
  std::printf("wrote %s\n", file.string().c_str());
  return r.converged ? kExitOk : kExitNumerical;
}

int cmd_scan(const RunConfig& cfg, int workers, bool warm) {
  const fs::path dir = prepare_out(cfg);
  ScanOptions opts;
  opts.mode = warm ? ScanMode::sequential_warm : ScanMode::parallel_cold;
  opts.workers = resolved_workers(workers);
  opts.multistart = cfg.multistart;
  ShootingProblem tmpl = cfg.problem();
  const ScanResult scan = scan_grid(tmpl, cfg.grid, cfg.nu.sigma_nu_sq, opts);
  write_scan(scan, dir / "scan.csv");
  std::size_t failed = 0;
  for (bool c : scan.converged) failed += c ? 0 : 1;
  std::printf("scan: %dx%d cells, %zu failed\n", cfg.grid.nx, cfg.grid.ny, failed);
  if (failed < scan.converged.size()) {
    const auto minima = find_local_minima(scan);
    write_minima(minima, dir / "minima.csv");
    for (std::size_t i = 0; i < std::min<std::size_t>(minima.size(), 5); ++i)
      std::printf("  minimum at (%.3f, %.3f) action=%.10g\n", minima[i].position.x(), minima[i].position.y(),
                  minima[i].action);
  }
  std::printf("wrote %s\n", (dir / "scan.csv").string().c_str());
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg) {
  const fs::path dir = prepare_out(cfg);
  const Chain chain = run_chain(cfg.sampler(), cfg.problem(), cfg.multistart);
  write_chain(chain, dir / "chain.csv");
  std::printf("sample: %zu samples, acceptance=%.4f, failed proposals=%zu\n", chain.samples.size(),
              chain.acceptance_rate, chain.failed_proposals.size());
  std::printf("wrote %s\n", (dir / "chain.csv").string().c_str());
  return kExitOk;
}

int cmd_diag(const RunConfig& cfg, const std::string& chain_path) {
  const fs::path dir = prepare_out(cfg);
  const fs::path in = chain_path.empty() ? dir / "chain.csv" : fs::path(chain_path);
  Chain chain = read_chain(in);
  chain.config.prior_scale = cfg.prior_scale;
  if (chain.samples.empty()) throw UsageError(in.string() + ": chain has no samples");

  const int n = static_cast<int>(chain.samples.size());
  const int max_lag = std::min(cfg.max_lag, n - 2);
  std::vector<std::string> names{"action"};
  std::vector<std::vector<double>> series(1);
  for (const auto& s : chain.samples) series[0].push_back(s.action);
  const std::size_t k = chain.samples.front().centroids.size();
  for (std::size_t c = 0; c < k; ++c) {
    const auto track = centroid_track(chain, c);
    names.push_back("h" + std::to_string(c + 1) + "x");
    names.push_back("h" + std::to_string(c + 1) + "y");
    std::vector<double> xs, ys;
    for (const auto& p : track) {
      xs.push_back(p.x());
      ys.push_back(p.y());
    }
    series.push_back(std::move(xs));
    series.push_back(std::move(ys));
  }
  if (max_lag >= 0) {
    std::vector<AcfResult> acfs;
    for (const auto& s : series) {
      try {
        acfs.push_back(autocorrelation(s, max_lag));
      } catch (const DegenerateSeries&) {
        // a chain that never moved: keep the column, mark it undefined
        AcfResult a;
        for (int l = 0; l <= max_lag; ++l) {
          a.lags.push_back(l);
          a.values.push_back(std::nan(""));
        }
        acfs.push_back(std::move(a));
      }
    }
    write_acf(names, acfs, dir / "acf.csv");
    std::printf("decorrelation lag (action, |acf| < 0.1): %d\n", decorrelation_lag(acfs.front()));
  }
  for (std::size_t c = 0; c < k; ++c) {
    const Histogram2D h = heatmap(centroid_track(chain, c), cfg.grid);
    write_heatmap(h, dir / ("heatmap_h" + std::to_string(c + 1) + ".csv"));
  }
  write_histogram(action_histogram(chain, cfg.hist_bins), dir / "histogram.csv");

  const ChainSample map = map_estimate(chain, MapObjective::posterior);
  Chain map_only;
  map_only.samples = {map};
  map_only.config.n_centroids = static_cast<int>(k);
  write_chain(map_only, dir / "map.csv");
  std::printf("MAP:");
  for (const auto& h : map.centroids) std::printf(" (%.6f, %.6f)", h.x(), h.y());
  std::printf(" action=%.10g\n", map.action);
  return kExitOk;
}

// `recorded` is what goes into config.json: the same run without the --out
// override, so the file does not depend on where it was written
int cmd_demo(const RunConfig& recorded, const std::string& out_dir, int workers) {
  RunConfig cfg = recorded;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  save_config(recorded, prepare_out(cfg) / "config.json");
  int rc = cmd_match(cfg, false);
  // LDDMM failing to match is part of what the demo shows, so its status is not fatal
  cmd_match(cfg, true);
  if (rc != kExitOk) return rc;
  // the demo uses the deterministic sequential sweep unless workers are requested
  if ((rc = cmd_scan(cfg, workers, workers <= 0)) != kExitOk) return rc;
  if ((rc = cmd_sample(cfg)) != kExitOk) return rc;
  return cmd_diag(cfg, "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective metamorphosis landmark matching"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory (overrides the config)");
  app.add_option("--seed", g.seed, "sampler seed (overrides the config)");
  app.add_option("--workers", g.workers, "scan worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* match = app.add_subcommand("match", "solve the shooting problem, write the trajectory");
  bool lddmm = false;
  match->add_flag("--lddmm", lddmm, "drop the nu field (classical matching)");
  auto* scan = app.add_subcommand("scan", "action landscape over single-centroid positions");
  bool warm = false;
  scan->add_flag("--warm", warm, "sequential warm-started sweep instead of parallel cold starts");
  auto* sample = app.add_subcommand("sample", "pCN chain over the centroid positions");
  auto* diag = app.add_subcommand("diag", "chain diagnostics: ACF, heat maps, histogram, MAP");
  std::string chain_path;
  diag->add_option("--chain", chain_path, "chain file (default OUT/chain.csv)");
  auto* demo = app.add_subcommand("demo", "run match, scan, sample and diag on a preset");
  std::string preset;
  demo->add_option("preset", preset, "scenario preset")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*match) return cmd_match(resolve(g), lddmm);
    if (*scan) return cmd_scan(resolve(g), g.workers, warm);
    if (*sample) return cmd_sample(resolve(g));
    if (*diag) return cmd_diag(resolve(g), chain_path);
    if (*demo) return cmd_demo(resolve(g, preset, false), g.out_dir, g.workers);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BlowUp& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SolverFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SamplerInitError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
