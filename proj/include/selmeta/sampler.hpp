#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "selmeta/shooting.hpp"

namespace selmeta {

struct SamplerConfig {
  int n_samples = 5000;
  int n_centroids = 1;
  double beta = 0.2;
  double prior_scale = 1.0;
  double sigma_nu_sq = 0.04;
  std::uint64_t seed = 0;
  std::vector<Point2> initial_centroids{Point2::Zero()};

  void validate() const;
};

struct ChainSample {
  std::vector<Point2> centroids;
  double action = 0.0;
  bool accepted = false;
  bool shooting_converged = false;
};

struct Chain {
  std::vector<ChainSample> samples;
  double acceptance_rate = 0.0;
  SamplerConfig config;
  /// Iterations whose proposal failed to converge (counted as rejections).
  std::vector<int> failed_proposals;
  /// Converged initial momenta of the final chain state, for warm restarts.
  std::vector<Vec2> final_p0;
};

/// Outcome of scoring one centroid configuration.
struct ActionEvaluation {
  double action = 0.0;
  bool converged = false;
  std::vector<Vec2> p0;
};

/// Scores a configuration; `warm` holds the current state's momenta.
using ActionOracle =
    std::function<ActionEvaluation(const std::vector<Point2>& centroids, const std::vector<Vec2>& warm)>;

/// Shooting-based oracle: solves the template problem with the given centroids,
/// warm-started from the current state plus the cold multistart candidates.
ActionOracle shooting_oracle(const ShootingProblem& prob_template, double sigma_nu_sq,
                             const MultiStartOptions& multistart = {});

/// Packs K centroids as [h_1x, h_1y, ..., h_Kx, h_Ky].
Eigen::VectorXd pack_centroids(const std::vector<Point2>& centroids);
std::vector<Point2> unpack_centroids(const Eigen::VectorXd& h);

/// pCN proposal beta * (prior_scale * noise) + sqrt(1 - beta^2) * h.
Eigen::VectorXd propose(const Eigen::VectorXd& h, double beta, const Eigen::VectorXd& noise, double prior_scale);

/// Metropolis test for the target exp(-action): u < min(1, exp(current - proposed)).
bool accept_test(double action_current, double action_proposed, double u);

/// Preconditioned Crank-Nicolson chain over the centroid configuration.
/// Deterministic for a fixed seed. Throws SamplerInitError when the initial
/// configuration has no converged solution.
Chain run_chain(const SamplerConfig& cfg, const ShootingProblem& prob_template,
                const MultiStartOptions& multistart = {});

/// Same chain with an arbitrary action oracle (used to test the proposal in isolation).
Chain run_chain(const SamplerConfig& cfg, const ActionOracle& oracle);

}  // namespace selmeta
