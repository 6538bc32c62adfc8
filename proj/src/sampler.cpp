#include "selmeta/sampler.hpp"

#include <cmath>
#include <random>
#include <string>

#include "selmeta/errors.hpp"

namespace selmeta {

void SamplerConfig::validate() const {
  if (n_samples < 1) throw InvalidInput("sampler: n_samples must be >= 1");
  if (n_centroids < 1) throw InvalidInput("sampler: n_centroids must be >= 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("sampler: beta must be in (0,1]");
  if (!(prior_scale > 0.0) || !std::isfinite(prior_scale)) throw InvalidInput("sampler: prior_scale must be positive");
  if (!(sigma_nu_sq > 0.0) || !std::isfinite(sigma_nu_sq)) throw InvalidInput("sampler: sigma_nu_sq must be positive");
  if (initial_centroids.size() != static_cast<std::size_t>(n_centroids))
    throw InvalidInput("sampler: expected " + std::to_string(n_centroids) + " initial centroids, got " +
                       std::to_string(initial_centroids.size()));
  for (const auto& h : initial_centroids)
    if (!is_finite(h)) throw InvalidInput("sampler: non-finite initial centroid");
}

Eigen::VectorXd pack_centroids(const std::vector<Point2>& centroids) {
  Eigen::VectorXd h(static_cast<Eigen::Index>(2 * centroids.size()));
  for (std::size_t k = 0; k < centroids.size(); ++k) h.segment<2>(static_cast<Eigen::Index>(2 * k)) = centroids[k];
  return h;
}

std::vector<Point2> unpack_centroids(const Eigen::VectorXd& h) {
  if (h.size() % 2 != 0) throw InvalidInput("centroid vector must have even length");
  std::vector<Point2> c(static_cast<std::size_t>(h.size() / 2));
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = h.segment<2>(static_cast<Eigen::Index>(2 * k));
  return c;
}

Eigen::VectorXd propose(const Eigen::VectorXd& h, double beta, const Eigen::VectorXd& noise, double prior_scale) {
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("propose: beta must be in (0,1]");
  if (!(prior_scale > 0.0)) throw InvalidInput("propose: prior_scale must be positive");
  if (h.size() != noise.size()) throw InvalidInput("propose: state and noise differ in length");
  if (!h.allFinite() || !noise.allFinite()) throw InvalidInput("propose: non-finite input");
  return beta * (prior_scale * noise) + std::sqrt(1.0 - beta * beta) * h;
}

bool accept_test(double action_current, double action_proposed, double u) {
  if (std::isnan(action_current) || std::isnan(action_proposed)) throw InvalidInput("accept_test: NaN action");
  if (!std::isfinite(action_current) || !std::isfinite(action_proposed)) throw InvalidInput("accept_test: infinite action");
  if (!(u >= 0.0 && u < 1.0)) throw InvalidInput("accept_test: u must lie in [0,1)");
  return u < std::min(1.0, std::exp(action_current - action_proposed));
}

ActionOracle shooting_oracle(const ShootingProblem& prob_template, double sigma_nu_sq,
                             const MultiStartOptions& multistart) {
  return [prob_template, sigma_nu_sq, multistart](const std::vector<Point2>& centroids,
                                                    const std::vector<Vec2>& warm) {
    ShootingProblem prob = prob_template;
    prob.field.centroids = centroids;
    prob.field.sigma_nu_sq = sigma_nu_sq;
    if (warm.empty()) {
      prob.p0_init.reset();
    } else {
      prob.p0_init = warm;
    }
    try {
      const ShootingResult r = solve_bvp_multistart(prob, multistart);
      return ActionEvaluation{r.action, r.converged, r.p0};
    } catch (const SolverFailure&) {
      return ActionEvaluation{};
    }
  };
}

Chain run_chain(const SamplerConfig& cfg, const ShootingProblem& prob_template, const MultiStartOptions& multistart) {
  prob_template.validate();
  return run_chain(cfg, shooting_oracle(prob_template, cfg.sigma_nu_sq, multistart));
}

Chain run_chain(const SamplerConfig& cfg, const ActionOracle& oracle) {
  cfg.validate();
  const auto dim = static_cast<Eigen::Index>(2 * cfg.n_centroids);

  Chain chain;
  chain.config = cfg;
  chain.samples.reserve(static_cast<std::size_t>(cfg.n_samples));

  ActionEvaluation current = oracle(cfg.initial_centroids, {});
  if (!current.converged || !std::isfinite(current.action))
    throw SamplerInitError("sampler: shooting for the initial centroids did not converge");
  Eigen::VectorXd h = pack_centroids(cfg.initial_centroids);
  chain.samples.push_back({cfg.initial_centroids, current.action, true, true});

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd noise(dim);

  long accepted = 0;
  for (int j = 1; j < cfg.n_samples; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) noise[i] = normal(rng);
    double u = uniform(rng);
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);

    const Eigen::VectorXd proposal = propose(h, cfg.beta, noise, cfg.prior_scale);
    const std::vector<Point2> centroids = unpack_centroids(proposal);
    ActionEvaluation eval = oracle(centroids, current.p0);

    ChainSample sample = chain.samples.back();
    sample.accepted = false;
    if (!eval.converged || !std::isfinite(eval.action)) {
      chain.failed_proposals.push_back(j);
    } else if (accept_test(current.action, eval.action, u)) {
      h = proposal;
      current = std::move(eval);
      sample = {centroids, current.action, true, true};
      ++accepted;
    }
    chain.samples.push_back(std::move(sample));
  }

  chain.acceptance_rate = cfg.n_samples > 1 ? static_cast<double>(accepted) / (cfg.n_samples - 1) : 0.0;
  chain.final_p0 = current.p0;
  return chain;
}

}  // namespace selmeta
