#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "selmeta/diagnostics.hpp"
#include "selmeta/errors.hpp"

using namespace selmeta;

namespace {

Chain chain_of(const std::vector<std::pair<Point2, double>>& states) {
  Chain c;
  for (const auto& [h, a] : states) c.samples.push_back(ChainSample{{h}, a, true, true});
  return c;
}

}  // namespace

TEST_CASE("autocorrelation basics") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01(0, 1);
  std::vector<double> s(500);
  for (auto& v : s) v = n01(rng);
  const AcfResult a = autocorrelation(s, 20);
  CHECK(a.lags.size() == 21);
  CHECK(a.lags.back() == 20);
  CHECK(a.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (double v : a.values) CHECK(std::abs(v) <= 1.0);

  std::vector<double> t;
  for (double v : s) t.push_back(3.5 * v - 12.0);
  const AcfResult b = autocorrelation(t, 20);
  for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(std::abs(a.values[k] - b.values[k]) < 1e-12);
}

TEST_CASE("alternating series") {
  for (int n : {10, 100, 1000}) {
    std::vector<double> s;
    for (int i = 0; i < n; ++i) s.push_back(i % 2 ? -1.0 : 1.0);
    CHECK(std::abs(autocorrelation(s, 1).values[1] + 1.0) <= 2.0 / n);
  }
}

TEST_CASE("white noise decorrelates at once") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01(0, 1);
  std::vector<double> s(100000);
  for (auto& v : s) v = n01(rng);
  const AcfResult a = autocorrelation(s, 50);
  for (int k = 1; k <= 50; ++k) CHECK(std::abs(a.values[static_cast<std::size_t>(k)]) < 0.02);
  CHECK(decorrelation_lag(a) == 1);
}

TEST_CASE("decorrelation lag of an AR(1) series") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0, 1);
  std::vector<double> s(200000);
  double x = 0;
  for (auto& v : s) v = x = 0.9 * x + n01(rng);
  // 0.9^k < 0.1 from k = 22 on
  const int lag = decorrelation_lag(autocorrelation(s, 60));
  CHECK(lag >= 20);
  CHECK(lag <= 24);
  CHECK(decorrelation_lag(autocorrelation(s, 5)) == -1);
}

TEST_CASE("autocorrelation preconditions") {
  CHECK_THROWS_AS(autocorrelation(std::vector<double>(10, 2.0), 3), DegenerateSeries);
  CHECK_THROWS_AS(autocorrelation({1, 2, 3}, 2), InvalidInput);
  CHECK_THROWS_AS(autocorrelation({1, 2, 3}, -1), InvalidInput);
}

TEST_CASE("heat map counts") {
  const GridSpec g{-2, 2, -2, 2, 40, 40};
  const Histogram2D one = heatmap(std::vector<Point2>(7, g.centre(5, 9)), g);
  CHECK(one.count(5, 9) == 7);
  long total = 0;
  for (long c : one.counts) total += c;
  CHECK(total == 7);
  CHECK(one.n_out_of_bounds == 0);

  const Histogram2D none = heatmap({}, g);
  CHECK(std::all_of(none.counts.begin(), none.counts.end(), [](long c) { return c == 0; }));

  const Histogram2D edges = heatmap({{-2, -2}, {2, 0}, {0, 2}, {1.999, 1.999}}, g);
  CHECK(edges.count(0, 0) == 1);
  CHECK(edges.count(39, 39) == 1);
  CHECK(edges.n_out_of_bounds == 2);
}

TEST_CASE("heat map of uniform points is multinomial") {
  const GridSpec g{0, 1, 0, 1, 10, 10};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point2> pts(100000);
  for (auto& p : pts) p = Point2(u(rng), u(rng));
  const Histogram2D h = heatmap(pts, g);
  const double sigma = std::sqrt(1000 * 0.99);
  for (long c : h.counts) CHECK(std::abs(static_cast<double>(c) - 1000.0) < 5 * sigma);

  std::uniform_real_distribution<double> wide(-0.5, 1.5);
  std::vector<Point2> spill(5000);
  for (auto& p : spill) p = Point2(wide(rng), wide(rng));
  const Histogram2D hs = heatmap(spill, g);
  long total = hs.n_out_of_bounds;
  for (long c : hs.counts) total += c;
  CHECK(total == 5000);
}

TEST_CASE("centroid tracks") {
  Chain c;
  c.samples.push_back(ChainSample{{{0, 1}, {2, 3}}, 1.0, true, true});
  c.samples.push_back(ChainSample{{{4, 5}, {6, 7}}, 1.0, true, true});
  const auto t = centroid_track(c, 1);
  REQUIRE(t.size() == 2);
  CHECK(t[1] == Point2(6, 7));
  CHECK_THROWS_AS(centroid_track(c, 2), InvalidInput);
}

TEST_CASE("MAP estimate") {
  Chain single = chain_of({{{0.3, 0.4}, 2.0}});
  CHECK(map_estimate(single).centroids[0] == Point2(0.3, 0.4));

  Chain tie = chain_of({{{2, 0}, 1.0}, {{0, 0}, 1.0}});
  CHECK(map_estimate(tie).centroids[0] == Point2(0, 0));
  CHECK(map_estimate(tie, MapObjective::likelihood).centroids[0] == Point2(2, 0));

  // prior 1/2 |h|^2 / s^2 with s = 2: sample b wins on the posterior only
  Chain c = chain_of({{{0, 0}, 3.0}, {{2, 2}, 2.5}, {{1, 0}, 3.2}});
  c.config.prior_scale = 2.0;
  CHECK(map_estimate(c).centroids[0] == Point2(0, 0));
  CHECK(map_estimate(c, MapObjective::likelihood).centroids[0] == Point2(2, 2));
  c.config.prior_scale = 10.0;
  CHECK(map_estimate(c).centroids[0] == Point2(2, 2));

  // permutation invariance with a unique minimiser
  Chain p = chain_of({{{1, 0}, 3.2}, {{2, 2}, 2.5}, {{0, 0}, 3.0}});
  p.config.prior_scale = 2.0;
  CHECK(map_estimate(p).centroids[0] == Point2(0, 0));

  Chain bad = chain_of({{{0, 0}, 1.0}});
  bad.samples[0].shooting_converged = false;
  CHECK_THROWS_AS(map_estimate(bad), InvalidInput);
}

TEST_CASE("action histogram") {
  Chain c = chain_of({{{0, 0}, 1}, {{0, 0}, 2}, {{0, 0}, 3}, {{0, 0}, 4}});
  const Histogram1D h = action_histogram(c, 2);
  REQUIRE(h.edges.size() == 3);
  CHECK(h.edges.front() == 1.0);
  CHECK(h.edges.back() == 4.0);
  CHECK(h.counts == std::vector<long>{2, 2});

  Chain flat = chain_of({{{0, 0}, 5}, {{1, 0}, 5}, {{2, 0}, 5}});
  const Histogram1D f = action_histogram(flat, 4);
  long occupied = 0;
  for (long n : f.counts) occupied += n > 0 ? 1 : 0;
  CHECK(occupied == 1);
  CHECK(f.counts[0] == 3);

  CHECK_THROWS_AS(action_histogram(c, 0), InvalidInput);
  for (auto& s : c.samples) s.shooting_converged = false;
  CHECK_THROWS_AS(action_histogram(c, 3), InvalidInput);
}
