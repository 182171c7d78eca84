#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "loopsoup/excursions.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

TEST_CASE("endpoint intensity is symmetric and linear in u") {
  const WeightedGraph g = build_half_plane(2, 20, 12);
  const ExcursionSampler ex(g, -2.0, 0.0);
  const EndpointIntensity w = ex.intensity(0.3);
  CHECK(w.sites.size() == 5);
  CHECK(w.mass == w.mass.transpose());
  CHECK(ex.intensity(0.0).mass.isZero());
  CHECK((ex.intensity(0.6).mass - 2 * w.mass).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(ex.intensity(-1.0), std::invalid_argument);
  // The interval may not reach the frame.
  CHECK_THROWS_AS(ExcursionSampler(g, -10.0, 0.0), std::invalid_argument);
}

TEST_CASE("far-apart endpoints decay like the inverse square") {
  // The walk-visit Green function along the first row decays like 4/(pi d^2),
  // so the pair intensity approaches 8u/d^2.
  const WeightedGraph g = build_half_plane(1, 150, 150);
  const ExcursionSampler ex(g, 0.0, 15.0);
  const double u = 0.5;
  const EndpointIntensity w = ex.intensity(u);
  const double d = 15;
  CHECK(std::abs(w.mass(0, 15) / (8 * u / (d * d)) - 1) < 0.10);
}

TEST_CASE("excursion paths are interior nearest-neighbour walks") {
  const WeightedGraph g = build_half_plane(2, 16, 12);
  const ExcursionSampler ex(g, -1.0, 0.5);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ExcursionProcess proc = ex.sample(0.5, seed);
    for (const ExcursionPath& e : proc.excursions) {
      CHECK(g.is_killed(e.start));
      CHECK(g.is_killed(e.end));
      CHECK(g.vertex(e.path.front()).i == g.vertex(e.start).i);
      CHECK(g.vertex(e.path.back()).i == g.vertex(e.end).i);
      CHECK(g.vertex(e.path.front()).j == 1);
      CHECK(g.vertex(e.path.back()).j == 1);
      for (const Index v : e.path) CHECK(g.is_free(v));
      for (const Index id : traversed_edges(g, e)) CHECK(id >= 0);
    }
  }
}

TEST_CASE("count, endpoint law, reversal and diagonal") {
  const WeightedGraph g = build_half_plane(2, 16, 12);
  const ExcursionSampler ex(g, -1.0, 0.0);
  const double u = 0.25;
  const EndpointIntensity w = ex.intensity(u);
  const Index m = static_cast<Index>(w.sites.size());
  const int draws = 10000;
  RunningStats count;
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(m, m);
  auto pos = [&](Index site) {
    return static_cast<Index>(std::find(w.sites.begin(), w.sites.end(), site) - w.sites.begin());
  };
  for (int t = 0; t < draws; ++t) {
    const ExcursionProcess proc = ex.sample(u, static_cast<std::uint64_t>(t));
    count.add(static_cast<double>(proc.excursions.size()));
    for (const ExcursionPath& e : proc.excursions) hist(pos(e.start), pos(e.end)) += 1;
  }
  CHECK(std::abs(count.mean() - w.total()) <= 3 * std::sqrt(w.total() / draws));

  std::vector<double> obs, expect, fwd, rev;
  const double n_total = hist.sum();
  for (Index s = 0; s < m; ++s)
    for (Index t = 0; t < m; ++t) {
      obs.push_back(hist(s, t));
      expect.push_back(n_total * w.mass(s, t) / w.total());
      if (s < t) {
        fwd.push_back(hist(s, t));
        rev.push_back(hist(t, s));
      }
    }
  CHECK(chi_square_gof(obs, expect).p_value > 0.01);
  CHECK(symmetry_test(fwd, rev).p_value > 0.01);
  for (Index s = 0; s < m; ++s) {
    const double mean = draws * w.mass(s, s);
    CHECK(hist(s, s) > 0);
    CHECK(std::abs(hist(s, s) - mean) <= 3 * std::sqrt(mean));
  }
}

TEST_CASE("bridge length law on a small strip") {
  const WeightedGraph g = build_half_plane(1, 4, 3);  // 7 x 2 sites
  const ExcursionSampler ex(g, -1.0, 1.0);
  const Index m = g.free_count();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
  for (Index f = 0; f < m; ++f) {
    const Index v = g.free_vertices()[f];
    for (const Neighbor& nb : g.neighbors(v))
      if (g.free_index(nb.to) >= 0) p(f, g.free_index(nb.to)) += nb.conductance / g.lambda(v);
  }
  const int s = 0, t = 2;  // above (-1,0) to above (1,0)
  const Index x = g.free_index(g.index_of({-1, 1})), y = g.free_index(g.index_of({1, 1}));
  const double gxy = ex.walk_green(x, t);
  const int draws = 100000;
  std::vector<double> lengths(64, 0.0);
  Rng rng = make_rng(21, 0);
  for (int k = 0; k < draws; ++k) {
    const int len = ex.sample_path(s, t, rng).jumps();
    if (len < 64) lengths[len] += 1;
  }
  Eigen::MatrixXd pk = Eigen::MatrixXd::Identity(m, m);
  for (int k = 0; k <= 10; ++k) {
    const double prob = pk(x, y) / gxy;
    const double se = std::sqrt(prob * (1 - prob) / draws);
    CHECK(std::abs(lengths[k] / draws - prob) <= 3 * se + 1e-12);
    pk = pk * p;
  }
}
