#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "loopsoup/clusters.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

namespace {

std::vector<Index> sites(const WeightedGraph& g, std::initializer_list<Vertex> pts) {
  std::vector<Index> out;
  for (const Vertex& p : pts) out.push_back(g.index_of(p));
  return out;
}

ExcursionProcess one_excursion(const WeightedGraph& g, std::initializer_list<Vertex> pts) {
  ExcursionPath e;
  e.path = sites(g, pts);
  e.start = g.index_of({g.vertex(e.path.front()).i, 0});
  e.end = g.index_of({g.vertex(e.path.back()).i, 0});
  ExcursionProcess p;
  p.excursions.push_back(e);
  return p;
}

PointSet unit_square(double dx, double dy) {
  PointSet s;
  for (int k = 0; k <= 40; ++k) {
    const double t = k / 40.0;
    s.push_back({dx + t, dy});
    s.push_back({dx + t, dy + 1});
    s.push_back({dx, dy + t});
    s.push_back({dx + 1, dy + t});
  }
  return s;
}

}  // namespace

TEST_CASE("excursions sharing a vertex form one cluster") {
  const WeightedGraph g = build_half_plane(1, 8, 6);
  const std::vector<ExcursionProcess> ex{one_excursion(g, {{4, 1}, {4, 2}, {5, 2}, {5, 3}, {5, 2}, {5, 1}}),
                                         one_excursion(g, {{6, 1}, {6, 2}, {6, 3}, {5, 3}, {6, 3}, {6, 2}, {6, 1}})};
  const ClusterPartition p = build_clusters(g, nullptr, ex);
  REQUIRE(p.excursion_cluster.size() == 2);
  CHECK(p.excursion_cluster[0] == p.excursion_cluster[1]);
  CHECK(p.count == 1);
  CHECK(p.vertex_cluster[g.free_index(g.index_of({0, 1}))] == -1);
}

TEST_CASE("disjoint loops stay separate") {
  const WeightedGraph g = build_half_plane(1, 8, 6);
  LoopSoupSample soup;
  soup.loops.push_back({sites(g, {{-3, 1}, {-3, 2}, {-2, 2}, {-2, 1}, {-3, 1}})});
  soup.loops.push_back({sites(g, {{2, 3}, {3, 3}, {2, 3}})});
  const ClusterPartition p = build_clusters(g, &soup, {});
  CHECK(p.count == 2);
  CHECK(p.loop_cluster[0] != p.loop_cluster[1]);
}

TEST_CASE("two excursions bridged by two loops") {
  const WeightedGraph g = build_half_plane(1, 6, 3);
  LoopSoupSample soup;
  soup.loops.push_back({sites(g, {{-2, 1}, {-2, 2}, {-1, 2}, {-1, 1}, {-2, 1}})});
  soup.loops.push_back({sites(g, {{-1, 1}, {0, 1}, {0, 2}, {-1, 2}, {-1, 1}})});
  const std::vector<ExcursionProcess> ex{one_excursion(g, {{-3, 1}, {-2, 1}}), one_excursion(g, {{0, 1}, {1, 1}})};
  const ClusterPartition p = build_clusters(g, &soup, ex);
  CHECK(p.count == 1);
  CHECK(p.excursion_cluster[0] == p.excursion_cluster[1]);
  CHECK(p.loop_cluster[0] == p.excursion_cluster[0]);
  // Without the second loop the chain breaks.
  soup.loops.pop_back();
  const ClusterPartition q = build_clusters(g, &soup, ex);
  CHECK(q.excursion_cluster[0] != q.excursion_cluster[1]);
}

TEST_CASE("metric partition extends the sign clusters") {
  const WeightedGraph g = build_half_plane(2, 10, 8);
  const GffSampler sampler(g);
  GffSample s = sampler.sample(4);
  mark_edges(s, g, 4);
  const ClusterPartition bare = build_clusters(g, s, {});
  CHECK(bare.count == sign_clusters(s, g).count);
  for (Index e = 0; e < g.edge_count(); ++e) CHECK((bare.edge_cluster[e] >= 0) == (s.edge_open[e] != 0));
  const ExcursionSampler ex(g, -1.0, 1.0);
  const std::vector<ExcursionProcess> fam{ex.sample(0.5, std::uint64_t{4})};
  CHECK(build_clusters(g, s, fam).count <= bare.count);
}

TEST_CASE("connection estimator basics") {
  ConnectionConfig c;
  c.n = 2;
  c.q = 2;
  c.a = 1;
  c.u = 0;
  c.samples = 200;
  const ConnectionEstimate zero = estimate_p(c);
  CHECK(zero.p_hat == 0.0);
  CHECK(zero.hits == 0);
  c.samples = 99;
  CHECK_THROWS_AS(estimate_p(c), std::invalid_argument);
  c.samples = 200;
  c.alpha = 0.3;
  CHECK_THROWS_AS(estimate_p(c), std::invalid_argument);
  CHECK_THROWS_AS(connection_mode_from_string("cable"), std::invalid_argument);
  CHECK(connection_mode_from_string(to_string(ConnectionMode::metric_vertex)) == ConnectionMode::metric_vertex);
}

TEST_CASE("estimate is independent of the worker count") {
  ConnectionConfig c;
  c.n = 2;
  c.q = 2;
  c.a = 1;
  c.u = c.v = 0.1;
  c.samples = 120;
  const ConnectionEstimate one = estimate_p(c);
  c.workers = 3;
  const ConnectionEstimate three = estimate_p(c);
  CHECK(one.hits == three.hits);
  CHECK(one.censored == three.censored);
}

TEST_CASE("cable estimator follows the local-time form of the conductance law") {
  ConnectionConfig c;
  c.n = 2;
  c.q = 3;
  c.a = 1;
  c.u = c.v = 0.05;
  c.samples = 3000;
  const ConnectionEstimate e = estimate_p(c);
  CHECK(std::abs(e.p_hat - e.formula_local_time) <= 3 * e.stderr_p);
  CHECK(e.formula == doctest::Approx(connection_formula(e.ceq, 2, 0.05, 0.05, 8 * std::numbers::pi)));
  CHECK(e.limit == doctest::Approx(1 - std::pow(3.0, -0.1)));
}

TEST_CASE("discrete clusters are smaller than cable clusters") {
  ConnectionConfig c;
  c.n = 1;
  c.q = 3;
  c.a = 2;
  c.u = c.v = 0.1;
  c.width = 10;
  c.height = 10;
  c.samples = 3000;
  c.mode = ConnectionMode::discrete;
  const ConnectionEstimate d = estimate_p(c);
  c.mode = ConnectionMode::metric;
  const ConnectionEstimate m = estimate_p(c);
  CHECK(d.p_hat <= m.p_hat + 2 * std::hypot(d.stderr_p, m.stderr_p));
}

TEST_CASE("Hausdorff and collection distance") {
  const PointSet a = unit_square(0, 0), b = unit_square(0.3, 0);
  CHECK(hausdorff(a, a) == 0.0);
  CHECK(hausdorff(a, b) == doctest::Approx(0.3));
  CHECK(collection_distance({a}, {b}) == doctest::Approx(0.3));
  CHECK(collection_distance({a, b}, {a, b}) == 0.0);
  CHECK(collection_distance({a, b}, {b, a}) == 0.0);
  CHECK(collection_distance({a}, {a, b}) == std::numeric_limits<double>::infinity());
  CHECK(collection_distance({}, {}) == 0.0);
  CHECK_THROWS_AS(hausdorff({}, a), std::invalid_argument);
}

TEST_CASE("collection distance is a metric on random triples") {
  Rng rng = make_rng(31, 0);
  std::uniform_real_distribution<double> shift(-3, 3);
  std::uniform_int_distribution<int> size(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = size(rng);
    std::vector<PointSet> f[3];
    for (auto& fam : f)
      for (int s = 0; s < k; ++s) fam.push_back(unit_square(shift(rng), shift(rng)));
    const double d01 = collection_distance(f[0], f[1]), d10 = collection_distance(f[1], f[0]);
    const double d12 = collection_distance(f[1], f[2]), d02 = collection_distance(f[0], f[2]);
    CHECK(d01 == doctest::Approx(d10));
    CHECK(d02 <= d01 + d12 + 1e-12);
    CHECK(collection_distance(f[0], f[0]) == 0.0);
    CHECK(d01 >= 0);
  }
}
