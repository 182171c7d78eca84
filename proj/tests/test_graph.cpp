#include <doctest.h>

#include <cmath>
#include <numeric>

#include "loopsoup/graph.hpp"

using namespace loopsoup;

namespace {

double incident_sum(const WeightedGraph& g, Index v) {
  double s = 0;
  for (const Neighbor& nb : g.neighbors(v)) s += nb.conductance;
  return s;
}

}  // namespace

TEST_CASE("fully killed box has no interior vertex") {
  const WeightedGraph g = build_half_plane(1, 1, 1);
  CHECK(g.free_count() == 0);
  CHECK(g.edge_count() == 0);
}

TEST_CASE("smallest box with a free site") {
  // [-1,1] x [0,2] leaves the single site (0,1) with four killed neighbours.
  const WeightedGraph g = build_half_plane(1, 1, 2);
  REQUIRE(g.free_count() == 1);
  const Index v = g.free_vertices()[0];
  CHECK(g.vertex(v) == Vertex{0, 1});
  CHECK(g.neighbors(v).size() == 4);
  CHECK(g.lambda(v) == doctest::Approx(2.0));
}

TEST_CASE("open box site count") {
  const WeightedGraph g = build_half_plane(4, 8, 8);
  CHECK(g.free_count() == 15 * 7);
  for (const Edge& e : g.edges()) CHECK(e.conductance == 2.0);
  CHECK(build_half_plane(1, 2, 2).free_count() == 3);
}

TEST_CASE("rejects non-positive dimensions") {
  CHECK_THROWS_AS(build_half_plane(0, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_half_plane(2, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(build_half_plane(2, 4, -1), std::invalid_argument);
}

TEST_CASE("row-major storage and lookup") {
  const WeightedGraph g = build_half_plane(2, 5, 3);
  for (Index v = 0; v < g.lattice_count(); ++v) {
    const Vertex p = g.vertex(v);
    CHECK(v == p.j * (2 * 5 + 1) + (p.i + 5));
    CHECK(g.index_of(p) == v);
  }
  CHECK_FALSE(g.find({6, 0}).has_value());
  CHECK_THROWS_AS(g.index_of({0, 4}), std::out_of_range);
}

TEST_CASE("lambda is the incident conductance sum and r*C = 1/2") {
  for (const int n : {1, 3, 8}) {
    const WeightedGraph g = build_half_plane(n, 6, 4);
    for (Index v = 0; v < g.vertex_count(); ++v) CHECK(g.lambda(v) == doctest::Approx(incident_sum(g, v)));
    for (const Edge& e : g.edges()) {
      CHECK(e.conductance == 0.5 * n);
      CHECK(WeightedGraph::cable_length(e.conductance) * e.conductance == 0.5);
    }
  }
}

TEST_CASE("identify two boundary sites adds their conductances") {
  // v is a free vertex joined to killed b1, b2 by conductance n/2 each.
  const int n = 4;
  std::vector<VertexRole> roles{VertexRole::interior, VertexRole::killed, VertexRole::killed};
  std::vector<Edge> edges{{0, 1, 0.5 * n}, {0, 2, 0.5 * n}};
  const WeightedGraph g(n, 0, 0, roles, {}, edges);
  const std::vector<std::vector<Index>> classes{{1, 2}};
  const WeightedGraph h = identify_vertices(g, classes);
  REQUIRE(h.edge_count() == 1);
  CHECK(h.edges()[0].conductance == doctest::Approx(n));
  CHECK(h.role(3) == VertexRole::quotient);
  CHECK(h.is_free(3));
}

TEST_CASE("quotient interval sizes") {
  const WeightedGraph g = build_half_plane(4, 16, 8);
  const QuotientGraph qg = build_quotient(g, 1.0, 2.0);
  CHECK(qg.left_class.size() == 5);
  CHECK(qg.right_class.size() == 5);
  CHECK_FALSE(qg.graph.is_killed(qg.left));
  CHECK_FALSE(qg.graph.is_killed(qg.right));
  // Every other bottom site stays killed.
  for (int i = -16; i <= 16; ++i) {
    const Index v = g.index_of({i, 0});
    const bool merged = (i >= -4 && i <= 0) || (i >= 4 && i <= 8);
    CHECK(qg.graph.is_killed(v) == !merged);
  }
}

TEST_CASE("quotient preserves incident conductance") {
  const WeightedGraph g = build_half_plane(3, 12, 6);
  const QuotientGraph qg = build_quotient(g, 1.0, 2.5);
  auto class_sum = [&](const std::vector<Index>& cls) {
    double s = 0;
    for (Index v : cls)
      for (const Neighbor& nb : g.neighbors(v))
        if (g.is_free(nb.to)) s += nb.conductance;
    return s;
  };
  CHECK(qg.graph.lambda(qg.left) == doctest::Approx(class_sum(qg.left_class)));
  CHECK(qg.graph.lambda(qg.right) == doctest::Approx(class_sum(qg.right_class)));
  CHECK(qg.graph.lambda(qg.left) == doctest::Approx(1.5 * 4));
}

TEST_CASE("quotient errors") {
  CHECK_THROWS_AS(build_quotient(build_half_plane(1, 1, 1), 1.0, 2.0), std::invalid_argument);
  // Right interval reaches the frame.
  CHECK_THROWS_AS(build_quotient(build_half_plane(2, 4, 4), 1.0, 2.0), std::invalid_argument);
  // Right interval leaves the box.
  CHECK_THROWS_AS(build_quotient(build_half_plane(2, 4, 4), 1.0, 3.0), std::invalid_argument);
  const WeightedGraph g = build_half_plane(1, 4, 4);
  const std::vector<std::vector<Index>> overlapping{{g.index_of({0, 0})}, {g.index_of({0, 0})}};
  CHECK_THROWS_AS(identify_vertices(g, overlapping), std::invalid_argument);
}

TEST_CASE("json round trip") {
  const WeightedGraph g = build_half_plane(2, 10, 6);
  const auto doc = to_json(g);
  CHECK(doc["n"] == 2);
  CHECK(doc["quotient"].is_null());
  const WeightedGraph back = half_plane_from_json(doc);
  CHECK(back.free_count() == g.free_count());
  CHECK(doc["killed"].size() == g.killed_vertices().size());

  const QuotientGraph qg = build_quotient(g, 1.0, 3.0);
  const auto qdoc = to_json(qg);
  CHECK(qdoc["quotient"]["q"] == 3.0);
  CHECK(half_plane_from_json(qdoc).free_count() == qg.graph.free_count());
}
