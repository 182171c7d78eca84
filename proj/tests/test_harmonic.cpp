#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "loopsoup/harmonic.hpp"

using namespace loopsoup;

namespace {

// k - x - y - k with unit conductances.
WeightedGraph two_site_path() {
  std::vector<VertexRole> roles{VertexRole::killed, VertexRole::interior, VertexRole::interior,
                                VertexRole::killed};
  return WeightedGraph(1, 0, 0, roles, {}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
}

// Random connected graph on k vertices; vertex 0 is killed, the rest free.
WeightedGraph random_graph(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> cond(0.2, 2.0);
  std::bernoulli_distribution extra(0.35);
  std::vector<VertexRole> roles(k, VertexRole::interior);
  roles[0] = VertexRole::killed;
  std::vector<Edge> edges;
  for (int v = 1; v < k; ++v) {
    std::uniform_int_distribution<int> parent(0, v - 1);
    edges.push_back({parent(rng), v, cond(rng)});
  }
  for (int a = 1; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (extra(rng)) edges.push_back({a, b, cond(rng)});
  return WeightedGraph(1, 0, 0, roles, {}, edges);
}

}  // namespace

TEST_CASE("single free site: G = 1/lambda") {
  const WeightedGraph g = build_half_plane(1, 1, 2);
  const GreenTable t = green_table(g);
  REQUIRE(t.values.rows() == 1);
  CHECK(t.values(0, 0) == doctest::Approx(0.5));
  CHECK(walk_green(g, t.values(0, 0), t.vertices[0]) == doctest::Approx(1.0));
}

TEST_CASE("two-site path Green table") {
  const GreenTable t = green_table(two_site_path());
  Eigen::Matrix2d expect;
  expect << 2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3;
  CHECK((t.values - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Green table is symmetric positive definite") {
  const WeightedGraph g = build_half_plane(2, 6, 5);
  const GreenTable t = green_table(g);
  CHECK((t.values - t.values.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(t.values).info() == Eigen::Success);
  const SparseMatrix m = conductance_matrix(g);
  const Eigen::MatrixXd resid = Eigen::MatrixXd(m) * t.values - Eigen::MatrixXd::Identity(m.rows(), m.cols());
  CHECK(resid.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("no killing is rejected") {
  std::vector<VertexRole> roles{VertexRole::interior, VertexRole::interior};
  const WeightedGraph g(1, 0, 0, roles, {}, {{0, 1, 1.0}});
  CHECK_THROWS_AS(green_table(g), std::domain_error);
  CHECK_THROWS_AS(green_table(build_half_plane(1, 1, 1)), std::invalid_argument);
}

TEST_CASE("iterative and direct solves agree") {
  const WeightedGraph g = build_half_plane(1, 30, 30);
  const LaplacianSolver direct(g);
  SolverPolicy it_policy;
  it_policy.direct_limit = 10;
  const LaplacianSolver iterative(g, it_policy);
  CHECK(direct.is_direct());
  CHECK_FALSE(iterative.is_direct());
  const Index y = g.index_of({0, 1});
  const Eigen::VectorXd a = green_column(direct, g, y);
  const Eigen::VectorXd b = green_column(iterative, g, y);
  CHECK((a - b).norm() / a.norm() < 1e-8);
}

TEST_CASE("exit kernel of a single free site") {
  const WeightedGraph g = build_half_plane(1, 1, 2);
  const auto kernel = boundary_hit_kernel(g, g.index_of({0, 1}));
  REQUIRE(kernel.size() == 4);
  for (const auto& e : kernel) CHECK(e.probability == doctest::Approx(0.25));
  CHECK_THROWS_AS(boundary_hit_kernel(g, g.index_of({0, 0})), std::invalid_argument);
}

TEST_CASE("exit kernel is normalized and matches G/4 on the bottom row") {
  const WeightedGraph g = build_half_plane(1, 40, 40);
  const LaplacianSolver solver(g);
  const Index x = g.index_of({0, 1});
  const auto kernel = boundary_hit_kernel(solver, g, x);
  double total = 0;
  for (const auto& e : kernel) total += e.probability;
  CHECK(std::abs(total - 1) < 1e-9);

  const Eigen::VectorXd col = green_column(solver, g, x);
  double worst = 0;
  for (int j = 0; j <= 15; ++j) {
    const Index b = g.index_of({j, 0});
    const Index above = g.index_of({j, 1});
    double p = 0;
    for (const auto& e : kernel)
      if (e.vertex == b) p = e.probability;
    const double visits = walk_green(g, col[g.free_index(above)], above);
    worst = std::max(worst, std::abs(p - visits / 4));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("exit kernel decays like the half-plane Poisson kernel") {
  // P_{(0,1)}(exit at (j,0)) ~ 1/(pi j^2); the truncation bias shrinks as the box doubles.
  const double j = 10;
  double previous = 1;
  for (const int w : {60, 120}) {
    const WeightedGraph g = build_half_plane(1, w, w);
    const auto kernel = boundary_hit_kernel(g, g.index_of({0, 1}));
    double p = 0;
    for (const auto& e : kernel)
      if (e.vertex == g.index_of({static_cast<int>(j), 0})) p = e.probability;
    const double dev = std::abs(std::numbers::pi * j * j * p - 1);
    CHECK(dev < 0.05);
    CHECK(dev < previous);
    previous = dev;
  }
}

TEST_CASE("equivalent conductance of a symmetric block") {
  const double gd = 0.7, h = 0.3;
  Eigen::Matrix2d m;
  m << gd, h, h, gd;
  const auto e = ceq_from_green(m);
  const double det = gd * gd - h * h;
  CHECK(e.ceq == doctest::Approx(h / det));
  CHECK(e.chi_x == doctest::Approx((gd - h) / det));
  CHECK(e.chi_x + e.ceq == doctest::Approx(gd / det));
  CHECK_FALSE(e.disconnected());

  Eigen::Matrix2d diag;
  diag << 1.0, 0.0, 0.0, 2.0;
  CHECK(ceq_from_green(diag).disconnected());

  Eigen::Matrix2d bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(ceq_from_green(bad), std::invalid_argument);
  // Templated on the scalar.
  Eigen::Matrix2f mf = m.cast<float>();
  CHECK(ceq_from_green(mf).ceq == doctest::Approx(h / det).epsilon(1e-5));
}

TEST_CASE("reconstructed network inverts back to the Green block") {
  const WeightedGraph g = build_half_plane(2, 8, 6);
  const LaplacianSolver solver(g);
  const Index x = g.index_of({-2, 2}), y = g.index_of({3, 1});
  const Eigen::Matrix2d block = green_block(solver, g, x, y);
  const auto e = ceq_from_green(block);
  Eigen::Matrix2d net;
  net << e.chi_x + e.ceq, -e.ceq, -e.ceq, e.chi_y + e.ceq;
  CHECK((net.inverse() - block).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Green inversion agrees with the hitting-probability sum on random graphs") {
  std::mt19937_64 rng(20261014);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + trial % 10;
    const WeightedGraph g = random_graph(rng, k);
    const LaplacianSolver solver(g);
    std::uniform_int_distribution<int> pick(1, k - 1);
    const Index x = pick(rng);
    Index y = pick(rng);
    while (y == x) y = pick(rng);
    const double via_green = ceq_from_green(green_block(solver, g, x, y)).ceq;
    const double via_paths = ceq_path_sum(g, x, y);
    CHECK(std::abs(via_green - via_paths) < 1e-8);
  }
}

TEST_CASE("interval conductance: harmonic sum equals quotient Green inversion") {
  const WeightedGraph g = build_half_plane(2, 24, 16);
  const QuotientGraph qg = build_quotient(g, 1.0, 2.0);
  const double sum = ceq_n_q(qg);
  const double inv = ceq_quotient_green(qg);
  CHECK(sum > 0);
  CHECK(std::abs(sum - inv) < 1e-9 * sum);
}

TEST_CASE("interval conductance grows with the left interval") {
  const WeightedGraph g = build_half_plane(2, 40, 20);
  double last = 0;
  for (const double a : {0.5, 1.0, 2.0, 4.0}) {
    const double c = ceq_n_q(build_quotient(g, a, 3.0));
    CHECK(c >= last);
    last = c;
  }
}

TEST_CASE("single-site right interval is a one-term sum") {
  const WeightedGraph g = build_half_plane(3, 20, 12);
  const QuotientGraph qg = build_quotient(g, 1.0, 1.0);
  REQUIRE(qg.right_class.size() == 1);
  const auto kernel = boundary_hit_kernel(g, g.index_of({3, 1}));
  double p = 0;
  for (const auto& e : kernel)
    for (Index b : qg.left_class)
      if (e.vertex == b) p += e.probability;
  CHECK(ceq_n_q(qg) == doctest::Approx(1.5 * p).epsilon(1e-10));
}
