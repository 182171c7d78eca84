#include <doctest.h>

#include <cmath>
#include <map>

#include "loopsoup/loop_soup.hpp"
#include "loopsoup/stats.hpp"

using namespace loopsoup;

namespace {

// x - y joined by conductance 1; each has escape conductance 3, so p(x,y) = 1/4.
WeightedGraph leaky_pair() {
  std::vector<VertexRole> roles{VertexRole::interior, VertexRole::interior, VertexRole::killed};
  return WeightedGraph(1, 0, 0, roles, {}, {{0, 1, 1.0}, {0, 2, 3.0}, {1, 2, 3.0}});
}

// Square 0-1-2-3 with diagonal 0-2 (odd cycles exist) and a killing edge at each corner.
WeightedGraph square_with_diagonal() {
  std::vector<VertexRole> roles(5, VertexRole::interior);
  roles[4] = VertexRole::killed;
  std::vector<Edge> edges{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}, {0, 2, 0.5},
                          {0, 4, 1.0}, {1, 4, 1.0}, {2, 4, 1.0}, {3, 4, 1.0}};
  return WeightedGraph(1, 0, 0, roles, {}, edges);
}

}  // namespace

TEST_CASE("single free site carries no loops") {
  const LoopLengthSpectrum sp = loop_mass_spectrum(build_half_plane(1, 1, 2), 20);
  for (const double m : sp.mass) CHECK(m == 0.0);
}

TEST_CASE("two-site loop mass by hand") {
  const LoopLengthSpectrum sp = loop_mass_spectrum(leaky_pair(), 10);
  CHECK(sp.mass[2] == doctest::Approx(1.0 / 16));
  CHECK(sp.mass[3] == 0.0);
  CHECK(sp.mass[4] == doctest::Approx(2.0 / 256 / 4));
  CHECK(sp.rho == doctest::Approx(0.25));
}

TEST_CASE("half-plane spectrum has a finite decreasing tail") {
  const WeightedGraph g = build_half_plane(1, 4, 4);  // 8 x 4 box
  const LoopLengthSpectrum sp = loop_mass_spectrum(g);
  CHECK(sp.tail_bound < 1e-6);
  CHECK(std::isfinite(sp.total_mass()));
  for (int k = 2; k <= sp.kmax; ++k) CHECK(sp.mass[k] >= 0);
  for (int k = 10; k + 2 <= sp.kmax; k += 2) CHECK(sp.mass[k + 2] < sp.mass[k]);
  // Odd lengths vanish on the bipartite lattice.
  for (int k = 3; k <= sp.kmax; k += 2) CHECK(sp.mass[k] == 0.0);
  // The kmax rule picks the first length meeting the bound.
  CHECK(loop_tail_bound(sp.vertices, sp.rho_hat, sp.kmax - 1) >= 1e-6);
}

TEST_CASE("no killing is rejected") {
  std::vector<VertexRole> roles{VertexRole::interior, VertexRole::interior};
  const WeightedGraph g(1, 0, 0, roles, {}, {{0, 1, 1.0}});
  CHECK_THROWS_AS(loop_mass_spectrum(g), std::domain_error);
}

TEST_CASE("zero intensity gives an empty soup") {
  const WeightedGraph g = build_half_plane(1, 5, 5);
  const LoopSoupSampler sampler(g);
  CHECK(sampler.sample(0.0, std::uint64_t{1}).loops.empty());
  CHECK_THROWS_AS(sampler.sample(-1.0, std::uint64_t{1}), std::invalid_argument);
}

TEST_CASE("loops are closed interior nearest-neighbour paths") {
  const WeightedGraph g = build_half_plane(1, 6, 6);
  const LoopSoupSampler sampler(g, 0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const LoopSoupSample s = sampler.sample(1.0, seed);
    for (const RootedLoop& l : s.loops) CHECK(is_valid_loop(g, l));
  }
  // Long loops regenerate the bridge from checkpoints.
  Rng rng = make_rng(5, 0);
  for (const int k : {50, 97 + 1, 400}) CHECK(is_valid_loop(g, sampler.sample_loop(k, rng)));
}

TEST_CASE("same seed gives the same soup") {
  const WeightedGraph g = build_half_plane(1, 5, 4);
  const LoopSoupSampler sampler(g);
  const LoopSoupSample a = sampler.sample(0.5, std::uint64_t{42}), b = sampler.sample(0.5, std::uint64_t{42});
  REQUIRE(a.loops.size() == b.loops.size());
  for (std::size_t i = 0; i < a.loops.size(); ++i) CHECK(a.loops[i].path == b.loops[i].path);
}

TEST_CASE("length-4 loop count and length histogram") {
  const WeightedGraph g = build_half_plane(1, 5, 5);  // 10 x 5 box
  const LoopSoupSampler sampler(g);
  const double alpha = 0.5;
  const int soups = 10000;
  RunningStats four;
  std::vector<double> hist(sampler.spectrum().kmax + 1, 0.0);
  for (int s = 0; s < soups; ++s) {
    const LoopSoupSample soup = sampler.sample(alpha, static_cast<std::uint64_t>(s));
    const auto h = soup.length_histogram();
    four.add(h[4]);
    for (std::size_t k = 0; k < h.size(); ++k) hist[k] += h[k];
  }
  const double m4 = sampler.spectrum().mass[4];
  CHECK(std::abs(four.mean() - alpha * m4) <= 3 * std::sqrt(alpha * m4 / soups));
  std::vector<double> expected(hist.size());
  for (std::size_t k = 0; k < hist.size(); ++k) expected[k] = soups * alpha * sampler.spectrum().mass[k];
  const ChiSquare chi = chi_square_gof(hist, expected, 5.0, 0);
  CHECK(chi.p_value > 0.01);
}

TEST_CASE("min-jump filter") {
  const WeightedGraph g = build_half_plane(1, 5, 5);
  const LoopSoupSampler sampler(g);
  const LoopSoupSample s = sampler.sample(1.0, std::uint64_t{3});
  CHECK(filter_min_jumps(s, 0).loops.size() == s.loops.size());
  CHECK(filter_min_jumps(s, s.kmax + 1).loops.empty());
  CHECK(min_jumps_for_scale(4, 1.9) == static_cast<int>(std::ceil(std::pow(4.0, 1.9))));
  CHECK(min_jumps_for_scale(8, 2.0) == 64);

  const int cutoff = 8;
  RunningStats kept;
  const int soups = 5000;
  for (int t = 0; t < soups; ++t)
    kept.add(static_cast<double>(filter_min_jumps(sampler.sample(1.0, static_cast<std::uint64_t>(t)), cutoff).loops.size()));
  const double mean = sampler.spectrum().total_mass(cutoff);
  CHECK(std::abs(kept.mean() - mean) <= 3 * std::sqrt(mean / soups));
}

TEST_CASE("superposition matches the summed intensity") {
  const WeightedGraph g = build_half_plane(1, 4, 4);
  const LoopSoupSampler sampler(g);
  const int soups = 10000;
  std::vector<double> sum(sampler.spectrum().kmax + 1, 0.0), direct(sum.size(), 0.0);
  for (int t = 0; t < soups; ++t) {
    Rng r2 = make_rng(2, t), r3 = make_rng(3, t);
    const LoopSoupSample s1 = sampler.sample(0.2, r2), s2 = sampler.sample(0.3, r3);
    const LoopSoupSample u = superpose(s1, s2);
    CHECK(u.loops.size() == s1.loops.size() + s2.loops.size());
    CHECK(u.alpha == doctest::Approx(0.5));
    const auto hu = u.length_histogram();
    const auto hd = sampler.sample(0.5, static_cast<std::uint64_t>(t + 1000000)).length_histogram();
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum[k] += hu[k];
      direct[k] += hd[k];
    }
  }
  CHECK(chi_square_two_sample(sum, direct).p_value > 0.01);
  LoopSoupSample empty;
  empty.kmax = sampler.spectrum().kmax;
  empty.graph = &g;
  const LoopSoupSample s = sampler.sample(0.5, std::uint64_t{9});
  CHECK(superpose(s, empty).loops.size() == s.loops.size());
  const WeightedGraph other = build_half_plane(1, 4, 4);
  LoopSoupSample foreign = empty;
  foreign.graph = &other;
  CHECK_THROWS_AS(superpose(s, foreign), std::invalid_argument);
}

TEST_CASE("rooted loop frequencies match the enumerated loop measure") {
  const WeightedGraph g = square_with_diagonal();
  const int kcap = 6;
  const LoopSoupSampler sampler(g, kcap);
  const auto all = enumerate_rooted_loops(g, kcap);
  // Brute-force traces agree with the spectrum.
  std::vector<double> trace(kcap + 1, 0.0);
  for (const auto& wl : all) trace[wl.loop.jumps()] += wl.weight;
  for (int k = 2; k <= kcap; ++k) CHECK(sampler.spectrum().mass[k] == doctest::Approx(trace[k] / k));

  const double alpha = 1.0;
  const int soups = 40000;
  std::map<std::vector<Index>, double> seen;
  for (int t = 0; t < soups; ++t)
    for (const RootedLoop& l : sampler.sample(alpha, static_cast<std::uint64_t>(t)).loops) seen[l.path] += 1;
  std::vector<double> obs, expect;
  for (const auto& wl : all) {
    const double mean = soups * alpha * wl.weight / wl.loop.jumps();
    const double o = seen.count(wl.loop.path) ? seen[wl.loop.path] : 0.0;
    if (wl.loop.jumps() <= 3) CHECK(std::abs(o - mean) <= 3 * std::sqrt(mean));
    obs.push_back(o);
    expect.push_back(mean);
  }
  CHECK(chi_square_gof(obs, expect, 5.0, 0).p_value > 0.01);
}
