#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "loopsoup/graph.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Discrete rooted loop z_0, ..., z_k = z_0 (graph indices).
struct RootedLoop {
  std::vector<Index> path;
  int jumps() const { return static_cast<int>(path.size()) - 1; }
};

/// Loop masses m_k = tr(P^k) / k of the killed walk, k = 0..kmax.
struct LoopLengthSpectrum {
  std::vector<double> mass;  // mass[k]; entries 0 and 1 are zero
  double rho = 0;            // spectral radius of P
  double rho_hat = 0;        // safety-inflated bound, 1 - (1 - rho) / 1.01
  int kmax = 0;
  double tail_bound = 0;     // bound on sum_{k > kmax} m_k
  Index vertices = 0;

  double total_mass(int from = 2) const;
};

struct LoopSoupSample {
  std::vector<RootedLoop> loops;
  double alpha = 0;
  int kmax = 0;
  double tail_mass = 0;
  const WeightedGraph* graph = nullptr;  // identity used by superpose()

  /// Loop count per jump length, index 0..kmax.
  std::vector<double> length_histogram() const;
};

/// sum_{k > kmax} m_k <= N rho_hat^{kmax+1} / ((kmax+1)(1 - rho_hat)).
double loop_tail_bound(Index vertices, double rho_hat, int kmax);

/// Exact Poisson sampler of the discrete loop soup. Holds the eigensystem of
/// the symmetrized transition matrix; sample() may run concurrently.
class LoopSoupSampler {
 public:
  /// kmax = 0 picks the smallest k with tail bound below `tail_epsilon`.
  explicit LoopSoupSampler(const WeightedGraph& g, int kmax = 0, double tail_epsilon = 1e-6,
                           Index dense_limit = 6000);
  ~LoopSoupSampler();
  LoopSoupSampler(LoopSoupSampler&&) noexcept;
  LoopSoupSampler& operator=(LoopSoupSampler&&) noexcept;

  const LoopLengthSpectrum& spectrum() const { return spectrum_; }
  const WeightedGraph& graph() const { return *graph_; }

  LoopSoupSample sample(double alpha, Rng& rng) const;
  LoopSoupSample sample(double alpha, std::uint64_t seed) const;
  /// One rooted loop of exactly k jumps from the normalized measure.
  RootedLoop sample_loop(int k, Rng& rng) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const WeightedGraph* graph_;
  LoopLengthSpectrum spectrum_;
};

LoopLengthSpectrum loop_mass_spectrum(const WeightedGraph& g, int kmax = 0, double tail_epsilon = 1e-6);

/// Keeps loops with at least T jumps.
LoopSoupSample filter_min_jumps(const LoopSoupSample& s, int min_jumps);
/// ceil(n^theta), the cutoff used for theta in (16/9, 2).
int min_jumps_for_scale(int n, double theta);

/// Multiset union of independent soups on the same graph.
LoopSoupSample superpose(const LoopSoupSample& a, const LoopSoupSample& b);

struct WeightedLoop {
  RootedLoop loop;
  double weight;  // product of transition probabilities
};

/// Every rooted loop with 2..kmax jumps, by brute force (tiny graphs only).
std::vector<WeightedLoop> enumerate_rooted_loops(const WeightedGraph& g, int kmax);

/// Closed, nearest-neighbour, avoids the killed set.
bool is_valid_loop(const WeightedGraph& g, const RootedLoop& loop);

}  // namespace loopsoup
