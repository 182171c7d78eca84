#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "loopsoup/graph.hpp"
#include "loopsoup/harmonic.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Boundary-to-boundary excursion: start and end are sites of the bottom row;
/// `path` runs through free vertices from above(start) to above(end).
struct ExcursionPath {
  Index start = -1;
  Index end = -1;
  std::vector<Index> path;
  int jumps() const { return static_cast<int>(path.size()) - 1; }
};

/// Edge ids traversed by the excursion, the two boundary stubs included.
std::vector<Index> traversed_edges(const WeightedGraph& g, const ExcursionPath& e);

/// Edge id joining a and b, or -1.
Index edge_between(const WeightedGraph& g, Index a, Index b);

struct EndpointIntensity {
  std::vector<Index> sites;  // bottom-row sites of the interval, increasing i
  Eigen::MatrixXd mass;      // mass(s, t) = u 2 pi G_walk(above(s), above(t))
  double total() const { return mass.sum(); }
};

struct ExcursionProcess {
  double lo = 0, hi = 0;  // interval in scaled units
  double intensity = 0;
  double total_mass = 0;
  std::vector<ExcursionPath> excursions;
};

/// Poisson excursion process from and to one boundary interval. Precomputes the
/// walk Green columns of the sites above the interval; immutable afterwards.
class ExcursionSampler {
 public:
  ExcursionSampler(const WeightedGraph& g, double lo, double hi, SolverPolicy policy = {});
  ExcursionSampler(const WeightedGraph& g, double lo, double hi, const LaplacianSolver& solver);

  const WeightedGraph& graph() const { return *graph_; }
  const std::vector<Index>& sites() const { return sites_; }
  /// G_walk(z, above(sites[target])) with z given by its free index.
  double walk_green(Index free_pos, int target) const { return visits_(free_pos, target); }

  EndpointIntensity intensity(double u) const;
  ExcursionProcess sample(double u, Rng& rng) const;
  ExcursionProcess sample(double u, std::uint64_t seed) const;
  /// Walk bridge from above(sites[s]) to above(sites[t]): length k has
  /// probability P^k(x, y) / G_walk(x, y).
  ExcursionPath sample_path(int s, int t, Rng& rng) const;

 private:
  void init(const LaplacianSolver& solver);

  const WeightedGraph* graph_;
  double lo_, hi_;
  std::vector<Index> sites_;
  std::vector<Index> above_;    // free vertex above each site
  Eigen::MatrixXd visits_;      // G_walk(z, above(t)), rows in free-index order
};

}  // namespace loopsoup
