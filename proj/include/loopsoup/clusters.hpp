#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loopsoup/excursions.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/graph.hpp"
#include "loopsoup/loop_soup.hpp"

namespace loopsoup {

/// Clusters of free vertices with the elements (loops, excursions) and edges
/// that built them. Unoccupied vertices and edges carry label -1.
struct ClusterPartition {
  std::vector<Index> vertex_cluster;   // per free vertex (free-index order)
  std::vector<Index> edge_cluster;     // per edge of the graph
  std::vector<Index> loop_cluster;     // per loop
  std::vector<Index> excursion_cluster;  // per excursion, families concatenated
  Index count = 0;
};

/// Discrete mode: elements sharing a vertex join. Loops, then excursions.
ClusterPartition build_clusters(const WeightedGraph& g, const LoopSoupSample* loops,
                                std::span<const ExcursionProcess> excursions);

/// Metric mode: the sign clusters, joined further by excursions through the
/// vertices they visit.
ClusterPartition build_clusters(const WeightedGraph& g, const GffSample& field,
                                std::span<const ExcursionProcess> excursions);

enum class ConnectionMode {
  discrete,       // loop soup at any alpha, vertex sharing
  metric,         // critical cable system with partial-edge traces
  metric_vertex,  // critical sign clusters, vertex membership only
};

std::string to_string(ConnectionMode m);
ConnectionMode connection_mode_from_string(const std::string& s);

struct ConnectionConfig {
  int n = 8;
  int width = 0;   // lattice units; 0 picks 6 q n (box 12q wide)
  int height = 0;  // lattice units; 0 picks 8 q n
  double alpha = 0.5;
  double u = 0.25;
  double v = 0.25;
  double q = 3;
  double a = 4;
  ConnectionMode mode = ConnectionMode::metric;
  std::int64_t samples = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  int kmax = 0;       // discrete mode; 0 = automatic
  int min_jumps = 0;  // discrete mode cutoff
};

struct ConnectionEstimate {
  double p_hat = 0;
  double stderr_p = 0;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
  std::int64_t censored = 0;
  double censor_rate = 0;
  double ceq = 0;       // C^eq_{n,a}(q) on the same truncation
  double formula = 0;   // 1 - exp(-2 ceq 8 pi sqrt(uv) / n)
  double formula_local_time = 0;  // 1 - exp(-2 ceq 16 pi sqrt(uv) / n)
  double limit = 0;     // 1 - q^{-2 sqrt(uv)}
};

/// Replica outcome of the connection event.
struct ConnectionOutcome {
  bool connected = false;
  bool censored = false;  // a connected component of an excursion family reaches the frame
};

/// Shared read-only state of a connection experiment; replica() is safe to
/// call concurrently.
class ConnectionExperiment {
 public:
  explicit ConnectionExperiment(ConnectionConfig cfg);
  ~ConnectionExperiment();

  const ConnectionConfig& config() const { return cfg_; }
  const WeightedGraph& graph() const { return graph_; }
  double ceq() const { return ceq_; }

  ConnectionOutcome replica(std::int64_t index) const;
  ConnectionEstimate run() const;

 private:
  ConnectionOutcome metric_replica(Rng& rng, bool partial) const;
  ConnectionOutcome discrete_replica(Rng& rng) const;

  ConnectionConfig cfg_;
  WeightedGraph graph_;
  double ceq_ = 0;
  std::unique_ptr<GffSampler> gff_;
  std::unique_ptr<LoopSoupSampler> loops_;
  std::unique_ptr<ExcursionSampler> left_, right_;
  std::vector<std::uint8_t> frame_adjacent_;  // per free vertex
};

/// Validates and runs; rejects fewer than 100 samples.
ConnectionEstimate estimate_p(const ConnectionConfig& cfg);

/// Closed forms of the connection probability at finite n.
double connection_formula(double ceq, int n, double u, double v, double constant);

struct Point2 {
  double x = 0, y = 0;
};
using PointSet = std::vector<Point2>;

/// Hausdorff distance between two non-empty finite point sets.
double hausdorff(const PointSet& a, const PointSet& b);

/// min over bijections of the max pairwise Hausdorff distance; +inf when the
/// collections differ in size.
double collection_distance(const std::vector<PointSet>& f1, const std::vector<PointSet>& f2);

}  // namespace loopsoup
