#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "loopsoup/graph.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Discrete GFF sample with its metric-graph edge marks.
struct GffSample {
  Eigen::VectorXd phi;                 // per free vertex, free-index order
  std::vector<std::uint8_t> edge_open;  // per edge of the graph; empty until marked
  std::uint64_t seed = 0;

  /// Value at any graph vertex (0 on the killed set).
  double value(const WeightedGraph& g, Index v) const {
    const Index f = g.free_index(v);
    return f < 0 ? 0.0 : phi[f];
  }
  /// Occupation field of the critical loop soup, phi^2 / 2.
  double occupation(Index free_pos) const { return 0.5 * phi[free_pos] * phi[free_pos]; }
};

/// Exact centered Gaussian with precision M, by sparse Cholesky of M.
/// The factorization is shared read-only; sample() may run concurrently.
class GffSampler {
 public:
  explicit GffSampler(const WeightedGraph& g);
  ~GffSampler();
  GffSampler(GffSampler&&) noexcept;
  GffSampler& operator=(GffSampler&&) noexcept;

  Eigen::VectorXd sample_phi(Rng& rng) const;
  GffSample sample(std::uint64_t seed) const;
  Index size() const { return size_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Index size_ = 0;
};

/// P(open) of a cable of conductance c whose end values are a and b.
using EdgeRule = std::function<double(double c, double a, double b)>;

/// Zero-free probability of the cable field: 1 - exp(-2 c a b) when a b > 0.
double cable_open_probability(double c, double a, double b);

/// Independent coins per edge given phi. Edges touching the killed set hold a
/// zero and are always closed.
void mark_edges(GffSample& s, const WeightedGraph& g, Rng& rng,
                const EdgeRule& rule = cable_open_probability);
void mark_edges(GffSample& s, const WeightedGraph& g, std::uint64_t seed,
                const EdgeRule& rule = cable_open_probability);

struct SignClusterPartition {
  std::vector<Index> cluster;  // label per free vertex (free-index order)
  Index count = 0;
};

/// Components of the free vertices under open edges.
SignClusterPartition sign_clusters(const GffSample& s, const WeightedGraph& g);

struct NoConnect {
  double p_diff;     // different clusters, given no loop visits both
  double p_no_loop;  // no single loop visits both
  double p_separate() const { return p_diff * p_no_loop; }
};

/// Connection law of two points with occupations u, v joined through an
/// equivalent conductance ceq.
NoConnect no_connect_conditional(double ceq, double u, double v);

/// Fine-grid oracle for the cable rule: a Brownian bridge with variance rate 2
/// over length 1/(2c) from a to b, monitored on `steps` substeps.
struct BridgeOracle {
  double exact_rate;     // each substep crossing decided by its bridge law
  double naive_rate;     // grid-only monitoring (biased upward)
  double stderr_exact;
  double stderr_naive;
};
BridgeOracle bridge_zero_free_oracle(double c, double a, double b, std::int64_t bridges, int steps,
                                     std::uint64_t seed);

}  // namespace loopsoup
