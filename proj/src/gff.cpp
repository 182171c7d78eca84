#include "loopsoup/gff.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "loopsoup/harmonic.hpp"
#include "loopsoup/stats.hpp"
#include "loopsoup/union_find.hpp"

namespace loopsoup {

struct GffSampler::Impl {
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

GffSampler::GffSampler(const WeightedGraph& g) : impl_(std::make_unique<Impl>()) {
  // LaplacianSolver validates the killing; reuse its matrix.
  SolverPolicy direct;
  direct.direct_limit = g.free_count() + 1;
  const LaplacianSolver check(g, direct);
  impl_->llt.compute(check.matrix());
  if (impl_->llt.info() != Eigen::Success) throw std::domain_error("GffSampler: singular precision");
  size_ = g.free_count();
}

GffSampler::~GffSampler() = default;
GffSampler::GffSampler(GffSampler&&) noexcept = default;
GffSampler& GffSampler::operator=(GffSampler&&) noexcept = default;

Eigen::VectorXd GffSampler::sample_phi(Rng& rng) const {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(size_);
  for (Index k = 0; k < size_; ++k) z[k] = normal(rng);
  // P M P^T = L L^T, so P^T L^{-T} z has covariance M^{-1}.
  const Eigen::VectorXd w = impl_->llt.matrixU().solve(z);
  return impl_->llt.permutationPinv() * w;
}

GffSample GffSampler::sample(std::uint64_t seed) const {
  Rng rng = make_rng(seed, 0, 0);
  GffSample s;
  s.phi = sample_phi(rng);
  s.seed = seed;
  return s;
}

double cable_open_probability(double c, double a, double b) {
  const double ab = a * b;
  return ab > 0 ? -std::expm1(-2.0 * c * ab) : 0.0;
}

void mark_edges(GffSample& s, const WeightedGraph& g, Rng& rng, const EdgeRule& rule) {
  std::uniform_real_distribution<double> unif;
  s.edge_open.assign(g.edge_count(), 0);
  for (Index e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edges()[e];
    const Index fa = g.free_index(ed.a), fb = g.free_index(ed.b);
    const double coin = unif(rng);  // drawn for every edge so streams align across rules
    if (fa < 0 || fb < 0) continue;
    s.edge_open[e] = coin < rule(ed.conductance, s.phi[fa], s.phi[fb]) ? 1 : 0;
  }
}

void mark_edges(GffSample& s, const WeightedGraph& g, std::uint64_t seed, const EdgeRule& rule) {
  Rng rng = make_rng(seed, 0, 1);
  mark_edges(s, g, rng, rule);
}

SignClusterPartition sign_clusters(const GffSample& s, const WeightedGraph& g) {
  if (static_cast<Index>(s.edge_open.size()) != g.edge_count())
    throw std::invalid_argument("sign_clusters: edges not marked");
  UnionFind uf(g.free_count());
  for (Index e = 0; e < g.edge_count(); ++e) {
    if (!s.edge_open[e]) continue;
    const Edge& ed = g.edges()[e];
    uf.unite(g.free_index(ed.a), g.free_index(ed.b));
  }
  SignClusterPartition out;
  out.cluster = uf.labels();
  out.count = uf.set_count();
  return out;
}

NoConnect no_connect_conditional(double ceq, double u, double v) {
  if (!(ceq >= 0) || !(u >= 0) || !(v >= 0))
    throw std::invalid_argument("no_connect_conditional: negative input");
  const double x = 2.0 * ceq * std::sqrt(u * v);
  return {std::exp(-x), 1.0 / std::cosh(x)};
}

BridgeOracle bridge_zero_free_oracle(double c, double a, double b, std::int64_t bridges, int steps,
                                     std::uint64_t seed) {
  if (bridges < 1 || steps < 1 || !(c > 0)) throw std::invalid_argument("bridge oracle: bad input");
  const double length = WeightedGraph::cable_length(c);
  const double rate = 2.0;  // variance per unit length of the cable field
  const double dt = length / steps;
  std::int64_t exact = 0, naive = 0;
  Rng rng = make_rng(seed, 0, 2);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  for (std::int64_t k = 0; k < bridges; ++k) {
    double w = a, t = 0;
    bool grid_ok = a * b > 0, path_ok = grid_ok;
    for (int s = 0; s < steps && grid_ok; ++s) {
      double next = b;
      const double rest = length - t;
      if (s + 1 < steps) {
        const double mean = w + (b - w) * dt / rest;
        const double var = rate * dt * (rest - dt) / rest;
        next = mean + std::sqrt(var) * normal(rng);
      }
      if (w * next <= 0) {
        grid_ok = path_ok = false;
        break;
      }
      // A bridge of length dt between same-sign values touches 0 w.p. exp(-2 w next / (rate dt)).
      if (path_ok && unif(rng) < std::exp(-2.0 * w * next / (rate * dt))) path_ok = false;
      w = next;
      t += dt;
    }
    exact += path_ok;
    naive += grid_ok;
  }
  const Proportion pe = proportion(exact, bridges), pn = proportion(naive, bridges);
  return {pe.p, pn.p, pe.stderr_p, pn.stderr_p};
}

}  // namespace loopsoup
