#include "loopsoup/excursions.hpp"

#include <numbers>
#include <random>
#include <stdexcept>

namespace loopsoup {

Index edge_between(const WeightedGraph& g, Index a, Index b) {
  for (const Neighbor& nb : g.neighbors(a))
    if (nb.to == b) return nb.edge;
  return -1;
}

std::vector<Index> traversed_edges(const WeightedGraph& g, const ExcursionPath& e) {
  std::vector<Index> out;
  out.reserve(e.path.size() + 1);
  out.push_back(edge_between(g, e.start, e.path.front()));
  for (std::size_t s = 1; s < e.path.size(); ++s) out.push_back(edge_between(g, e.path[s - 1], e.path[s]));
  out.push_back(edge_between(g, e.path.back(), e.end));
  return out;
}

ExcursionSampler::ExcursionSampler(const WeightedGraph& g, double lo, double hi, SolverPolicy policy)
    : graph_(&g), lo_(lo), hi_(hi) {
  init(LaplacianSolver(g, policy));
}

ExcursionSampler::ExcursionSampler(const WeightedGraph& g, double lo, double hi,
                                   const LaplacianSolver& solver)
    : graph_(&g), lo_(lo), hi_(hi) {
  init(solver);
}

void ExcursionSampler::init(const LaplacianSolver& solver) {
  const WeightedGraph& g = *graph_;
  sites_ = boundary_interval(g, lo_, hi_);
  if (sites_.empty()) throw std::invalid_argument("ExcursionSampler: empty interval");
  visits_.resize(g.free_count(), static_cast<Index>(sites_.size()));
  for (std::size_t t = 0; t < sites_.size(); ++t) {
    const Vertex p = g.vertex(sites_[t]);
    const auto up = g.find({p.i, 1});
    if (!up || g.free_index(*up) < 0)
      throw std::invalid_argument("ExcursionSampler: interval touches the truncation frame");
    above_.push_back(*up);
    visits_.col(t) = green_column(solver, g, *up) * g.lambda(*up);
  }
}

EndpointIntensity ExcursionSampler::intensity(double u) const {
  if (!(u >= 0)) throw std::invalid_argument("excursion intensity must be >= 0");
  const Index m = static_cast<Index>(sites_.size());
  EndpointIntensity out;
  out.sites = sites_;
  out.mass.resize(m, m);
  for (Index s = 0; s < m; ++s)
    for (Index t = 0; t < m; ++t)
      out.mass(s, t) = u * 2 * std::numbers::pi * visits_(graph_->free_index(above_[s]), t);
  // G is symmetric and lambda is constant on the row above the boundary.
  out.mass = 0.5 * (out.mass + out.mass.transpose()).eval();
  return out;
}

ExcursionPath ExcursionSampler::sample_path(int s, int t, Rng& rng) const {
  const WeightedGraph& g = *graph_;
  std::uniform_real_distribution<double> unif;
  ExcursionPath e;
  e.start = sites_[s];
  e.end = sites_[t];
  const Index target = above_[t];
  Index z = above_[s];
  e.path.push_back(z);
  // Doob transform by h = G_walk(., target): stop at target w.p. 1/h(target).
  for (;;) {
    const double hz = visits_(g.free_index(z), t);
    if (z == target && unif(rng) * hz < 1.0) break;
    double r = unif(rng) * (hz - (z == target ? 1.0 : 0.0));
    Index next = -1;
    for (const Neighbor& nb : g.neighbors(z)) {
      const Index f = g.free_index(nb.to);
      if (f < 0) continue;
      const double w = nb.conductance / g.lambda(z) * visits_(f, t);
      if (w <= 0) continue;
      next = nb.to;
      r -= w;
      if (r < 0) break;
    }
    if (next < 0) throw std::logic_error("sample_path: bridge has no continuation");
    z = next;
    e.path.push_back(z);
  }
  return e;
}

ExcursionProcess ExcursionSampler::sample(double u, Rng& rng) const {
  ExcursionProcess proc;
  proc.lo = lo_;
  proc.hi = hi_;
  proc.intensity = u;
  if (u == 0) return proc;
  const EndpointIntensity w = intensity(u);
  proc.total_mass = w.total();
  std::poisson_distribution<long> count(proc.total_mass);
  const long n = count(rng);
  const Index m = static_cast<Index>(sites_.size());
  std::discrete_distribution<Index> pair(w.mass.data(), w.mass.data() + w.mass.size());
  proc.excursions.reserve(n);
  for (long k = 0; k < n; ++k) {
    const Index flat = pair(rng);  // column-major: flat = s + m t
    proc.excursions.push_back(sample_path(flat % m, flat / m, rng));
  }
  return proc;
}

ExcursionProcess ExcursionSampler::sample(double u, std::uint64_t seed) const {
  Rng rng = make_rng(seed, 0, 4);
  return sample(u, rng);
}

}  // namespace loopsoup
