#include "loopsoup/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "loopsoup/harmonic.hpp"
#include "loopsoup/stats.hpp"
#include "loopsoup/union_find.hpp"

namespace loopsoup {

namespace {

ClusterPartition finish_partition(const WeightedGraph& g, UnionFind& uf,
                                  const std::vector<std::uint8_t>& vertex_occupied,
                                  const std::vector<std::uint8_t>& edge_occupied) {
  ClusterPartition out;
  const Index m = g.free_count();
  std::vector<Index> root_label(uf.element_count(), -1);
  out.vertex_cluster.assign(m, -1);
  for (Index f = 0; f < m; ++f) {
    if (!vertex_occupied[f]) continue;
    const Index r = uf.find(f);
    if (root_label[r] < 0) root_label[r] = out.count++;
    out.vertex_cluster[f] = root_label[r];
  }
  out.edge_cluster.assign(g.edge_count(), -1);
  for (Index e = 0; e < g.edge_count(); ++e) {
    if (!edge_occupied[e]) continue;
    const Edge& ed = g.edges()[e];
    const Index f = g.free_index(ed.a) >= 0 ? g.free_index(ed.a) : g.free_index(ed.b);
    out.edge_cluster[e] = out.vertex_cluster[f];
  }
  return out;
}

void add_excursions(const WeightedGraph& g, UnionFind& uf, std::span<const ExcursionProcess> excursions,
                    std::vector<std::uint8_t>& vocc, std::vector<std::uint8_t>& eocc) {
  for (const ExcursionProcess& proc : excursions)
    for (const ExcursionPath& e : proc.excursions) {
      for (std::size_t s = 0; s < e.path.size(); ++s) {
        const Index f = g.free_index(e.path[s]);
        vocc[f] = 1;
        if (s > 0) uf.unite(g.free_index(e.path[s - 1]), f);
      }
      for (const Index id : traversed_edges(g, e)) eocc[id] = 1;
    }
}

void label_excursions(const WeightedGraph& g, std::span<const ExcursionProcess> excursions,
                      ClusterPartition& out) {
  for (const ExcursionProcess& proc : excursions)
    for (const ExcursionPath& e : proc.excursions)
      out.excursion_cluster.push_back(out.vertex_cluster[g.free_index(e.path.front())]);
}

}  // namespace

ClusterPartition build_clusters(const WeightedGraph& g, const LoopSoupSample* loops,
                                std::span<const ExcursionProcess> excursions) {
  if (loops && loops->graph && loops->graph != &g)
    throw std::invalid_argument("build_clusters: loops live on another graph");
  const Index m = g.free_count();
  UnionFind uf(m);
  std::vector<std::uint8_t> vocc(m, 0), eocc(g.edge_count(), 0);
  if (loops)
    for (const RootedLoop& l : loops->loops)
      for (std::size_t s = 0; s < l.path.size(); ++s) {
        const Index f = g.free_index(l.path[s]);
        vocc[f] = 1;
        if (s > 0) {
          uf.unite(g.free_index(l.path[s - 1]), f);
          eocc[edge_between(g, l.path[s - 1], l.path[s])] = 1;
        }
      }
  add_excursions(g, uf, excursions, vocc, eocc);
  ClusterPartition out = finish_partition(g, uf, vocc, eocc);
  if (loops)
    for (const RootedLoop& l : loops->loops) out.loop_cluster.push_back(out.vertex_cluster[g.free_index(l.path[0])]);
  label_excursions(g, excursions, out);
  return out;
}

ClusterPartition build_clusters(const WeightedGraph& g, const GffSample& field,
                                std::span<const ExcursionProcess> excursions) {
  if (static_cast<Index>(field.edge_open.size()) != g.edge_count())
    throw std::invalid_argument("build_clusters: field edges not marked");
  const Index m = g.free_count();
  if (field.phi.size() != m) throw std::invalid_argument("build_clusters: field lives on another graph");
  UnionFind uf(m);
  // Every free vertex carries a nonzero value and belongs to a sign cluster.
  std::vector<std::uint8_t> vocc(m, 1), eocc(g.edge_count(), 0);
  for (Index e = 0; e < g.edge_count(); ++e)
    if (field.edge_open[e]) {
      const Edge& ed = g.edges()[e];
      uf.unite(g.free_index(ed.a), g.free_index(ed.b));
      eocc[e] = 1;
    }
  add_excursions(g, uf, excursions, vocc, eocc);
  ClusterPartition out = finish_partition(g, uf, vocc, eocc);
  label_excursions(g, excursions, out);
  return out;
}

std::string to_string(ConnectionMode m) {
  switch (m) {
    case ConnectionMode::discrete: return "discrete";
    case ConnectionMode::metric: return "metric";
    case ConnectionMode::metric_vertex: return "metric-vertex";
  }
  return "?";
}

ConnectionMode connection_mode_from_string(const std::string& s) {
  if (s == "discrete") return ConnectionMode::discrete;
  if (s == "metric") return ConnectionMode::metric;
  if (s == "metric-vertex") return ConnectionMode::metric_vertex;
  throw std::invalid_argument("unknown mode '" + s + "' (discrete, metric, metric-vertex)");
}

double connection_formula(double ceq, int n, double u, double v, double constant) {
  return -std::expm1(-2.0 * ceq * constant * std::sqrt(u * v) / n);
}

ConnectionExperiment::ConnectionExperiment(ConnectionConfig cfg) : cfg_(cfg) {
  if (cfg_.n < 1) throw std::invalid_argument("estimate_p: n must be positive");
  if (!(cfg_.u >= 0) || !(cfg_.v >= 0)) throw std::invalid_argument("estimate_p: u, v must be >= 0");
  if (!(cfg_.q >= 1) || !(cfg_.a > 0)) throw std::invalid_argument("estimate_p: need q >= 1, a > 0");
  if (cfg_.mode != ConnectionMode::discrete && cfg_.alpha != 0.5)
    throw std::invalid_argument("estimate_p: metric modes are defined at alpha = 1/2 only");
  if (!(cfg_.alpha >= 0)) throw std::invalid_argument("estimate_p: alpha must be >= 0");
  if (cfg_.width <= 0) cfg_.width = static_cast<int>(std::ceil(6 * cfg_.q * cfg_.n));
  if (cfg_.height <= 0) cfg_.height = static_cast<int>(std::ceil(8 * cfg_.q * cfg_.n));
  if (cfg_.workers < 1) cfg_.workers = 1;
  graph_ = build_half_plane(cfg_.n, cfg_.width, cfg_.height);
  const LaplacianSolver solver(graph_);
  ceq_ = ceq_n_q(build_quotient(graph_, cfg_.a, cfg_.q), solver);
  left_ = std::make_unique<ExcursionSampler>(graph_, -cfg_.a, 0.0, solver);
  right_ = std::make_unique<ExcursionSampler>(graph_, 1.0, cfg_.q, solver);
  if (cfg_.mode == ConnectionMode::discrete)
    loops_ = std::make_unique<LoopSoupSampler>(graph_, cfg_.kmax);
  else
    gff_ = std::make_unique<GffSampler>(graph_);
  frame_adjacent_.assign(graph_.free_count(), 0);
  for (Index f = 0; f < graph_.free_count(); ++f) {
    const Vertex p = graph_.vertex(graph_.free_vertices()[f]);
    frame_adjacent_[f] = std::abs(p.i) == cfg_.width - 1 || p.j == cfg_.height - 1;
  }
}

ConnectionExperiment::~ConnectionExperiment() = default;

ConnectionOutcome ConnectionExperiment::replica(std::int64_t index) const {
  Rng rng = make_rng(cfg_.seed, static_cast<std::uint64_t>(index), 7);
  switch (cfg_.mode) {
    case ConnectionMode::discrete: return discrete_replica(rng);
    case ConnectionMode::metric: return metric_replica(rng, true);
    case ConnectionMode::metric_vertex: return metric_replica(rng, false);
  }
  return {};
}

namespace {

ConnectionOutcome outcome(UnionFind& uf, Index left, Index right, const std::vector<std::uint8_t>& frame) {
  ConnectionOutcome o;
  o.connected = uf.same(left, right);
  const Index l = uf.find(left), r = uf.find(right);
  for (Index f = 0; f < static_cast<Index>(frame.size()); ++f)
    if (frame[f]) {
      const Index root = uf.find(f);
      if (root == l || root == r) {
        o.censored = true;
        break;
      }
    }
  return o;
}

}  // namespace

ConnectionOutcome ConnectionExperiment::discrete_replica(Rng& rng) const {
  const WeightedGraph& g = graph_;
  const Index m = g.free_count();
  UnionFind uf(m + 2);
  const LoopSoupSample soup = filter_min_jumps(loops_->sample(cfg_.alpha, rng), cfg_.min_jumps);
  for (const RootedLoop& l : soup.loops)
    for (std::size_t s = 1; s < l.path.size(); ++s) uf.unite(g.free_index(l.path[s - 1]), g.free_index(l.path[s]));
  const ExcursionProcess fam[2] = {left_->sample(cfg_.u, rng), right_->sample(cfg_.v, rng)};
  for (int F = 0; F < 2; ++F)
    for (const ExcursionPath& e : fam[F].excursions)
      for (const Index v : e.path) uf.unite(m + F, g.free_index(v));
  return outcome(uf, m, m + 1, frame_adjacent_);
}

ConnectionOutcome ConnectionExperiment::metric_replica(Rng& rng, bool partial) const {
  const WeightedGraph& g = graph_;
  const Index m = g.free_count();
  const Index star[2] = {m, m + 1};
  UnionFind uf(m + 2);
  std::uniform_real_distribution<double> unif;
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> normal;

  const Eigen::VectorXd phi = gff_->sample_phi(rng);
  const ExcursionProcess fam[2] = {left_->sample(cfg_.u, rng), right_->sample(cfg_.v, rng)};
  const double intensity[2] = {cfg_.u, cfg_.v};

  // Traces: visited vertices with accumulated local time, fully crossed edges.
  // Local time is measured so that crossings of an edge of length r happen at
  // rate 1/r and sub-excursions deeper than d at rate 1/d.
  std::vector<double> local[2] = {std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  std::vector<std::uint8_t> full(g.edge_count(), 0);
  for (int F = 0; F < 2; ++F)
    for (const ExcursionPath& e : fam[F].excursions) {
      for (const Index v : e.path) {
        const Index f = g.free_index(v);
        local[F][f] += expo(rng) / (2 * g.lambda(v));
        uf.unite(star[F], f);
      }
      for (const Index id : traversed_edges(g, e)) full[id] |= static_cast<std::uint8_t>(1u << F);
    }

  // Interval sites of each family; small boundary excursions into their stubs
  // reach depth > d at rate (8 pi u / n) / d.
  std::vector<std::int8_t> site_family(g.vertex_count(), -1);
  for (const Index s : left_->sites()) site_family[s] = 0;
  for (const Index s : right_->sites()) site_family[s] = 1;

  struct Query {
    double t;      // distance from edge end a
    int family;    // -1: none
    bool from_a;   // trace covers [0, t] when true, [t, r] otherwise
  };
  std::vector<Query> queries;
  std::vector<Index> nodes;
  std::vector<double> values;

  for (Index id = 0; id < g.edge_count(); ++id) {
    const Edge& ed = g.edges()[id];
    const Index fa = g.free_index(ed.a), fb = g.free_index(ed.b);
    const double r = WeightedGraph::cable_length(ed.conductance);
    queries.clear();
    if (partial) {
      for (int F = 0; F < 2; ++F) {
        if (full[id] & (1u << F)) continue;
        if (fa >= 0 && local[F][fa] > 0) queries.push_back({1.0 / (1.0 / r + expo(rng) / local[F][fa]), F, true});
        if (fb >= 0 && local[F][fb] > 0) queries.push_back({r - 1.0 / (1.0 / r + expo(rng) / local[F][fb]), F, false});
        const double rate = 8 * std::numbers::pi * intensity[F] / g.n();
        if (rate > 0 && fa < 0 && site_family[ed.a] == F)
          queries.push_back({1.0 / (1.0 / r + expo(rng) / rate), F, true});
        if (rate > 0 && fb < 0 && site_family[ed.b] == F)
          queries.push_back({r - 1.0 / (1.0 / r + expo(rng) / rate), F, false});
      }
    }
    const double wa = fa >= 0 ? phi[fa] : 0.0, wb = fb >= 0 ? phi[fb] : 0.0;
    if (queries.empty()) {
      if (fa >= 0 && fb >= 0 && unif(rng) < cable_open_probability(ed.conductance, wa, wb)) uf.unite(fa, fb);
      continue;
    }
    std::sort(queries.begin(), queries.end(), [](const Query& x, const Query& y) { return x.t < y.t; });
    // Field at the query points: Brownian bridge with variance rate 2 pinned at both ends.
    nodes.assign(1, fa);
    values.assign(1, wa);
    double tp = 0;
    for (const Query& qp : queries) {
      const double t = std::clamp(qp.t, tp, r);
      const double w = values.back();
      const double mean = w + (wb - w) * (t - tp) / (r - tp);
      const double var = 2 * (t - tp) * (r - t) / (r - tp);
      values.push_back(mean + std::sqrt(std::max(var, 0.0)) * normal(rng));
      nodes.push_back(uf.add());
      tp = t;
    }
    nodes.push_back(fb);
    values.push_back(wb);
    double prev_t = 0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const double next_t = k + 1 < nodes.size() - 1 ? std::clamp(queries[k].t, prev_t, r) : r;
      const double w1 = values[k], w2 = values[k + 1];
      const double dt = next_t - prev_t;
      prev_t = next_t;
      if (nodes[k] < 0 || nodes[k + 1] < 0 || !(w1 * w2 > 0)) continue;
      if (dt <= 0 || unif(rng) < -std::expm1(-w1 * w2 / dt)) uf.unite(nodes[k], nodes[k + 1]);
    }
    // Coverage: query node k sits at queries[k - 1].t.
    for (const Query& qp : queries)
      for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        const double t = queries[k - 1].t;
        if (qp.from_a ? t <= qp.t : t >= qp.t) uf.unite(star[qp.family], nodes[k]);
      }
    for (int F = 0; F < 2; ++F)
      if (full[id] & (1u << F))
        for (std::size_t k = 1; k + 1 < nodes.size(); ++k) uf.unite(star[F], nodes[k]);
  }
  return outcome(uf, star[0], star[1], frame_adjacent_);
}

ConnectionEstimate ConnectionExperiment::run() const {
  const int workers = std::max(1, std::min<int>(cfg_.workers, static_cast<int>(cfg_.samples)));
  std::vector<std::int64_t> hits(workers, 0), censored(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int w) {
    try {
      for (std::int64_t k = w; k < cfg_.samples; k += workers) {
        const ConnectionOutcome o = replica(k);
        hits[w] += o.connected;
        censored[w] += o.censored;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ConnectionEstimate est;
  est.samples = cfg_.samples;
  for (int w = 0; w < workers; ++w) {
    est.hits += hits[w];
    est.censored += censored[w];
  }
  const Proportion p = proportion(est.hits, est.samples);
  est.p_hat = p.p;
  est.stderr_p = p.stderr_p;
  est.censor_rate = static_cast<double>(est.censored) / static_cast<double>(est.samples);
  est.ceq = ceq_;
  est.formula = connection_formula(ceq_, cfg_.n, cfg_.u, cfg_.v, 8 * std::numbers::pi);
  est.formula_local_time = connection_formula(ceq_, cfg_.n, cfg_.u, cfg_.v, 16 * std::numbers::pi);
  est.limit = 1 - std::pow(cfg_.q, -2 * std::sqrt(cfg_.u * cfg_.v));
  return est;
}

ConnectionEstimate estimate_p(const ConnectionConfig& cfg) {
  if (cfg.samples < 100) throw std::invalid_argument("estimate_p: need at least 100 samples");
  return ConnectionExperiment(cfg).run();
}

double hausdorff(const PointSet& a, const PointSet& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty set");
  auto directed = [](const PointSet& x, const PointSet& y) {
    double worst = 0;
    for (const Point2& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point2& q : y) best = std::min(best, std::hypot(p.x - q.x, p.y - q.y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

double collection_distance(const std::vector<PointSet>& f1, const std::vector<PointSet>& f2) {
  if (f1.size() != f2.size()) return std::numeric_limits<double>::infinity();
  const std::size_t k = f1.size();
  if (k == 0) return 0;
  std::vector<double> cost(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) cost[i * k + j] = hausdorff(f1[i], f2[j]);
  std::vector<double> levels = cost;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  // Bottleneck assignment: smallest level admitting a perfect matching (Kuhn).
  auto perfect = [&](double level) {
    std::vector<int> match(k, -1);
    std::vector<char> seen;
    auto augment = [&](auto& self, std::size_t i) -> bool {
      for (std::size_t j = 0; j < k; ++j) {
        if (cost[i * k + j] > level || seen[j]) continue;
        seen[j] = 1;
        if (match[j] < 0 || self(self, static_cast<std::size_t>(match[j]))) {
          match[j] = static_cast<int>(i);
          return true;
        }
      }
      return false;
    };
    for (std::size_t i = 0; i < k; ++i) {
      seen.assign(k, 0);
      if (!augment(augment, i)) return false;
    }
    return true;
  };
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (perfect(levels[mid])) hi = mid;
    else lo = mid + 1;
  }
  return levels[lo];
}

}  // namespace loopsoup
