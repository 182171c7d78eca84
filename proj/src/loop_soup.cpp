#include "loopsoup/loop_soup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

namespace loopsoup {

namespace {

Eigen::MatrixXd symmetrized_transition(const WeightedGraph& g) {
  const Index m = g.free_count();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (Index f = 0; f < m; ++f) {
    const Index v = g.free_vertices()[f];
    for (const Neighbor& nb : g.neighbors(v)) {
      const Index t = g.free_index(nb.to);
      if (t >= 0) s(f, t) += nb.conductance / std::sqrt(g.lambda(v) * g.lambda(nb.to));
    }
  }
  return s;
}

LoopLengthSpectrum spectrum_from_eigenvalues(const Eigen::VectorXd& mu, int kmax, double eps) {
  LoopLengthSpectrum sp;
  sp.vertices = static_cast<Index>(mu.size());
  sp.rho = mu.cwiseAbs().maxCoeff();
  if (!(sp.rho < 1 - 1e-14)) throw std::domain_error("loop spectrum: no killing (rho >= 1)");
  sp.rho_hat = 1 - (1 - sp.rho) / 1.01;
  if (kmax <= 0) {
    kmax = 2;
    while (loop_tail_bound(sp.vertices, sp.rho_hat, kmax) >= eps) ++kmax;
  }
  sp.kmax = kmax;
  sp.tail_bound = loop_tail_bound(sp.vertices, sp.rho_hat, kmax);
  sp.mass.assign(kmax + 1, 0.0);
  Eigen::ArrayXd power = mu.array();
  for (int k = 2; k <= kmax; ++k) {
    power *= mu.array();
    const double trace = power.sum();
    // Odd traces of bipartite graphs vanish; clear the round-off.
    sp.mass[k] = trace > 1e-12 * std::max(1.0, power.abs().sum()) ? trace / k : 0.0;
  }
  return sp;
}

}  // namespace

double LoopLengthSpectrum::total_mass(int from) const {
  double s = 0;
  for (int k = std::max(from, 0); k <= kmax; ++k) s += mass[k];
  return s;
}

std::vector<double> LoopSoupSample::length_histogram() const {
  std::vector<double> h(kmax + 1, 0.0);
  for (const RootedLoop& l : loops)
    if (l.jumps() <= kmax) h[l.jumps()] += 1;
  return h;
}

double loop_tail_bound(Index vertices, double rho_hat, int kmax) {
  return vertices * std::pow(rho_hat, kmax + 1) / ((kmax + 1) * (1 - rho_hat));
}

LoopLengthSpectrum loop_mass_spectrum(const WeightedGraph& g, int kmax, double tail_epsilon) {
  if (g.free_count() == 0) {
    LoopLengthSpectrum sp;
    sp.kmax = std::max(kmax, 2);
    sp.mass.assign(sp.kmax + 1, 0.0);
    sp.rho_hat = 1 - 1 / 1.01;
    return sp;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized_transition(g), Eigen::EigenvaluesOnly);
  return spectrum_from_eigenvalues(es.eigenvalues(), kmax, tail_epsilon);
}

struct LoopSoupSampler::Impl {
  Eigen::VectorXd mu;
  Eigen::MatrixXd u;
  Eigen::SparseMatrix<double, Eigen::RowMajor> p;  // transition matrix on free vertices
};

LoopSoupSampler::LoopSoupSampler(const WeightedGraph& g, int kmax, double tail_epsilon,
                                 Index dense_limit)
    : impl_(std::make_unique<Impl>()), graph_(&g) {
  const Index m = g.free_count();
  if (m == 0) throw std::invalid_argument("LoopSoupSampler: graph has no free vertex");
  if (m > dense_limit) throw std::invalid_argument("LoopSoupSampler: graph exceeds the dense limit");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized_transition(g));
  impl_->mu = es.eigenvalues();
  impl_->u = es.eigenvectors();
  spectrum_ = spectrum_from_eigenvalues(impl_->mu, kmax, tail_epsilon);
  std::vector<Eigen::Triplet<double>> trip;
  for (Index f = 0; f < m; ++f) {
    const Index v = g.free_vertices()[f];
    for (const Neighbor& nb : g.neighbors(v)) {
      const Index t = g.free_index(nb.to);
      if (t >= 0) trip.emplace_back(f, t, nb.conductance / g.lambda(v));
    }
  }
  impl_->p.resize(m, m);
  impl_->p.setFromTriplets(trip.begin(), trip.end());
}

LoopSoupSampler::~LoopSoupSampler() = default;
LoopSoupSampler::LoopSoupSampler(LoopSoupSampler&&) noexcept = default;
LoopSoupSampler& LoopSoupSampler::operator=(LoopSoupSampler&&) noexcept = default;

RootedLoop LoopSoupSampler::sample_loop(int k, Rng& rng) const {
  const Impl& im = *impl_;
  const Index m = static_cast<Index>(im.mu.size());
  std::uniform_real_distribution<double> unif;
  auto pick = [&](const auto& weight, Index count) {
    double total = 0;
    for (Index i = 0; i < count; ++i) total += weight(i);
    double r = unif(rng) * total;
    for (Index i = 0; i < count; ++i) {
      r -= weight(i);
      if (r < 0) return i;
    }
    // Round-off: last index with positive weight.
    for (Index i = count - 1; i >= 0; --i)
      if (weight(i) > 0) return i;
    throw std::logic_error("sample_loop: no positive weight");
  };

  // Root x with probability P^k(x,x) / tr(P^k).
  Index root;
  if (k % 2 == 0) {
    const Eigen::ArrayXd w = im.mu.array().pow(k);
    const Index mode = pick([&](Index i) { return w[i]; }, m);
    root = pick([&](Index x) { return im.u(x, mode) * im.u(x, mode); }, m);
  } else {
    const Eigen::VectorXd pk = im.mu.array().pow(k).matrix();
    const Eigen::VectorXd diag = im.u.cwiseAbs2() * pk;
    root = pick([&](Index x) { return std::max(diag[x], 0.0); }, m);
  }

  // v_r = P^r e_root up to scale. The walk sits at z with r = k - step - 1 jumps
  // left after the next one, so the next site w is weighted by p(z,w) v_r(w).
  // Vectors are regenerated from checkpoints every `block` powers.
  const int block = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k)))));
  std::vector<Eigen::VectorXd> checkpoint;
  Eigen::VectorXd v = Eigen::VectorXd::Unit(m, root);
  for (int r = 0; r < k; ++r) {
    if (r % block == 0) checkpoint.push_back(v);
    v = im.p * v;
    const double s = v.cwiseAbs().maxCoeff();
    if (s > 0) v /= s;
  }
  RootedLoop loop;
  loop.path.reserve(k + 1);
  const auto& free = graph_->free_vertices();
  Index z = root;
  loop.path.push_back(free[z]);
  std::vector<Eigen::VectorXd> segment;
  for (int b = static_cast<int>(checkpoint.size()) - 1; b >= 0; --b) {
    const int first = b * block, last = std::min(k - 1, first + block - 1);
    segment.assign(1, checkpoint[b]);
    for (int r = first + 1; r <= last; ++r) {
      Eigen::VectorXd nxt = im.p * segment.back();
      const double s = nxt.cwiseAbs().maxCoeff();
      if (s > 0) nxt /= s;
      segment.push_back(std::move(nxt));
    }
    for (int r = last; r >= first; --r) {
      const Eigen::VectorXd& vr = segment[r - first];
      using It = Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator;
      double total = 0;
      for (It it(im.p, z); it; ++it) total += it.value() * vr[it.col()];
      if (!(total > 0)) throw std::logic_error("sample_loop: bridge lost its endpoint");
      double pos = unif(rng) * total;
      Index next = -1;
      for (It it(im.p, z); it; ++it) {
        const double w = it.value() * vr[it.col()];
        if (w <= 0) continue;
        next = static_cast<Index>(it.col());
        pos -= w;
        if (pos < 0) break;
      }
      z = next;
      loop.path.push_back(free[z]);
    }
  }
  if (z != root) throw std::logic_error("sample_loop: loop did not close");
  return loop;
}

LoopSoupSample LoopSoupSampler::sample(double alpha, Rng& rng) const {
  if (!(alpha >= 0)) throw std::invalid_argument("sample_loop_soup: alpha must be >= 0");
  LoopSoupSample s;
  s.alpha = alpha;
  s.kmax = spectrum_.kmax;
  s.tail_mass = alpha * spectrum_.tail_bound;
  s.graph = graph_;
  if (alpha == 0) return s;
  for (int k = 2; k <= spectrum_.kmax; ++k) {
    const double mean = alpha * spectrum_.mass[k];
    if (mean <= 0) continue;
    std::poisson_distribution<long> count(mean);
    const long c = count(rng);
    for (long t = 0; t < c; ++t) s.loops.push_back(sample_loop(k, rng));
  }
  return s;
}

LoopSoupSample LoopSoupSampler::sample(double alpha, std::uint64_t seed) const {
  Rng rng = make_rng(seed, 0, 3);
  return sample(alpha, rng);
}

LoopSoupSample filter_min_jumps(const LoopSoupSample& s, int min_jumps) {
  if (min_jumps < 0) throw std::invalid_argument("filter_min_jumps: negative cutoff");
  LoopSoupSample out = s;
  out.loops.clear();
  for (const RootedLoop& l : s.loops)
    if (l.jumps() >= min_jumps) out.loops.push_back(l);
  return out;
}

int min_jumps_for_scale(int n, double theta) {
  return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), theta) - 1e-9));
}

LoopSoupSample superpose(const LoopSoupSample& a, const LoopSoupSample& b) {
  if (a.graph && b.graph && a.graph != b.graph)
    throw std::invalid_argument("superpose: soups live on different graphs");
  if (a.kmax != b.kmax) throw std::invalid_argument("superpose: kmax differs");
  LoopSoupSample out = a;
  out.alpha = a.alpha + b.alpha;
  out.tail_mass = a.tail_mass + b.tail_mass;
  if (!out.graph) out.graph = b.graph;
  out.loops.insert(out.loops.end(), b.loops.begin(), b.loops.end());
  return out;
}

bool is_valid_loop(const WeightedGraph& g, const RootedLoop& loop) {
  if (loop.path.size() < 3 || loop.path.front() != loop.path.back()) return false;
  for (std::size_t s = 0; s < loop.path.size(); ++s) {
    const Index v = loop.path[s];
    if (v < 0 || v >= g.vertex_count() || !g.is_free(v)) return false;
    if (s == 0) continue;
    const Index prev = loop.path[s - 1];
    const auto nbs = g.neighbors(prev);
    if (std::none_of(nbs.begin(), nbs.end(), [&](const Neighbor& nb) { return nb.to == v; }))
      return false;
  }
  return true;
}

}  // namespace loopsoup

namespace loopsoup {

std::vector<WeightedLoop> enumerate_rooted_loops(const WeightedGraph& g, int kmax) {
  std::vector<WeightedLoop> out;
  std::vector<Index> path;
  auto extend = [&](auto& self, double weight, int k) -> void {
    const Index z = path.back();
    for (const Neighbor& nb : g.neighbors(z)) {
      if (!g.is_free(nb.to)) continue;
      const double w = weight * nb.conductance / g.lambda(z);
      path.push_back(nb.to);
      if (static_cast<int>(path.size()) - 1 == k) {
        if (nb.to == path.front()) out.push_back({RootedLoop{path}, w});
      } else {
        self(self, w, k);
      }
      path.pop_back();
    }
  };
  for (int k = 2; k <= kmax; ++k)
    for (const Index root : g.free_vertices()) {
      path.assign(1, root);
      extend(extend, 1.0, k);
    }
  return out;
}

}  // namespace loopsoup
