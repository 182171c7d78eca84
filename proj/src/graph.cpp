#include "loopsoup/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace loopsoup {

WeightedGraph::WeightedGraph(int n, int width, int height, std::vector<VertexRole> roles,
                             std::vector<Vertex> coords, std::vector<Edge> edges)
    : n_(n),
      width_(width),
      height_(height),
      roles_(std::move(roles)),
      coords_(std::move(coords)),
      edges_(std::move(edges)) {
  const Index nv = vertex_count();
  if (lattice_count() > nv) throw std::invalid_argument("more coordinates than vertices");
  std::vector<Index> degree(nv, 0);
  for (const Edge& e : edges_) {
    if (e.a < 0 || e.b < 0 || e.a >= nv || e.b >= nv || e.a == e.b)
      throw std::invalid_argument("edge endpoint out of range");
    if (!(e.conductance > 0)) throw std::invalid_argument("edge conductance must be positive");
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(nv + 1, 0);
  for (Index v = 0; v < nv; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(offsets_[nv]);
  lambda_.assign(nv, 0.0);
  std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
  for (Index k = 0; k < edge_count(); ++k) {
    const Edge& e = edges_[k];
    adjacency_[fill[e.a]++] = {e.b, e.conductance, k};
    adjacency_[fill[e.b]++] = {e.a, e.conductance, k};
    lambda_[e.a] += e.conductance;
    lambda_[e.b] += e.conductance;
  }
  free_index_.assign(nv, -1);
  for (Index v = 0; v < nv; ++v) {
    if (is_free(v)) {
      free_index_[v] = static_cast<Index>(free_.size());
      free_.push_back(v);
    }
  }
}

std::optional<Index> WeightedGraph::find(Vertex p) const {
  if (p.i < -width_ || p.i > width_ || p.j < 0 || p.j > height_) return std::nullopt;
  const Index idx = p.j * (2 * width_ + 1) + (p.i + width_);
  if (idx >= lattice_count()) return std::nullopt;
  return idx;
}

Index WeightedGraph::index_of(Vertex p) const {
  auto idx = find(p);
  if (!idx) throw std::out_of_range("vertex outside the truncation box");
  return *idx;
}

std::vector<Index> WeightedGraph::killed_vertices() const {
  std::vector<Index> out;
  for (Index v = 0; v < vertex_count(); ++v)
    if (is_killed(v)) out.push_back(v);
  return out;
}

WeightedGraph build_half_plane(int n, int width, int height) {
  if (n < 1 || width < 1 || height < 1)
    throw std::invalid_argument("build_half_plane: n, W, H must be positive");
  const int row = 2 * width + 1;
  const Index count = static_cast<Index>(row) * (height + 1);
  std::vector<VertexRole> roles(count);
  std::vector<Vertex> coords(count);
  for (int j = 0; j <= height; ++j) {
    for (int i = -width; i <= width; ++i) {
      const Index v = j * row + (i + width);
      coords[v] = {i, j};
      const bool frame = j == 0 || j == height || i == -width || i == width;
      roles[v] = frame ? VertexRole::killed : VertexRole::interior;
    }
  }
  const double c = 0.5 * n;
  std::vector<Edge> edges;
  edges.reserve(2 * count);
  for (int j = 0; j <= height; ++j) {
    for (int i = -width; i <= width; ++i) {
      const Index v = j * row + (i + width);
      if (i < width) {
        const Index w = v + 1;
        if (roles[v] == VertexRole::interior || roles[w] == VertexRole::interior)
          edges.push_back({v, w, c});
      }
      if (j < height) {
        const Index w = v + row;
        if (roles[v] == VertexRole::interior || roles[w] == VertexRole::interior)
          edges.push_back({v, w, c});
      }
    }
  }
  return WeightedGraph(n, width, height, std::move(roles), std::move(coords), std::move(edges));
}

WeightedGraph identify_vertices(const WeightedGraph& g,
                                std::span<const std::vector<Index>> classes) {
  const Index nv = g.vertex_count();
  std::vector<Index> target(nv, -1);
  std::vector<VertexRole> roles(g.vertex_count());
  for (Index v = 0; v < nv; ++v) roles[v] = g.role(v);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].empty()) throw std::invalid_argument("identify_vertices: empty class");
    const Index q = nv + static_cast<Index>(c);
    for (Index v : classes[c]) {
      if (v < 0 || v >= nv) throw std::invalid_argument("identify_vertices: bad vertex");
      if (target[v] != -1) throw std::invalid_argument("identify_vertices: overlapping classes");
      if (g.role(v) == VertexRole::merged || g.role(v) == VertexRole::quotient)
        throw std::invalid_argument("identify_vertices: vertex already identified");
      target[v] = q;
      roles[v] = VertexRole::merged;
    }
    roles.push_back(VertexRole::quotient);
  }
  std::vector<Vertex> coords(g.lattice_count());
  for (Index v = 0; v < g.lattice_count(); ++v) coords[v] = g.vertex(v);

  // Keyed by the remapped pair so parallel edges merge.
  std::map<std::pair<Index, Index>, double> merged;
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    Index a = target[e.a] >= 0 ? target[e.a] : e.a;
    Index b = target[e.b] >= 0 ? target[e.b] : e.b;
    if (a == b) continue;  // loop at a quotient vertex
    const auto new_role = [&](Index v) { return roles[v]; };
    if (new_role(a) == VertexRole::killed && new_role(b) == VertexRole::killed) continue;
    if (target[e.a] < 0 && target[e.b] < 0) {
      edges.push_back({a, b, e.conductance});
    } else {
      merged[{std::min(a, b), std::max(a, b)}] += e.conductance;
    }
  }
  for (const auto& [key, c] : merged) edges.push_back({key.first, key.second, c});
  return WeightedGraph(g.n(), g.width(), g.height(), std::move(roles), std::move(coords),
                       std::move(edges));
}

std::vector<Index> boundary_interval(const WeightedGraph& g, double lo, double hi) {
  std::vector<Index> out;
  const int first = static_cast<int>(std::ceil(lo * g.n() - 1e-9));
  const int last = static_cast<int>(std::floor(hi * g.n() + 1e-9));
  for (int i = first; i <= last; ++i) {
    auto v = g.find({i, 0});
    if (!v) throw std::invalid_argument("boundary interval exceeds the truncation box");
    out.push_back(*v);
  }
  return out;
}

QuotientGraph build_quotient(const WeightedGraph& g, double a, double q) {
  if (!(a >= 0) || !(q >= 1)) throw std::invalid_argument("build_quotient: need a >= 0, q >= 1");
  if (g.free_count() == 0) throw std::invalid_argument("build_quotient: interval outside truncation");
  QuotientGraph out;
  out.base = g;
  out.a = a;
  out.q = q;
  out.left_class = boundary_interval(g, -a, 0.0);
  out.right_class = boundary_interval(g, 1.0, q);
  for (Index v : out.left_class) {
    const Vertex p = g.vertex(v);
    // The interior cable above the class member must exist.
    if (p.i <= -g.width() || p.i >= g.width())
      throw std::invalid_argument("build_quotient: interval touches the truncation frame");
  }
  for (Index v : out.right_class) {
    const Vertex p = g.vertex(v);
    if (p.i <= -g.width() || p.i >= g.width())
      throw std::invalid_argument("build_quotient: interval touches the truncation frame");
  }
  if (out.left_class.empty() || out.right_class.empty())
    throw std::invalid_argument("build_quotient: empty interval");
  const std::vector<std::vector<Index>> classes{out.left_class, out.right_class};
  out.graph = identify_vertices(g, classes);
  out.left = g.vertex_count();
  out.right = g.vertex_count() + 1;
  return out;
}

nlohmann::json to_json(const WeightedGraph& g) {
  nlohmann::json killed = nlohmann::json::array();
  for (Index v : g.killed_vertices()) {
    if (g.has_position(v)) killed.push_back({g.vertex(v).i, g.vertex(v).j});
  }
  return {{"n", g.n()}, {"W", g.width()}, {"H", g.height()}, {"killed", killed},
          {"quotient", nullptr}};
}

nlohmann::json to_json(const QuotientGraph& g) {
  nlohmann::json doc = to_json(g.graph);
  doc["quotient"] = {{"a", g.a}, {"q", g.q}};
  return doc;
}

WeightedGraph half_plane_from_json(const nlohmann::json& doc) {
  WeightedGraph g = build_half_plane(doc.at("n").get<int>(), doc.at("W").get<int>(),
                                     doc.at("H").get<int>());
  if (doc.contains("quotient") && !doc["quotient"].is_null()) {
    return build_quotient(g, doc["quotient"].at("a").get<double>(),
                          doc["quotient"].at("q").get<double>())
        .graph;
  }
  return g;
}

}  // namespace loopsoup
