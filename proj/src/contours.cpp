#include "loopsoup/contours.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace loopsoup {

namespace {

struct Raster {
  int w = 0, h = 0;
  std::vector<Index> label;  // cluster id or -1
  Index& at(int x, int y) { return label[static_cast<std::size_t>(y) * w + x]; }
  Index get(int x, int y) const {
    if (x < 0 || y < 0 || x >= w || y >= h) return -1;
    return label[static_cast<std::size_t>(y) * w + x];
  }
};

// Vertex (i, j) sits at raster cell (2(i + W) + 1, 2j + 1); one vacant margin cell.
std::array<int, 2> cell_of(const WeightedGraph& g, Vertex p) {
  return {2 * (p.i + g.width()) + 1, 2 * p.j + 1};
}

Point2 corner_to_point(const WeightedGraph& g, int cx, int cy) {
  return {((cx - 1.5) / 2.0 - g.width()) / g.n(), ((cy - 1.5) / 2.0) / g.n()};
}

}  // namespace

ContourFamily outer_contours(const ClusterPartition& p, const WeightedGraph& g, std::string generator) {
  if (g.lattice_count() == 0) throw std::invalid_argument("outer_contours: graph has no lattice positions");
  if (static_cast<Index>(p.vertex_cluster.size()) != g.free_count() ||
      static_cast<Index>(p.edge_cluster.size()) != g.edge_count())
    throw std::invalid_argument("outer_contours: partition belongs to another graph");
  Raster r;
  r.w = 4 * g.width() + 3;
  r.h = 2 * g.height() + 3;
  r.label.assign(static_cast<std::size_t>(r.w) * r.h, -1);
  std::vector<std::uint8_t> censored(p.count, 0);
  for (Index f = 0; f < g.free_count(); ++f) {
    const Index c = p.vertex_cluster[f];
    const Index v = g.free_vertices()[f];
    if (c < 0 || !g.has_position(v)) continue;
    const Vertex pos = g.vertex(v);
    const auto [x, y] = cell_of(g, pos);
    r.at(x, y) = c;
    if (std::abs(pos.i) >= g.width() - 1 || pos.j >= g.height() - 1) censored[c] = 1;
  }
  for (Index e = 0; e < g.edge_count(); ++e) {
    const Index c = p.edge_cluster[e];
    const Edge& ed = g.edges()[e];
    if (c < 0 || !g.has_position(ed.a) || !g.has_position(ed.b)) continue;
    if (!g.is_free(ed.a) || !g.is_free(ed.b)) continue;  // stubs touch the killed set
    const auto ca = cell_of(g, g.vertex(ed.a)), cb = cell_of(g, g.vertex(ed.b));
    r.at((ca[0] + cb[0]) / 2, (ca[1] + cb[1]) / 2) = c;
  }

  // Vacant cells 4-connected to the margin.
  std::vector<std::uint8_t> outside(r.label.size(), 0);
  std::vector<std::array<int, 2>> stack;
  auto push = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= r.w || y >= r.h) return;
    const std::size_t k = static_cast<std::size_t>(y) * r.w + x;
    if (outside[k] || r.label[k] >= 0) return;
    outside[k] = 1;
    stack.push_back({x, y});
  };
  for (int x = 0; x < r.w; ++x) {
    push(x, 0);
    push(x, r.h - 1);
  }
  for (int y = 0; y < r.h; ++y) {
    push(0, y);
    push(r.w - 1, y);
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    push(x + 1, y);
    push(x - 1, y);
    push(x, y + 1);
    push(x, y - 1);
  }
  auto is_out = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= r.w || y >= r.h) return true;
    return outside[static_cast<std::size_t>(y) * r.w + x] != 0;
  };

  // Directed cell sides between a cluster and the outside, cluster on the left.
  using Corner = std::array<int, 2>;
  std::map<Index, std::multimap<Corner, Corner>> sides;
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) {
      const Index c = r.get(x, y);
      if (c < 0) continue;
      if (is_out(x, y - 1)) sides[c].insert({{x, y}, {x + 1, y}});
      if (is_out(x + 1, y)) sides[c].insert({{x + 1, y}, {x + 1, y + 1}});
      if (is_out(x, y + 1)) sides[c].insert({{x + 1, y + 1}, {x, y + 1}});
      if (is_out(x - 1, y)) sides[c].insert({{x, y + 1}, {x, y}});
    }

  ContourFamily fam;
  fam.generator = std::move(generator);
  for (auto& [cluster, edges] : sides) {
    Contour best;
    double best_area = -1;
    int cycles = 0;
    bool repeated = false;
    while (!edges.empty()) {
      std::vector<Corner> cycle;
      auto it = edges.begin();
      const Corner start = it->first;
      Corner cur = start;
      std::set<Corner> seen;
      for (;;) {
        if (!seen.insert(cur).second) repeated = true;
        cycle.push_back(cur);
        auto nxt = edges.find(cur);
        if (nxt == edges.end()) throw std::logic_error("outer_contours: open boundary");
        const Corner to = nxt->second;
        edges.erase(nxt);
        cur = to;
        if (cur == start) break;
      }
      ++cycles;
      double area = 0;
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        const Corner& a = cycle[k];
        const Corner& b = cycle[(k + 1) % cycle.size()];
        area += static_cast<double>(a[0]) * b[1] - static_cast<double>(b[0]) * a[1];
      }
      if (std::abs(area) > best_area) {
        best_area = std::abs(area);
        best.corners = std::move(cycle);
      }
    }
    best.cluster = cluster;
    best.censored = censored[cluster] != 0;
    best.simple = cycles == 1 && !repeated;
    int x0 = r.w, x1 = 0, y0 = r.h, y1 = 0;
    for (const Corner& c : best.corners) {
      best.polyline.push_back(corner_to_point(g, c[0], c[1]));
      x0 = std::min(x0, c[0]);
      x1 = std::max(x1, c[0]);
      y0 = std::min(y0, c[1]);
      y1 = std::max(y1, c[1]);
    }
    for (Index v = 0; v < g.lattice_count(); ++v) {
      const auto [x, y] = cell_of(g, g.vertex(v));
      if (x < x0 || x >= x1 || y < y0 || y >= y1) continue;
      const Vertex pos = g.vertex(v);
      if (point_in_polygon(best.polyline, {static_cast<double>(pos.i) / g.n(), static_cast<double>(pos.j) / g.n()}))
        best.enclosed.push_back(v);
    }
    fam.censored += best.censored;
    fam.contours.push_back(std::move(best));
  }
  return fam;
}

bool point_in_polygon(const std::vector<Point2>& poly, Point2 z) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
    const Point2 &p = poly[a], &q = poly[b];
    if ((p.y > z.y) != (q.y > z.y) && z.x < (q.x - p.x) * (z.y - p.y) / (q.y - p.y) + p.x) inside = !inside;
  }
  return inside;
}

std::optional<std::size_t> contour_containing(const ContourFamily& f, Point2 z) {
  for (std::size_t k = 0; k < f.contours.size(); ++k)
    if (point_in_polygon(f.contours[k].polyline, z)) return k;
  return std::nullopt;
}

FamilyCheck check_family(const ContourFamily& f) {
  FamilyCheck out;
  std::map<std::array<int, 2>, std::size_t> owner;
  for (std::size_t k = 0; k < f.contours.size(); ++k) {
    const Contour& c = f.contours[k];
    if (!c.simple) out.simple = false;
    for (const auto& corner : c.corners) {
      const auto [it, fresh] = owner.emplace(corner, k);
      if (!fresh && it->second != k) out.disjoint = false;
    }
  }
  // Disjoint closed curves are nested iff a point of one lies inside the other.
  for (std::size_t a = 0; a < f.contours.size(); ++a)
    for (std::size_t b = 0; b < f.contours.size(); ++b) {
      if (a == b || f.contours[a].polyline.empty()) continue;
      if (point_in_polygon(f.contours[b].polyline, f.contours[a].polyline.front())) out.non_nested = false;
    }
  return out;
}

PointSet contour_points(const Contour& c) { return c.polyline; }

nlohmann::json to_json(const Contour& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const Point2& p : c.polyline) pts.push_back({p.x, p.y});
  return {{"cluster", c.cluster}, {"censored", c.censored}, {"simple", c.simple},
          {"enclosed", c.enclosed.size()}, {"polyline", pts}};
}

}  // namespace loopsoup
