#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace loopsoup {

using Index = std::int32_t;

/// Lattice site (i, j) of Z x N; scaled position is (i/n, j/n).
struct Vertex {
  int i = 0;
  int j = 0;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

enum class VertexRole : std::uint8_t {
  interior,  // free lattice site
  killed,    // absorbing boundary (bottom row or truncation frame)
  merged,    // lattice site absorbed into a quotient vertex
  quotient,  // free vertex created by identifying boundary sites
};

struct Edge {
  Index a;
  Index b;
  double conductance;
};

struct Neighbor {
  Index to;
  double conductance;
  Index edge;
};

/// Finite weighted graph with killing. Lattice sites (when present) are stored
/// row-major: index = j * (2W + 1) + (i + W). Extra vertices are appended.
///
/// Only edges with at least one non-killed endpoint are stored; edges between
/// two killed sites carry no walk and no field.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Generic constructor. `coords` may be shorter than `roles`; vertices past
  /// its end have no lattice position.
  WeightedGraph(int n, int width, int height, std::vector<VertexRole> roles,
                std::vector<Vertex> coords, std::vector<Edge> edges);

  int n() const { return n_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Index vertex_count() const { return static_cast<Index>(roles_.size()); }
  Index lattice_count() const { return static_cast<Index>(coords_.size()); }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }

  VertexRole role(Index v) const { return roles_[v]; }
  bool is_killed(Index v) const { return roles_[v] == VertexRole::killed; }
  bool is_free(Index v) const {
    return roles_[v] == VertexRole::interior || roles_[v] == VertexRole::quotient;
  }
  bool has_position(Index v) const { return v < lattice_count(); }
  Vertex vertex(Index v) const { return coords_[v]; }

  /// Lattice index of (i, j) or nullopt when outside the truncation box.
  std::optional<Index> find(Vertex p) const;
  /// Lattice index of (i, j); throws std::out_of_range when outside.
  Index index_of(Vertex p) const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Neighbor> neighbors(Index v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  /// lambda(z) = sum of conductances at z.
  double lambda(Index v) const { return lambda_[v]; }
  /// Cable length r = 1 / (2 C).
  static double cable_length(double conductance) { return 0.5 / conductance; }

  /// Free vertices in ascending index order; solvers address this compact set.
  std::span<const Index> free_vertices() const { return free_; }
  /// Position of v in free_vertices(), or -1.
  Index free_index(Index v) const { return free_index_[v]; }
  Index free_count() const { return static_cast<Index>(free_.size()); }

  std::vector<Index> killed_vertices() const;

 private:
  int n_ = 1;
  int width_ = 0;
  int height_ = 0;
  std::vector<VertexRole> roles_;
  std::vector<Vertex> coords_;
  std::vector<Edge> edges_;
  std::vector<Index> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<double> lambda_;
  std::vector<Index> free_;
  std::vector<Index> free_index_;
};

/// Lattice [-W, W] x [0, H] at scale n, every conductance n/2. The bottom row
/// and the truncation frame are killed.
WeightedGraph build_half_plane(int n, int width, int height);

/// Identifies each class of vertices into a single new free vertex appended
/// after the existing ones (in class order). Parallel edges accumulate.
/// Class members become `merged`; they must be killed or interior and the
/// classes must be disjoint.
WeightedGraph identify_vertices(const WeightedGraph& g,
                                std::span<const std::vector<Index>> classes);

/// Boundary sites with i/n in [lo, hi], j = 0, in increasing i.
std::vector<Index> boundary_interval(const WeightedGraph& g, double lo, double hi);

struct QuotientGraph {
  WeightedGraph base;
  WeightedGraph graph;  // the identified graph
  std::vector<Index> left_class;   // base indices merged into the left vertex
  std::vector<Index> right_class;  // base indices merged into the right vertex
  Index left = -1;   // index of the left quotient vertex in `graph`
  Index right = -1;  // index of the right quotient vertex in `graph`
  double a = 0;
  double q = 0;
};

/// Merges [-a, 0] x {0} into the left vertex and [1, q] x {0} into the right one.
QuotientGraph build_quotient(const WeightedGraph& g, double a, double q);

nlohmann::json to_json(const WeightedGraph& g);
nlohmann::json to_json(const QuotientGraph& g);
/// Rebuilds a half-plane (or quotient) graph from its JSON document.
WeightedGraph half_plane_from_json(const nlohmann::json& doc);

}  // namespace loopsoup
