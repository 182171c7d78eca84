#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loopsoup/clusters.hpp"
#include "loopsoup/graph.hpp"

namespace loopsoup {

/// Outer boundary of one outermost cluster. The raster has one cell per
/// vertex and per edge midpoint (half-step grid); the contour runs along cell
/// sides, so a single face loop gives a square of side 1.5 lattice steps.
struct Contour {
  std::vector<Point2> polyline;             // closed, scaled units; last point != first
  std::vector<std::array<int, 2>> corners;  // the same curve on the raster corner grid
  std::vector<Index> enclosed;              // graph vertices inside
  Index cluster = -1;
  bool censored = false;  // cluster reaches the truncation frame
  bool simple = true;     // traced as one cycle without repeated corners
};

struct ContourFamily {
  std::vector<Contour> contours;
  std::string generator;
  Index censored = 0;
};

/// One contour per cluster that borders the vacant region connected to the
/// outside of the box. Needs a lattice graph.
ContourFamily outer_contours(const ClusterPartition& p, const WeightedGraph& g,
                             std::string generator = {});

bool point_in_polygon(const std::vector<Point2>& polygon, Point2 z);

/// Index of the contour containing z, if any.
std::optional<std::size_t> contour_containing(const ContourFamily& f, Point2 z);

struct FamilyCheck {
  bool simple = true;
  bool disjoint = true;
  bool non_nested = true;
  bool ok() const { return simple && disjoint && non_nested; }
};
FamilyCheck check_family(const ContourFamily& f);

/// Vertices of the polyline as a point set (for collection distances).
PointSet contour_points(const Contour& c);

nlohmann::json to_json(const Contour& c);

}  // namespace loopsoup
