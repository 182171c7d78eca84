#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "loopsoup/gff.hpp"
#include "loopsoup/graph.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

inline constexpr int kCriterionCount = 10;

/// fast: reduced sample counts (about 5 minutes for the battery);
/// full: the sizes and tolerances of record.
enum class Level { fast, full };
Level level_from_string(const std::string& s);
std::string to_string(Level l);

struct AcceptanceOptions {
  Level level = Level::full;
  std::uint64_t seed = 20240601;
  int workers = 1;
};

/// One criterion: `checks` gate the verdict, `diagnostics` are printed only.
struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double runtime_s = 0;
  std::vector<StatReport> checks;
  std::vector<StatReport> diagnostics;
  std::string summary;
};

CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::vector<CriterionResult> acceptance_suite(const AcceptanceOptions& opt);

/// One line: "criterion <k> PASS|FAIL <title>: <summary>".
std::string summary_line(const CriterionResult& r);
nlohmann::json to_json(const CriterionResult& r);

// Building blocks shared with the command-line tool.

struct GreenRow {
  int j = 0;
  double visit = 0;  // pi j^2 G_walk((0,1),(j,1))
  double exit = 0;   // pi j^2 P_(0,1)(exit at (j,0))
};
/// Unit-scale lattice with half-width `width` and height `height`.
std::vector<GreenRow> green_asymptotics(int width, int height, int jmin, int jmax);

struct CeqRow {
  int n = 0;
  double ceq = 0;
  double per_n = 0;   // C^eq / n
  double ratio = 0;   // (C^eq / n) 8 pi / log q
  double runtime_s = 0;
};
/// C^eq_n(q) on the box [-4qn, 4qn] x [0, 4qn] with left interval [-(4q - 1), 0].
CeqRow ceq_scaling(int n, double q);

struct ConditionalBin {
  double lo = 0, hi = 0;  // range of |phi_x| |phi_y|
  std::int64_t count = 0;
  double observed = 0;    // fraction in different clusters
  double expected = 0;    // within-bin mean of exp(-C s) / cosh(C s)
  double expected_literal = 0;  // same with 2C
  double stderr_exp = 0;  // binomial error under `expected`
  double z = 0;
  double z_literal = 0;
};
struct ConditionalLaw {
  double ceq = 0;
  std::vector<ConditionalBin> bins;
};
/// Metric-graph GFF on a fixed six-vertex graph: P(x, y in different clusters)
/// against |phi_x| |phi_y| in equal-probability bins.
ConditionalLaw conditional_law(std::int64_t samples, std::uint64_t seed, int bins = 20,
                               const EdgeRule& rule = cable_open_probability);
WeightedGraph six_vertex_graph();

}  // namespace loopsoup
