// One pass/fail line per acceptance criterion; exit status 0 iff all requested pass.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "loopsoup/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance battery"};
  std::vector<int> criteria;
  std::string level = "full", json_path;
  loopsoup::AcceptanceOptions opt;
  bool verbose = false;
  app.add_option("--criterion", criteria, "criterion numbers (default: all)")->check(CLI::Range(1, loopsoup::kCriterionCount));
  app.add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--json", json_path, "write the reports as JSON lines");
  app.add_flag("-v,--verbose", verbose, "print every check");
  CLI11_PARSE(app, argc, argv);
  opt.level = loopsoup::level_from_string(level);
  if (criteria.empty())
    for (int k = 1; k <= loopsoup::kCriterionCount; ++k) criteria.push_back(k);

  std::ofstream json;
  if (!json_path.empty()) json.open(json_path);
  bool ok = true;
  for (const int k : criteria) {
    loopsoup::CriterionResult r;
    try {
      r = loopsoup::run_criterion(k, opt);
    } catch (const std::exception& e) {
      std::printf("criterion %d FAIL error: %s\n", k, e.what());
      ok = false;
      continue;
    }
    std::printf("%s\n", loopsoup::summary_line(r).c_str());
    if (verbose) {
      for (const auto& c : r.checks) std::printf("  check %s %s\n", c.pass ? "ok  " : "FAIL", loopsoup::to_json(c).dump().c_str());
      for (const auto& d : r.diagnostics) std::printf("  diag  %s\n", loopsoup::to_json(d).dump().c_str());
    }
    std::fflush(stdout);
    if (json) json << loopsoup::to_json(r).dump() << "\n";
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
