#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace loopsoup {

/// Running mean and variance (Welford).
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStats& o);
  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double stderr_mean() const {
    return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::int64_t count_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

struct Proportion {
  double p;
  double stderr_p;
};

/// Frequency and binomial standard error.
Proportion proportion(std::int64_t hits, std::int64_t trials);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct ChiSquare {
  double statistic = 0;
  double dof = 0;
  double p_value = 1;
};

/// Goodness of fit of observed counts against expected counts. Cells with
/// expectation below `min_expected` are pooled into one cell. `ddof` is 1 when
/// the total is fixed (multinomial) and 0 for independent Poisson cells.
ChiSquare chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                         double min_expected = 5.0, int ddof = 1);

/// Two-sample homogeneity test of two histograms over the same cells.
ChiSquare chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                                double min_expected = 5.0);

/// Symmetry of a square contingency table (Bowker): pairs (s,t) and (t,s)
/// are exchangeable. Pairs with fewer than `min_count` joint entries are pooled.
ChiSquare symmetry_test(std::span<const double> upper, std::span<const double> lower,
                        double min_count = 10.0);

/// Outcome of one statistical or exact check.
struct StatReport {
  std::string name;
  double estimate = 0;
  double stderr_est = 0;
  double target = 0;
  double z_score = 0;
  double p_value = std::nan("");
  double threshold = 3;
  bool pass = false;
  double runtime_s = 0;
  std::string detail;
};

/// z-test: pass iff |estimate - target| <= threshold * stderr + allowance.
StatReport z_report(std::string name, double estimate, double stderr_est, double target,
                    double threshold = 3.0, double allowance = 0.0);
/// p-value test: pass iff p >= threshold.
StatReport p_report(std::string name, const ChiSquare& test, double threshold = 0.01);
/// Exact/tolerance check: pass iff |estimate - target| <= tolerance.
StatReport tolerance_report(std::string name, double estimate, double target, double tolerance);

nlohmann::json to_json(const StatReport& r);

}  // namespace loopsoup
