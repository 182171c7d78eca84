#include "loopsoup/stats.hpp"

#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace loopsoup {

void RunningStats::merge(const RunningStats& o) {
  if (o.count_ == 0) return;
  if (count_ == 0) {
    *this = o;
    return;
  }
  const double n1 = static_cast<double>(count_), n2 = static_cast<double>(o.count_);
  const double d = o.mean_ - mean_;
  mean_ += d * n2 / (n1 + n2);
  m2_ += o.m2_ + d * d * n1 * n2 / (n1 + n2);
  count_ += o.count_;
}

Proportion proportion(std::int64_t hits, std::int64_t trials) {
  if (trials <= 0) throw std::invalid_argument("proportion: no trials");
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1 - p) / static_cast<double>(trials))};
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  if (statistic <= 0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquare chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                         double min_expected, int ddof) {
  if (observed.size() != expected.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
  ChiSquare out;
  double pooled_o = 0, pooled_e = 0;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (expected[k] < min_expected) {
      pooled_o += observed[k];
      pooled_e += expected[k];
      continue;
    }
    const double d = observed[k] - expected[k];
    out.statistic += d * d / expected[k];
    ++cells;
  }
  if (pooled_e > 0) {
    const double d = pooled_o - pooled_e;
    out.statistic += d * d / pooled_e;
    ++cells;
  }
  out.dof = cells - ddof;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

ChiSquare chi_square_two_sample(std::span<const double> a, std::span<const double> b,
                                double min_expected) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_square_two_sample: size mismatch");
  double na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    na += a[k];
    nb += b[k];
  }
  ChiSquare out;
  if (na == 0 || nb == 0) return out;
  const double total = na + nb;
  double pa = 0, pb = 0;
  int cells = 0;
  auto add = [&](double oa, double ob) {
    const double col = oa + ob;
    const double ea = col * na / total, eb = col * nb / total;
    out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    ++cells;
  };
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double col = a[k] + b[k];
    if (std::min(col * na, col * nb) / total < min_expected) {
      pa += a[k];
      pb += b[k];
    } else {
      add(a[k], b[k]);
    }
  }
  if (pa + pb > 0) add(pa, pb);
  out.dof = cells - 1;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

ChiSquare symmetry_test(std::span<const double> upper, std::span<const double> lower,
                        double min_count) {
  if (upper.size() != lower.size()) throw std::invalid_argument("symmetry_test: size mismatch");
  ChiSquare out;
  double pu = 0, pl = 0;
  int cells = 0;
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const double tot = upper[k] + lower[k];
    if (tot < min_count) {
      pu += upper[k];
      pl += lower[k];
      continue;
    }
    out.statistic += (upper[k] - lower[k]) * (upper[k] - lower[k]) / tot;
    ++cells;
  }
  if (pu + pl > 0) {
    out.statistic += (pu - pl) * (pu - pl) / (pu + pl);
    ++cells;
  }
  out.dof = cells;
  out.p_value = chi_square_sf(out.statistic, out.dof);
  return out;
}

StatReport z_report(std::string name, double estimate, double stderr_est, double target,
                    double threshold, double allowance) {
  StatReport r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.stderr_est = stderr_est;
  r.target = target;
  r.threshold = threshold;
  const double gap = std::abs(estimate - target);
  r.z_score = stderr_est > 0 ? (estimate - target) / stderr_est : (gap == 0 ? 0.0 : INFINITY);
  r.pass = gap <= threshold * stderr_est + allowance;
  return r;
}

StatReport p_report(std::string name, const ChiSquare& test, double threshold) {
  StatReport r;
  r.name = std::move(name);
  r.estimate = test.statistic;
  r.target = test.dof;
  r.p_value = test.p_value;
  r.threshold = threshold;
  r.pass = test.p_value >= threshold;
  return r;
}

StatReport tolerance_report(std::string name, double estimate, double target, double tolerance) {
  StatReport r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.target = target;
  r.threshold = tolerance;
  r.pass = std::abs(estimate - target) <= tolerance;
  return r;
}

nlohmann::json to_json(const StatReport& r) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
  };
  return {{"name", r.name},         {"estimate", num(r.estimate)}, {"stderr", num(r.stderr_est)},
          {"target", num(r.target)}, {"z", num(r.z_score)},         {"p_value", num(r.p_value)},
          {"threshold", r.threshold}, {"pass", r.pass},             {"runtime_s", r.runtime_s},
          {"detail", r.detail}};
}

}  // namespace loopsoup
