#include "loopsoup/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

#include "loopsoup/rng.hpp"
#include "loopsoup/stats.hpp"

namespace loopsoup {

double ode_residual(const PowerLaw& f, double kappa, double v, double q) {
  if (!(q > 1)) throw std::domain_error("ode_residual: need q > 1");
  const double fq = f(q);
  const double d1 = f.p == 0 ? 0.0 : f.c * f.p * std::pow(q, f.p - 1);
  const double d2 = f.p == 0 ? 0.0 : f.c * f.p * (f.p - 1) * std::pow(q, f.p - 2);
  const double drift = ((2 - 4 / kappa) * q - 4 / kappa) / ((q - 1) * q);
  return d2 + drift * d1 - 4 * v * fq / (kappa * q * q);
}

double closed_form_p(double alpha, double u, double v, double q, ClosedFormMode mode) {
  if (!(q > 1)) throw std::domain_error("closed_form_p: need q > 1");
  if (!(u >= 0) || !(v >= 0)) throw std::domain_error("closed_form_p: need u, v >= 0");
  if (mode == ClosedFormMode::metric_limit) return 1 - std::pow(q, -2 * std::sqrt(u * v));
  if (alpha != 0.5 || std::abs(u - u0_of_alpha(0.5)) > 1e-15)
    throw std::invalid_argument("closed_form_p: the kappa = 4 form needs alpha = 1/2 and u = 1/4");
  return 1 - std::pow(q, -std::sqrt(v));
}

LoewnerState initial_state(double kappa, double q0) {
  if (!(kappa > 0) || kappa > 4) throw std::domain_error("loewner: need 0 < kappa <= 4");
  if (!(q0 > 1)) throw std::domain_error("loewner: need q0 > 1");
  LoewnerState s;
  s.kappa = kappa;
  s.gq = q0;
  s.gap = q0 - 1;
  return s;
}

LoewnerState loewner_step(const LoewnerState& s, double dw, double dt, double margin) {
  if (s.absorbed) throw std::logic_error("loewner_step: state is absorbed");
  LoewnerState n = s;
  const double drive = std::sqrt(s.kappa) * s.w;
  const double x1 = s.g1 - drive, xq = s.gq - drive;
  const double y1 = std::sqrt(x1 * x1 + 4 * dt), yq = std::sqrt(xq * xq + 4 * dt);
  n.g1 = drive + y1;
  n.gq = drive + yq;
  n.dg1 = s.dg1 * x1 / y1;
  n.dgq = s.dgq * xq / yq;
  n.gap = s.gap * (x1 + xq) / (y1 + yq);
  n.t = s.t + dt;
  n.w = s.w + dw;
  if (n.g1 - std::sqrt(s.kappa) * n.w < margin) n.absorbed = true;
  return n;
}

LoewnerState loewner_advance(const LoewnerState& s, double dw, double dt, Rng& rng, double margin, double min_dt) {
  const double sk = std::sqrt(s.kappa);
  const double gap = s.g1 - sk * s.w;
  const double spread = 4 * sk * (std::sqrt(dt) + std::abs(dw));
  if (dt <= min_dt || gap > spread + margin) return loewner_step(s, dw, dt, margin);
  std::normal_distribution<double> normal;
  const double mid = dw / 2 + std::sqrt(dt / 4) * normal(rng);
  const LoewnerState h = loewner_advance(s, mid, dt / 2, rng, margin, min_dt);
  if (h.absorbed) return h;
  return loewner_advance(h, dw - mid, dt / 2, rng, margin, min_dt);
}

Restriction restriction_functional(const LoewnerState& s, double q0) {
  if (s.absorbed) throw std::logic_error("restriction_functional: state is absorbed");
  const double drive = std::sqrt(s.kappa) * s.w;
  const double x1 = s.g1 - drive;
  const double ratio = (q0 - 1) / s.gap;
  return {s.dg1 * s.dgq * ratio * ratio, 1 + s.gap / x1};
}

MartingaleStats martingale_check(const MartingaleConfig& cfg) {
  if (!(cfg.v > 0)) throw std::domain_error("martingale_check: need v > 0");
  if (!(cfg.t >= 0) || !(cfg.dt > 0)) throw std::domain_error("martingale_check: need t >= 0, dt > 0");
  if (cfg.paths < 2) throw std::invalid_argument("martingale_check: need at least 2 paths");
  initial_state(cfg.kappa, cfg.q0);  // validates kappa and q0
  const double p = std::isnan(cfg.exponent) ? -std::sqrt(cfg.v) : cfg.exponent;
  const PowerLaw f{1.0, p};
  const std::int64_t coarse_steps = static_cast<std::int64_t>(std::llround(cfg.t / cfg.dt));
  const double h = cfg.dt / 2;
  auto functional = [&](const LoewnerState& s) {
    if (s.absorbed) return 0.0;
    const Restriction r = restriction_functional(s, cfg.q0);
    return std::pow(r.r, cfg.v) * f(r.q);
  };

  const int workers = std::max(1, cfg.workers);
  std::vector<RunningStats> fine(workers), coarse(workers);
  std::vector<std::int64_t> absorbed(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](int wk) {
    try {
      std::normal_distribution<double> normal;
      for (std::int64_t k = wk; k < cfg.paths; k += workers) {
        Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(k), 9);
        Rng split_a = make_rng(cfg.seed, static_cast<std::uint64_t>(k), 10);
        Rng split_b = make_rng(cfg.seed, static_cast<std::uint64_t>(k), 11);
        LoewnerState a = initial_state(cfg.kappa, cfg.q0), b = a;
        for (std::int64_t s = 0; s < coarse_steps; ++s) {
          const double z1 = normal(rng) * std::sqrt(h), z2 = normal(rng) * std::sqrt(h);
          if (!a.absorbed) a = loewner_advance(a, z1, h, split_a, cfg.margin);
          if (!a.absorbed) a = loewner_advance(a, z2, h, split_a, cfg.margin);
          if (!b.absorbed) b = loewner_advance(b, z1 + z2, cfg.dt, split_b, cfg.margin);
          if (a.absorbed && b.absorbed) break;
        }
        fine[wk].add(functional(a));
        coarse[wk].add(functional(b));
        absorbed[wk] += a.absorbed;
      }
    } catch (...) {
      errors[wk] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int wk = 1; wk < workers; ++wk) pool.emplace_back(work, wk);
  work(0);
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (int wk = 1; wk < workers; ++wk) {
    fine[0].merge(fine[wk]);
    coarse[0].merge(coarse[wk]);
    absorbed[0] += absorbed[wk];
  }

  MartingaleStats st;
  st.q0 = cfg.q0;
  st.v = cfg.v;
  st.kappa = cfg.kappa;
  st.t = cfg.t;
  st.dt = cfg.dt;
  st.paths = cfg.paths;
  st.absorbed = absorbed[0];
  if (2 * st.absorbed > st.paths)
    throw std::runtime_error("martingale_check: more than half the paths were absorbed; reduce dt or increase q0");
  st.mean = fine[0].mean();
  st.stderr_mean = fine[0].stderr_mean();
  st.mean_coarse = coarse[0].mean();
  st.richardson_gap = std::abs(st.mean_coarse - st.mean);
  st.target = f(cfg.q0);
  return st;
}

}  // namespace loopsoup
