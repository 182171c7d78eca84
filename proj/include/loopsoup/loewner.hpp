#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Root in (8/3, 4] of 3 k^2 + (4 alpha - 26) k + 48 = 0.
template <typename Scalar>
Scalar kappa_of_alpha(Scalar alpha) {
  if (!(alpha > Scalar(0)) || alpha > Scalar(0.5)) throw std::domain_error("kappa_of_alpha: need 0 < alpha <= 1/2");
  using std::sqrt;
  const Scalar b = Scalar(26) - Scalar(4) * alpha;
  const Scalar disc = b * b - Scalar(576);
  // At alpha = 1/2 the discriminant is 0 up to round-off.
  return (b - sqrt(disc > Scalar(0) ? disc : Scalar(0))) / Scalar(6);
}

/// Inverse relation, 2 alpha = (3k - 8)(6 - k) / (2k).
template <typename Scalar>
Scalar alpha_of_kappa(Scalar kappa) {
  return (Scalar(3) * kappa - Scalar(8)) * (Scalar(6) - kappa) / (Scalar(4) * kappa);
}

/// u0 = (6 - k) / (2k): the excursion intensity whose cluster envelope is SLE_k.
template <typename Scalar>
Scalar u0_of_alpha(Scalar alpha) {
  const Scalar k = kappa_of_alpha(alpha);
  return (Scalar(6) - k) / (Scalar(2) * k);
}

/// (rho + 2)(rho + 6 - k) / (4k); equals u0 at rho = 0.
template <typename Scalar>
Scalar u_of_rho(Scalar rho, Scalar kappa) {
  return (rho + Scalar(2)) * (rho + Scalar(6) - kappa) / (Scalar(4) * kappa);
}

/// f(q) = c q^p.
struct PowerLaw {
  double c = 1;
  double p = 0;
  double operator()(double q) const { return c * std::pow(q, p); }
};

/// Left side of f'' + ((2 - 4/k) q - 4/k) f' / ((q - 1) q) - 4 v f / (k q^2).
double ode_residual(const PowerLaw& f, double kappa, double v, double q);

enum class ClosedFormMode { metric_limit, kappa4_special };

/// metric_limit: 1 - q^{-2 sqrt(uv)}; kappa4_special (alpha = 1/2, u = 1/4): 1 - q^{-sqrt(v)}.
double closed_form_p(double alpha, double u, double v, double q, ClosedFormMode mode);

/// Chordal Loewner flow of the two real points 1 < q with their derivatives.
struct LoewnerState {
  double t = 0;
  double w = 0;  // driving Brownian motion; the driver is sqrt(kappa) w
  double g1 = 1, gq = 2;
  double dg1 = 1, dgq = 1;
  double gap = 1;  // g(q) - g(1), carried separately: the difference cancels near swallowing
  double kappa = 4;
  bool absorbed = false;
};

LoewnerState initial_state(double kappa, double q0);

/// Advances by dt with the driver frozen (exact flow: X -> sqrt(X^2 + 4 dt),
/// g' -> g' X_old / X_new for X = g - sqrt(kappa) w), then moves w by dw.
/// Marks the state absorbed when g1 - sqrt(kappa) w falls below `margin`.
LoewnerState loewner_step(const LoewnerState& s, double dw, double dt, double margin = 1e-3);

/// loewner_step with adaptive halving: while the gap g1 - sqrt(kappa) w is
/// within a few driver standard deviations, the step is split at a Brownian
/// bridge midpoint drawn from `rng` (the driver law is unchanged). Stops
/// splitting at `min_dt`.
LoewnerState loewner_advance(const LoewnerState& s, double dw, double dt, Rng& rng, double margin = 1e-3,
                             double min_dt = 1e-12);

struct Restriction {
  double r;  // g'(1) g'(q) (q - 1)^2 / (g(q) - g(1))^2
  double q;  // (g(q) - sqrt(k) w) / (g(1) - sqrt(k) w)
};
Restriction restriction_functional(const LoewnerState& s, double q0);

struct MartingaleConfig {
  double kappa = 4;
  double v = 1;
  double q0 = 2;
  double t = 0.5;
  std::int64_t paths = 10000;
  double dt = 1e-4;
  double margin = 1e-3;
  std::uint64_t seed = 1;
  /// Exponent of f(q) = q^p; NaN selects the solution p = -sqrt(v).
  double exponent = std::nan("");
  int workers = 1;
};

struct MartingaleStats {
  double q0 = 0, v = 0, kappa = 0, t = 0, dt = 0;
  std::int64_t paths = 0;
  std::int64_t absorbed = 0;
  double mean = 0;         // at step dt / 2
  double stderr_mean = 0;
  double mean_coarse = 0;  // same drivers at step dt
  double richardson_gap = 0;  // |mean_coarse - mean|
  double target = 0;  // f(q0)
};

/// Estimates E[R_t^v f(q_t)] over Brownian drivers; absorbed paths contribute 0.
/// Throws when more than half the paths are absorbed.
MartingaleStats martingale_check(const MartingaleConfig& cfg);

}  // namespace loopsoup
