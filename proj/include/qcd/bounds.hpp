#pragma once

#include <cstdint>

#include "qcd/dist.hpp"

namespace qcd {

// Riemann zeta for r > 1: partial sum plus the integral tail with
// Euler-Maclaurin corrections; absolute error below 1e-12 on r > 1.
double zeta(double r);

struct BoundBracket {
  double log_inv_delta_d = 0.0;       // log(1/delta_d)
  double theta_log_inv_delta_f = 0.0; // theta log(1/delta_f)
  double r_theta_log_T = 0.0;         // r theta log T
  double theta_log_zeta = 0.0;        // theta log zeta(r)

  double sum() const {
    return log_inv_delta_d + theta_log_inv_delta_f + r_theta_log_T + theta_log_zeta;
  }
};

// Latency bound at a fixed theta in (0, 1):
//   (1/|Lambda(theta)|) [log(1/delta_d) + theta log(1/delta_f)
//                        + r theta log T + theta log zeta(r)].
double latency_bound_at_theta(const DistributionPair& pair, std::int64_t horizon, double delta_f,
                              double delta_d, double r, double theta);

struct UpperBoundResult {
  double theta_star = 0.0;
  double d_bar = 0.0;  // samples, before any ceiling
};

// Minimizes latency_bound_at_theta over theta in [1e-6, 1 - 1e-6]: 64-point
// coarse grid to bracket the minimum, then golden-section refinement.
UpperBoundResult latency_upper_bound(const DistributionPair& pair, std::int64_t horizon,
                                     double delta_f, double delta_d, double r);

// Chernoff bound on Pr_nu(tau >= nu + d):
//   (zeta(r) (nu+d)^r / delta_f)^theta exp(d Lambda(theta)).
// May exceed 1; it is a bound, not a probability. nu and d are real-valued so
// the bound can be evaluated at the exact optimizer output (d = d_bar gives
// the defining identity value delta_d at nu + d = T); integer arguments are
// the typical use.
double miss_probability_bound(const DistributionPair& pair, double nu, double d, double delta_f,
                              double r, double theta);

// Leading-order latency lower bound
//   (1/C) [log T + log(1/delta_f) + log(1 - delta_f - delta_d)],
// valid asymptotically in T; requires delta_f + delta_d < 1.
double asymptotic_lower_bound(const DistributionPair& pair, std::int64_t horizon, double delta_f,
                              double delta_d);

struct BoundReport {
  double theta_star = 0.0;
  double upper_bound_d = 0.0;
  BoundBracket components;
  double lower_bound_d = 0.0;  // meaningful only when valid_lower
  bool valid_lower = false;    // delta_f + delta_d < 1
};

BoundReport bound_report(const DistributionPair& pair, std::int64_t horizon, double delta_f,
                         double delta_d, double r);

}  // namespace qcd
