#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcd/detector.hpp"
#include "qcd/dist.hpp"
#include "qcd/stats.hpp"

namespace qcd {

struct SimOptions {
  int workers = 0;           // 0 = hardware concurrency; results never depend on it
  double confidence = 0.99;  // Clopper-Pearson level
};

struct EstimationReport {
  std::string instance;  // human-readable instance descriptor
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double confidence = 0.99;
  std::uint64_t master_seed = 0;
};

// Pr_inf(tau <= T) from N independent trajectories; trial i draws from the
// counter-based stream (master_seed, i), so the report is identical for any
// worker count.
EstimationReport estimate_false_alarm(const DistributionPair& pair, const ThresholdPolicy& policy,
                                      std::int64_t horizon, std::int64_t trials,
                                      std::uint64_t master_seed, const SimOptions& options = {});

// Pr_nu(tau >= nu + d) under Pr_nu (censoring counts as a miss).
EstimationReport estimate_miss(const DistributionPair& pair, const ThresholdPolicy& policy,
                               std::int64_t horizon, std::int64_t nu, std::int64_t d,
                               std::int64_t trials, std::uint64_t master_seed,
                               const SimOptions& options = {});

struct NuLatencyReport {
  std::int64_t nu = 0;
  EstimationReport miss_at_d_hat;  // Pr_nu(tau >= nu + d_hat)
  std::int64_t delay_q50 = 0;      // empirical quantiles of tau - nu
  std::int64_t delay_q90 = 0;
  std::int64_t delay_q_target = 0;  // (1 - delta_d) quantile
};

struct LatencyEstimate {
  bool feasible = false;
  std::int64_t d_hat = 0;
  // Inverting the per-(nu, d) confidence bounds gives a bracket on d_hat:
  // d_ci_low uses the lower CI of each miss estimate, d_ci_high the upper.
  std::int64_t d_ci_low = 0;
  std::int64_t d_ci_high = 0;
  std::vector<NuLatencyReport> per_nu;
};

// Empirical high-probability latency: estimates the delay distribution at
// each grid nu from N trials apiece, then returns the smallest d with
// estimated Pr_nu(tau >= nu + d) <= delta_d for every grid nu <= T - d.
LatencyEstimate empirical_latency(const DistributionPair& pair, const ThresholdPolicy& policy,
                                  std::int64_t horizon, double delta_d,
                                  const std::vector<std::int64_t>& nu_grid, std::int64_t trials,
                                  std::uint64_t master_seed, const SimOptions& options = {});

// Default sweep grid {1, T/4, T/2, 3T/4, T - d_cap}: the worst change point
// sits at the top of the horizon, so the grid always includes it.
std::vector<std::int64_t> default_nu_grid(std::int64_t horizon, std::int64_t d_cap);

}  // namespace qcd
