#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qcd/detector.hpp"
#include "qcd/dist.hpp"

namespace qcd {

// Raised when an instance falls outside the exact-analysis envelope
// (continuous pair, non-lattice LLRs past the enumeration horizon, or a state
// space too large to hold).
class UnsupportedInstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact distribution of the stopping time over a finite horizon.
struct OraclePmf {
  std::int64_t horizon = 0;
  std::vector<double> p_stop;  // p_stop[n-1] = Pr(tau = n), n = 1..horizon
  double p_censored = 0.0;     // Pr(tau > horizon)

  double prob_stop_at(std::int64_t n) const { return p_stop.at(static_cast<std::size_t>(n - 1)); }
  // Pr(tau <= t); cumulative() returns the whole prefix-sum curve.
  double prob_stop_by(std::int64_t t) const;
  std::vector<double> cumulative() const;
  double total_mass() const;
};

// LLR lattice of a discrete pair: every per-symbol LLR equals step[j] * gap
// for integers step[j], within 1e-9 relative. Found by continued-fraction
// rationalization of the pairwise ratios; absent when no small common
// denominator exists.
struct LlrLattice {
  double gap = 0.0;
  std::vector<int> step;  // per symbol
  int min_step = 0;
  int max_step = 0;
};

std::optional<LlrLattice> detect_llr_lattice(const DistributionPair& pair, double tolerance = 1e-9,
                                             long max_denominator = 4096);

// Exact stopping-time pmf by dynamic programming over the CuSum value
// lattice (discrete pairs with lattice LLRs, T <= 1e5). Non-lattice discrete
// pairs fall back to full path enumeration, T <= 20. States at or above the
// running threshold absorb into "stopped"; the max(., 0) restart makes the
// reachable value set finite.
OraclePmf exact_stopping_distribution(const DistributionPair& pair, const ThresholdPolicy& policy,
                                      std::int64_t horizon, ChangePoint nu);

// Full path enumeration (A^T work); the independent cross-check of the DP.
OraclePmf exact_stopping_distribution_enumeration(const DistributionPair& pair,
                                                  const ThresholdPolicy& policy,
                                                  std::int64_t horizon, ChangePoint nu);

// Pr_inf(tau <= T), exactly.
double exact_false_alarm(const DistributionPair& pair, const ThresholdPolicy& policy,
                         std::int64_t horizon);

struct LatencyResult {
  bool feasible = false;
  std::int64_t d = 0;  // meaningful only when feasible
};

// Smallest d with Pr_nu(tau >= nu + d) <= delta_d for every nu in
// {1, .., T-d}; infeasible when no d <= T-1 works. Binary search over d (the
// predicate is monotone: larger d weakens every window constraint and shrinks
// the nu range); verify_with_linear_scan re-derives the answer by linear scan
// and throws on mismatch.
LatencyResult exact_high_prob_latency(const DistributionPair& pair, const ThresholdPolicy& policy,
                                      std::int64_t horizon, double delta_d,
                                      bool verify_with_linear_scan = false);

struct WindowWitness {
  std::int64_t nu = 0;    // witness offset in {0, .., T-d}
  double mass = 0.0;      // Pr(nu <= tau < nu + d)
  double budget = 0.0;    // delta_f / floor(T/d)
};

// Finds the nu minimizing the window mass Pr(nu <= tau < nu + d) over
// nu in {0, .., T-d}. Requires Pr(tau <= T) <= delta_f; the minimizer is then
// guaranteed to fit the budget delta_f / floor(T/d).
WindowWitness window_bound_witness(const OraclePmf& pmf_inf, std::int64_t horizon, std::int64_t d,
                                   double delta_f);

struct MartingaleReport {
  double e_inf_lr = 0.0;              // E_f0[f1/f0]; equals 1 exactly
  double e_post_lr = 0.0;             // E_f1[f1/f0] = e^C
  std::vector<double> super_means;    // m = 0..m_max: E_inf[(n+m)^-r prod LR]
  std::vector<double> sub_means;      // m = 0..m_max: E_nu[prod over m LR] = e^(Cm)
  bool super_nonincreasing = false;
  bool sub_nondecreasing = false;
  double max_sub_rel_err = 0.0;       // sub_means vs exp(C m)
};

// Exact mean-sequence checks of the super/submartingale structure; the i.i.d.
// structure factorizes both expectations, so enumeration over the alphabet
// once suffices. Discrete pairs only, m_max <= 30.
MartingaleReport martingale_checks(const DistributionPair& pair, std::int64_t n, double r,
                                   int m_max);

}  // namespace qcd
