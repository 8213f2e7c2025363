#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcd/rng.hpp"

namespace qcd {

enum class Family { GaussianMeanShift, Bernoulli, DiscreteTable };

// A pre/post-change distribution pair (f0, f1) over a common observation
// space. Immutable after construction; safe to share across threads.
//
// Construction validates that f0 != f1, that probability tables are proper
// distributions with equal support (so the log-likelihood ratio is finite at
// every observable point), and that the channel constant
// C = log E_{f1}[f1/f0] is finite.
class DistributionPair {
 public:
  // f0 = N(0, sigma^2), f1 = N(mu, sigma^2). Requires mu != 0, sigma > 0.
  static DistributionPair gaussian_mean_shift(double mu, double sigma = 1.0);
  // f0 = Bernoulli(p0), f1 = Bernoulli(p1). Requires p0, p1 in (0,1), p0 != p1.
  static DistributionPair bernoulli(double p0, double p1);
  // Finite alphabet {0, .., k-1} with mass vectors p0, p1.
  static DistributionPair discrete_table(std::vector<double> p0, std::vector<double> p1);

  Family family() const { return family_; }
  bool is_discrete() const { return family_ != Family::GaussianMeanShift; }

  // log f1(x) - log f0(x) in nats. Throws std::domain_error when x is outside
  // the common support (discrete: x must be an exact symbol index).
  double log_likelihood_ratio(double x) const;

  // One observation from f1 (post_change) or f0.
  double sample(bool post_change, RandomStream& rng) const;

  // Cumulant generating function of log(f0/f1) under f1, theta in [0, 1].
  // Zero at both endpoints and strictly negative inside.
  double cumulant_gen_fn(double theta) const;

  // C = log E_{f1}[f1/f0] > 0.
  double channel_constant() const;

  // kl(f1; f0) = E_{f1}[log(f1/f0)] >= 0; never exceeds channel_constant().
  double kl_divergence() const;

  // Gaussian parameters (family() == GaussianMeanShift only).
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  // Discrete introspection (Bernoulli is the 2-symbol table {1-p, p}).
  int alphabet_size() const;
  double p0(int symbol) const;
  double p1(int symbol) const;
  double llr_at_symbol(int symbol) const;

  std::string describe() const;

 private:
  DistributionPair() = default;

  Family family_ = Family::GaussianMeanShift;
  double mu_ = 0.0;
  double sigma_ = 1.0;
  std::vector<double> table_p0_;  // discrete families
  std::vector<double> table_p1_;
};

// Change point convention: under Pr_nu the samples X_i follow f0 for i < nu
// and f1 for i >= nu (1-based); nu = never() is the no-change measure Pr_inf.
class ChangePoint {
 public:
  static ChangePoint never() { return ChangePoint{std::nullopt}; }
  static ChangePoint at(std::int64_t nu);

  bool is_finite() const { return nu_.has_value(); }
  std::int64_t index() const;
  bool post_change(std::int64_t i) const { return nu_.has_value() && i >= *nu_; }

  std::string describe() const;

 private:
  explicit ChangePoint(std::optional<std::int64_t> nu) : nu_(nu) {}
  std::optional<std::int64_t> nu_;
};

struct TrajectorySpec {
  DistributionPair pair;
  ChangePoint change_point = ChangePoint::never();
  std::int64_t horizon = 1;
};

// Observations 1..horizon; deterministic given (spec, stream).
std::vector<double> sample_trajectory(const TrajectorySpec& spec, RandomStream& rng);

}  // namespace qcd
