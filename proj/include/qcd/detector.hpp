#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcd/dist.hpp"

namespace qcd {

// Running CuSum statistic W_n with W_0 = 0 and
//   W_n = max(W_{n-1}, 0) + llr_n.
struct DetectorState {
  double w = 0.0;
  std::int64_t n = 0;
  std::int64_t stopped_at = 0;  // 0 while running

  bool running() const { return stopped_at == 0; }
};

// One recursion step. Throws std::logic_error after the detector stopped.
DetectorState cusum_update(const DetectorState& state, double llr);

// W_n straight from the definition: max over 1 <= k <= n of the suffix sum
// llr_k + ... + llr_n. Quadratic; kept as the independent route against the
// recursion.
double cusum_statistic_batch(std::span<const double> llrs);

// Stopping threshold in nats: a constant b, or the time-varying
//   beta(n) = log(zeta(r) n^r / delta_f),  r > 1,
// which does not depend on the horizon.
class ThresholdPolicy {
 public:
  static ThresholdPolicy fixed(double b);
  static ThresholdPolicy time_varying(double delta_f, double r);

  bool is_time_varying() const { return time_varying_; }
  double fixed_b() const;
  double delta_f() const;
  double r() const;
  double log_zeta_r() const;

  double threshold_at(std::int64_t n) const;

  std::string describe() const;

 private:
  ThresholdPolicy() = default;
  bool time_varying_ = false;
  double b_ = 0.0;
  double delta_f_ = 0.0;
  double r_ = 0.0;
  double log_zeta_r_ = 0.0;  // cached log zeta(r)
};

double threshold_at(const ThresholdPolicy& policy, std::int64_t n);

// Stopped within the horizon, or censored at it.
class StoppingOutcome {
 public:
  static StoppingOutcome stopped_at(std::int64_t n, std::int64_t horizon);
  static StoppingOutcome censored(std::int64_t horizon);

  bool stopped() const { return stop_time_ != 0; }
  std::int64_t stop_time() const;
  std::int64_t horizon() const { return horizon_; }

 private:
  StoppingOutcome(std::int64_t stop_time, std::int64_t horizon)
      : stop_time_(stop_time), horizon_(horizon) {}
  std::int64_t stop_time_ = 0;
  std::int64_t horizon_ = 0;
};

// Feeds observations one at a time and returns the first n with
// W_n >= threshold(n) (ties stop), or Censored(horizon). Consumes nothing
// past the stopping time. `next_obs` is called once per consumed sample.
template <class Source>
StoppingOutcome run_detector(const DistributionPair& pair, const ThresholdPolicy& policy,
                             Source&& next_obs, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("run_detector: horizon must be >= 1");
  DetectorState state;
  for (std::int64_t n = 1; n <= horizon; ++n) {
    state = cusum_update(state, pair.log_likelihood_ratio(next_obs()));
    if (state.w >= policy.threshold_at(n)) return StoppingOutcome::stopped_at(n, horizon);
  }
  return StoppingOutcome::censored(horizon);
}

StoppingOutcome run_detector(const DistributionPair& pair, const ThresholdPolicy& policy,
                             std::span<const double> observations);

}  // namespace qcd
