#include "qcd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qcd/bounds.hpp"

namespace qcd {

DetectorState cusum_update(const DetectorState& state, double llr) {
  if (!state.running()) throw std::logic_error("cusum_update: detector already stopped");
  DetectorState next;
  next.w = std::max(state.w, 0.0) + llr;
  next.n = state.n + 1;
  return next;
}

double cusum_statistic_batch(std::span<const double> llrs) {
  if (llrs.empty()) throw std::invalid_argument("cusum_statistic_batch: empty sequence");
  const std::size_t n = llrs.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    double suffix = 0.0;
    for (std::size_t i = k; i < n; ++i) suffix += llrs[i];
    best = std::max(best, suffix);
  }
  return best;
}

ThresholdPolicy ThresholdPolicy::fixed(double b) {
  if (!std::isfinite(b)) throw std::invalid_argument("ThresholdPolicy::fixed: b must be finite");
  ThresholdPolicy policy;
  policy.time_varying_ = false;
  policy.b_ = b;
  return policy;
}

ThresholdPolicy ThresholdPolicy::time_varying(double delta_f, double r) {
  if (!(delta_f > 0.0 && delta_f < 1.0))
    throw std::invalid_argument("ThresholdPolicy::time_varying: delta_f must lie in (0, 1)");
  if (!(r > 1.0)) throw std::invalid_argument("ThresholdPolicy::time_varying: r must exceed 1");
  ThresholdPolicy policy;
  policy.time_varying_ = true;
  policy.delta_f_ = delta_f;
  policy.r_ = r;
  policy.log_zeta_r_ = std::log(zeta(r));
  return policy;
}

double ThresholdPolicy::fixed_b() const {
  if (time_varying_) throw std::logic_error("fixed_b: policy is time-varying");
  return b_;
}

double ThresholdPolicy::delta_f() const {
  if (!time_varying_) throw std::logic_error("delta_f: policy has a fixed threshold");
  return delta_f_;
}

double ThresholdPolicy::r() const {
  if (!time_varying_) throw std::logic_error("r: policy has a fixed threshold");
  return r_;
}

double ThresholdPolicy::log_zeta_r() const {
  if (!time_varying_) throw std::logic_error("log_zeta_r: policy has a fixed threshold");
  return log_zeta_r_;
}

double ThresholdPolicy::threshold_at(std::int64_t n) const {
  if (n < 1) throw std::invalid_argument("threshold_at: n must be >= 1");
  if (!time_varying_) return b_;
  return log_zeta_r_ + r_ * std::log(static_cast<double>(n)) - std::log(delta_f_);
}

std::string ThresholdPolicy::describe() const {
  std::ostringstream out;
  if (time_varying_)
    out << "tvt(delta_f=" << delta_f_ << ",r=" << r_ << ")";
  else
    out << "fixed(b=" << b_ << ")";
  return out.str();
}

double threshold_at(const ThresholdPolicy& policy, std::int64_t n) {
  return policy.threshold_at(n);
}

StoppingOutcome StoppingOutcome::stopped_at(std::int64_t n, std::int64_t horizon) {
  if (n < 1 || n > horizon) throw std::invalid_argument("StoppingOutcome: need 1 <= n <= horizon");
  return StoppingOutcome{n, horizon};
}

StoppingOutcome StoppingOutcome::censored(std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("StoppingOutcome: horizon must be >= 1");
  return StoppingOutcome{0, horizon};
}

std::int64_t StoppingOutcome::stop_time() const {
  if (!stopped()) throw std::logic_error("stop_time: run was censored");
  return stop_time_;
}

StoppingOutcome run_detector(const DistributionPair& pair, const ThresholdPolicy& policy,
                             std::span<const double> observations) {
  std::size_t i = 0;
  return run_detector(
      pair, policy, [&]() { return observations[i++]; },
      static_cast<std::int64_t>(observations.size()));
}

}  // namespace qcd
