#include "qcd/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace qcd {
namespace {

constexpr double kThetaMin = 1e-6;
constexpr double kThetaMax = 1.0 - 1e-6;

void validate_common(std::int64_t horizon, double delta_f, double delta_d, double r) {
  if (horizon < 1) throw std::invalid_argument("bounds: horizon must be >= 1");
  if (!(delta_f > 0.0 && delta_f < 1.0))
    throw std::invalid_argument("bounds: delta_f must lie in (0, 1)");
  if (!(delta_d > 0.0 && delta_d < 1.0))
    throw std::invalid_argument("bounds: delta_d must lie in (0, 1)");
  if (!(r > 1.0)) throw std::invalid_argument("bounds: r must exceed 1");
}

}  // namespace

double zeta(double r) {
  if (!(r > 1.0)) throw std::domain_error("zeta: series diverges for r <= 1");
  // Partial sum to N, then the integral tail N^(1-r)/(r-1) with the first
  // Euler-Maclaurin corrections. At N = 1000 the truncated term is bounded by
  // r(r+1)(r+2) N^(-r-3)/720 < 1e-14 for every r > 1.
  constexpr int kTerms = 1000;
  double sum = 0.0;
  for (int i = kTerms; i >= 1; --i) sum += std::pow(static_cast<double>(i), -r);
  const double n = static_cast<double>(kTerms);
  const double tail = std::pow(n, 1.0 - r) / (r - 1.0) - 0.5 * std::pow(n, -r) +
                      r / 12.0 * std::pow(n, -r - 1.0);
  return sum + tail;
}

double latency_bound_at_theta(const DistributionPair& pair, std::int64_t horizon, double delta_f,
                              double delta_d, double r, double theta) {
  validate_common(horizon, delta_f, delta_d, r);
  if (!(theta > 0.0 && theta < 1.0))
    throw std::domain_error("latency_bound_at_theta: theta must lie strictly inside (0, 1)");
  const double lambda = pair.cumulant_gen_fn(theta);  // < 0 on the interior
  const double bracket = std::log(1.0 / delta_d) + theta * std::log(1.0 / delta_f) +
                         r * theta * std::log(static_cast<double>(horizon)) +
                         theta * std::log(zeta(r));
  return bracket / std::abs(lambda);
}

UpperBoundResult latency_upper_bound(const DistributionPair& pair, std::int64_t horizon,
                                     double delta_f, double delta_d, double r) {
  validate_common(horizon, delta_f, delta_d, r);
  const auto objective = [&](double theta) {
    return latency_bound_at_theta(pair, horizon, delta_f, delta_d, r, theta);
  };

  // Coarse grid to pick the bracket around the minimum.
  constexpr int kGridPoints = 64;
  int best_index = 0;
  double best_value = std::numeric_limits<double>::infinity();
  double grid[kGridPoints];
  for (int i = 0; i < kGridPoints; ++i) {
    grid[i] = kThetaMin + (kThetaMax - kThetaMin) * i / (kGridPoints - 1);
    const double value = objective(grid[i]);
    if (value < best_value) {
      best_value = value;
      best_index = i;
    }
  }
  double lo = grid[best_index > 0 ? best_index - 1 : 0];
  double hi = grid[best_index < kGridPoints - 1 ? best_index + 1 : kGridPoints - 1];

  // Golden-section refinement.
  constexpr double kInvPhi = 0.6180339887498948482;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(x2);
    }
  }
  UpperBoundResult result;
  result.theta_star = f1 <= f2 ? x1 : x2;
  result.d_bar = std::min(f1, f2);
  if (!std::isfinite(result.d_bar))
    throw std::runtime_error("latency_upper_bound: optimizer failed to converge");
  return result;
}

double miss_probability_bound(const DistributionPair& pair, double nu, double d, double delta_f,
                              double r, double theta) {
  if (!(nu >= 1.0)) throw std::invalid_argument("miss_probability_bound: nu must be >= 1");
  if (!(d >= 0.0)) throw std::invalid_argument("miss_probability_bound: d must be >= 0");
  if (!(delta_f > 0.0 && delta_f < 1.0))
    throw std::invalid_argument("miss_probability_bound: delta_f must lie in (0, 1)");
  if (!(r > 1.0)) throw std::invalid_argument("miss_probability_bound: r must exceed 1");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::domain_error("miss_probability_bound: theta must lie strictly inside (0, 1)");
  const double log_bound = theta * (std::log(zeta(r)) + r * std::log(nu + d) - std::log(delta_f)) +
                           d * pair.cumulant_gen_fn(theta);
  return std::exp(log_bound);
}

double asymptotic_lower_bound(const DistributionPair& pair, std::int64_t horizon, double delta_f,
                              double delta_d) {
  if (horizon < 1) throw std::invalid_argument("asymptotic_lower_bound: horizon must be >= 1");
  if (!(delta_f > 0.0 && delta_f < 1.0) || !(delta_d > 0.0 && delta_d < 1.0))
    throw std::invalid_argument("asymptotic_lower_bound: delta_f, delta_d must lie in (0, 1)");
  if (!(delta_f + delta_d < 1.0))
    throw std::domain_error("asymptotic_lower_bound: requires delta_f + delta_d < 1");
  const double c = pair.channel_constant();
  return (std::log(static_cast<double>(horizon)) + std::log(1.0 / delta_f) +
          std::log(1.0 - delta_f - delta_d)) /
         c;
}

BoundReport bound_report(const DistributionPair& pair, std::int64_t horizon, double delta_f,
                         double delta_d, double r) {
  const UpperBoundResult upper = latency_upper_bound(pair, horizon, delta_f, delta_d, r);
  BoundReport report;
  report.theta_star = upper.theta_star;
  report.upper_bound_d = upper.d_bar;
  report.components.log_inv_delta_d = std::log(1.0 / delta_d);
  report.components.theta_log_inv_delta_f = upper.theta_star * std::log(1.0 / delta_f);
  report.components.r_theta_log_T =
      r * upper.theta_star * std::log(static_cast<double>(horizon));
  report.components.theta_log_zeta = upper.theta_star * std::log(zeta(r));
  report.valid_lower = delta_f + delta_d < 1.0;
  if (report.valid_lower)
    report.lower_bound_d = asymptotic_lower_bound(pair, horizon, delta_f, delta_d);
  return report;
}

}  // namespace qcd
