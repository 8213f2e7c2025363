#include "qcd/dist.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qcd {
namespace {

constexpr double kTableSumTolerance = 1e-12;

void validate_probability_vector(const std::vector<double>& p, const char* name) {
  if (p.size() < 2) throw std::invalid_argument(std::string(name) + ": need at least 2 symbols");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + ": entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTableSumTolerance)
    throw std::invalid_argument(std::string(name) + ": entries must sum to 1 within 1e-12");
}

}  // namespace

DistributionPair DistributionPair::gaussian_mean_shift(double mu, double sigma) {
  if (!std::isfinite(mu) || mu == 0.0)
    throw std::invalid_argument("gaussian_mean_shift: mu must be finite and nonzero (f0 != f1)");
  if (!std::isfinite(sigma) || sigma <= 0.0)
    throw std::invalid_argument("gaussian_mean_shift: sigma must be positive");
  DistributionPair pair;
  pair.family_ = Family::GaussianMeanShift;
  pair.mu_ = mu;
  pair.sigma_ = sigma;
  return pair;
}

DistributionPair DistributionPair::bernoulli(double p0, double p1) {
  if (!(p0 > 0.0 && p0 < 1.0) || !(p1 > 0.0 && p1 < 1.0))
    throw std::invalid_argument("bernoulli: p0 and p1 must lie strictly inside (0, 1)");
  if (p0 == p1) throw std::invalid_argument("bernoulli: p0 == p1 gives f0 == f1");
  DistributionPair pair;
  pair.family_ = Family::Bernoulli;
  pair.table_p0_ = {1.0 - p0, p0};
  pair.table_p1_ = {1.0 - p1, p1};
  return pair;
}

DistributionPair DistributionPair::discrete_table(std::vector<double> p0, std::vector<double> p1) {
  if (p0.size() != p1.size())
    throw std::invalid_argument("discrete_table: p0 and p1 must have equal length");
  validate_probability_vector(p0, "discrete_table p0");
  validate_probability_vector(p1, "discrete_table p1");
  bool differs = false;
  for (std::size_t i = 0; i < p0.size(); ++i) {
    // Equal support keeps every LLR finite and C finite.
    if ((p0[i] == 0.0) != (p1[i] == 0.0))
      throw std::invalid_argument("discrete_table: f0 and f1 must have identical support");
    if (std::abs(p0[i] - p1[i]) > kTableSumTolerance) differs = true;
  }
  if (!differs) throw std::invalid_argument("discrete_table: f0 == f1 (zero total variation)");
  DistributionPair pair;
  pair.family_ = Family::DiscreteTable;
  pair.table_p0_ = std::move(p0);
  pair.table_p1_ = std::move(p1);
  return pair;
}

int DistributionPair::alphabet_size() const {
  if (!is_discrete()) throw std::logic_error("alphabet_size: continuous family");
  return static_cast<int>(table_p0_.size());
}

double DistributionPair::p0(int symbol) const {
  if (!is_discrete()) throw std::logic_error("p0: continuous family");
  return table_p0_.at(static_cast<std::size_t>(symbol));
}

double DistributionPair::p1(int symbol) const {
  if (!is_discrete()) throw std::logic_error("p1: continuous family");
  return table_p1_.at(static_cast<std::size_t>(symbol));
}

double DistributionPair::llr_at_symbol(int symbol) const {
  const double q0 = p0(symbol);
  const double q1 = p1(symbol);
  if (q0 == 0.0) throw std::domain_error("llr_at_symbol: symbol outside the support");
  return std::log(q1) - std::log(q0);
}

double DistributionPair::log_likelihood_ratio(double x) const {
  if (family_ == Family::GaussianMeanShift) {
    if (!std::isfinite(x)) throw std::domain_error("log_likelihood_ratio: non-finite observation");
    // log f1 - log f0 = mu (x - mu/2) / sigma^2
    return mu_ * (x - 0.5 * mu_) / (sigma_ * sigma_);
  }
  const double rounded = std::nearbyint(x);
  if (!std::isfinite(x) || rounded != x || x < 0.0 ||
      x >= static_cast<double>(table_p0_.size()))
    throw std::domain_error("log_likelihood_ratio: observation is not a symbol of the alphabet");
  const int symbol = static_cast<int>(rounded);
  if (table_p0_[static_cast<std::size_t>(symbol)] == 0.0)
    throw std::domain_error("log_likelihood_ratio: observation outside the support");
  return llr_at_symbol(symbol);
}

double DistributionPair::sample(bool post_change, RandomStream& rng) const {
  switch (family_) {
    case Family::GaussianMeanShift:
      return (post_change ? mu_ : 0.0) + sigma_ * rng.next_gaussian();
    case Family::Bernoulli:
      return rng.next_bernoulli(post_change ? table_p1_[1] : table_p0_[1]) ? 1.0 : 0.0;
    case Family::DiscreteTable: {
      const std::vector<double>& table = post_change ? table_p1_ : table_p0_;
      const double u = rng.next_double();
      double cum = 0.0;
      for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        cum += table[i];
        if (u < cum) return static_cast<double>(i);
      }
      return static_cast<double>(table.size() - 1);
    }
  }
  throw std::logic_error("sample: unreachable");
}

double DistributionPair::cumulant_gen_fn(double theta) const {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::domain_error("cumulant_gen_fn: theta must lie in [0, 1]");
  if (family_ == Family::GaussianMeanShift)
    return mu_ * mu_ * theta * (theta - 1.0) / (2.0 * sigma_ * sigma_);
  // log sum_x p1^(1-theta) p0^theta over the common support; exact finite sum.
  double sum = 0.0;
  for (std::size_t i = 0; i < table_p0_.size(); ++i) {
    if (table_p1_[i] == 0.0) continue;
    sum += std::exp((1.0 - theta) * std::log(table_p1_[i]) + theta * std::log(table_p0_[i]));
  }
  const double value = std::log(sum);
  if (!std::isfinite(value)) throw std::domain_error("cumulant_gen_fn: non-finite result");
  return value;
}

double DistributionPair::channel_constant() const {
  double value;
  if (family_ == Family::GaussianMeanShift) {
    value = mu_ * mu_ / (sigma_ * sigma_);
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < table_p1_.size(); ++i) {
      if (table_p1_[i] == 0.0) continue;
      sum += table_p1_[i] * table_p1_[i] / table_p0_[i];
    }
    value = std::log(sum);
  }
  if (!std::isfinite(value)) throw std::domain_error("channel_constant: divergent expectation");
  return value;
}

double DistributionPair::kl_divergence() const {
  double value;
  if (family_ == Family::GaussianMeanShift) {
    value = mu_ * mu_ / (2.0 * sigma_ * sigma_);
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < table_p1_.size(); ++i) {
      if (table_p1_[i] == 0.0) continue;
      sum += table_p1_[i] * (std::log(table_p1_[i]) - std::log(table_p0_[i]));
    }
    value = sum;
  }
  if (!std::isfinite(value)) throw std::domain_error("kl_divergence: divergent expectation");
  return value;
}

std::string DistributionPair::describe() const {
  std::ostringstream out;
  switch (family_) {
    case Family::GaussianMeanShift:
      out << "gaussian(mu=" << mu_ << ",sigma=" << sigma_ << ")";
      break;
    case Family::Bernoulli:
      out << "bernoulli(p0=" << table_p0_[1] << ",p1=" << table_p1_[1] << ")";
      break;
    case Family::DiscreteTable: {
      out << "table(k=" << table_p0_.size() << ")";
      break;
    }
  }
  return out.str();
}

ChangePoint ChangePoint::at(std::int64_t nu) {
  if (nu < 1) throw std::invalid_argument("ChangePoint::at: nu must be >= 1");
  return ChangePoint{nu};
}

std::int64_t ChangePoint::index() const {
  if (!nu_) throw std::logic_error("ChangePoint::index: change point is at infinity");
  return *nu_;
}

std::string ChangePoint::describe() const { return nu_ ? std::to_string(*nu_) : "inf"; }

std::vector<double> sample_trajectory(const TrajectorySpec& spec, RandomStream& rng) {
  if (spec.horizon < 1) throw std::invalid_argument("sample_trajectory: horizon must be >= 1");
  if (spec.change_point.is_finite() && spec.change_point.index() > spec.horizon)
    throw std::invalid_argument("sample_trajectory: change point exceeds the horizon");
  std::vector<double> obs(static_cast<std::size_t>(spec.horizon));
  for (std::int64_t i = 1; i <= spec.horizon; ++i)
    obs[static_cast<std::size_t>(i - 1)] = spec.pair.sample(spec.change_point.post_change(i), rng);
  return obs;
}

}  // namespace qcd
