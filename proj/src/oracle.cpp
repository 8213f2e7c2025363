#include "qcd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qcd {
namespace {

constexpr std::int64_t kMaxDpHorizon = 100000;
constexpr std::int64_t kMaxEnumerationHorizon = 20;
constexpr double kMaxEnumerationPaths = 4.0e6;
constexpr std::int64_t kMaxStateCount = 4000000;

// Best rational approximation num/den of value with den <= max_denominator,
// by continued fractions. Fails when no convergent lands within tolerance.
bool rationalize(double value, double tolerance, long max_denominator, long& num, long& den) {
  double x = value;
  long h_prev = 1, h = static_cast<long>(std::floor(x));
  long k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(value - static_cast<double>(h) / static_cast<double>(k)) <= tolerance) {
      num = h;
      den = k;
      return true;
    }
    if (frac < 1e-15) break;
    x = 1.0 / frac;
    const double a_floor = std::floor(x);
    // k_next = a k + k_prev exceeds the cap whenever a alone does (k >= 1),
    // so this also keeps the products far from overflow.
    if (a_floor > static_cast<double>(max_denominator)) break;
    const long a = static_cast<long>(a_floor);
    frac = x - a_floor;
    const long h_next = a * h + h_prev;
    const long k_next = a * k + k_prev;
    if (k_next > max_denominator) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  if (std::abs(value - static_cast<double>(h) / static_cast<double>(k)) <= tolerance) {
    num = h;
    den = k;
    return true;
  }
  return false;
}

long gcd_long(long a, long b) { return std::gcd(a, b); }

struct Symbol {
  double prob_pre = 0.0;   // under f0
  double prob_post = 0.0;  // under f1
  int step = 0;            // LLR = step * gap
};

// Absorbing DP over the LLR lattice. States are integer multiples of the gap;
// every nonpositive value transitions like 0 (the max-with-zero restart), so
// the reachable index range is [min_step, stop_index - 1].
class LatticeDp {
 public:
  LatticeDp(const DistributionPair& pair, const ThresholdPolicy& policy, const LlrLattice& lattice,
            std::int64_t horizon)
      : horizon_(horizon), min_step_(lattice.min_step) {
    const int alphabet = pair.alphabet_size();
    symbols_.reserve(static_cast<std::size_t>(alphabet));
    for (int s = 0; s < alphabet; ++s) {
      if (pair.p0(s) == 0.0) continue;  // outside the common support
      symbols_.push_back({pair.p0(s), pair.p1(s), lattice.step[static_cast<std::size_t>(s)]});
    }

    stop_index_.resize(static_cast<std::size_t>(horizon) + 1);
    std::int64_t max_stop = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t n = 1; n <= horizon; ++n) {
      stop_index_[static_cast<std::size_t>(n)] = smallest_crossing_index(
          policy.threshold_at(n), lattice.gap);
      max_stop = std::max(max_stop, stop_index_[static_cast<std::size_t>(n)]);
    }

    // Reachability caps the live range independently of the threshold.
    const std::int64_t reach_cap =
        static_cast<std::int64_t>(lattice.max_step) * std::max<std::int64_t>(horizon, 1);
    hi_cap_ = std::max<std::int64_t>(0, std::min(max_stop - 1, reach_cap));
    offset_ = -min_step_;
    size_ = hi_cap_ - min_step_ + 1;
    if (size_ > kMaxStateCount)
      throw UnsupportedInstanceError("exact DP state space too large for this instance");
  }

  std::vector<long double> initial_mass() const {
    std::vector<long double> mass(static_cast<std::size_t>(size_), 0.0L);
    mass[static_cast<std::size_t>(offset_)] = 1.0L;  // W_0 = 0
    return mass;
  }

  // One transition, absorbing states at or above the step-n threshold.
  // Returns the absorbed (stopped) mass. `hi` is the caller's occupied upper
  // index, updated in place.
  long double advance(std::vector<long double>& mass, std::vector<long double>& scratch,
                      std::int64_t n, bool post_change, std::int64_t& hi) const {
    const std::int64_t kstop = stop_index_[static_cast<std::size_t>(n)];
    std::fill(scratch.begin(), scratch.end(), 0.0L);
    long double absorbed = 0.0L;
    std::int64_t new_hi = min_step_ - 1;
    for (std::int64_t idx = min_step_; idx <= hi; ++idx) {
      const long double m = mass[static_cast<std::size_t>(idx + offset_)];
      if (m == 0.0L) continue;
      const std::int64_t base = idx > 0 ? idx : 0;
      for (const Symbol& sym : symbols_) {
        const double p = post_change ? sym.prob_post : sym.prob_pre;
        if (p == 0.0) continue;
        const std::int64_t next = base + sym.step;
        const long double add = m * static_cast<long double>(p);
        if (next >= kstop) {
          absorbed += add;
        } else {
          scratch[static_cast<std::size_t>(next + offset_)] += add;
          new_hi = std::max(new_hi, next);
        }
      }
    }
    mass.swap(scratch);
    hi = std::min(new_hi, hi_cap_);
    return absorbed;
  }

  std::int64_t min_index() const { return min_step_; }
  std::int64_t size() const { return size_; }

 private:
  // Smallest integer k with k * gap >= threshold, robust to rounding.
  static std::int64_t smallest_crossing_index(double threshold, double gap) {
    auto k = static_cast<std::int64_t>(std::ceil(threshold / gap));
    while (static_cast<double>(k - 1) * gap >= threshold) --k;
    while (static_cast<double>(k) * gap < threshold) ++k;
    return k;
  }

  std::int64_t horizon_;
  int min_step_;
  std::vector<Symbol> symbols_;
  std::vector<std::int64_t> stop_index_;  // indexed by n
  std::int64_t hi_cap_ = 0;
  std::int64_t offset_ = 0;
  std::int64_t size_ = 0;
};

void validate_oracle_instance(const DistributionPair& pair, std::int64_t horizon, ChangePoint nu) {
  if (!pair.is_discrete())
    throw UnsupportedInstanceError("exact analysis supports discrete pairs only");
  if (horizon < 1) throw std::invalid_argument("oracle: horizon must be >= 1");
  if (nu.is_finite() && nu.index() > horizon)
    throw std::invalid_argument("oracle: finite change point must satisfy nu <= horizon");
}

OraclePmf run_lattice_dp(const DistributionPair& pair, const ThresholdPolicy& policy,
                         const LlrLattice& lattice, std::int64_t horizon, ChangePoint nu) {
  LatticeDp dp(pair, policy, lattice, horizon);
  std::vector<long double> mass = dp.initial_mass();
  std::vector<long double> scratch(mass.size(), 0.0L);
  std::int64_t hi = 0;

  OraclePmf pmf;
  pmf.horizon = horizon;
  pmf.p_stop.resize(static_cast<std::size_t>(horizon));
  for (std::int64_t n = 1; n <= horizon; ++n) {
    const long double absorbed = dp.advance(mass, scratch, n, nu.post_change(n), hi);
    pmf.p_stop[static_cast<std::size_t>(n - 1)] = static_cast<double>(absorbed);
  }
  const long double censored = std::accumulate(mass.begin(), mass.end(), 0.0L);
  pmf.p_censored = static_cast<double>(censored);
  return pmf;
}

}  // namespace

double OraclePmf::prob_stop_by(std::int64_t t) const {
  if (t < 0 || t > horizon) throw std::invalid_argument("prob_stop_by: t out of range");
  double sum = 0.0;
  for (std::int64_t n = 1; n <= t; ++n) sum += p_stop[static_cast<std::size_t>(n - 1)];
  return sum;
}

std::vector<double> OraclePmf::cumulative() const {
  std::vector<double> cdf(p_stop.size());
  double run = 0.0;
  for (std::size_t i = 0; i < p_stop.size(); ++i) {
    run += p_stop[i];
    cdf[i] = run;
  }
  return cdf;
}

double OraclePmf::total_mass() const {
  return std::accumulate(p_stop.begin(), p_stop.end(), 0.0) + p_censored;
}

std::optional<LlrLattice> detect_llr_lattice(const DistributionPair& pair, double tolerance,
                                             long max_denominator) {
  if (!pair.is_discrete()) return std::nullopt;
  const int alphabet = pair.alphabet_size();
  std::vector<double> llrs(static_cast<std::size_t>(alphabet), 0.0);
  double base = 0.0;
  for (int s = 0; s < alphabet; ++s) {
    if (pair.p0(s) == 0.0) continue;
    llrs[static_cast<std::size_t>(s)] = pair.llr_at_symbol(s);
    const double mag = std::abs(llrs[static_cast<std::size_t>(s)]);
    if (mag > 0.0 && (base == 0.0 || mag < base)) base = mag;
  }
  if (base == 0.0) return std::nullopt;

  long lcm = 1;
  for (int s = 0; s < alphabet; ++s) {
    const double v = llrs[static_cast<std::size_t>(s)];
    if (v == 0.0) continue;
    long num = 0, den = 1;
    if (!rationalize(v / base, tolerance / base, max_denominator, num, den)) return std::nullopt;
    const long g = gcd_long(std::abs(num), den);
    den /= g;
    lcm = lcm / gcd_long(lcm, den) * den;
    if (lcm > max_denominator) return std::nullopt;
  }

  LlrLattice lattice;
  lattice.gap = base / static_cast<double>(lcm);
  lattice.step.resize(static_cast<std::size_t>(alphabet), 0);
  lattice.min_step = 0;
  lattice.max_step = 0;
  for (int s = 0; s < alphabet; ++s) {
    const double v = llrs[static_cast<std::size_t>(s)];
    if (v == 0.0) continue;
    const auto m = static_cast<long long>(std::llround(v / lattice.gap));
    if (std::abs(v - static_cast<double>(m) * lattice.gap) > tolerance * std::max(1.0, std::abs(v)))
      return std::nullopt;
    if (m > std::numeric_limits<int>::max() || m < std::numeric_limits<int>::min())
      return std::nullopt;
    lattice.step[static_cast<std::size_t>(s)] = static_cast<int>(m);
    lattice.min_step = std::min(lattice.min_step, static_cast<int>(m));
    lattice.max_step = std::max(lattice.max_step, static_cast<int>(m));
  }
  if (lattice.min_step == 0 && lattice.max_step == 0) return std::nullopt;
  return lattice;
}

OraclePmf exact_stopping_distribution(const DistributionPair& pair, const ThresholdPolicy& policy,
                                      std::int64_t horizon, ChangePoint nu) {
  validate_oracle_instance(pair, horizon, nu);
  const std::optional<LlrLattice> lattice = detect_llr_lattice(pair);
  if (lattice) {
    if (horizon > kMaxDpHorizon)
      throw UnsupportedInstanceError("lattice DP supports horizons up to 1e5");
    return run_lattice_dp(pair, policy, *lattice, horizon, nu);
  }
  return exact_stopping_distribution_enumeration(pair, policy, horizon, nu);
}

OraclePmf exact_stopping_distribution_enumeration(const DistributionPair& pair,
                                                  const ThresholdPolicy& policy,
                                                  std::int64_t horizon, ChangePoint nu) {
  validate_oracle_instance(pair, horizon, nu);
  const int alphabet = pair.alphabet_size();
  if (horizon > kMaxEnumerationHorizon ||
      std::pow(static_cast<double>(alphabet), static_cast<double>(horizon)) >
          kMaxEnumerationPaths)
    throw UnsupportedInstanceError(
        "non-lattice instance: full enumeration supports alphabet^horizon up to ~4e6 paths "
        "(horizon <= 20)");

  std::vector<double> llrs(static_cast<std::size_t>(alphabet), 0.0);
  for (int s = 0; s < alphabet; ++s)
    if (pair.p0(s) > 0.0) llrs[static_cast<std::size_t>(s)] = pair.llr_at_symbol(s);

  OraclePmf pmf;
  pmf.horizon = horizon;
  pmf.p_stop.assign(static_cast<std::size_t>(horizon), 0.0);
  long double censored = 0.0L;
  std::vector<long double> stopped(static_cast<std::size_t>(horizon), 0.0L);

  // Depth-first over full observation paths, pruned at stopping.
  auto walk = [&](auto&& self, std::int64_t n, double w, long double prob) -> void {
    if (n > horizon) {
      censored += prob;
      return;
    }
    const bool post = nu.post_change(n);
    const double beta = policy.threshold_at(n);
    for (int s = 0; s < alphabet; ++s) {
      const double p = post ? pair.p1(s) : pair.p0(s);
      if (p == 0.0) continue;
      const double w_next = std::max(w, 0.0) + llrs[static_cast<std::size_t>(s)];
      const long double mass = prob * static_cast<long double>(p);
      if (w_next >= beta)
        stopped[static_cast<std::size_t>(n - 1)] += mass;
      else
        self(self, n + 1, w_next, mass);
    }
  };
  walk(walk, 1, 0.0, 1.0L);

  for (std::int64_t n = 1; n <= horizon; ++n)
    pmf.p_stop[static_cast<std::size_t>(n - 1)] =
        static_cast<double>(stopped[static_cast<std::size_t>(n - 1)]);
  pmf.p_censored = static_cast<double>(censored);
  return pmf;
}

double exact_false_alarm(const DistributionPair& pair, const ThresholdPolicy& policy,
                         std::int64_t horizon) {
  const OraclePmf pmf = exact_stopping_distribution(pair, policy, horizon, ChangePoint::never());
  return 1.0 - pmf.p_censored;
}

LatencyResult exact_high_prob_latency(const DistributionPair& pair, const ThresholdPolicy& policy,
                                      std::int64_t horizon, double delta_d,
                                      bool verify_with_linear_scan) {
  validate_oracle_instance(pair, horizon, ChangePoint::never());
  if (horizon < 2) throw std::invalid_argument("exact_high_prob_latency: horizon must be >= 2");
  if (!(delta_d > 0.0 && delta_d <= 1.0))
    throw std::invalid_argument("exact_high_prob_latency: delta_d must lie in (0, 1]");
  const std::optional<LlrLattice> lattice = detect_llr_lattice(pair);
  if (!lattice)
    throw UnsupportedInstanceError("exact_high_prob_latency requires lattice LLRs");
  if (horizon > kMaxDpHorizon)
    throw UnsupportedInstanceError("lattice DP supports horizons up to 1e5");

  LatticeDp dp(pair, policy, *lattice, horizon);

  // Pre-change pass: the state distribution after n f0-steps is shared by
  // every change point nu = n + 1.
  struct Checkpoint {
    std::vector<long double> mass;
    std::int64_t hi = 0;
  };
  std::vector<Checkpoint> at_step(static_cast<std::size_t>(horizon));
  {
    std::vector<long double> mass = dp.initial_mass();
    std::vector<long double> scratch(mass.size(), 0.0L);
    std::int64_t hi = 0;
    at_step[0] = {mass, hi};
    for (std::int64_t n = 1; n <= horizon - 1; ++n) {
      dp.advance(mass, scratch, n, false, hi);
      at_step[static_cast<std::size_t>(n)] = {mass, hi};
    }
  }

  std::vector<long double> work(static_cast<std::size_t>(dp.size()), 0.0L);
  std::vector<long double> scratch(work.size(), 0.0L);

  // Pr_nu(tau >= nu + d) <= delta_d for this single nu? The DP carries
  // rounding at the 1e-18 scale per step; the comparison gets the same 1e-12
  // slack the pmf mass tolerance allows, so a budget of exactly 1 is vacuous.
  const long double budget = static_cast<long double>(delta_d) + 1e-12L;
  const auto window_ok = [&](std::int64_t nu, std::int64_t d) {
    const Checkpoint& cp = at_step[static_cast<std::size_t>(nu - 1)];
    work = cp.mass;
    std::int64_t hi = cp.hi;
    long double surviving = std::accumulate(work.begin(), work.end(), 0.0L);
    if (surviving <= budget) return true;
    for (std::int64_t t = nu; t <= nu + d - 1; ++t) {
      surviving -= dp.advance(work, scratch, t, true, hi);
      if (surviving <= budget) return true;
    }
    return false;
  };

  const auto feasible_d = [&](std::int64_t d) {
    for (std::int64_t nu = horizon - d; nu >= 1; --nu)  // worst nu tends to be the largest
      if (!window_ok(nu, d)) return false;
    return true;
  };

  LatencyResult result;
  if (!feasible_d(horizon - 1)) return result;  // infeasible
  std::int64_t lo = 1, hi = horizon - 1;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (feasible_d(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  result.feasible = true;
  result.d = lo;

  if (verify_with_linear_scan) {
    std::int64_t first = 0;
    for (std::int64_t d = 1; d <= horizon - 1; ++d) {
      if (feasible_d(d)) {
        first = d;
        break;
      }
    }
    if (first != result.d)
      throw std::logic_error("exact_high_prob_latency: binary search disagrees with linear scan");
  }
  return result;
}

WindowWitness window_bound_witness(const OraclePmf& pmf_inf, std::int64_t horizon, std::int64_t d,
                                   double delta_f) {
  if (horizon < 1 || horizon > pmf_inf.horizon)
    throw std::invalid_argument("window_bound_witness: need 1 <= horizon <= pmf horizon");
  if (d < 1 || d > horizon) throw std::invalid_argument("window_bound_witness: need 1 <= d <= T");
  if (!(delta_f > 0.0 && delta_f < 1.0))
    throw std::invalid_argument("window_bound_witness: delta_f must lie in (0, 1)");
  const std::vector<double> cdf = pmf_inf.cumulative();
  const auto cdf_at = [&](std::int64_t t) {
    if (t <= 0) return 0.0;
    return cdf[static_cast<std::size_t>(std::min(t, horizon) - 1)];
  };
  if (cdf_at(horizon) > delta_f)
    throw std::logic_error("window_bound_witness: Pr(tau <= T) exceeds delta_f");

  WindowWitness witness;
  witness.budget = delta_f / static_cast<double>(horizon / d);
  witness.mass = std::numeric_limits<double>::infinity();
  for (std::int64_t nu = 0; nu <= horizon - d; ++nu) {
    const double mass = cdf_at(nu + d - 1) - cdf_at(nu - 1);
    if (mass < witness.mass) {
      witness.mass = mass;
      witness.nu = nu;
    }
  }
  if (witness.mass > witness.budget)
    throw std::logic_error("window_bound_witness: no window fits the pigeonhole budget");
  return witness;
}

MartingaleReport martingale_checks(const DistributionPair& pair, std::int64_t n, double r,
                                   int m_max) {
  if (!pair.is_discrete())
    throw UnsupportedInstanceError("martingale_checks requires a discrete pair");
  if (n < 1) throw std::invalid_argument("martingale_checks: n must be >= 1");
  if (!(r > 1.0)) throw std::invalid_argument("martingale_checks: r must exceed 1");
  if (m_max < 0 || m_max > 30)
    throw std::invalid_argument("martingale_checks: m_max must lie in [0, 30]");

  MartingaleReport report;
  // The observations are i.i.d., so the product expectations factorize into
  // powers of the one-sample means.
  double e_inf = 0.0, e_post = 0.0;
  for (int s = 0; s < pair.alphabet_size(); ++s) {
    if (pair.p0(s) == 0.0) continue;
    const double lr = pair.p1(s) / pair.p0(s);
    e_inf += pair.p0(s) * lr;
    e_post += pair.p1(s) * lr;
  }
  report.e_inf_lr = e_inf;
  report.e_post_lr = e_post;

  report.super_means.resize(static_cast<std::size_t>(m_max) + 1);
  report.sub_means.resize(static_cast<std::size_t>(m_max) + 1);
  const double c = pair.channel_constant();
  report.super_nonincreasing = true;
  report.sub_nondecreasing = true;
  for (int m = 0; m <= m_max; ++m) {
    report.super_means[static_cast<std::size_t>(m)] =
        std::pow(static_cast<double>(n + m), -r) * std::pow(e_inf, m + 1);
    report.sub_means[static_cast<std::size_t>(m)] = std::pow(e_post, m);
    const double rel_err =
        std::abs(report.sub_means[static_cast<std::size_t>(m)] - std::exp(c * m)) /
        std::exp(c * m);
    report.max_sub_rel_err = std::max(report.max_sub_rel_err, rel_err);
    if (m > 0) {
      const double prev_super = report.super_means[static_cast<std::size_t>(m - 1)];
      const double prev_sub = report.sub_means[static_cast<std::size_t>(m - 1)];
      if (report.super_means[static_cast<std::size_t>(m)] > prev_super * (1.0 + 1e-12))
        report.super_nonincreasing = false;
      if (report.sub_means[static_cast<std::size_t>(m)] < prev_sub * (1.0 - 1e-12))
        report.sub_nondecreasing = false;
    }
  }
  return report;
}

}  // namespace qcd
