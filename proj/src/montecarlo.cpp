#include "qcd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qcd {
namespace {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Trial i of a given context draws from stream (master_seed, context << 32 | i):
// distinct contexts (e.g. different change points in one sweep) get disjoint
// streams under the same master seed.
std::uint64_t stream_id(std::uint64_t context, std::int64_t trial) {
  return (context << 32) | static_cast<std::uint64_t>(trial);
}

StoppingOutcome run_one(const DistributionPair& pair, const ThresholdPolicy& policy,
                        ChangePoint nu, std::int64_t horizon, std::uint64_t master_seed,
                        std::uint64_t context, std::int64_t trial) {
  RandomStream rng(master_seed, stream_id(context, trial));
  std::int64_t i = 0;
  return run_detector(
      pair, policy,
      [&]() {
        ++i;
        return pair.sample(nu.post_change(i), rng);
      },
      horizon);
}

// Runs trials [0, N) across workers; per-trial bins are merged by addition,
// so the result does not depend on the schedule. bin_fn must be pure given
// the trial index.
template <class BinFn>
std::vector<std::int64_t> parallel_binned(std::int64_t trials, int workers, std::int64_t bins,
                                          BinFn&& bin_fn) {
  workers = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(workers, trials)));
  std::vector<std::vector<std::int64_t>> local(
      static_cast<std::size_t>(workers),
      std::vector<std::int64_t>(static_cast<std::size_t>(bins), 0));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = trials * w / workers;
    const std::int64_t end = trials * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end]() {
      auto& mine = local[static_cast<std::size_t>(w)];
      for (std::int64_t i = begin; i < end; ++i)
        ++mine[static_cast<std::size_t>(bin_fn(i))];
    });
  }
  for (auto& t : pool) t.join();
  std::vector<std::int64_t> merged(static_cast<std::size_t>(bins), 0);
  for (const auto& part : local)
    for (std::int64_t b = 0; b < bins; ++b)
      merged[static_cast<std::size_t>(b)] += part[static_cast<std::size_t>(b)];
  return merged;
}

EstimationReport make_report(std::string instance, std::int64_t trials, std::int64_t successes,
                             std::uint64_t master_seed, const SimOptions& options) {
  EstimationReport report;
  report.instance = std::move(instance);
  report.trials = trials;
  report.successes = successes;
  report.point = static_cast<double>(successes) / static_cast<double>(trials);
  const BinomialInterval ci = clopper_pearson(successes, trials, options.confidence);
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  report.confidence = options.confidence;
  report.master_seed = master_seed;
  return report;
}

void validate_trials(std::int64_t trials, std::int64_t minimum) {
  if (trials < minimum)
    throw std::invalid_argument("montecarlo: need at least " + std::to_string(minimum) +
                                " trials");
  if (trials > (std::int64_t{1} << 32))
    throw std::invalid_argument("montecarlo: trial count exceeds the stream index space");
}

}  // namespace

std::vector<std::int64_t> default_nu_grid(std::int64_t horizon, std::int64_t d_cap) {
  std::vector<std::int64_t> grid = {1, horizon / 4, horizon / 2, 3 * horizon / 4,
                                    horizon - d_cap};
  for (auto& nu : grid) nu = std::clamp<std::int64_t>(nu, 1, horizon - 1);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

EstimationReport estimate_false_alarm(const DistributionPair& pair, const ThresholdPolicy& policy,
                                      std::int64_t horizon, std::int64_t trials,
                                      std::uint64_t master_seed, const SimOptions& options) {
  if (horizon < 1) throw std::invalid_argument("estimate_false_alarm: horizon must be >= 1");
  validate_trials(trials, 100);
  const int workers = resolve_workers(options.workers);
  const auto bins = parallel_binned(trials, workers, 2, [&](std::int64_t trial) {
    const StoppingOutcome outcome =
        run_one(pair, policy, ChangePoint::never(), horizon, master_seed, 0, trial);
    return outcome.stopped() ? 1 : 0;
  });
  std::ostringstream instance;
  instance << "false_alarm dist=" << pair.describe() << " policy=" << policy.describe()
           << " T=" << horizon;
  return make_report(instance.str(), trials, bins[1], master_seed, options);
}

EstimationReport estimate_miss(const DistributionPair& pair, const ThresholdPolicy& policy,
                               std::int64_t horizon, std::int64_t nu, std::int64_t d,
                               std::int64_t trials, std::uint64_t master_seed,
                               const SimOptions& options) {
  if (horizon < 1) throw std::invalid_argument("estimate_miss: horizon must be >= 1");
  if (nu < 1 || d < 1 || nu + d > horizon)
    throw std::invalid_argument("estimate_miss: need nu >= 1, d >= 1, nu + d <= T");
  validate_trials(trials, 100);
  const int workers = resolve_workers(options.workers);
  const ChangePoint change = ChangePoint::at(nu);
  // tau >= nu + d is decided by step nu + d - 1; the run is cut there.
  const std::int64_t cutoff = nu + d - 1;
  const auto bins = parallel_binned(trials, workers, 2, [&](std::int64_t trial) {
    const StoppingOutcome outcome = run_one(pair, policy, change, cutoff, master_seed,
                                            static_cast<std::uint64_t>(nu), trial);
    return outcome.stopped() ? 0 : 1;  // miss = still running at nu + d - 1
  });
  std::ostringstream instance;
  instance << "miss dist=" << pair.describe() << " policy=" << policy.describe()
           << " T=" << horizon << " nu=" << nu << " d=" << d;
  return make_report(instance.str(), trials, bins[1], master_seed, options);
}

LatencyEstimate empirical_latency(const DistributionPair& pair, const ThresholdPolicy& policy,
                                  std::int64_t horizon, double delta_d,
                                  const std::vector<std::int64_t>& nu_grid, std::int64_t trials,
                                  std::uint64_t master_seed, const SimOptions& options) {
  if (horizon < 2) throw std::invalid_argument("empirical_latency: horizon must be >= 2");
  if (!(delta_d > 0.0 && delta_d <= 1.0))
    throw std::invalid_argument("empirical_latency: delta_d must lie in (0, 1]");
  if (nu_grid.empty()) throw std::invalid_argument("empirical_latency: empty nu grid");
  for (const std::int64_t nu : nu_grid)
    if (nu < 1 || nu > horizon - 1)
      throw std::invalid_argument("empirical_latency: grid nu must lie in {1, .., T-1}");
  validate_trials(trials, 1000);
  const int workers = resolve_workers(options.workers);

  // survival[g][t-1] = number of trials at grid point g with tau >= t,
  // t = 1..T+1 (the T+1 slot counts censored runs only).
  const std::size_t grid_size = nu_grid.size();
  std::vector<std::vector<std::int64_t>> survival(grid_size);
  for (std::size_t g = 0; g < grid_size; ++g) {
    const std::int64_t nu = nu_grid[g];
    const ChangePoint change = ChangePoint::at(nu);
    // Bin by stopping time (bin tau-1), censored in the last bin.
    auto counts = parallel_binned(trials, workers, horizon + 1, [&](std::int64_t trial) {
      const StoppingOutcome outcome = run_one(pair, policy, change, horizon, master_seed,
                                              static_cast<std::uint64_t>(nu), trial);
      return outcome.stopped() ? outcome.stop_time() - 1 : horizon;
    });
    // Suffix sums: survival_from[t] = #{tau >= t}.
    std::vector<std::int64_t> surv(static_cast<std::size_t>(horizon) + 1, 0);
    std::int64_t running = 0;
    for (std::int64_t t = horizon + 1; t >= 1; --t) {
      running += counts[static_cast<std::size_t>(t - 1)];
      surv[static_cast<std::size_t>(t - 1)] = running;
    }
    survival[g] = std::move(surv);
  }

  const auto miss_count = [&](std::size_t g, std::int64_t d) {
    const std::int64_t t = nu_grid[g] + d;  // tau >= nu + d
    return survival[g][static_cast<std::size_t>(t - 1)];
  };
  const double threshold = delta_d * static_cast<double>(trials);

  // Smallest d whose every applicable grid constraint holds, under the given
  // per-count acceptance test; monotone in d.
  const auto smallest_feasible = [&](auto&& accept) -> std::int64_t {
    for (std::int64_t d = 1; d <= horizon - 1; ++d) {
      bool ok = true;
      for (std::size_t g = 0; g < grid_size; ++g) {
        if (nu_grid[g] > horizon - d) continue;
        if (!accept(miss_count(g, d), d)) {
          ok = false;
          break;
        }
      }
      if (ok) return d;
    }
    return 0;  // none
  };

  LatencyEstimate estimate;
  const std::int64_t d_hat = smallest_feasible(
      [&](std::int64_t k, std::int64_t) { return static_cast<double>(k) <= threshold; });
  if (d_hat == 0) return estimate;  // infeasible at this grid
  estimate.feasible = true;
  estimate.d_hat = d_hat;

  estimate.d_ci_low = smallest_feasible([&](std::int64_t k, std::int64_t) {
    return clopper_pearson(k, trials, options.confidence).low <= delta_d;
  });
  estimate.d_ci_high = smallest_feasible([&](std::int64_t k, std::int64_t) {
    return clopper_pearson(k, trials, options.confidence).high <= delta_d;
  });
  if (estimate.d_ci_high == 0) estimate.d_ci_high = horizon;  // upper bracket ran off the horizon

  for (std::size_t g = 0; g < grid_size; ++g) {
    NuLatencyReport nu_report;
    nu_report.nu = nu_grid[g];
    const std::int64_t d_eff = std::min(d_hat, horizon + 1 - nu_grid[g]);
    std::ostringstream instance;
    instance << "miss dist=" << pair.describe() << " policy=" << policy.describe()
             << " T=" << horizon << " nu=" << nu_grid[g] << " d=" << d_eff;
    nu_report.miss_at_d_hat =
        make_report(instance.str(), trials, miss_count(g, d_eff), master_seed, options);

    // Empirical delay quantiles: smallest d with #{tau - nu <= d} >= p N,
    // or T - nu + 1 when censoring prevents the level from being reached.
    const auto delay_quantile = [&](double p) -> std::int64_t {
      const auto needed = static_cast<std::int64_t>(
          std::ceil(p * static_cast<double>(trials)));
      for (std::int64_t d = 0; d <= horizon - nu_grid[g]; ++d) {
        if (trials - miss_count(g, d + 1) >= needed) return d;
      }
      return horizon - nu_grid[g] + 1;
    };
    nu_report.delay_q50 = delay_quantile(0.50);
    nu_report.delay_q90 = delay_quantile(0.90);
    nu_report.delay_q_target = delay_quantile(1.0 - delta_d);
    estimate.per_nu.push_back(std::move(nu_report));
  }
  return estimate;
}

}  // namespace qcd
