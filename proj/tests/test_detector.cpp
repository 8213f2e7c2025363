#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qcd/bounds.hpp"
#include "qcd/detector.hpp"
#include "qcd/dist.hpp"
#include "qcd/rng.hpp"

using namespace qcd;

TEST_CASE("cusum_update follows the recursion") {
  DetectorState state;
  state = cusum_update(state, 1.5);
  CHECK(state.w == doctest::Approx(1.5));
  CHECK(state.n == 1);

  DetectorState negative{-2.0, 3, 0};
  CHECK(cusum_update(negative, 1.0).w == doctest::Approx(1.0));

  DetectorState positive{3.0, 3, 0};
  CHECK(cusum_update(positive, -0.5).w == doctest::Approx(2.5));

  DetectorState stopped{3.0, 3, 3};
  CHECK_THROWS_AS(cusum_update(stopped, 0.1), std::logic_error);
}

TEST_CASE("cusum_statistic_batch enumerates suffixes") {
  CHECK(cusum_statistic_batch(std::vector<double>{1.0}) == doctest::Approx(1.0));
  CHECK(cusum_statistic_batch(std::vector<double>{-1.0, 2.0}) == doctest::Approx(2.0));
  CHECK(cusum_statistic_batch(std::vector<double>{2.0, -3.0, 1.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cusum_statistic_batch(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("recursion equals the batch definition on random sequences") {
  RandomStream rng(31415, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int length = 1 + static_cast<int>(rng.next_double() * 200);
    std::vector<double> llrs(static_cast<std::size_t>(length));
    for (double& v : llrs) v = 4.0 * rng.next_double() - 2.0;

    DetectorState state;
    // Second route through the definition: W_n = S_n - min_{j < n} S_j with
    // prefix sums S. Checked at every n; the literal quadratic suffix-sum
    // oracle is checked at short prefixes and the endpoint (it is O(n^3) per
    // sequence when applied everywhere).
    double prefix = 0.0;
    double min_prefix = 0.0;
    for (int n = 1; n <= length; ++n) {
      state = cusum_update(state, llrs[static_cast<std::size_t>(n - 1)]);
      CHECK(state.w >= llrs[static_cast<std::size_t>(n - 1)]);  // max-with-zero floor
      prefix += llrs[static_cast<std::size_t>(n - 1)];
      CHECK(state.w == doctest::Approx(prefix - min_prefix).epsilon(1e-9));
      min_prefix = std::min(min_prefix, prefix);
      if (n <= 25 || n == length) {
        const double batch = cusum_statistic_batch(
            std::span<const double>(llrs.data(), static_cast<std::size_t>(n)));
        CHECK(state.w == doctest::Approx(batch).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("threshold policies") {
  const auto tvt = ThresholdPolicy::time_varying(0.05, 2.0);
  const double log_zeta2 = std::log(1.6449340668482264);
  CHECK(tvt.threshold_at(1) == doctest::Approx(log_zeta2 - std::log(0.05)).epsilon(1e-10));
  CHECK(tvt.threshold_at(1) == doctest::Approx(3.4935).epsilon(1e-4));
  CHECK(tvt.threshold_at(100) == doctest::Approx(12.7038).epsilon(1e-4));
  CHECK(tvt.log_zeta_r() == doctest::Approx(std::log(zeta(2.0))).epsilon(1e-10));

  const auto fixed = ThresholdPolicy::fixed(5.0);
  CHECK(fixed.threshold_at(1) == doctest::Approx(5.0));
  CHECK(fixed.threshold_at(99) == doctest::Approx(5.0));

  CHECK_THROWS_AS(tvt.threshold_at(0), std::invalid_argument);
  CHECK_THROWS_AS(ThresholdPolicy::time_varying(0.05, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ThresholdPolicy::time_varying(1.5, 2.0), std::invalid_argument);
}

TEST_CASE("run_detector stopping behaviour") {
  const auto bern = DistributionPair::bernoulli(0.2, 0.8);

  SUBCASE("threshold zero stops on the first positive LLR") {
    const std::vector<double> obs{1.0, 1.0};
    const auto outcome = run_detector(bern, ThresholdPolicy::fixed(0.0), obs);
    CHECK(outcome.stopped());
    CHECK(outcome.stop_time() == 1);
  }

  SUBCASE("unreachable threshold censors") {
    std::vector<double> obs(50, 1.0);
    const auto outcome = run_detector(bern, ThresholdPolicy::fixed(1e12), obs);
    CHECK_FALSE(outcome.stopped());
    CHECK(outcome.horizon() == 50);
  }

  SUBCASE("all-ones stream against the time-varying threshold stops at 5") {
    std::vector<double> obs(10, 1.0);
    const auto outcome = run_detector(bern, ThresholdPolicy::time_varying(0.05, 2.0), obs);
    CHECK(outcome.stopped());
    CHECK(outcome.stop_time() == 5);
  }

  SUBCASE("never reads past the stopping time") {
    std::int64_t reads = 0;
    const auto outcome = run_detector(
        bern, ThresholdPolicy::fixed(0.0),
        [&]() {
          ++reads;
          return 1.0;
        },
        100);
    CHECK(outcome.stop_time() == 1);
    CHECK(reads == 1);
  }
}

TEST_CASE("stopping time is monotone in the threshold") {
  const auto bern = DistributionPair::bernoulli(0.2, 0.8);
  RandomStream rng(271828, 1);
  for (int trial = 0; trial < 200; ++trial) {
    TrajectorySpec spec{bern, ChangePoint::at(1 + trial % 40), 160};
    RandomStream sample_rng(99, static_cast<std::uint64_t>(trial));
    const auto obs = sample_trajectory(spec, sample_rng);

    const auto stop_time_of = [&](const ThresholdPolicy& policy) {
      const auto outcome = run_detector(bern, policy, std::span<const double>(obs));
      return outcome.stopped() ? outcome.stop_time() : spec.horizon + 1;
    };

    const double b1 = 4.0 * rng.next_double();
    const double b2 = b1 + 2.0 * rng.next_double();
    CHECK(stop_time_of(ThresholdPolicy::fixed(b1)) <= stop_time_of(ThresholdPolicy::fixed(b2)));

    // Lowering delta_f raises the time-varying threshold everywhere.
    CHECK(stop_time_of(ThresholdPolicy::time_varying(0.1, 2.0)) <=
          stop_time_of(ThresholdPolicy::time_varying(0.01, 2.0)));
  }
}
