#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "qcd/bounds.hpp"
#include "qcd/oracle.hpp"

using namespace qcd;

namespace {
const DistributionPair kBern = DistributionPair::bernoulli(0.2, 0.8);
const ThresholdPolicy kTvt = ThresholdPolicy::time_varying(0.05, 2.0);
}  // namespace

TEST_CASE("lattice detection") {
  const auto lattice = detect_llr_lattice(kBern);
  REQUIRE(lattice.has_value());
  CHECK(lattice->gap == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(lattice->step[0] == -1);
  CHECK(lattice->step[1] == 1);

  // 3-symbol table with LLRs {-ln2, 0, ln2}.
  const auto table = DistributionPair::discrete_table({0.5, 0.25, 0.25}, {0.25, 0.25, 0.5});
  const auto table_lattice = detect_llr_lattice(table);
  REQUIRE(table_lattice.has_value());
  CHECK(table_lattice->gap == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(table_lattice->min_step == -1);
  CHECK(table_lattice->max_step == 1);

  // Asymmetric Bernoulli LLRs have an irrational ratio; no small lattice.
  CHECK_FALSE(detect_llr_lattice(DistributionPair::bernoulli(0.3, 0.6)).has_value());
  CHECK_FALSE(detect_llr_lattice(DistributionPair::gaussian_mean_shift(1.0)).has_value());
}

TEST_CASE("DP equals full enumeration") {
  const auto table = DistributionPair::discrete_table({0.5, 0.25, 0.25}, {0.25, 0.25, 0.5});
  const ChangePoint nus[] = {ChangePoint::never(), ChangePoint::at(1), ChangePoint::at(7)};
  for (const auto& nu : nus) {
    for (const auto* pair : {&kBern, &table}) {
      const std::int64_t horizon = 12;
      const OraclePmf dp = exact_stopping_distribution(*pair, kTvt, horizon, nu);
      const OraclePmf brute = exact_stopping_distribution_enumeration(*pair, kTvt, horizon, nu);
      for (std::int64_t n = 1; n <= horizon; ++n)
        CHECK(std::abs(dp.prob_stop_at(n) - brute.prob_stop_at(n)) <= 1e-12);
      CHECK(std::abs(dp.p_censored - brute.p_censored) <= 1e-12);
      CHECK(std::abs(dp.total_mass() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("single-step stopping probabilities") {
  // Fixed b = 0: stops at n = 1 iff the first LLR is nonnegative.
  const OraclePmf pmf =
      exact_stopping_distribution(kBern, ThresholdPolicy::fixed(0.0), 6, ChangePoint::never());
  CHECK(pmf.prob_stop_at(1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(pmf.prob_stop_at(2) == doctest::Approx(0.16).epsilon(1e-12));  // miss then hit

  // T = 1 against the time-varying threshold: ln 4 < beta(1), never stops.
  const OraclePmf one = exact_stopping_distribution(kBern, kTvt, 1, ChangePoint::never());
  CHECK(one.prob_stop_at(1) == 0.0);
  CHECK(exact_false_alarm(kBern, kTvt, 1) == 0.0);
}

TEST_CASE("non-lattice pairs fall back to enumeration with a horizon cap") {
  const auto skew = DistributionPair::bernoulli(0.05, 0.8);
  REQUIRE_FALSE(detect_llr_lattice(skew).has_value());
  const OraclePmf pmf = exact_stopping_distribution(skew, kTvt, 12, ChangePoint::at(1));
  CHECK(std::abs(pmf.total_mass() - 1.0) <= 1e-12);
  CHECK(pmf.prob_stop_by(12) > 0.9);  // strong shift: detected within 12 almost surely
  CHECK_THROWS_AS(exact_stopping_distribution(skew, kTvt, 200, ChangePoint::never()),
                  UnsupportedInstanceError);
}

TEST_CASE("unsupported instances") {
  const auto gauss = DistributionPair::gaussian_mean_shift(1.0);
  CHECK_THROWS_AS(exact_stopping_distribution(gauss, kTvt, 10, ChangePoint::never()),
                  UnsupportedInstanceError);
  CHECK_THROWS_AS(exact_stopping_distribution(kBern, kTvt, 200000, ChangePoint::never()),
                  UnsupportedInstanceError);
  CHECK_THROWS_AS(exact_high_prob_latency(gauss, kTvt, 100, 0.05), UnsupportedInstanceError);
}

TEST_CASE("earlier change points detect stochastically earlier") {
  const std::int64_t horizon = 60;
  const auto cdf_at_1 =
      exact_stopping_distribution(kBern, kTvt, horizon, ChangePoint::at(1)).cumulative();
  const auto cdf_never =
      exact_stopping_distribution(kBern, kTvt, horizon, ChangePoint::never()).cumulative();
  bool strict_somewhere = false;
  for (std::size_t i = 0; i < cdf_at_1.size(); ++i) {
    CHECK(cdf_at_1[i] >= cdf_never[i] - 1e-15);
    strict_somewhere = strict_somewhere || cdf_at_1[i] > cdf_never[i] + 1e-6;
  }
  CHECK(strict_somewhere);
}

TEST_CASE("time-varying threshold keeps the false alarm under budget") {
  for (const double delta_f : {0.05, 0.2}) {
    for (const double r : {1.5, 2.0}) {
      const auto policy = ThresholdPolicy::time_varying(delta_f, r);
      CHECK(exact_false_alarm(kBern, policy, 500) <= delta_f);
    }
  }
}

TEST_CASE("fixed thresholds lose false-alarm control as T grows") {
  const auto fixed = ThresholdPolicy::fixed(5.0);
  const double fa_100 = exact_false_alarm(kBern, fixed, 100);
  const double fa_1000 = exact_false_alarm(kBern, fixed, 1000);
  CHECK(fa_100 < fa_1000);
}

TEST_CASE("false alarm for a prefix equals the run at the shorter horizon") {
  // beta does not depend on the horizon, so the pmf of a longer run restricts.
  const OraclePmf long_run = exact_stopping_distribution(kBern, kTvt, 600, ChangePoint::never());
  const OraclePmf short_run = exact_stopping_distribution(kBern, kTvt, 317, ChangePoint::never());
  CHECK(long_run.prob_stop_by(317) == doctest::Approx(1.0 - short_run.p_censored).epsilon(1e-13));
}

TEST_CASE("exact high-probability latency") {
  SUBCASE("delta_d = 1 is satisfied by d = 1") {
    const auto result = exact_high_prob_latency(kBern, kTvt, 50, 1.0);
    CHECK(result.feasible);
    CHECK(result.d == 1);
  }

  SUBCASE("binary search agrees with the linear scan") {
    const auto result = exact_high_prob_latency(kBern, kTvt, 120, 0.05, true);
    CHECK(result.feasible);
    CHECK(result.d > 1);
  }

  SUBCASE("nondecreasing in T and below the Chernoff bound") {
    const auto d_500 = exact_high_prob_latency(kBern, kTvt, 500, 0.05);
    const auto d_1000 = exact_high_prob_latency(kBern, kTvt, 1000, 0.05);
    REQUIRE(d_500.feasible);
    REQUIRE(d_1000.feasible);
    CHECK(d_1000.d >= d_500.d);
    const double d_bar = latency_upper_bound(kBern, 500, 0.05, 0.05, 2.0).d_bar;
    CHECK(d_500.d <= static_cast<std::int64_t>(std::ceil(d_bar)));
  }
}

TEST_CASE("window bound witness") {
  const std::int64_t horizon = 200;
  const OraclePmf pmf = exact_stopping_distribution(kBern, kTvt, horizon, ChangePoint::never());

  SUBCASE("spec window") {
    const WindowWitness witness = window_bound_witness(pmf, horizon, 20, 0.05);
    CHECK(witness.budget == doctest::Approx(0.005));
    CHECK(witness.mass <= witness.budget);
    CHECK(witness.nu >= 0);
    CHECK(witness.nu <= horizon - 20);
  }

  SUBCASE("single window d = T") {
    const WindowWitness witness = window_bound_witness(pmf, horizon, horizon, 0.05);
    CHECK(witness.nu == 0);
    CHECK(witness.mass <= 0.05);
  }

  SUBCASE("a never-stopping pmf gives a zero-mass window") {
    const OraclePmf quiet = exact_stopping_distribution(kBern, ThresholdPolicy::fixed(1e12),
                                                        100, ChangePoint::never());
    const WindowWitness witness = window_bound_witness(quiet, 100, 10, 0.05);
    CHECK(witness.nu == 0);
    CHECK(witness.mass == 0.0);
  }

  SUBCASE("violated false-alarm precondition is rejected") {
    const OraclePmf noisy = exact_stopping_distribution(kBern, ThresholdPolicy::fixed(0.0), 100,
                                                        ChangePoint::never());
    CHECK_THROWS_AS(window_bound_witness(noisy, 100, 10, 0.05), std::logic_error);
  }
}

TEST_CASE("martingale mean sequences") {
  const MartingaleReport report = martingale_checks(kBern, 1, 2.0, 5);
  CHECK(report.e_inf_lr == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.e_post_lr == doctest::Approx(3.25).epsilon(1e-12));
  CHECK(report.super_nonincreasing);
  CHECK(report.sub_nondecreasing);
  CHECK(report.max_sub_rel_err < 1e-9);
  for (int m = 0; m <= 5; ++m) {
    CHECK(report.super_means[static_cast<std::size_t>(m)] ==
          doctest::Approx(std::pow(1.0 + m, -2.0)).epsilon(1e-12));
    CHECK(report.sub_means[static_cast<std::size_t>(m)] ==
          doctest::Approx(std::pow(3.25, m)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(martingale_checks(kBern, 1, 2.0, 31), std::invalid_argument);
  CHECK_THROWS_AS(martingale_checks(DistributionPair::gaussian_mean_shift(1.0), 1, 2.0, 5),
                  UnsupportedInstanceError);
}
