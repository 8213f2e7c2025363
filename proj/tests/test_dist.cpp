#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qcd/dist.hpp"
#include "support/gauss_hermite.hpp"

using qcd::ChangePoint;
using qcd::DistributionPair;
using qcd::RandomStream;
using qcd::TrajectorySpec;

namespace {

const double kLn4 = std::log(4.0);

std::vector<DistributionPair> reference_pairs() {
  return {
      DistributionPair::gaussian_mean_shift(1.0),
      DistributionPair::gaussian_mean_shift(-0.5, 2.0),
      DistributionPair::bernoulli(0.2, 0.8),
      DistributionPair::bernoulli(0.3, 0.6),
      DistributionPair::discrete_table({0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}),
  };
}

}  // namespace

TEST_CASE("log-likelihood ratio values") {
  const auto bern = DistributionPair::bernoulli(0.2, 0.8);
  CHECK(bern.log_likelihood_ratio(1.0) == doctest::Approx(kLn4).epsilon(1e-12));
  CHECK(bern.log_likelihood_ratio(0.0) == doctest::Approx(-kLn4).epsilon(1e-12));

  const auto gauss = DistributionPair::gaussian_mean_shift(1.0);
  CHECK(gauss.log_likelihood_ratio(0.5) == doctest::Approx(0.0));
  CHECK(gauss.log_likelihood_ratio(1.5) == doctest::Approx(1.0));

  CHECK_THROWS_AS(bern.log_likelihood_ratio(2.0), std::domain_error);
  CHECK_THROWS_AS(bern.log_likelihood_ratio(0.5), std::domain_error);
}

TEST_CASE("degenerate pairs are rejected at construction") {
  CHECK_THROWS_AS(DistributionPair::gaussian_mean_shift(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DistributionPair::bernoulli(0.4, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(DistributionPair::bernoulli(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(DistributionPair::discrete_table({0.5, 0.5}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DistributionPair::discrete_table({0.5, 0.5}, {0.5, 0.4}),
                  std::invalid_argument);
  // Support mismatch would make the LLR (or C) infinite.
  CHECK_THROWS_AS(DistributionPair::discrete_table({0.5, 0.5, 0.0}, {0.25, 0.25, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("cumulant generating function: closed forms and endpoints") {
  const auto gauss = DistributionPair::gaussian_mean_shift(1.0);
  CHECK(gauss.cumulant_gen_fn(0.5) == doctest::Approx(-0.125).epsilon(1e-12));
  const auto bern = DistributionPair::bernoulli(0.2, 0.8);
  CHECK(bern.cumulant_gen_fn(0.5) == doctest::Approx(std::log(0.8)).epsilon(1e-12));

  for (const auto& pair : reference_pairs()) {
    CHECK(std::abs(pair.cumulant_gen_fn(0.0)) < 1e-9);
    CHECK(std::abs(pair.cumulant_gen_fn(1.0)) < 1e-9);
  }
  CHECK_THROWS_AS(gauss.cumulant_gen_fn(1.5), std::domain_error);
}

TEST_CASE("cumulant generating function is midpoint-convex and negative inside") {
  for (const auto& pair : reference_pairs()) {
    constexpr int kGrid = 101;
    double values[kGrid];
    for (int i = 0; i < kGrid; ++i)
      values[i] = pair.cumulant_gen_fn(static_cast<double>(i) / (kGrid - 1));
    for (int i = 1; i < kGrid - 1; ++i) CHECK(values[i] < 0.0);
    // Midpoints of same-parity grid pairs land on the grid.
    for (int i = 0; i < kGrid; ++i)
      for (int j = i + 2; j < kGrid; j += 2)
        CHECK(values[(i + j) / 2] < 0.5 * (values[i] + values[j]));
  }
}

TEST_CASE("channel constant and KL divergence") {
  const auto gauss = DistributionPair::gaussian_mean_shift(1.0);
  CHECK(gauss.channel_constant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gauss.kl_divergence() == doctest::Approx(0.5).epsilon(1e-12));

  const auto bern = DistributionPair::bernoulli(0.2, 0.8);
  CHECK(bern.channel_constant() == doctest::Approx(std::log(3.25)).epsilon(1e-12));
  CHECK(bern.kl_divergence() == doctest::Approx(0.6 * kLn4).epsilon(1e-12));

  for (const auto& pair : reference_pairs()) {
    CHECK(pair.channel_constant() > 0.0);
    CHECK(pair.kl_divergence() >= 0.0);
    CHECK(pair.kl_divergence() <= pair.channel_constant() + 1e-12);
  }
}

TEST_CASE("kl <= C over random pairs") {
  RandomStream rng(2024, 0);
  for (int trial = 0; trial < 50; ++trial) {
    DistributionPair pair = [&]() {
      if (trial % 2 == 0) {
        double p0 = 0.05 + 0.9 * rng.next_double();
        double p1 = 0.05 + 0.9 * rng.next_double();
        if (p0 == p1) p1 = p0 < 0.5 ? p0 + 0.1 : p0 - 0.1;
        return DistributionPair::bernoulli(p0, p1);
      }
      std::vector<double> p0(4), p1(4);
      double s0 = 0.0, s1 = 0.0;
      for (int i = 0; i < 4; ++i) {
        p0[i] = 0.1 + rng.next_double();
        p1[i] = 0.1 + rng.next_double();
        s0 += p0[i];
        s1 += p1[i];
      }
      for (int i = 0; i < 4; ++i) {
        p0[i] /= s0;
        p1[i] /= s1;
      }
      return DistributionPair::discrete_table(p0, p1);
    }();
    CHECK(pair.kl_divergence() >= 0.0);
    CHECK(pair.kl_divergence() <= pair.channel_constant() + 1e-12);
  }
}

TEST_CASE("gaussian closed forms match the quadrature oracle") {
  for (const double mu : {1.0, -0.5, 2.0}) {
    for (const double sigma : {1.0, 1.7}) {
      const auto pair = DistributionPair::gaussian_mean_shift(mu, sigma);
      const auto llr = [&](double x) { return pair.log_likelihood_ratio(x); };
      for (const double theta : {0.1, 0.3, 0.5, 0.9}) {
        const double quad = std::log(qcd_test::gaussian_expectation(
            mu, sigma, [&](double x) { return std::exp(-theta * llr(x)); }));
        CHECK(pair.cumulant_gen_fn(theta) == doctest::Approx(quad).epsilon(1e-8));
      }
      const double c_quad = std::log(qcd_test::gaussian_expectation(
          mu, sigma, [&](double x) { return std::exp(llr(x)); }));
      CHECK(pair.channel_constant() == doctest::Approx(c_quad).epsilon(1e-8));
      const double kl_quad = qcd_test::gaussian_expectation(mu, sigma, llr);
      CHECK(pair.kl_divergence() == doctest::Approx(kl_quad).epsilon(1e-8));
    }
  }
}

TEST_CASE("trajectory sampling follows the change-point convention") {
  const auto bern = DistributionPair::bernoulli(0.2, 0.8);

  SUBCASE("same seed twice gives identical sequences") {
    RandomStream a(7, 3), b(7, 3);
    const TrajectorySpec spec{bern, ChangePoint::at(5), 64};
    CHECK(sample_trajectory(spec, a) == sample_trajectory(spec, b));
  }

  SUBCASE("nu = 1 draws everything from f1") {
    RandomStream rng(11, 0);
    const TrajectorySpec spec{bern, ChangePoint::at(1), 20000};
    const auto obs = sample_trajectory(spec, rng);
    double mean = 0.0;
    for (const double x : obs) mean += x;
    mean /= static_cast<double>(obs.size());
    CHECK(std::abs(mean - 0.8) < 3.0 * std::sqrt(0.16 / 20000.0));
  }

  SUBCASE("nu = infinity stays at f0 (law of large numbers)") {
    RandomStream rng(12, 0);
    const TrajectorySpec spec{bern, ChangePoint::never(), 100000};
    const auto obs = sample_trajectory(spec, rng);
    double mean = 0.0;
    for (const double x : obs) mean += x;
    mean /= static_cast<double>(obs.size());
    CHECK(std::abs(mean - 0.2) < 3.0 * std::sqrt(0.16 / 100000.0));
  }

  SUBCASE("pre/post segments use the right density") {
    const auto gauss = DistributionPair::gaussian_mean_shift(50.0);  // far-separated means
    RandomStream rng(13, 0);
    const TrajectorySpec spec{gauss, ChangePoint::at(11), 20};
    const auto obs = sample_trajectory(spec, rng);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(obs[static_cast<std::size_t>(i)]) < 25.0);
    for (int i = 10; i < 20; ++i) CHECK(obs[static_cast<std::size_t>(i)] > 25.0);
  }
}
