#pragma once

#include <cstdint>

namespace qcd {

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

struct BinomialInterval {
  double low = 0.0;
  double high = 1.0;
};

// Exact two-sided Clopper-Pearson interval for k successes in n trials at the
// given confidence level (e.g. 0.99).
BinomialInterval clopper_pearson(std::int64_t k, std::int64_t n, double confidence);

}  // namespace qcd
