#include <cmath>
#include <vector>

#include "doctest.h"
#include "qcd/rng.hpp"

using qcd::RandomStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference outputs from the Random123 test vectors.
  auto zeros = RandomStream::philox_block(0, {0, 0}, {0, 0});
  CHECK(zeros[0] == 0x6627e8d5u);
  CHECK(zeros[1] == 0xe169c58du);
  CHECK(zeros[2] == 0xbc57ac4cu);
  CHECK(zeros[3] == 0x9b00dbd8u);

  auto ones = RandomStream::philox_block(0xffffffffffffffffULL, {0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  auto pi = RandomStream::philox_block(0x85a308d3243f6a88ULL, {0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are deterministic and distinct") {
  RandomStream a(1234, 7);
  RandomStream b(1234, 7);
  RandomStream c(1234, 8);
  bool all_equal = true;
  bool any_diff_stream = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_diff_stream = any_diff_stream || (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff_stream);
}

TEST_CASE("uniform and gaussian moments") {
  RandomStream rng(99, 0);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  CHECK(std::abs(sum_sq / n - 1.0 / 3.0) < 0.005);

  double gsum = 0.0, gsum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_gaussian();
    gsum += z;
    gsum_sq += z * z;
  }
  CHECK(std::abs(gsum / n) < 0.01);
  CHECK(std::abs(gsum_sq / n - 1.0) < 0.02);
}
