#include <cmath>
#include <set>

#include "doctest.h"

#include "fracpot/rng.hpp"

using namespace fracpot;
using doctest::Approx;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and independent of draw history") {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  const RngStream parent(42, 0);
  RngStream c1 = parent.split(5);
  RngStream used = parent;
  for (int i = 0; i < 17; ++i) used.next_u64();
  // split depends only on (seed, stream index), never on the position.
  RngStream c2 = used.split(5);
  CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("split children are distinct") {
  const RngStream root(0, 0);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    RngStream s = root.split(i);
    firsts.insert(s.next_u64());
  }
  CHECK(firsts.size() == 1000);
  RngStream s1 = RngStream(1, 0), s2 = RngStream(2, 0);
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("uniform and normal moments") {
  RngStream r(1, 1);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(su / n == Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == Approx(1.0).epsilon(0.02));
}

TEST_CASE("log-gamma variates have the right mean") {
  RngStream r(3, 0);
  for (double shape : {0.25, 0.5, 0.75, 2.5}) {
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::exp(r.log_gamma_variate(shape));
    // Var = shape, so the tolerance is five standard errors.
    CHECK(std::abs(s / n - shape) < 5.0 * std::sqrt(shape / n));
  }
}
