#include <catch2/catch_amalgamated.hpp>

#include "shearlab/profile.hpp"

using namespace shearlab;

TEST_CASE("couette profile is the identity") {
  ShearProfile p = build_profile(ProfileKind::couette, 0.0, 1.0);
  REQUIRE(p.b(0.0) == 0.0);
  REQUIRE(p.bprime(0.0) == 1.0);
  REQUIRE(p.bsecond(0.0) == 0.0);
  for (double y : {-3.0, -0.5, 0.0, 1.2, 7.0}) {
    REQUIRE(p.b(y) == y);
    REQUIRE(p.bsecond(y) == 0.0);  // identically zero curvature
  }
  REQUIRE(invert_profile(p, 0.5) == 0.5);
}

TEST_CASE("bump profile curvature at the origin") {
  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  REQUIRE(p.bsecond(0.0) == Catch::Approx(0.3 * std::exp(-1.0)).epsilon(1e-14));
  REQUIRE(p.bprime(0.0) == Catch::Approx(1.0).margin(1e-12));  // B1(0) = 0
  REQUIRE(p.b(0.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("large amplitudes are rejected") {
  REQUIRE_THROWS_AS(build_profile(ProfileKind::bump, 10.0, 1.0), MonotonicityViolation);
  REQUIRE_THROWS_AS(build_profile(ProfileKind::bump, -10.0, 1.0), MonotonicityViolation);
  // grid-scan oracle: min over y of 1 + a*B1(y) with B1(-1) = -int_0^1 bump
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double y = (i + 0.5) / n;  // integrate bump over [0, 1]
    acc += bump_unit(y);
  }
  acc /= n;
  REQUIRE(1.0 - 10.0 * acc < 0.0);  // the oracle agrees that a = 10 breaks b' > 0
}

TEST_CASE("profile inversion round-trips and is monotone") {
  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  REQUIRE(invert_profile(p, p.b(1.7)) == Catch::Approx(1.7).margin(1e-10));
  double prev = -1e300;
  for (int i = 0; i <= 200; ++i) {
    double v = -6.0 + 12.0 * i / 200.0;
    double y = invert_profile(p, v);
    REQUIRE(std::abs(p.b(y) - v) <= 1e-10 * (1.0 + std::abs(v)));
    REQUIRE(y > prev);
    prev = y;
  }
}

TEST_CASE("inversion agrees with an independent bisection oracle") {
  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  auto bisect = [&](double v) {
    double lo = -20.0, hi = 20.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (p.b(mid) < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  for (double v : {0.0, 0.37, -0.81, 1.5}) {
    REQUIRE(invert_profile(p, v) == Catch::Approx(bisect(v)).margin(1e-10));
  }
}

TEST_CASE("assumption report for couette and bump") {
  Grid grid = Grid::symmetric(3.0, 0.005);
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  AssumptionReport rc = check_assumptions(c, grid);
  REQUIRE(rc.sigma0_hat == 1.0);
  REQUIRE(rc.support_ok);

  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  AssumptionReport rp = check_assumptions(p, grid);
  // grid-scan oracle bounds
  double bmin = 1e300, bmax = -1e300;
  for (int i = 0; i < grid.n; ++i) {
    bmin = std::min(bmin, p.bprime(grid.point(i)));
    bmax = std::max(bmax, p.bprime(grid.point(i)));
  }
  REQUIRE(rp.sigma0_hat >= bmin - 1e-12);
  REQUIRE(rp.sigma0_hat <= 1.0 / bmax + 1e-12);
  REQUIRE(rp.support_ok);
  REQUIRE(rp.gevrey_decay_fit > 0.0);  // stretched-exponential decay present

  // a declared radius smaller than the actual support is flagged
  AssumptionReport bad = check_assumptions(p, grid, 0.5);
  REQUIRE_FALSE(bad.support_ok);
}

TEST_CASE("measured sigma0 narrows with amplitude") {
  ShearProfile p1 = build_profile(ProfileKind::bump, 0.1, 1.0);
  ShearProfile p3 = build_profile(ProfileKind::bump, 0.3, 1.0);
  REQUIRE(p1.sigma0 > p3.sigma0);
  REQUIRE(p3.sigma0 > 0.9);  // a = 0.3 stays close to Couette
}
