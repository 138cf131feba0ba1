#include <catch2/catch_amalgamated.hpp>

#include "shearlab/common.hpp"

using namespace shearlab;

TEST_CASE("tridiagonal solve reproduces a dense reference") {
  const int n = 12;
  cvector lo(n), di(n), up(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = cdouble(0.3, -0.1) * (i > 0 ? 1.0 : 0.0);
    up[i] = cdouble(-0.2, 0.4) * (i + 1 < n ? 1.0 : 0.0);
    di[i] = cdouble(2.0 + 0.1 * i, 1.0);
  }
  cvector x_true(n);
  for (int i = 0; i < n; ++i) x_true[i] = cdouble(std::sin(i + 1.0), std::cos(2.0 * i));
  cvector rhs = tridiag_apply(lo, di, up, x_true);
  cvector x = TridiagFactor(lo, di, up).solve(rhs);
  for (int i = 0; i < n; ++i)
    REQUIRE(std::abs(x[i] - x_true[i]) < 1e-12);
}

TEST_CASE("cubic interpolation is exact on cubics") {
  Grid g(-1.0, 0.25, 17);
  std::vector<double> f(g.n);
  auto cubic = [](double x) { return 2.0 + x - 3.0 * x * x + 0.5 * x * x * x; };
  for (int i = 0; i < g.n; ++i) f[i] = cubic(g.point(i));
  for (double x : {-0.93, -0.4, 0.0, 0.11, 0.77, 0.99})
    REQUIRE(interp_cubic(g, f, x) == Catch::Approx(cubic(x)).epsilon(1e-12));
}

TEST_CASE("line fit recovers exact slope and intercept") {
  rvector xs, ys;
  for (int i = 0; i < 30; ++i) {
    xs.push_back(0.1 * i);
    ys.push_back(3.5 - 0.7 * 0.1 * i);
  }
  LineFit f = fit_line(xs, ys);
  REQUIRE(f.slope == Catch::Approx(-0.7).margin(1e-12));
  REQUIRE(f.intercept == Catch::Approx(3.5).margin(1e-12));
  REQUIRE(f.rms_residual < 1e-12);
}

TEST_CASE("parallel_for covers every index exactly once") {
  const int n = 257;
  std::vector<std::atomic_int> hits(n);
  for (auto& h : hits) h = 0;
  parallel_for(n, [&](int i) { hits[i]++; }, 4);
  for (int i = 0; i < n; ++i) REQUIRE(hits[i] == 1);
}

TEST_CASE("l2 norm matches closed form for a sampled Gaussian") {
  Grid g = Grid::symmetric(12.0, 1e-3);
  cvector v(g.n);
  for (int i = 0; i < g.n; ++i) v[i] = std::exp(-sq(g.point(i)) / 2.0);
  // ||e^{-y^2/2}||_2 = pi^{1/4}
  REQUIRE(l2_norm(v, g.h) == Catch::Approx(std::pow(M_PI, 0.25)).epsilon(1e-8));
}
