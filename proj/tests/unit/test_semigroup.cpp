#include <catch2/catch_amalgamated.hpp>

#include "shearlab/semigroup.hpp"
#include "test_support.hpp"

using namespace shearlab;

namespace {

GeneratorMatrix wrap(const Eigen::MatrixXcd& A) {
  GeneratorMatrix g;
  g.A = A;
  g.grid = Grid(0.0, 1.0, static_cast<int>(A.rows()));
  return g;
}

rvector linspace(double a, double b, int n) {
  rvector xs(n);
  for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * i / (n - 1);
  return xs;
}

}  // namespace

TEST_CASE("scalar contraction: mu = 1, C0 = 1") {
  GeneratorMatrix g = wrap(-Eigen::MatrixXcd::Identity(3, 3));
  double mu = resolvent_scan(g, linspace(-4.0, 4.0, 17));
  REQUIRE(mu == Catch::Approx(1.0).epsilon(1e-6));  // sqrt(1 + lambda^2) minimized at 0

  auto curve = semigroup_norm_curve(g, linspace(0.0, 5.0, 11));
  for (auto& [t, nrm] : curve) REQUIRE(nrm == Catch::Approx(std::exp(-t)).epsilon(1e-8));

  DsrReport rep = dsr_envelope_check(g, linspace(0.0, 5.0, 11), linspace(-4.0, 4.0, 17));
  REQUIRE(rep.C0_required == Catch::Approx(1.0).epsilon(1e-6));
  REQUIRE(rep.pass);
}

TEST_CASE("skew generator: unit norm curve and a neutral certificate") {
  Eigen::MatrixXcd A(2, 2);
  A << 0.0, 1.0, -1.0, 0.0;
  GeneratorMatrix g = wrap(A);
  auto curve = semigroup_norm_curve(g, linspace(0.0, 6.0, 13));
  for (auto& [t, nrm] : curve) REQUIRE(nrm == Catch::Approx(1.0).epsilon(1e-9));

  // the lambda grid hits the spectrum at +/- 1: scan refuses a positive mu
  REQUIRE_THROWS_AS(resolvent_scan(g, linspace(-2.0, 2.0, 9)), NearSingular);

  DsrReport rep = dsr_envelope_check(g, linspace(0.0, 6.0, 13), linspace(-2.0, 2.0, 9));
  REQUIRE(rep.near_singular);
  REQUIRE(rep.mu == 0.0);
  REQUIRE(rep.C0_required == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normal generator: mu equals the spectral distance to the axis") {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 3);
  A(0, 0) = cdouble(-1.0, -2.0);
  A(1, 1) = cdouble(-3.0, 1.0);
  A(2, 2) = cdouble(-0.5, 0.7);
  GeneratorMatrix g = wrap(A);
  double mu = resolvent_scan(g, linspace(-4.0, 4.0, 33));
  REQUIRE(mu == Catch::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("jordan block: non-normal amplification and transient growth") {
  Eigen::MatrixXcd A(2, 2);
  A << -1.0, 10.0, 0.0, -1.0;
  GeneratorMatrix g = wrap(A);

  // dense sigma_min oracle over the same grid
  rvector grid = linspace(-3.0, 3.0, 25);
  double mu = resolvent_scan(g, grid);
  double dense_min = 1e300;
  for (double l : grid) {
    Eigen::MatrixXcd M = cdouble(0.0, l) * Eigen::MatrixXcd::Identity(2, 2) - A;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
    dense_min = std::min(dense_min, svd.singularValues().minCoeff());
  }
  REQUIRE(mu <= dense_min + 1e-10);  // refinement only lowers the minimum
  REQUIRE(mu < 0.2);                 // strong pseudospectral amplification

  // closed form: e^{At} = e^{-t} [[1, 10t], [0, 1]]
  auto curve = semigroup_norm_curve(g, linspace(0.0, 2.0, 9));
  for (auto& [t, nrm] : curve) {
    double a = 100.0 * t * t + 2.0;
    double smax = std::sqrt((a + std::sqrt(a * a - 4.0)) / 2.0) * std::exp(-t);
    REQUIRE(nrm == Catch::Approx(smax).epsilon(1e-8));
  }
  double peak = 0.0;
  for (auto& [t, nrm] : curve) peak = std::max(peak, nrm);
  REQUIRE(peak > 1.5);  // transient growth before decay
}

TEST_CASE("generator action matches the analytic operator for couette") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  Grid grid = Grid::symmetric(8.0, 0.02);
  GeneratorMatrix gen = discretize_generator(c, 1, 1e-2, grid);
  Eigen::VectorXcd gvec(grid.n), expect(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    double y = grid.point(i);
    double e = std::exp(-y * y / 2.0);
    gvec[i] = e;
    expect[i] = 1e-2 * (y * y - 1.0) * e - I * (y * e);
  }
  Eigen::VectorXcd got = gen.A * gvec;
  double worst = 0.0;
  for (int i = 1; i + 1 < grid.n; ++i)
    worst = std::max(worst, std::abs(got[i] - expect[i]));
  REQUIRE(worst < 5.0 * sq(grid.h));
}

TEST_CASE("pure transport generator is skew: unit propagator norm") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  Grid grid = Grid::symmetric(4.0, 0.1);
  GeneratorMatrix gen = discretize_generator(c, 1, 0.0, grid);
  for (int i = 0; i < grid.n; ++i)
    for (int j = 0; j < grid.n; ++j)
      if (i != j) REQUIRE(std::abs(gen.A(i, j)) == 0.0);
  auto curve = semigroup_norm_curve(gen, linspace(0.0, 4.0, 9));
  for (auto& [t, nrm] : curve) REQUIRE(nrm == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("discretized couette spectrum sits in the closed left half plane") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  Grid grid = Grid::symmetric(6.0, 0.06);
  GeneratorMatrix gen = discretize_generator(c, 1, 1e-3, grid);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(gen.A, false);
  double worst = -1e300;
  for (int i = 0; i < gen.A.rows(); ++i)
    worst = std::max(worst, eig.eigenvalues()[i].real());
  REQUIRE(worst <= 1e-10);
}

TEST_CASE("bump generator also passes the envelope check") {
  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  Grid grid = Grid::symmetric(6.0, 0.05);
  GeneratorMatrix gen = discretize_generator(p, 1, 1e-2, grid);
  rvector lambdas = linspace(-14.0, 14.0, 57);
  DsrReport rep = dsr_envelope_check(gen, linspace(0.0, 20.0, 21), lambdas);
  REQUIRE_FALSE(rep.near_singular);
  REQUIRE(rep.mu > 0.0);
  REQUIRE(rep.pass);
  REQUIRE(rep.edge_growth_ok);
  // envelope inequality holds at every sampled time by construction
  for (std::size_t s = 0; s < rep.times.size(); ++s)
    REQUIRE(rep.norms[s] <=
            rep.C0_required * rep.M * rep.M * std::exp(-rep.mu * rep.times[s]) + 1e-12);
}

TEST_CASE("overflow guard") {
  Eigen::MatrixXcd A = 1e6 * Eigen::MatrixXcd::Identity(2, 2);
  REQUIRE_THROWS_AS(semigroup_norm_curve(wrap(A), {0.0, 1.0, 2.0}), OverflowRisk);
}
