#include <catch2/catch_amalgamated.hpp>

#include "shearlab/diagnostics.hpp"

using namespace shearlab;

namespace {

cvector sampled_gaussian(const Grid& g, double width = 1.0) {
  cvector f(g.n);
  for (int i = 0; i < g.n; ++i) f[i] = std::exp(-sq(g.point(i) / width) / 2.0);
  return f;
}

}  // namespace

TEST_CASE("delta = 0 reduces the weighted norm to plain L2") {
  Grid g = Grid::symmetric(14.0, 0.01);
  cvector f = sampled_gaussian(g);
  double plain = l2_norm(f, g.h);
  double weighted = gevrey_norm_1d(f, g.h, GevreyWeight{0.0, 1});
  REQUIRE(std::abs(weighted - plain) < 1e-10 * plain);
}

TEST_CASE("weighted norm of a Gaussian matches direct quadrature") {
  Grid g = Grid::symmetric(16.0, 0.005);
  cvector f = sampled_gaussian(g);
  GevreyWeight wgt{0.05, 1};
  double got = gevrey_norm_1d(f, g.h, wgt);
  // refined-grid oracle: ghat(xi) = e^{-xi^2/2}; integrate the weighted
  // square directly with fine trapezoid quadrature
  double acc = 0.0;
  const double dxi = 1e-4, XI = 16.0;
  for (double xi = -XI; xi <= XI; xi += dxi)
    acc += sq(wgt(xi)) * std::exp(-xi * xi) * dxi;
  double expect = std::sqrt(acc);
  REQUIRE(got == Catch::Approx(expect).epsilon(1e-6));
}

TEST_CASE("weighted norm is monotone in delta") {
  Grid g = Grid::symmetric(14.0, 0.01);
  cvector f = sampled_gaussian(g);
  double lo = gevrey_norm_1d(f, g.h, GevreyWeight{0.05, 1});
  double hi = gevrey_norm_1d(f, g.h, GevreyWeight{0.10, 1});
  REQUIRE(hi >= lo);
}

TEST_CASE("aliasing risk is detected for undersampled input") {
  Grid g = Grid::symmetric(10.0, 0.5);
  cvector f(g.n);
  for (int i = 0; i < g.n; ++i)
    f[i] = std::exp(-sq(g.point(i)) / 2.0) * std::cos(5.9 * g.point(i));
  REQUIRE_THROWS_AS(gevrey_norm_1d(f, g.h, GevreyWeight{0.0, 1}), AliasingRisk);
}

TEST_CASE("2d norm factorizes on separable data at delta = 0") {
  Grid gv = Grid::symmetric(10.0, 0.02);
  Grid gw = Grid::symmetric(8.0, 0.04);
  cvector gvf = sampled_gaussian(gv), gwf(gw.n);
  for (int i = 0; i < gw.n; ++i) gwf[i] = std::exp(-sq(gw.point(i) / 1.3) / 2.0);
  cvector G(static_cast<std::size_t>(gv.n) * gw.n);
  for (int i = 0; i < gv.n; ++i)
    for (int j = 0; j < gw.n; ++j)
      G[static_cast<std::size_t>(i) * gw.n + j] = gvf[i] * gwf[j];
  double got = gevrey_norm_2d(G, gv.n, gw.n, gv.h, gw.h, GevreyWeight{0.0, 1},
                              /*xi_weight=*/false);
  double expect = l2_norm(gvf, gv.h) * l2_norm(gwf, gw.h);
  REQUIRE(got == Catch::Approx(expect).epsilon(1e-8));

  cvector Z(G.size(), 0.0);
  REQUIRE(gevrey_norm_2d(Z, gv.n, gw.n, gv.h, gw.h, GevreyWeight{0.0, 1}) == 0.0);
}

TEST_CASE("rate fitting is exact on pure models") {
  rvector ts, vs;
  for (int i = 0; i < 40; ++i) {
    double t = 1.0 + 0.5 * i;
    ts.push_back(t);
    vs.push_back(2.3 * std::exp(-0.7 * t));
  }
  DecayFit f = fit_rate(ts, vs, DecayModel::exponential, 1.0, 100.0);
  REQUIRE(f.rate == Catch::Approx(0.7).margin(1e-10));
  REQUIRE(f.prefactor == Catch::Approx(2.3).margin(1e-8));
  REQUIRE(f.residual < 1e-12);

  rvector tp, vp;
  for (int i = 0; i < 40; ++i) {
    double t = 5.0 + 1.2 * i;
    tp.push_back(t);
    vp.push_back(4.0 * std::pow(t, -2.0));
  }
  DecayFit fp = fit_rate(tp, vp, DecayModel::power, 5.0, 50.0);
  REQUIRE(fp.rate == Catch::Approx(-2.0).margin(1e-10));

  rvector tn, vn;
  for (int i = 0; i < 60; ++i) {
    double t = 0.25 * i;
    tn.push_back(t);
    vn.push_back(std::exp(-0.7 * t) * (1.0 + 0.01 * std::sin(t)));
  }
  DecayFit fn = fit_rate(tn, vn, DecayModel::exponential, 0.0, 15.0);
  REQUIRE(std::abs(fn.rate - 0.7) <= 0.01);
}

TEST_CASE("degenerate fits are rejected") {
  rvector ts{1, 2, 3, 4, 5, 6}, vs{1, 1, 1, 1, 1, -1};
  REQUIRE_THROWS_AS(fit_rate(ts, vs, DecayModel::exponential, 0.0, 10.0),
                    DegenerateFit);
  rvector few_t{1, 2, 3}, few_v{1, 0.5, 0.25};
  REQUIRE_THROWS_AS(fit_rate(few_t, few_v, DecayModel::exponential, 0.0, 10.0),
                    DegenerateFit);
}

TEST_CASE("multiplier kernel probe: symmetry, decay fit, identity limit") {
  rvector ys;
  for (double y = 2.0; y <= 14.0; y += 1.5) ys.push_back(y);
  MultiplierProbeReport rep = multiplier_kernel_probe(0.3, 1, ys, 300.0);
  REQUIRE(rep.c0_fit > 0.0);
  REQUIRE(rep.fit_residual_rel < 0.10);

  // even symmetry
  rvector pair{-3.0, 3.0};
  MultiplierProbeReport rp = multiplier_kernel_probe(0.3, 1, pair, 300.0);
  REQUIRE(rp.K[0] == Catch::Approx(rp.K[1]).margin(1e-10));

  // mu -> 0: the multiplier action at zero tends to phi(0) = 1 for a
  // unit Gaussian (phihat(xi) = e^{-xi^2/2})
  auto phihat = [](double xi) { return std::exp(-xi * xi / 2.0); };
  double prev_err = 1e300;
  for (double mu : {0.2, 0.1, 0.05, 0.025}) {
    double val = multiplier_apply_at_zero(mu, 1, 60.0, phihat);
    double err = std::abs(val - 1.0);
    REQUIRE(err < prev_err);
    prev_err = err;
  }
  REQUIRE(prev_err < 0.05);
}
