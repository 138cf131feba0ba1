#include <catch2/catch_amalgamated.hpp>

#include "shearlab/evolution.hpp"

using namespace shearlab;

namespace {

InitialData couette_data(double half_width, double h) {
  Grid g = Grid::symmetric(half_width, h);
  return default_initial_data(g);
}

}  // namespace

TEST_CASE("closed form: t = 0 identity and inviscid transport") {
  InitialData init = couette_data(12.0, 0.01);
  EvolutionSeries s0 = couette_closed_form(1, 1e-3, init.ygrid, init.omega0, {0.0});
  REQUIRE(rel_l2_diff(s0.omega_t[0], init.omega0, init.ygrid.h) < 1e-12);

  // nu = 0: profile transform is constant in t, so |F| is conserved
  EvolutionSeries sv = couette_closed_form(1, 0.0, init.ygrid, init.omega0, {0.0, 3.0});
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  extract_profiles(sv, c, Grid::symmetric(10.0, 0.01));
  REQUIRE(rel_l2_diff(sv.F_t[1], sv.F_t[0], sv.vgrid.h) < 1e-10);
}

TEST_CASE("closed form satisfies the mode equation") {
  InitialData init = couette_data(12.0, 0.005);
  const int k = 1;
  const double nu = 1e-2, t = 1.0, dt = 1e-4;
  EvolutionSeries s = couette_closed_form(k, nu, init.ygrid, init.omega0,
                                          {t - dt, t, t + dt});
  const Grid& g = init.ygrid;
  double worst = 0.0, sup = linf_norm(s.omega_t[1]);
  for (int i = 1; i + 1 < g.n; ++i) {
    double y = g.point(i);
    if (std::abs(y) > 6.0) continue;
    cdouble ddt = (s.omega_t[2][i] - s.omega_t[0][i]) / (2.0 * dt);
    cdouble lap = (s.omega_t[1][i - 1] - 2.0 * s.omega_t[1][i] + s.omega_t[1][i + 1]) /
                  sq(g.h);
    cdouble res = ddt + nu * (static_cast<double>(k) * k * s.omega_t[1][i] - lap) +
                  I * (static_cast<double>(k) * y) * s.omega_t[1][i];
    worst = std::max(worst, std::abs(res));
  }
  REQUIRE(worst < 1e-3 * sup);
}

TEST_CASE("closed form spot value at t = 10") {
  InitialData init = couette_data(14.0, 0.01);
  // narrow Gaussian data: its transform still carries weight at xi = 10
  for (int i = 0; i < init.ygrid.n; ++i)
    init.omega0[i] = std::exp(-sq(init.ygrid.point(i) / 0.35) / 2.0);
  const double nu = 1e-3, t = 10.0;
  EvolutionSeries s = couette_closed_form(1, nu, init.ygrid, init.omega0, {t});
  // fhat(t, xi)/omega0hat(xi) at xi near kt = 10 equals
  // exp(-nu (k^2 t + (xi^3 - (xi - kt)^3)/(3k)))
  cvector prof(init.ygrid.n);
  for (int i = 0; i < init.ygrid.n; ++i)
    prof[i] = s.omega_t[0][i] * std::exp(I * (init.ygrid.point(i) * t));
  cvector padded = prof;
  padded.resize(next_pow2(2 * init.ygrid.n), 0.0);
  cvector spec = fft_forward(padded);
  cvector base = init.omega0;
  base.resize(spec.size(), 0.0);
  cvector spec0 = fft_forward(base);
  int n = static_cast<int>(spec.size());
  int jstar = -1;
  for (int j = 0; j < n; ++j)
    if (std::abs(dft_frequency(j, n, init.ygrid.h) - 10.0) <=
        M_PI / (n * init.ygrid.h)) {
      jstar = j;
      break;
    }
  REQUIRE(jstar >= 0);
  double xi = dft_frequency(jstar, n, init.ygrid.h);
  cdouble ratio = spec[jstar] / spec0[jstar];
  double expect = std::exp(-nu * (t + (xi * xi * xi - std::pow(xi - t, 3)) / 3.0));
  REQUIRE(std::abs(ratio - expect) < 1e-9);
}

TEST_CASE("direct stepper: t = 0 identity, order 2, closed-form agreement") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(12.0, 0.01);
  rvector times{0.0, 1.0, 2.0};

  EvolutionSeries coarse = evolve_direct(c, mode, init, times, 8e-3);
  REQUIRE(rel_l2_diff(coarse.omega_t[0], init.omega0, init.ygrid.h) < 1e-12);

  // Richardson self-convergence: spatial error cancels between runs on the
  // same grid, so successive dt halvings shrink differences by about four
  EvolutionSeries mid = evolve_direct(c, mode, init, times, 4e-3);
  EvolutionSeries fine = evolve_direct(c, mode, init, times, 2e-3);
  double d1 = rel_l2_diff(coarse.omega_t[2], mid.omega_t[2], init.ygrid.h);
  double d2 = rel_l2_diff(mid.omega_t[2], fine.omega_t[2], init.ygrid.h);
  REQUIRE(d1 / d2 > 3.0);
  REQUIRE(d1 / d2 < 5.5);

  EvolutionSeries ref_fine = couette_closed_form(mode, init.ygrid, init.omega0,
                                                 fine.times);
  double e_fine = rel_l2_diff(fine.omega_t[2], ref_fine.omega_t[2], init.ygrid.h);
  REQUIRE(e_fine < 1e-3);
  REQUIRE(coarse.elliptic_consistency(mode.k) < 1e-10);
}

TEST_CASE("direct stepper rejects oversized steps") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(12.0, 0.01);
  REQUIRE_THROWS_AS(evolve_direct(c, mode, init, {1.0}, 0.05), StepTooLarge);
}

TEST_CASE("representation path: t = 0 inversion identity and closed-form match") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(12.0, 0.015);
  rvector times{0.0, 3.0};
  RepParams rp;
  rp.w_window = 40.0;
  EvolutionSeries rep = evolve_representation(c, mode, init, times, rp);
  REQUIRE(rel_l2_diff(rep.omega_t[0], init.omega0, init.ygrid.h) < 1e-3);

  EvolutionSeries ref = couette_closed_form(mode, init.ygrid, init.omega0, times);
  REQUIRE(rel_l2_diff(rep.omega_t[1], ref.omega_t[1], init.ygrid.h) < 1e-3);
  REQUIRE(rep.elliptic_consistency(mode.k) < 1e-10);
}

TEST_CASE("the heat prefactor enters as exactly one multiply") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(10.0, 0.02);
  rvector times{2.0};
  RepParams with, without;
  without.apply_heat_prefactor = false;
  EvolutionSeries on = evolve_representation(c, mode, init, times, with);
  EvolutionSeries off = evolve_representation(c, mode, init, times, without);
  double pre = std::exp(-mode.nu * 1.0 * times[0]);
  for (int i = 0; i < init.ygrid.n; ++i)
    REQUIRE(on.omega_t[0][i] == off.omega_t[0][i] * pre);  // bit-identical
}

TEST_CASE("representation needs the phase resolved") {
  ShearProfile c = build_profile(ProfileKind::couette, 0.0, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(10.0, 0.02);
  RepParams rp;
  rp.dw = 0.1;  // far too coarse for t = 20
  REQUIRE_THROWS_AS(evolve_representation(c, mode, init, {20.0}, rp),
                    PhaseUnderresolved);
}

TEST_CASE("two evolution paths agree for a bump profile") {
  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(12.0, 0.015);
  rvector times{0.0, 1.5, 3.0};
  EvolutionSeries rep = evolve_representation(p, mode, init, times);
  EvolutionSeries dir = evolve_direct(p, mode, init, times, 2e-3);
  for (std::size_t s = 1; s < times.size(); ++s) {
    double d = rel_l2_diff(rep.omega_t[s], dir.omega_t[s], init.ygrid.h);
    REQUIRE(d < 5e-3);
  }
}

TEST_CASE("profile extraction: unit phase at t = 0") {
  ShearProfile p = build_profile(ProfileKind::bump, 0.3, 1.0);
  ModeParams mode(1, 1e-2);
  InitialData init = couette_data(12.0, 0.01);
  EvolutionSeries s = evolve_direct(p, mode, init, {0.0}, 2e-3);
  Grid vg = Grid::symmetric(9.0, 0.01);
  extract_profiles(s, p, vg);
  double worst = 0.0;
  for (int i = 0; i < vg.n; ++i) {
    double y = p.invert(vg.point(i));
    cdouble expect = (y > init.ygrid.left && y < init.ygrid.right())
                         ? interp_cubic(init.ygrid, init.omega0, y)
                         : cdouble(0.0);
    worst = std::max(worst, std::abs(s.F_t[0][i] - expect));
  }
  REQUIRE(worst < 1e-8 * linf_norm(init.omega0));
}
