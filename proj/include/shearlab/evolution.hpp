#pragma once

#include "shearlab/common.hpp"
#include "shearlab/elliptic.hpp"
#include "shearlab/fft.hpp"
#include "shearlab/orr_sommerfeld.hpp"
#include "shearlab/profile.hpp"

namespace shearlab {

// ---------------------------------------------------------------------------
// Time series of one Fourier mode: vorticity and stream function on the
// y-grid, plus their transport-phase-free profiles on a v-grid once
// extract_profiles has run.
// ---------------------------------------------------------------------------
struct EvolutionSeries {
  ModeParams mode;
  rvector times;
  Grid ygrid;
  std::vector<cvector> omega_t;
  std::vector<cvector> psi_t;
  Grid vgrid;
  std::vector<cvector> F_t;    // F(t,v) = omega(t, b^{-1}(v)) e^{i k v t}
  std::vector<cvector> Phi_t;  // same for the stream function

  double elliptic_consistency(int k) const {
    double worst = 0.0;
    for (std::size_t s = 0; s < times.size(); ++s)
      worst = std::max(worst,
                       poisson_residual(k, ygrid, psi_t[s], omega_t[s]) /
                           std::max(linf_norm(omega_t[s]), 1e-300));
    return worst;
  }
};

// ---------------------------------------------------------------------------
// Closed form for b(y) = y: with f = e^{i k y t} omega the profile transform
// obeys d/dt fhat = -nu ((xi - k t)^2 + k^2) fhat, so
//   fhat(t, xi) = omega0hat(xi) exp(-nu k^2 t - nu (xi^3 - (xi - k t)^3)/(3k)).
// ---------------------------------------------------------------------------
inline double couette_symbol_log(int k, double nu, double t, double xi) {
  double kk = static_cast<double>(k);
  return -nu * (kk * kk * t + (xi * xi * xi - std::pow(xi - kk * t, 3)) / (3.0 * kk));
}

inline EvolutionSeries couette_closed_form(int k, double nu, const Grid& ygrid,
                                           const cvector& omega0, const rvector& times) {
  if (k == 0) throw ConfigInvalid("k must be nonzero");
  EvolutionSeries series;
  series.mode.k = k;
  series.mode.nu = nu;
  series.times = times;
  series.ygrid = ygrid;
  const int n = next_pow2(2 * ygrid.n);
  cvector padded = omega0;
  padded.resize(n, 0.0);
  cvector hat0 = fft_forward(padded);
  for (double t : times) {
    cvector hat(n), phat(n);
    for (int j = 0; j < n; ++j) {
      double xi = dft_frequency(j, n, ygrid.h);
      hat[j] = hat0[j] * std::exp(couette_symbol_log(k, nu, t, xi));
      // stream side divides by -(xi^2 + k^2) after undoing the phase shift:
      // psi must pair with omega, not with the profile, so shift xi by -kt
      double xs = xi - k * t;
      phat[j] = -hat[j] / (xs * xs + static_cast<double>(k) * k);
    }
    cvector f = fft_inverse(hat);
    cvector fp = fft_inverse(phat);
    cvector omega(ygrid.n), psi(ygrid.n);
    for (int i = 0; i < ygrid.n; ++i) {
      cdouble phase = std::exp(-I * (static_cast<double>(k) * ygrid.point(i) * t));
      omega[i] = phase * f[i];
      psi[i] = phase * fp[i];
    }
    series.omega_t.push_back(std::move(omega));
    series.psi_t.push_back(std::move(psi));
  }
  return series;
}

inline EvolutionSeries couette_closed_form(const ModeParams& mode, const Grid& ygrid,
                                           const cvector& omega0, const rvector& times) {
  return couette_closed_form(mode.k, mode.nu, ygrid, omega0, times);
}

// ---------------------------------------------------------------------------
// Crank-Nicolson stepper for
//   d/dt omega = L omega,  L = nu (d^2 - k^2) - i k b + i k b'' G_k.
// The implicit half-step is tridiagonal plus the compact coupling block, so
// one Woodbury factorization serves every step.
// ---------------------------------------------------------------------------
inline EvolutionSeries evolve_direct(const ShearProfile& p, const ModeParams& mode,
                                     const InitialData& init, const rvector& times,
                                     double dt) {
  const Grid& g = init.ygrid;
  const int n = g.n;
  const int k = mode.k;
  const double nu = mode.nu;
  rvector bs = p.sample_b(g), bpp = p.sample_bsecond(g);
  double bmax = 0.0;
  for (double v : bs) bmax = std::max(bmax, std::abs(v));
  if (dt * std::abs(static_cast<double>(k)) * bmax > 0.1 + 1e-12)
    throw StepTooLarge("dt |k| max|b| = " +
                       std::to_string(dt * std::abs(static_cast<double>(k)) * bmax));
  for (double t : times)
    if (t < 0.0) throw ConfigInvalid("times must be nonnegative");

  // tridiagonal part of L
  const double ih2 = nu / sq(g.h);
  cvector Llo(n, ih2), Lup(n, ih2), Ldi(n);
  for (int i = 0; i < n; ++i)
    Ldi[i] = -2.0 * ih2 - nu * sq(static_cast<double>(k)) -
             I * (static_cast<double>(k) * bs[i]);
  Llo[0] = 0.0;
  Lup[n - 1] = 0.0;

  cvector mlo(n), mdi(n), mup(n);  // I - dt/2 L
  cvector plo(n), pdi(n), pup(n);  // I + dt/2 L
  for (int i = 0; i < n; ++i) {
    mlo[i] = -0.5 * dt * Llo[i];
    mup[i] = -0.5 * dt * Lup[i];
    mdi[i] = 1.0 - 0.5 * dt * Ldi[i];
    plo[i] = 0.5 * dt * Llo[i];
    pup[i] = 0.5 * dt * Lup[i];
    pdi[i] = 1.0 + 0.5 * dt * Ldi[i];
  }
  TridiagFactor implicit_fac(mlo, mdi, mup);
  TridiagFactor gfac = poisson_factor(k, g);

  std::vector<int> support;
  double bppmax = 0.0;
  for (double v : bpp) bppmax = std::max(bppmax, std::abs(v));
  for (int i = 0; i < n; ++i)
    if (std::abs(bpp[i]) > 1e-14 * bppmax) support.push_back(i);
  const int m = static_cast<int>(support.size());

  // Woodbury block for the implicit coupling -(dt/2) i k b'' G
  std::vector<cvector> acols(m);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  if (m > 0) {
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(m, m);
    cvector unit(n, 0.0);
    for (int j = 0; j < m; ++j) {
      unit[support[j]] = 1.0;
      acols[j] = implicit_fac.solve(unit);
      unit[support[j]] = 0.0;
      cvector gcol = gfac.solve(acols[j]);
      const cdouble dj = -0.5 * dt * I * static_cast<double>(k) * bpp[support[j]];
      for (int a = 0; a < m; ++a) W(a, j) += gcol[support[a]] * dj;
    }
    lu.compute(W);
    if (lu.rcond() < 1e-14)
      throw CouplingSingular("implicit step block is numerically singular");
  }

  auto implicit_solve = [&](const cvector& rhs) {
    cvector a0 = implicit_fac.solve(rhs);
    if (m == 0) return a0;
    cvector g0 = gfac.solve(a0);
    Eigen::VectorXcd r(m);
    for (int j = 0; j < m; ++j) r[j] = g0[support[j]];
    Eigen::VectorXcd u = lu.solve(r);
    for (int j = 0; j < m; ++j) {
      const cdouble cj = -0.5 * dt * I * static_cast<double>(k) * bpp[support[j]] * u[j];
      for (int i = 0; i < n; ++i) a0[i] -= cj * acols[j][i];
    }
    return a0;
  };

  EvolutionSeries series;
  series.mode = mode;
  series.ygrid = g;
  cvector omega = init.omega0;
  double t = 0.0;
  double tmax = *std::max_element(times.begin(), times.end());
  std::size_t next = 0;
  rvector sorted = times;
  std::sort(sorted.begin(), sorted.end());
  auto record = [&](double tcur, const cvector& om) {
    while (next < sorted.size() && tcur >= sorted[next] - 0.5 * dt) {
      series.times.push_back(tcur);
      series.omega_t.push_back(om);
      series.psi_t.push_back(gfac.solve(om));
      ++next;
    }
  };
  record(0.0, omega);
  long steps = 0;
  while (next < sorted.size() && t < tmax + dt) {
    cvector rhs = tridiag_apply(plo, pdi, pup, omega);
    if (m > 0) {
      cvector psi = gfac.solve(omega);
      for (int i = 0; i < n; ++i)
        rhs[i] += 0.5 * dt * I * static_cast<double>(k) * bpp[i] * psi[i];
    }
    omega = implicit_solve(rhs);
    t = ++steps * dt;
    record(t, omega);
  }
  return series;
}

// ---------------------------------------------------------------------------
// Oscillatory tail J(a, tau) = int_a^inf e^{-i u tau} / u du for a > 0,
// by-parts asymptotics once aable phase a*tau is large, quadrature before.
// ---------------------------------------------------------------------------
namespace detail {

inline constexpr double euler_gamma = 0.5772156649015328606;

// Exponential integral E1(z) for Re z >= 0: power series up to |z| = 12,
// optimally truncated asymptotic series beyond.
inline cdouble expint_e1(cdouble z) {
  if (std::abs(z) <= 12.0) {
    cdouble sum = 0.0, term = 1.0;
    for (int n = 1; n <= 80; ++n) {
      term *= -z / static_cast<double>(n);  // (-z)^n / n!
      sum -= term / static_cast<double>(n);
      if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return -euler_gamma - std::log(z) + sum;
  }
  cdouble inv = 1.0 / z;
  cdouble term = std::exp(-z) * inv;
  cdouble acc = 0.0;
  double prev = 1e300;
  for (int n = 0; n <= 16; ++n) {
    if (std::abs(term) > prev) break;  // past the smallest term
    acc += term;
    prev = std::abs(term);
    term *= -static_cast<double>(n + 1) * inv;
  }
  return acc;
}

// J(a, tau) = int_a^inf e^{-i u tau} / u du = E1(i a tau), a > 0.
inline cdouble osc_inv_tail(double a, double tau) {
  if (tau < 0.0) return std::conj(osc_inv_tail(a, -tau));
  if (tau == 0.0) throw ConfigInvalid("osc_inv_tail needs tau != 0");
  return expint_e1(cdouble(0.0, a * tau));
}

// int_{|w| > Lambda} e^{-i k w t} / (i (w - v)) dw for |v| < Lambda. At
// t = 0 the value is the t -> 0+ limit (the reconstruction belongs to the
// one-sided evolution, whose contour integral jumps at the initial time).
inline cdouble far_tail_integral(int k, double t, double v, double Lambda) {
  double tau = static_cast<double>(k) * t;
  if (tau == 0.0)
    return std::log((Lambda + v) / (Lambda - v)) / I -
           M_PI * (k > 0 ? 1.0 : -1.0);
  cdouble J1 = osc_inv_tail(Lambda - v, tau);
  cdouble J2 = osc_inv_tail(Lambda + v, tau);
  return std::exp(cdouble(0.0, -v * tau)) * (J1 - std::conj(J2)) / I;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral-representation evolution: stream the resolvent over a fine
// uniform w-grid,
//   omega(t,y) = -(1/2pi) e^{-nu k^2 t} int e^{-i k w t} omega_res(y; w) dw,
// with coupled solves near the support, uncoupled solves in the far field,
// and the leading 1/(i(w - b(y))) tail integrated in closed form beyond the
// window.
// ---------------------------------------------------------------------------
struct RepParams {
  double dw = 0.0;            // w spacing; 0 -> derived from the phase bound
  double w_window = 40.0;     // quadrature window half-width
  double couple_margin = 7.0; // dist(y0, supp b'') |k| beyond which coupling is dropped
  bool tail_correction = true;
  bool apply_heat_prefactor = true;  // multiply by e^{-nu k^2 t} (one multiply)
};

inline EvolutionSeries evolve_representation(const ShearProfile& p,
                                             const ModeParams& mode,
                                             const InitialData& init,
                                             const rvector& times,
                                             RepParams params = {}) {
  const Grid& g = init.ygrid;
  const int k = mode.k;
  double tmax = 0.0;
  for (double t : times) {
    if (t < 0.0) throw ConfigInvalid("times must be nonnegative");
    tmax = std::max(tmax, t);
  }
  double dw = params.dw;
  if (dw <= 0.0) dw = 0.1 / std::max(1.0, std::abs(static_cast<double>(k)) * tmax) / 1.2;
  if (std::abs(static_cast<double>(k)) * tmax * dw > 0.1 + 1e-12)
    throw PhaseUnderresolved("k t_max dw = " +
                             std::to_string(std::abs(static_cast<double>(k)) * tmax * dw));

  OsSolver solver(p, mode, g, /*alpha=*/0.0);
  const int half = static_cast<int>(std::ceil(params.w_window / dw));
  const int nw = 2 * half + 1;
  const double Lambda = half * dw;
  const int nt = static_cast<int>(times.size());
  const int n = g.n;

  // fixed-size blocks reduced in index order: deterministic for any thread count
  const int block = 64;
  const int nblocks = (nw + block - 1) / block;
  const int waves = thread_count();
  std::vector<std::vector<cvector>> wave_buf(waves);
  std::vector<cvector> acc(nt, cvector(n, 0.0));
  for (int wave = 0; wave < nblocks; wave += waves) {
    int batch = std::min(waves, nblocks - wave);
    for (auto& buf : wave_buf) buf.assign(nt, cvector(n, 0.0));
    parallel_for(batch, [&](int bi) {
      auto& buf = wave_buf[bi];
      int b0 = (wave + bi) * block;
      int b1 = std::min(nw, b0 + block);
      for (int j = b0; j < b1; ++j) {
        double w = -Lambda + j * dw;
        double y0 = p.invert(w);
        OsSolution sol = solver.solve(y0, init.omega0);
        double quad = ((j == 0 || j + 1 == nw) ? 0.5 : 1.0) * dw;
        for (int s = 0; s < nt; ++s) {
          cdouble phase =
              std::exp(cdouble(0.0, -static_cast<double>(k) * w * times[s])) * quad;
          cvector& target = buf[s];
          for (int i = 0; i < n; ++i) target[i] += phase * sol.w[i];
        }
      }
    });
    for (int bi = 0; bi < batch; ++bi)
      for (int s = 0; s < nt; ++s)
        for (int i = 0; i < n; ++i) acc[s][i] += wave_buf[bi][s][i];
  }

  EvolutionSeries series;
  series.mode = mode;
  series.ygrid = g;
  series.times = times;
  TridiagFactor gfac = poisson_factor(k, g);
  for (int s = 0; s < nt; ++s) {
    double pre = std::exp(-mode.nu * sq(static_cast<double>(k)) * times[s]);
    cvector omega(n);
    for (int i = 0; i < n; ++i) {
      cdouble tail = 0.0;
      if (params.tail_correction) {
        double v = p.b(g.point(i));
        if (std::abs(v) < Lambda - 1.0 && std::abs(init.omega0[i]) > 0.0)
          tail = init.omega0[i] *
                 detail::far_tail_integral(k, times[s], v, Lambda);
      }
      omega[i] = (acc[s][i] + tail) / (-2.0 * M_PI);
      if (params.apply_heat_prefactor) omega[i] *= pre;  // exactly one multiply
    }
    series.psi_t.push_back(gfac.solve(omega));
    series.omega_t.push_back(std::move(omega));
  }
  return series;
}

// ---------------------------------------------------------------------------
// Profiles: F(t,v) = omega(t, b^{-1}(v)) e^{i k v t} and likewise Phi.
// ---------------------------------------------------------------------------
inline void extract_profiles(EvolutionSeries& series, const ShearProfile& p,
                             const Grid& vgrid) {
  series.vgrid = vgrid;
  series.F_t.clear();
  series.Phi_t.clear();
  const Grid& yg = series.ygrid;
  rvector ys = p.invert_grid(vgrid.points());
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    double t = series.times[s];
    cvector F(vgrid.n), Phi(vgrid.n);
    for (int i = 0; i < vgrid.n; ++i) {
      double v = vgrid.point(i), y = ys[i];
      if (y <= yg.left || y >= yg.right()) {
        F[i] = Phi[i] = 0.0;
        continue;
      }
      cdouble phase =
          std::exp(cdouble(0.0, static_cast<double>(series.mode.k) * v * t));
      F[i] = interp_cubic(yg, series.omega_t[s], y) * phase;
      Phi[i] = interp_cubic(yg, series.psi_t[s], y) * phase;
    }
    series.F_t.push_back(std::move(F));
    series.Phi_t.push_back(std::move(Phi));
  }
}

}  // namespace shearlab
