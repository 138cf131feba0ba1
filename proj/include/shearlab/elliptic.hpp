#pragma once

#include "shearlab/common.hpp"
#include "shearlab/profile.hpp"

namespace shearlab {

// Warn-level threshold: inputs to the screened Poisson solvers are supposed
// to have decayed at the truncated boundary.
inline void require_boundary_decay(const cvector& g, double threshold = 1e-6) {
  double scale = linf_norm(g);
  if (scale == 0.0) return;
  double edge = std::max(std::abs(g.front()), std::abs(g.back()));
  if (edge > threshold * scale)
    throw BoundaryLeakage("input at grid ends is " + std::to_string(edge / scale) +
                          " of its sup norm");
}

// ---------------------------------------------------------------------------
// psi(y) = -(1/(2|k|)) int e^{-|k||y-z|} g(z) dz  via two O(N) trapezoid
// sweeps; solves (d^2/dy^2 - k^2) psi = g on the line.
// ---------------------------------------------------------------------------
inline cvector green_kernel_apply(int k, const Grid& grid, const cvector& g) {
  if (k == 0) throw ConfigInvalid("green_kernel_apply requires k != 0");
  require_boundary_decay(g);
  const int n = grid.n;
  const double ak = std::abs(static_cast<double>(k));
  const double r = std::exp(-ak * grid.h);
  cvector up(n), down(n);
  // up[i] = int_{-inf}^{y_i} e^{-|k|(y_i - z)} g(z) dz (trapezoid)
  up[0] = 0.0;
  for (int i = 1; i < n; ++i)
    up[i] = r * up[i - 1] + 0.5 * grid.h * (r * g[i - 1] + g[i]);
  down[n - 1] = 0.0;
  for (int i = n - 2; i >= 0; --i)
    down[i] = r * down[i + 1] + 0.5 * grid.h * (r * g[i + 1] + g[i]);
  cvector psi(n);
  for (int i = 0; i < n; ++i) psi[i] = -(up[i] + down[i]) / (2.0 * ak);
  return psi;
}

// Second-order centered-difference solve of (d^2 - k^2) psi = g with
// homogeneous Dirichlet conditions at the truncated ends.
inline TridiagFactor poisson_factor(int k, const Grid& grid) {
  if (k == 0) throw ConfigInvalid("poisson_solve requires k != 0");
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.h * grid.h);
  cvector lo(n, ih2), di(n, -2.0 * ih2 - static_cast<double>(k) * k), up(n, ih2);
  lo[0] = 0.0;
  up[n - 1] = 0.0;
  return TridiagFactor(std::move(lo), std::move(di), std::move(up));
}

inline cvector poisson_solve(int k, const Grid& grid, const cvector& g) {
  return poisson_factor(k, grid).solve(g);
}

// Variable-coefficient counterpart in the velocity variable:
//   [-k^2 + A2(v) d^2/dv^2 + A1(v) d/dv] psi = g,
// where A2 = bstar(v+w)^2 and A1 = bstar(v+w) * dbstar(v+w). This is the
// y-space screened Poisson operator written in v = b(y) - w coordinates.
inline TridiagFactor poisson_factor_vw(const ShearProfile& p, int k,
                                       const Grid& vgrid, double w) {
  if (k == 0) throw ConfigInvalid("poisson_factor_vw requires k != 0");
  const int n = vgrid.n;
  const double h = vgrid.h;
  cvector lo(n), di(n), up(n);
  for (int i = 0; i < n; ++i) {
    double v = vgrid.point(i);
    double bs = p.bstar(v + w);
    double a2 = bs * bs;
    double a1 = bs * p.dbstar(v + w);
    lo[i] = a2 / (h * h) - a1 / (2.0 * h);
    di[i] = -2.0 * a2 / (h * h) - static_cast<double>(k) * k;
    up[i] = a2 / (h * h) + a1 / (2.0 * h);
  }
  lo[0] = 0.0;
  up[n - 1] = 0.0;
  return TridiagFactor(std::move(lo), std::move(di), std::move(up));
}

// ---------------------------------------------------------------------------
// Named Green's kernel with its two representations. Columns are the
// response to a discrete delta (1/h at the nearest node).
// ---------------------------------------------------------------------------
enum class GreensRepresentation { explicit_exponential, factored_tridiagonal };

struct GreensKernel {
  int k = 1;
  GreensRepresentation representation = GreensRepresentation::explicit_exponential;
  Grid grid;

  cvector column(double z) const {
    const int n = grid.n;
    cvector col(n);
    if (representation == GreensRepresentation::explicit_exponential) {
      const double ak = std::abs(static_cast<double>(k));
      for (int i = 0; i < n; ++i)
        col[i] = -std::exp(-ak * std::abs(grid.point(i) - z)) / (2.0 * ak);
    } else {
      cvector delta(n, 0.0);
      delta[grid.nearest(z)] = 1.0 / grid.h;
      col = poisson_solve(k, grid, delta);
    }
    return col;
  }
};

// Residual of the discrete operator, interior points only.
inline double poisson_residual(int k, const Grid& grid, const cvector& psi,
                               const cvector& g) {
  const double ih2 = 1.0 / (grid.h * grid.h);
  double worst = 0.0;
  for (int i = 1; i + 1 < grid.n; ++i) {
    cdouble r = (psi[i - 1] - 2.0 * psi[i] + psi[i + 1]) * ih2 -
                static_cast<double>(k) * k * psi[i] - g[i];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace shearlab
