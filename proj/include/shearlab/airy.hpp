#pragma once

#include "shearlab/common.hpp"
#include "shearlab/elliptic.hpp"
#include "shearlab/profile.hpp"

namespace shearlab {

// Signed cube root (eps may be negative when k < 0).
inline double cbrt_signed(double x) { return std::cbrt(x); }

// ---------------------------------------------------------------------------
// Query for the generalized Airy resolvent eps d^2 - alpha + i(b(y0) - b(y)).
// ---------------------------------------------------------------------------
struct ResolventQuery {
  double eps = 0.0;    // diffusion scale nu / k (signed)
  double alpha = 0.0;  // spectral shift; eps * alpha >= 0
  double y0 = 0.0;     // critical point: spectral parameter b(y0)

  ResolventQuery() = default;
  ResolventQuery(double eps_, double alpha_, double y0_)
      : eps(eps_), alpha(alpha_), y0(y0_) {
    if (eps == 0.0) throw ConfigInvalid("query.eps must be nonzero");
    if (eps * alpha < 0.0)
      throw SignViolation("eps*alpha = " + std::to_string(eps * alpha));
  }

  double layer_width() const { return std::abs(cbrt_signed(eps)); }
};

inline void require_layer_resolved(const Grid& g, const ResolventQuery& q,
                                   double factor = 8.0) {
  if (g.h > q.layer_width() / factor + 1e-15)
    throw CriticalLayerUnresolved("h = " + std::to_string(g.h) + " > |eps|^{1/3}/" +
                                  std::to_string(factor));
}

// Tridiagonal assembly of eps d^2 - alpha + i(b(y0) - b(y)) with Dirichlet
// truncation. sample_b must hold b on the grid.
struct AiryOperator {
  cvector lower, diag, upper;
  Grid grid;

  AiryOperator(const Grid& g, const rvector& sample_b, const ResolventQuery& q,
               double b_at_y0)
      : grid(g) {
    const int n = g.n;
    const cdouble ih2 = q.eps / (g.h * g.h);
    lower.assign(n, ih2);
    upper.assign(n, ih2);
    diag.resize(n);
    for (int i = 0; i < n; ++i)
      diag[i] = -2.0 * ih2 - q.alpha + I * (b_at_y0 - sample_b[i]);
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
  }

  static AiryOperator build(const ShearProfile& p, const Grid& g,
                            const ResolventQuery& q) {
    return AiryOperator(g, p.sample_b(g), q, p.b(q.y0));
  }

  TridiagFactor factor() const { return TridiagFactor(lower, diag, upper); }

  cvector apply(const cvector& x) const { return tridiag_apply(lower, diag, upper, x); }
};

// ---------------------------------------------------------------------------
// Resolvent solve: eps w'' - alpha w + i(b(y0) - b) w = f.
// ---------------------------------------------------------------------------
inline cvector airy_resolvent_solve(const ShearProfile& p, const ResolventQuery& q,
                                    const Grid& grid, const cvector& f) {
  require_layer_resolved(grid, q);
  AiryOperator op = AiryOperator::build(p, grid, q);
  return op.factor().solve(f);
}

struct KernelColumn {
  ResolventQuery query;
  double source = 0.0;  // z (or rho in the v-variable form)
  Grid grid;
  cvector values;
  cvector derivative_values;
};

inline cvector centered_derivative(const Grid& g, const cvector& f) {
  const int n = g.n;
  cvector d(n);
  for (int i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * g.h);
  d[0] = (f[1] - f[0]) / g.h;
  d[n - 1] = (f[n - 1] - f[n - 2]) / g.h;
  return d;
}

inline KernelColumn airy_kernel_column(const ShearProfile& p, const ResolventQuery& q,
                                       const Grid& grid, double z) {
  require_layer_resolved(grid, q);
  if (!grid.contains(z)) throw ConfigInvalid("kernel source z outside grid");
  AiryOperator op = AiryOperator::build(p, grid, q);
  cvector rhs(grid.n, 0.0);
  rhs[grid.nearest(z)] = 1.0 / grid.h;
  KernelColumn col;
  col.query = q;
  col.source = z;
  col.grid = grid;
  col.values = op.factor().solve(rhs);
  col.derivative_values = centered_derivative(grid, col.values);
  return col;
}

// ---------------------------------------------------------------------------
// Model problem W'' - alpha_tilde W - i Y W = 1 on the line, solved by the
// explicit formula W(Y) = -int_0^inf exp(-s^3/3 - alpha_tilde s - i Y s) ds.
// The contour is rotated to s = u e^{-i pi/12} so the integrand decays
// without oscillation growth; composite 16-point Gauss-Legendre panels give
// near machine accuracy.
// ---------------------------------------------------------------------------
namespace detail {

inline const double* gl16_nodes() {
  static const double x[16] = {
      -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
      -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
      -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
      0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
      0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
      0.9894009349916499};
  return x;
}

inline const double* gl16_weights() {
  static const double w[16] = {
      0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
      0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
      0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
      0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
      0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
      0.0271524594117541};
  return w;
}

inline cdouble model_airy_value(double alpha_tilde, double Y) {
  const bool flip = Y < 0.0;
  const double Ya = std::abs(Y);
  const double theta = M_PI / 12.0;
  const cdouble ray = std::polar(1.0, -theta);
  const cdouble ray3 = std::polar(1.0, -3.0 * theta);
  const double U = 6.0;
  const int panels = 60;
  const double pw = U / panels;
  cdouble acc = 0.0;
  const double* xs = gl16_nodes();
  const double* ws = gl16_weights();
  for (int pnl = 0; pnl < panels; ++pnl) {
    double a = pnl * pw;
    for (int j = 0; j < 16; ++j) {
      double u = a + 0.5 * pw * (xs[j] + 1.0);
      cdouble s = ray * u;
      cdouble e = -ray3 * u * u * u / 3.0 - alpha_tilde * s - I * Ya * s;
      acc += ws[j] * std::exp(e);
    }
  }
  acc *= 0.5 * pw * ray;
  cdouble W = -acc;
  return flip ? std::conj(W) : W;
}

}  // namespace detail

struct ModelAiry {
  double alpha_tilde = 0.0;
  Grid grid;      // Y grid
  cvector values; // W(Y)
};

inline ModelAiry model_airy_w(double alpha_tilde, const Grid& Ygrid) {
  if (alpha_tilde < 0.0) throw ConfigInvalid("alpha_tilde must be >= 0");
  ModelAiry m;
  m.alpha_tilde = alpha_tilde;
  m.grid = Ygrid;
  m.values.resize(Ygrid.n);
  for (int i = 0; i < Ygrid.n; ++i)
    m.values[i] = detail::model_airy_value(alpha_tilde, Ygrid.point(i));
  return m;
}

// ---------------------------------------------------------------------------
// Kernel columns in the renormalized model variables: the physical column at
// source z = y0 + eps^{1/3} Z, rescaled by K(Y,Z) = eps^{2/3} k*(y,z;y0) with
// Y = eps^{-1/3}(y - y0) and alpha_tilde = eps^{-1/3} alpha. Under this map
// the operator becomes d_Y^2 - alpha_tilde + i V(Y) with V' = b'(y0 + ...).
// ---------------------------------------------------------------------------
struct ModelColumn {
  double eps = 0.0;
  double alpha_tilde = 0.0;
  double Z = 0.0;
  Grid Ygrid;
  cvector K;
  cvector dK;  // d/dY
};

inline ModelColumn airy_model_column(const ShearProfile& p, double eps, double alpha,
                                     double y0, double Z, double Y_half_width,
                                     double points_per_layer = 16.0) {
  const double lw = std::abs(cbrt_signed(eps));
  const double h = lw / points_per_layer;
  Grid ygrid(y0 - Y_half_width * lw, h,
             static_cast<int>(std::round(2.0 * Y_half_width * lw / h)) + 1);
  ResolventQuery q(eps, alpha, y0);
  KernelColumn col = airy_kernel_column(p, q, ygrid, y0 + Z * lw);
  ModelColumn mc;
  mc.eps = eps;
  mc.alpha_tilde = std::abs(alpha) / lw;  // eps*alpha >= 0: the model shift is >= 0
  mc.Z = Z;
  mc.Ygrid = Grid(-Y_half_width, h / lw, ygrid.n);
  const double amp = std::pow(lw, 2.0);  // |eps|^{2/3}
  mc.K.resize(ygrid.n);
  mc.dK.resize(ygrid.n);
  for (int i = 0; i < ygrid.n; ++i) {
    mc.K[i] = amp * col.values[i];
    mc.dK[i] = amp * lw * col.derivative_values[i];
  }
  return mc;
}

// ---------------------------------------------------------------------------
// Kernel k_eps(v, rho; w) of
//   eps d_v^2 + eps (dB*/B*)(v+w) d_v - i v / B*(v+w)^2,
// normalized so the right-hand side is (rho + i eps^{1/3}) delta(v - rho).
// Two routes: a direct v-space discretization, and the change-of-variables
// identity k_eps(v,rho;w) = (rho + i eps^{1/3}) B*(rho+w) k*(y, z; y0) with
// y = b^{-1}(v+w), z = b^{-1}(rho+w), y0 = b^{-1}(w).
// ---------------------------------------------------------------------------
inline KernelColumn airy_kernel_vw_direct(const ShearProfile& p, double eps,
                                          const Grid& vgrid, double rho, double w) {
  ResolventQuery q(eps, 0.0, 0.0);
  require_layer_resolved(vgrid, q);
  const int n = vgrid.n;
  const double h = vgrid.h;
  cvector lo(n), di(n), up(n);
  for (int i = 0; i < n; ++i) {
    double v = vgrid.point(i);
    double bs = p.bstar(v + w);
    double adv = eps * p.dbstar(v + w) / bs;
    lo[i] = eps / (h * h) - adv / (2.0 * h);
    up[i] = eps / (h * h) + adv / (2.0 * h);
    di[i] = -2.0 * eps / (h * h) - I * v / (bs * bs);
  }
  lo[0] = 0.0;
  up[n - 1] = 0.0;
  cvector rhs(n, 0.0);
  const cdouble norm = rho + I * cbrt_signed(eps);
  rhs[vgrid.nearest(rho)] = norm / h;
  KernelColumn col;
  col.query = ResolventQuery(eps, 0.0, p.invert(w));
  col.source = rho;
  col.grid = vgrid;
  col.values = TridiagFactor(lo, di, up).solve(rhs);
  col.derivative_values = centered_derivative(vgrid, col.values);
  return col;
}

inline KernelColumn airy_kernel_vw(const ShearProfile& p, double eps,
                                   const Grid& vgrid, double rho, double w) {
  const double y0 = p.invert(w);
  const double z = p.invert(rho + w);
  // y-grid covering b^{-1}(v + w) for every v on vgrid, anchored so the
  // source z falls exactly on a node (keeps the two kernel routes consistent)
  const double ylo0 = p.invert(vgrid.left + w);
  const double yhi = p.invert(vgrid.right() + w);
  const double hy = vgrid.h * 0.9 / std::max(1.0, 1.0 / p.sigma0);
  const double ylo = z - std::ceil((z - (ylo0 - 2 * hy)) / hy) * hy;
  Grid ygrid(ylo, hy, static_cast<int>(std::ceil((yhi - ylo + 2 * hy) / hy)) + 1);
  ResolventQuery q(eps, 0.0, y0);
  KernelColumn phys = airy_kernel_column(p, q, ygrid, z);
  const cdouble norm = (rho + I * cbrt_signed(eps)) * p.bstar(rho + w);
  KernelColumn col;
  col.query = q;
  col.source = rho;
  col.grid = vgrid;
  col.values.resize(vgrid.n);
  col.derivative_values.resize(vgrid.n);
  for (int i = 0; i < vgrid.n; ++i) {
    double y = p.invert(vgrid.point(i) + w);
    col.values[i] = norm * interp_cubic(ygrid, phys.values, y);
    col.derivative_values[i] =
        norm * interp_cubic(ygrid, phys.derivative_values, y) / p.bprime(y);
  }
  return col;
}

// ---------------------------------------------------------------------------
// Envelope verification over a scan of model-variable kernel columns.
// Constants are fitted from the data, never asserted against theory values.
// ---------------------------------------------------------------------------
struct BoundEnvelopeReport {
  int n_columns = 0;
  // diagonal comparability: |K(Z,Z)| <alpha,Z>^{1/2} in a fixed band
  double diag_band_min = 0.0, diag_band_max = 0.0;
  double diag_ratio = 0.0;
  // off-diagonal decay fit: log(|K| <a,Z>^{1/2}) ~ -c0 * <a,Y,Z>^{1/2}|Y-Z|
  double c0_fit = 0.0;
  double c0_fit_residual_rel = 0.0;
  // derivative envelope fit per the same scaling
  double c0_deriv_fit = 0.0;
  double c0_deriv_residual_rel = 0.0;
  // entanglement functional: largest admissible c0 and the worst normalized
  // functional value at that c0 (>= -1e-10 expected)
  double c0_entangle = 0.0;
  double entangle_min = 0.0;
};

namespace detail {

struct TentCutoff {
  double a1, mid, a2;
  double phi(double y) const {
    if (y <= a1 || y >= a2) return 0.0;
    return (y <= mid) ? (y - a1) / (mid - a1) : (a2 - y) / (a2 - mid);
  }
  double dphi(double y) const {
    if (y <= a1 || y >= a2) return 0.0;
    return (y <= mid) ? 1.0 / (mid - a1) : -1.0 / (a2 - mid);
  }
};

}  // namespace detail

inline BoundEnvelopeReport verify_airy_bounds(const std::vector<ModelColumn>& columns) {
  if (columns.size() < 10)
    throw InsufficientScan("need >= 10 kernel columns, got " +
                           std::to_string(columns.size()));
  BoundEnvelopeReport rep;
  rep.n_columns = static_cast<int>(columns.size());

  double dmin = 1e300, dmax = 0.0;
  rvector xs, ys, xs_d, ys_d;
  for (const auto& c : columns) {
    const double a = c.alpha_tilde;
    const double wz = std::sqrt(bracket(a, c.Z));
    int iz = c.Ygrid.nearest(c.Z);
    double diag = std::abs(c.K[iz]) * wz;
    dmin = std::min(dmin, diag);
    dmax = std::max(dmax, diag);
    double peak = linf_norm(c.K);
    for (int i = 0; i < c.Ygrid.n; ++i) {
      double Y = c.Ygrid.point(i);
      double sep = std::abs(Y - c.Z);
      double wyz = std::sqrt(bracket(a, Y, c.Z));
      if (sep * wyz < 2.0) continue;  // diagonal region excluded from the fit
      double m = std::abs(c.K[i]);
      if (m < 1e-12 * peak) continue;
      xs.push_back(wyz * sep);
      ys.push_back(std::log(m * wz));
      double md = std::abs(c.dK[i]);
      if (md > 1e-12 * linf_norm(c.dK)) {
        xs_d.push_back(wyz * sep);
        ys_d.push_back(std::log(md * wz / std::sqrt(bracket(a, Y))));
      }
    }
  }
  rep.diag_band_min = dmin;
  rep.diag_band_max = dmax;
  rep.diag_ratio = dmax / std::max(dmin, 1e-300);
  if (xs.size() >= 8) {
    LineFit f = fit_line(xs, ys);
    rep.c0_fit = -f.slope;
    double spread = *std::max_element(ys.begin(), ys.end()) -
                    *std::min_element(ys.begin(), ys.end());
    rep.c0_fit_residual_rel = spread > 0 ? f.rms_residual / spread : 0.0;
  }
  if (xs_d.size() >= 8) {
    LineFit f = fit_line(xs_d, ys_d);
    rep.c0_deriv_fit = -f.slope;
    double spread = *std::max_element(ys_d.begin(), ys_d.end()) -
                    *std::min_element(ys_d.begin(), ys_d.end());
    rep.c0_deriv_residual_rel = spread > 0 ? f.rms_residual / spread : 0.0;
  }

  // Entanglement: largest c0 with int (|phi'|^2 - c0^2 <a,Y> phi^2)|K|^2 >= 0
  // over a family of tents on sign-definite intervals.
  double c0sq_admissible = 1e300;
  std::vector<std::pair<const ModelColumn*, detail::TentCutoff>> tents;
  for (const auto& c : columns) {
    double ymax = std::min(-c.Ygrid.left, c.Ygrid.right());
    for (double base : {0.5, 2.0, 4.0}) {
      for (double width : {2.0, 4.0, 8.0}) {
        if (base + width > ymax) continue;
        for (double sign : {1.0, -1.0}) {
          detail::TentCutoff t{sign > 0 ? base : -(base + width),
                               sign > 0 ? base + 0.5 * width : -(base + 0.5 * width),
                               sign > 0 ? base + width : -base};
          double A = 0.0, B = 0.0;
          for (int i = 0; i < c.Ygrid.n; ++i) {
            double Y = c.Ygrid.point(i);
            double k2 = std::norm(c.K[i]);
            A += sq(t.dphi(Y)) * k2;
            B += bracket(c.alpha_tilde, Y) * sq(t.phi(Y)) * k2;
          }
          A *= c.Ygrid.h;
          B *= c.Ygrid.h;
          if (B > 1e-300) {
            c0sq_admissible = std::min(c0sq_admissible, A / B);
            tents.emplace_back(&c, t);
          }
        }
      }
    }
  }
  rep.c0_entangle = (c0sq_admissible < 1e300) ? std::sqrt(c0sq_admissible) : 0.0;
  double worst = 0.0;
  bool first = true;
  for (auto& [cp, t] : tents) {
    const auto& c = *cp;
    double A = 0.0, B = 0.0;
    for (int i = 0; i < c.Ygrid.n; ++i) {
      double Y = c.Ygrid.point(i);
      double k2 = std::norm(c.K[i]);
      A += sq(t.dphi(Y)) * k2;
      B += bracket(c.alpha_tilde, Y) * sq(t.phi(Y)) * k2;
    }
    double num = (A - c0sq_admissible * B);
    double den = A + c0sq_admissible * B;
    double val = (den > 0) ? num / den : 0.0;
    if (first || val < worst) worst = val;
    first = false;
  }
  rep.entangle_min = worst;
  return rep;
}

}  // namespace shearlab
