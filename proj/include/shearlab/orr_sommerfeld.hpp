#pragma once

#include <Eigen/Dense>

#include "shearlab/airy.hpp"
#include "shearlab/common.hpp"
#include "shearlab/elliptic.hpp"
#include "shearlab/profile.hpp"

namespace shearlab {

// ---------------------------------------------------------------------------
// Initial data: compactly supported vorticity on the y-grid plus its profile
// F0(v) = omega0(b^{-1}(v)).
// ---------------------------------------------------------------------------
struct InitialData {
  Grid ygrid;
  cvector omega0;

  cdouble F0(const ShearProfile& p, double v) const {
    double y = p.invert(v);
    if (y <= ygrid.left || y >= ygrid.right()) return 0.0;
    return interp_cubic(ygrid, omega0, y);
  }
};

// Default initial data: Gaussian bump times a smooth compactly supported
// cutoff, centered inside the coupling region so both the nonlocal term and
// the critical layers are exercised.
inline InitialData default_initial_data(const Grid& g, double center = 0.5,
                                        double width = 0.5, double cut_radius = 2.0) {
  InitialData init;
  init.ygrid = g;
  init.omega0.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    double y = g.point(i);
    double s = (y - center) / cut_radius;
    init.omega0[i] = std::exp(-sq((y - center) / width) / 2.0) *
                     (std::abs(s) < 1.0 ? bump_unit(s) * std::exp(1.0) : 0.0);
  }
  return init;
}

struct OsSolution {
  cvector w;     // vorticity-side resolvent
  cvector psi;   // stream-side: (d^2 - k^2) psi = w
  ResolventQuery query;
  ModeParams mode;
  double residual = 0.0;  // relative residual of the coupled equation
};

// ---------------------------------------------------------------------------
// Coupled resolvent solver for
//   eps w'' - alpha w + i(b(y0) - b) w + i b'' G_k w = f,   psi = G_k w,
// reduced by a Woodbury step: the coupling has nonzero rows only on
// supp b'', so the dense block is m x m with m = #support nodes.
// ---------------------------------------------------------------------------
class OsSolver {
 public:
  OsSolver(const ShearProfile& p, const ModeParams& mode, const Grid& grid,
           double alpha = 0.0)
      : p_(p), mode_(mode), grid_(grid), alpha_(alpha),
        sample_b_(p.sample_b(grid)), sample_bpp_(p.sample_bsecond(grid)),
        gfac_(poisson_factor(mode.k, grid)) {
    double bmax = 0.0;
    for (double v : sample_bpp_) bmax = std::max(bmax, std::abs(v));
    for (int i = 0; i < grid.n; ++i)
      if (std::abs(sample_bpp_[i]) > 1e-14 * bmax) support_.push_back(i);
    ResolventQuery probe(mode.eps(), alpha, 0.0);
    require_layer_resolved(grid, probe);
  }

  const Grid& grid() const { return grid_; }
  const ModeParams& mode() const { return mode_; }
  int support_size() const { return static_cast<int>(support_.size()); }

  // Coupling is negligible once the critical point is far outside supp b'':
  // the stream function it sees decays like e^{-|k| dist}.
  bool coupling_negligible(double y0, double margin = 14.0) const {
    if (support_.empty()) return true;
    double dist = std::abs(y0) - p_.support_radius;
    return dist * std::abs(static_cast<double>(mode_.k)) > margin;
  }

  OsSolution solve(double y0, const cvector& f, bool force_coupled = false) const {
    ResolventQuery q(mode_.eps(), alpha_, y0);
    AiryOperator op(grid_, sample_b_, q, p_.b(y0));
    TridiagFactor fa = op.factor();
    OsSolution sol;
    sol.query = q;
    sol.mode = mode_;

    if (support_.empty() || (!force_coupled && coupling_negligible(y0))) {
      sol.w = fa.solve(f);
      sol.psi = gfac_.solve(sol.w);
      sol.residual = residual(op, sol, f);
      return sol;
    }

    const int m = static_cast<int>(support_.size());
    // columns G A^{-1} e_j restricted to the support, j over support nodes
    std::vector<cvector> acols(m);
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(m, m);
    cvector unit(grid_.n, 0.0);
    for (int j = 0; j < m; ++j) {
      unit[support_[j]] = 1.0;
      acols[j] = fa.solve(unit);
      unit[support_[j]] = 0.0;
      cvector gcol = gfac_.solve(acols[j]);
      const cdouble dj = I * sample_bpp_[support_[j]];
      for (int a = 0; a < m; ++a) W(a, j) += gcol[support_[a]] * dj;
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(W);
    if (lu.rcond() < 1e-14)
      throw CouplingSingular("reduced system rcond = " + std::to_string(lu.rcond()) +
                             " at y0 = " + std::to_string(y0));

    cvector a0 = fa.solve(f);
    cvector g0 = gfac_.solve(a0);
    Eigen::VectorXcd rhs(m);
    for (int j = 0; j < m; ++j) rhs[j] = g0[support_[j]];
    Eigen::VectorXcd u = lu.solve(rhs);

    sol.w = a0;
    for (int j = 0; j < m; ++j) {
      const cdouble cj = I * sample_bpp_[support_[j]] * u[j];
      for (int i = 0; i < grid_.n; ++i) sol.w[i] -= cj * acols[j][i];
    }
    sol.psi = gfac_.solve(sol.w);
    sol.residual = residual(op, sol, f);
    return sol;
  }

  // Residual of the coupled equation relative to ||f||_inf.
  double residual(const AiryOperator& op, const OsSolution& sol, const cvector& f) const {
    cvector r = op.apply(sol.w);
    for (std::size_t i = 0; i < r.size(); ++i)
      r[i] += I * sample_bpp_[i] * sol.psi[i] - f[i];
    double nf = linf_norm(f);
    return linf_norm(r) / std::max(nf, 1e-300);
  }

  const ShearProfile& profile() const { return p_; }

 private:
  const ShearProfile& p_;
  ModeParams mode_;
  Grid grid_;
  double alpha_;
  rvector sample_b_, sample_bpp_;
  std::vector<int> support_;
  TridiagFactor gfac_;
};

inline OsSolution os_resolvent_solve(const ShearProfile& p, const ModeParams& mode,
                                     const ResolventQuery& q, const Grid& grid,
                                     const cvector& f) {
  if (q.eps != mode.eps())
    throw ConfigInvalid("query.eps must equal nu/k");
  OsSolver solver(p, mode, grid, q.alpha);
  return solver.solve(q.y0, f, /*force_coupled=*/true);
}

// ---------------------------------------------------------------------------
// Spectral density field on (v, w) grids: Omega, Pi and the renormalized
// profile Theta(v, w) = Pi(v + w, w).
// ---------------------------------------------------------------------------
struct SpectralDensityField {
  ModeParams mode;
  Grid vgrid;        // for Omega, Pi
  Grid theta_vgrid;  // for Theta (centered near v = 0)
  Grid wgrid;
  std::vector<cvector> omega_cols;  // [w index][v index]
  std::vector<cvector> pi_cols;
  std::vector<cvector> theta_cols;

  // Row-major (v rows, w cols) packing for 2D transforms.
  cvector pack_theta() const {
    const int nv = theta_vgrid.n, nw = wgrid.n;
    cvector M(static_cast<std::size_t>(nv) * nw);
    for (int j = 0; j < nw; ++j)
      for (int i = 0; i < nv; ++i) M[static_cast<std::size_t>(i) * nw + j] = theta_cols[j][i];
    return M;
  }
};

inline SpectralDensityField spectral_density(const ShearProfile& p,
                                             const ModeParams& mode,
                                             const InitialData& init,
                                             const Grid& wgrid, const Grid& vgrid,
                                             const Grid& theta_vgrid) {
  OsSolver solver(p, mode, init.ygrid, /*alpha=*/0.0);
  SpectralDensityField field;
  field.mode = mode;
  field.vgrid = vgrid;
  field.theta_vgrid = theta_vgrid;
  field.wgrid = wgrid;
  field.omega_cols.resize(wgrid.n);
  field.pi_cols.resize(wgrid.n);
  field.theta_cols.resize(wgrid.n);

  const Grid& yg = init.ygrid;
  parallel_for(wgrid.n, [&](int j) {
    double w = wgrid.point(j);
    double y0 = p.invert(w);
    OsSolution sol;
    try {
      sol = solver.solve(y0, init.omega0);
    } catch (LabError& e) {
      throw LabError(std::string(e.what()) + " [while assembling w = " +
                     std::to_string(w) + "]");
    }
    auto sample = [&](const cvector& col, double v) -> cdouble {
      double y = p.invert(v);
      if (y <= yg.left || y >= yg.right()) return 0.0;
      return interp_cubic(yg, col, y);
    };
    cvector oc(vgrid.n), pc(vgrid.n), tc(theta_vgrid.n);
    for (int i = 0; i < vgrid.n; ++i) {
      oc[i] = sample(sol.w, vgrid.point(i));
      pc[i] = sample(sol.psi, vgrid.point(i));
    }
    for (int i = 0; i < theta_vgrid.n; ++i)
      tc[i] = sample(sol.psi, theta_vgrid.point(i) + w);
    field.omega_cols[j] = std::move(oc);
    field.pi_cols[j] = std::move(pc);
    field.theta_cols[j] = std::move(tc);
  });
  return field;
}

// ---------------------------------------------------------------------------
// Alternative route to Theta(., w): the integral equation
//   Theta(v) + i int G_k(v,v';w) k_eps(v',rho;w) (dB*/B*)(rho+w)
//                 Theta(rho)/(rho + i eps^{1/3}) drho dv' = F(v),
// with F assembled from the initial data the same way. The unknown enters
// the integral only where dB* != 0, so a Woodbury block of that size solves
// the dense system directly.
// ---------------------------------------------------------------------------
inline cvector theta_integral_solve(const ShearProfile& p, const ModeParams& mode,
                                    const InitialData& init, double w,
                                    const Grid& vgrid) {
  const double eps = mode.eps();
  ResolventQuery probe(eps, 0.0, 0.0);
  require_layer_resolved(vgrid, probe);
  const double reg = cbrt_signed(eps);
  TridiagFactor gfac = poisson_factor_vw(p, mode.k, vgrid, w);

  // Right-hand side F(., w) from the initial data.
  cvector source(vgrid.n, 0.0);
  bool any = false;
  for (int i = 0; i < vgrid.n; ++i) {
    double rho = vgrid.point(i);
    cdouble f0 = init.F0(p, rho + w);
    if (std::abs(f0) == 0.0) continue;
    any = true;
    double bs = p.bstar(rho + w);
    cdouble coef = f0 / (bs * bs) / (rho + I * reg) * vgrid.h;
    KernelColumn kc = airy_kernel_vw_direct(p, eps, vgrid, rho, w);
    for (int a = 0; a < vgrid.n; ++a) source[a] += coef * kc.values[a];
  }
  cvector F = any ? gfac.solve(source) : cvector(vgrid.n, 0.0);

  // Coupling columns where dB*(rho + w) is nonzero.
  std::vector<int> support;
  for (int i = 0; i < vgrid.n; ++i)
    if (std::abs(p.dbstar(vgrid.point(i) + w)) > 1e-14) support.push_back(i);
  if (support.empty()) return F;  // couette: Theta = F exactly

  const int m = static_cast<int>(support.size());
  std::vector<cvector> cols(m);
  for (int j = 0; j < m; ++j) {
    double rho = vgrid.point(support[j]);
    double bs = p.bstar(rho + w);
    cdouble coef = I * p.dbstar(rho + w) / bs / (rho + I * reg) * vgrid.h;
    KernelColumn kc = airy_kernel_vw_direct(p, eps, vgrid, rho, w);
    cols[j] = gfac.solve(kc.values);
    for (auto& x : cols[j]) x *= coef;
  }
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(m, m);
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < m; ++a) W(a, j) += cols[j][support[a]];
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(W);
  if (lu.rcond() < 1e-14)
    throw DenseSystemSingular("integral-form system rcond = " +
                              std::to_string(lu.rcond()));
  Eigen::VectorXcd rhs(m);
  for (int j = 0; j < m; ++j) rhs[j] = F[support[j]];
  Eigen::VectorXcd u = lu.solve(rhs);
  cvector theta = F;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < vgrid.n; ++i) theta[i] -= cols[j][i] * u[j];
  return theta;
}

// ---------------------------------------------------------------------------
// Limiting-absorption scan: smallest H^1_k-weighted singular value of
// psi -> psi + T_{eps,alpha,y0}(i b'' psi) over an (eps, alpha, y0) scan.
// The perturbation has rank <= m, so the singular spectrum differs from 1
// only on a 2m-dimensional subspace; the scan works there.
// ---------------------------------------------------------------------------
struct LapScanPoint {
  double eps = 0.0, alpha = 0.0, y0 = 0.0;
  double sigma_min = 1.0;
};

struct LapScanReport {
  std::vector<LapScanPoint> points;
  double kappa_hat = 1.0;
};

namespace detail {

// Cholesky of the symmetric positive definite tridiagonal H^1_k Gram matrix
// W = k^2 I + D^T D (forward differences). L is lower bidiagonal.
struct BidiagChol {
  rvector d, s;  // diagonal and subdiagonal of L

  BidiagChol(int n, double k, double h) : d(n), s(n, 0.0) {
    const double ih2 = 1.0 / (h * h);
    rvector wd(n, k * k + 2.0 * ih2);
    wd[0] = wd[n - 1] = k * k + ih2;
    const double wo = -ih2;
    d[0] = std::sqrt(wd[0]);
    for (int i = 1; i < n; ++i) {
      s[i] = wo / d[i - 1];
      d[i] = std::sqrt(wd[i] - s[i] * s[i]);
    }
  }

  // x = L^T psi
  cvector applyLT(const cvector& psi) const {
    const int n = static_cast<int>(d.size());
    cvector x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = d[i] * psi[i];
      if (i + 1 < n) x[i] += s[i + 1] * psi[i + 1];
    }
    return x;
  }

  // solve L r = e (forward substitution)
  cvector solveL(const cvector& e) const {
    const int n = static_cast<int>(d.size());
    cvector r(n);
    for (int i = 0; i < n; ++i) {
      cdouble acc = e[i];
      if (i > 0) acc -= s[i] * r[i - 1];
      r[i] = acc / d[i];
    }
    return r;
  }
};

}  // namespace detail

// sigma_min of I + sum_j u_j r_j^T in the Euclidean norm, computed on the
// invariant subspace spanned by {u_j, r_j}.
inline double lowrank_sigma_min(const std::vector<cvector>& us,
                                const std::vector<cvector>& rs) {
  const int m = static_cast<int>(us.size());
  if (m == 0) return 1.0;
  const std::size_t n = us[0].size();
  std::vector<cvector> basis;
  auto add_vec = [&](const cvector& v) {
    cvector q = v;
    double nrm0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm0 += std::norm(q[i]);
    nrm0 = std::sqrt(nrm0);
    if (nrm0 == 0.0) return;
    for (int pass = 0; pass < 2; ++pass) {  // reorthogonalize: twice is enough
      for (const auto& b : basis) {
        cdouble proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += std::conj(b[i]) * q[i];
        for (std::size_t i = 0; i < n; ++i) q[i] -= proj * b[i];
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(q[i]);
    nrm = std::sqrt(nrm);
    if (nrm > 1e-10 * nrm0) {
      for (auto& x : q) x /= nrm;
      basis.push_back(std::move(q));
    }
  };
  for (const auto& u : us) add_vec(u);
  for (const auto& r : rs) add_vec(r);
  const int q = static_cast<int>(basis.size());

  auto applyM = [&](const cvector& x) {
    cvector out(n, 0.0);
    for (int j = 0; j < m; ++j) {
      cdouble c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += rs[j][i] * x[i];  // r real
      for (std::size_t i = 0; i < n; ++i) out[i] += us[j][i] * c;
    }
    return out;
  };
  auto applyMH = [&](const cvector& x) {
    cvector out(n, 0.0);
    for (int j = 0; j < m; ++j) {
      cdouble c = 0.0;
      for (std::size_t i = 0; i < n; ++i) c += std::conj(us[j][i]) * x[i];
      for (std::size_t i = 0; i < n; ++i) out[i] += rs[j][i] * c;
    }
    return out;
  };

  // R = M + M^H + M^H M restricted to the basis
  Eigen::MatrixXcd RQ(q, q);
  std::vector<cvector> Rq(q);
  for (int c = 0; c < q; ++c) {
    cvector mq = applyM(basis[c]);
    cvector mhq = applyMH(basis[c]);
    cvector mhmq = applyMH(mq);
    cvector acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = mq[i] + mhq[i] + mhmq[i];
    Rq[c] = std::move(acc);
  }
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) {
      cdouble acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += std::conj(basis[r][i]) * Rq[c][i];
      RQ(r, c) = acc;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (RQ + RQ.adjoint()));
  double lmin = eig.eigenvalues().minCoeff();
  double s2 = std::min(1.0, 1.0 + lmin);
  return std::sqrt(std::max(s2, 0.0));
}

inline LapScanPoint lap_sigma_min(const ShearProfile& p, const ModeParams& mode,
                                  const Grid& grid, double eps, double alpha,
                                  double y0) {
  LapScanPoint pt{eps, alpha, y0, 1.0};
  rvector bpp = p.sample_bsecond(grid);
  std::vector<int> support;
  double bmax = 0.0;
  for (double v : bpp) bmax = std::max(bmax, std::abs(v));
  for (int i = 0; i < grid.n; ++i)
    if (std::abs(bpp[i]) > 1e-14 * bmax) support.push_back(i);
  if (support.empty()) return pt;  // couette: the operator is the identity

  ResolventQuery q(eps, alpha, y0);
  require_layer_resolved(grid, q);
  AiryOperator op = AiryOperator::build(p, grid, q);
  TridiagFactor fa = op.factor();
  TridiagFactor gfac = poisson_factor(mode.k, grid);
  detail::BidiagChol chol(grid.n, std::abs(static_cast<double>(mode.k)), grid.h);

  const int m = static_cast<int>(support.size());
  std::vector<cvector> us(m), rs(m);
  cvector unit(grid.n, 0.0);
  for (int j = 0; j < m; ++j) {
    unit[support[j]] = 1.0;
    cvector pj = gfac.solve(fa.solve(unit));
    for (auto& x : pj) x *= I * bpp[support[j]];
    us[j] = chol.applyLT(pj);
    rs[j] = chol.solveL(unit);
    unit[support[j]] = 0.0;
  }
  pt.sigma_min = lowrank_sigma_min(us, rs);
  return pt;
}

inline LapScanReport lap_kappa_scan(const ShearProfile& p, const ModeParams& mode,
                                    const rvector& eps_values,
                                    const rvector& alpha_factors,
                                    const rvector& y0_values,
                                    double half_width = 10.0,
                                    double points_per_layer = 8.0) {
  if (eps_values.empty() || alpha_factors.empty() || y0_values.empty())
    throw ConfigInvalid("lap scan grids must be nonempty");
  struct Task { double eps, alpha, y0; };
  std::vector<Task> tasks;
  for (double eps : eps_values)
    for (double af : alpha_factors)
      for (double y0 : y0_values) tasks.push_back({eps, af * eps, y0});
  LapScanReport rep;
  rep.points.resize(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int t) {
    const Task& tk = tasks[t];
    double h = std::abs(cbrt_signed(tk.eps)) / points_per_layer;
    Grid grid = Grid::symmetric(half_width, h);
    rep.points[t] = lap_sigma_min(p, mode, grid, tk.eps, tk.alpha, tk.y0);
  });
  rep.kappa_hat = 1.0;
  for (const auto& pt : rep.points) rep.kappa_hat = std::min(rep.kappa_hat, pt.sigma_min);
  return rep;
}

// ---------------------------------------------------------------------------
// Distributional limit of the uncoupled resolvent as eps -> 0 (alpha = |eps|
// on the matching sign): checks convergence to
//   P.V. -f phi / (i(b - b(y0)))  -/+  pi f(y0) phi(y0) / b'(y0).
// ---------------------------------------------------------------------------
struct LimitReport {
  rvector eps_seq;
  std::vector<cdouble> integrals;
  cdouble target = 0.0;
  rvector errors;       // |I(eps) - target| / max(1, |target|)
  bool decreasing = true;
  double final_error = 0.0;
  double delta_coeff = 0.0;  // measured coefficient of the singular branch
};

// P.V. int f phi / (b - b(y0)) dy, evaluated in the velocity variable
// u = b(y) - b(y0) on a symmetric exclusion-free grid: the singular part is
// subtracted analytically, H(0) ln(U2/U1), and the remainder is smooth.
inline cdouble pv_integral(const ShearProfile& p, const Grid& g, const cvector& f,
                           const cvector& phi, double y0, double du = 5e-4) {
  const double b0 = p.b(y0);
  auto H = [&](double u) -> cdouble {
    double y = p.invert(b0 + u);
    if (y <= g.left || y >= g.right()) return 0.0;
    return interp_cubic(g, f, y) * interp_cubic(g, phi, y) / p.bprime(y);
  };
  const double U1 = b0 - p.b(g.left), U2 = p.b(g.right()) - b0;
  const cdouble H0 = H(0.0);
  const int n1 = static_cast<int>(U1 / du), n2 = static_cast<int>(U2 / du);
  cvector vals(n1 + n2 + 1);
  for (int i = -n1; i <= n2; ++i) {
    double u = i * du;
    vals[i + n1] = (i == 0) ? (H(du) - H(-du)) / (2.0 * du)  // limit value H'(0)
                            : (H(u) - H0) / u;
  }
  return trapezoid(vals, du) + H0 * std::log(U2 / U1);
}

inline LimitReport pv_delta_limit_check(const ShearProfile& p, const Grid& g,
                                        const cvector& f, const cvector& phi,
                                        double y0, const rvector& eps_seq) {
  LimitReport rep;
  rep.eps_seq = eps_seq;
  const double b0 = p.b(y0);
  // target = i P.V. int f phi/(b - b0) - sign(eps) pi f(y0) phi(y0) / b'(y0)
  cdouble pv = pv_integral(p, g, f, phi, y0);
  cdouble f0 = interp_cubic(g, f, y0) * interp_cubic(g, phi, y0) / p.bprime(y0);
  for (double eps : eps_seq) {
    if (eps == 0.0) throw ConfigInvalid("eps sequence must avoid zero");
    ResolventQuery q(eps, std::abs(eps) * (eps > 0 ? 1.0 : -1.0), y0);
    Grid fine = g;
    if (fine.h > q.layer_width() / 8.0) {
      double h = q.layer_width() / 10.0;
      fine = Grid::symmetric(std::abs(g.left), h);
    }
    cvector ff(fine.n), pp(fine.n);
    for (int i = 0; i < fine.n; ++i) {
      double y = fine.point(i);
      ff[i] = (y > g.left && y < g.right()) ? interp_cubic(g, f, y) : cdouble(0.0);
      pp[i] = (y > g.left && y < g.right()) ? interp_cubic(g, phi, y) : cdouble(0.0);
    }
    cvector w = airy_resolvent_solve(p, q, fine, ff);
    cvector integrand(fine.n);
    for (int i = 0; i < fine.n; ++i) integrand[i] = w[i] * pp[i];
    rep.integrals.push_back(trapezoid(integrand, fine.h));
  }
  const double sgn = eps_seq.back() > 0 ? -1.0 : 1.0;
  rep.target = I * pv + sgn * M_PI * f0;
  double prev = 1e300;
  for (std::size_t i = 0; i < rep.integrals.size(); ++i) {
    double err = std::abs(rep.integrals[i] - rep.target) /
                 std::max(1.0, std::abs(rep.target));
    rep.errors.push_back(err);
    if (err > prev * 1.1) rep.decreasing = false;  // allow small wiggle
    prev = err;
  }
  rep.final_error = rep.errors.back();
  // coefficient of the singular branch: (I - i pv) / (pi f0) -> -sgn(eps)
  if (std::abs(f0) > 1e-300)
    rep.delta_coeff = ((rep.integrals.back() - I * pv) / (M_PI * f0)).real();
  return rep;
}

}  // namespace shearlab
