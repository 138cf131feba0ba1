#pragma once

#include <string>

#include "shearlab/common.hpp"

namespace shearlab {

// C-infinity bump exp(-1/(1-s^2)) on (-1,1), zero outside.
inline double bump_unit(double s) {
  double q = 1.0 - s * s;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q);
}

enum class ProfileKind { couette, bump };

struct ModeParams {
  int k = 1;        // x-wavenumber, nonzero
  double nu = 0.0;  // viscosity in (0,1)

  ModeParams() = default;
  ModeParams(int k_, double nu_) : k(k_), nu(nu_) {
    if (k == 0) throw ConfigInvalid("mode.k must be nonzero");
    if (!(nu > 0.0 && nu < 1.0)) throw ConfigInvalid("mode.nu must lie in (0,1)");
  }

  double eps() const { return nu / k; }  // signed diffusion scale
};

// ---------------------------------------------------------------------------
// Monotone shear profile b with
//   b''(y) = amplitude * bump(y / R),
//   b'(y)  = 1 + amplitude * B1(y),   B1(y) = int_0^y bump(s/R) ds,
//   b(y)   = y + amplitude * B2(y),   B2(y) = int_0^y B1(s) ds,   b(0) = 0.
// The antiderivatives are cached on a fine internal grid by cumulative
// Simpson; off-node values add one local Simpson segment so b is smooth
// enough for Newton inversion. Immutable after construction.
// ---------------------------------------------------------------------------
class ShearProfile {
 public:
  ProfileKind kind = ProfileKind::couette;
  double amplitude = 0.0;
  double support_radius = 1.0;  // supp b'' = [-R, R]
  double sigma0 = 1.0;          // measured slope pinch: min(min b', 1/max b')
  double delta0 = 0.5;          // nominal Gevrey index of b''

  double b(double y) const {
    if (kind == ProfileKind::couette) return y;
    return y + amplitude * B2(y);
  }

  double bprime(double y) const {
    if (kind == ProfileKind::couette) return 1.0;
    return 1.0 + amplitude * B1(y);
  }

  double bsecond(double y) const {
    if (kind == ProfileKind::couette) return 0.0;
    return amplitude * bump_unit(y / support_radius);
  }

  bool is_couette() const { return kind == ProfileKind::couette; }

  // b'(y) in the velocity variable v = b(y).
  double bstar(double v) const { return bprime(invert(v)); }
  // d/dv bstar = b''(y)/b'(y) at y = b^{-1}(v).
  double dbstar(double v) const {
    double y = invert(v);
    return bsecond(y) / bprime(y);
  }

  // Inverse of b by safeguarded Newton with bisection fallback.
  double invert(double v, double tol_scale = 1e-13) const {
    if (kind == ProfileKind::couette) return v;
    double span = 2.0;
    double lo = v - span, hi = v + span;
    while (b(lo) > v) { span *= 2.0; lo = v - span; }
    while (b(hi) < v) { span *= 2.0; hi = v + span; }
    double y = v;
    const double tol = tol_scale * (1.0 + std::abs(v));
    for (int it = 0; it < 100; ++it) {
      double f = b(y) - v;
      if (std::abs(f) <= tol) return y;
      if (f > 0) hi = std::min(hi, y); else lo = std::max(lo, y);
      double ynew = y - f / bprime(y);
      if (!(ynew > lo && ynew < hi)) ynew = 0.5 * (lo + hi);
      y = ynew;
    }
    if (std::abs(b(y) - v) <= 1e-9 * (1.0 + std::abs(v))) return y;
    throw NonConvergence("profile inversion stalled at v=" + std::to_string(v));
  }

  rvector invert_grid(const rvector& vs) const {
    rvector ys(vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) ys[i] = invert(vs[i]);
    return ys;
  }

  rvector sample_b(const Grid& g) const {
    rvector out(g.n);
    for (int i = 0; i < g.n; ++i) out[i] = b(g.point(i));
    return out;
  }
  rvector sample_bprime(const Grid& g) const {
    rvector out(g.n);
    for (int i = 0; i < g.n; ++i) out[i] = bprime(g.point(i));
    return out;
  }
  rvector sample_bsecond(const Grid& g) const {
    rvector out(g.n);
    for (int i = 0; i < g.n; ++i) out[i] = bsecond(g.point(i));
    return out;
  }

  friend ShearProfile build_profile(ProfileKind kind, double amplitude,
                                    double support_radius, double sigma_floor);

 private:
  double node(int j) const { return -support_radius + j * cache_h_; }

  // B1(y) = int_0^y bump(s/R) ds; constant outside [-R, R].
  double B1(double y) const {
    const double R = support_radius;
    if (y <= -R) return B1_lo_;
    if (y >= R) return B1_hi_;
    int j = std::clamp(static_cast<int>(std::floor((y + R) / cache_h_)), 0, cache_n_ - 2);
    double a = node(j), m = 0.5 * (a + y);
    double seg = (y - a) / 6.0 *
                 (bump_unit(a / R) + 4.0 * bump_unit(m / R) + bump_unit(y / R));
    return tabB1_[j] + seg;
  }

  // B2(y) = int_0^y B1(s) ds; linear continuation outside [-R, R].
  double B2(double y) const {
    const double R = support_radius;
    if (y <= -R) return B2_lo_ + B1_lo_ * (y + R);
    if (y >= R) return B2_hi_ + B1_hi_ * (y - R);
    int j = std::clamp(static_cast<int>(std::floor((y + R) / cache_h_)), 0, cache_n_ - 2);
    double a = node(j), m = 0.5 * (a + y);
    double seg = (y - a) / 6.0 * (B1(a) + 4.0 * B1(m) + B1(y));
    return tabB2_[j] + seg;
  }

  rvector tabB1_, tabB2_;   // values at cache nodes, based at y = 0
  double cache_h_ = 0.0;
  int cache_n_ = 0;
  double B1_lo_ = 0.0, B1_hi_ = 0.0;
  double B2_lo_ = 0.0, B2_hi_ = 0.0;
};

inline ShearProfile build_profile(ProfileKind kind, double amplitude,
                                  double support_radius, double sigma_floor = 0.05) {
  if (!(support_radius > 0.0)) throw ConfigInvalid("support_radius must be positive");
  ShearProfile p;
  p.kind = kind;
  p.support_radius = support_radius;
  if (kind == ProfileKind::couette) return p;
  p.amplitude = amplitude;

  const int n = 8193;  // odd; off-node Simpson segments keep O(h^4) accuracy
  const double R = support_radius;
  const double h = 2.0 * R / (n - 1);
  p.cache_n_ = n;
  p.cache_h_ = h;

  p.tabB1_.assign(n, 0.0);
  for (int i = 1; i < n; ++i) {
    double a = p.node(i - 1), b = p.node(i), m = 0.5 * (a + b);
    p.tabB1_[i] = p.tabB1_[i - 1] +
                  h / 6.0 * (bump_unit(a / R) + 4.0 * bump_unit(m / R) + bump_unit(b / R));
  }
  const int mid = (n - 1) / 2;  // node at y = 0
  const double shift1 = p.tabB1_[mid];
  for (auto& x : p.tabB1_) x -= shift1;
  p.B1_lo_ = p.tabB1_.front();
  p.B1_hi_ = p.tabB1_.back();

  p.tabB2_.assign(n, 0.0);
  for (int i = 1; i < n; ++i) {
    double a = p.node(i - 1), b = p.node(i), m = 0.5 * (a + b);
    p.tabB2_[i] = p.tabB2_[i - 1] + h / 6.0 * (p.B1(a) + 4.0 * p.B1(m) + p.B1(b));
  }
  const double shift2 = p.tabB2_[mid];
  for (auto& x : p.tabB2_) x -= shift2;
  p.B2_lo_ = p.tabB2_.front();
  p.B2_hi_ = p.tabB2_.back();

  // Measured slope band over the support plus the flat tails.
  double bp_min = 1.0, bp_max = 1.0;
  for (int i = 0; i <= 4000; ++i) {
    double y = -R + 2.0 * R * i / 4000.0;
    double bp = p.bprime(y);
    bp_min = std::min(bp_min, bp);
    bp_max = std::max(bp_max, bp);
  }
  for (double y : {-2.0 * R, 2.0 * R}) {
    bp_min = std::min(bp_min, p.bprime(y));
    bp_max = std::max(bp_max, p.bprime(y));
  }
  if (bp_min <= 0.0)
    throw MonotonicityViolation("min b' = " + std::to_string(bp_min));
  p.sigma0 = std::min(bp_min, 1.0 / bp_max);
  if (p.sigma0 < sigma_floor)
    throw AssumptionViolation("measured sigma0 = " + std::to_string(p.sigma0) +
                              " below floor " + std::to_string(sigma_floor));
  return p;
}

inline ShearProfile build_profile(const std::string& kind, double amplitude,
                                  double support_radius, double sigma_floor = 0.05) {
  if (kind == "couette")
    return build_profile(ProfileKind::couette, amplitude, support_radius, sigma_floor);
  if (kind == "bump")
    return build_profile(ProfileKind::bump, amplitude, support_radius, sigma_floor);
  throw ConfigInvalid("unknown profile kind '" + kind + "'");
}

inline double invert_profile(const ShearProfile& p, double v) { return p.invert(v); }

// ---------------------------------------------------------------------------
// Assumption report: measured slope band, support containment, and the
// stretched-exponential decay rate of the Fourier transform of b''.
// ---------------------------------------------------------------------------
struct AssumptionReport {
  double sigma0_hat = 1.0;
  double bprime_min = 1.0;
  double bprime_max = 1.0;
  bool support_ok = true;
  double gevrey_decay_fit = 0.0;  // fitted c in |b''^(xi)| ~ exp(-c <xi>^{1/2})
  double gevrey_fit_residual = 0.0;
};

// declared_radius defaults to the profile's own support radius; passing a
// smaller value checks a declared support bound against the actual b''.
inline AssumptionReport check_assumptions(const ShearProfile& p, const Grid& grid,
                                          double declared_radius = -1.0) {
  if (grid.h > 1e-2 + 1e-12)
    throw ConfigInvalid("assumption grid spacing must be <= 1e-2");
  if (declared_radius <= 0.0) declared_radius = p.support_radius;
  AssumptionReport rep;
  double bmin = 1e300, bmax = -1e300;
  bool support_ok = true;
  for (int i = 0; i < grid.n; ++i) {
    double y = grid.point(i);
    double bp = p.bprime(y);
    bmin = std::min(bmin, bp);
    bmax = std::max(bmax, bp);
    if (std::abs(y) > declared_radius * (1.0 + 1e-9) && std::abs(p.bsecond(y)) > 1e-13)
      support_ok = false;
  }
  rep.bprime_min = bmin;
  rep.bprime_max = bmax;
  rep.support_ok = support_ok;
  rep.sigma0_hat = std::min(bmin, 1.0 / bmax);

  if (p.is_couette()) return rep;  // \hat{b''} vanishes identically

  // Decay of |b''^| by direct quadrature of the Fourier integral on [-R, R].
  rvector xs, logs;
  for (double xi = 4.0; xi <= 120.0; xi *= 1.3) {
    cdouble acc = 0.0;
    const int nq = 4096;
    double a = -p.support_radius, bb = p.support_radius, hq = (bb - a) / nq;
    for (int i = 0; i <= nq; ++i) {
      double y = a + i * hq;
      double w = (i == 0 || i == nq) ? 0.5 : 1.0;
      acc += w * p.bsecond(y) * std::exp(-I * xi * y);
    }
    acc *= hq / std::sqrt(2.0 * M_PI);
    double m = std::abs(acc);
    if (m < 1e-280) break;
    xs.push_back(std::sqrt(bracket(xi)));
    logs.push_back(std::log(m));
  }
  if (xs.size() >= 4) {
    LineFit f = fit_line(xs, logs);
    rep.gevrey_decay_fit = -f.slope;
    rep.gevrey_fit_residual = f.rms_residual;
  }
  return rep;
}

}  // namespace shearlab
