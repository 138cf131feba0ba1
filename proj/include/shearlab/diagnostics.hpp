#pragma once

#include "shearlab/common.hpp"
#include "shearlab/fft.hpp"
#include "shearlab/profile.hpp"

namespace shearlab {

// Fourier-side weight e^{delta <k, xi>^{1/2}}. delta = 0 reduces every
// weighted norm to plain L2.
struct GevreyWeight {
  double delta = 0.0;
  int k = 1;

  double operator()(double xi) const {
    return std::exp(delta * std::sqrt(bracket(static_cast<double>(k), xi)));
  }
};

// Smooth compactly supported taper: 1 on [-core, core], 0 outside
// [-core-skirt, core+skirt], C-infinity in between (bump-integral step).
inline double gevrey_window(double y, double core, double skirt) {
  double a = std::abs(y);
  if (a <= core) return 1.0;
  if (a >= core + skirt) return 0.0;
  // normalized integral of the unit bump over [s, 1], s in (-1, 1)
  double s = 2.0 * (a - core) / skirt - 1.0;
  static const double total = [] {
    double acc = 0.0;
    for (int i = 0; i < 4096; ++i) {
      double t = -1.0 + 2.0 * (i + 0.5) / 4096.0;
      acc += bump_unit(t);
    }
    return acc * (2.0 / 4096.0);
  }();
  double acc = 0.0;
  const int nq = 1024;
  double hh = (1.0 - s) / nq;
  for (int i = 0; i < nq; ++i) acc += bump_unit(s + (i + 0.5) * hh);
  return acc * hh / total;
}

namespace detail {

// Windowed, zero-padded spectrum: returns (|ghat(xi_j)|, xi_j) pairs encoded
// as the transform array plus grid metadata. ghat uses the unitary
// convention ghat(xi) = (2 pi)^{-1/2} int g e^{-i y xi} dy.
struct Spectrum {
  cvector ghat;
  int n = 0;
  double h = 0.0;
  double dxi() const { return 2.0 * M_PI / (n * h); }
  double xi(int j) const { return dft_frequency(j, n, h); }
};

inline Spectrum spectrum_1d(const cvector& g, double h, bool window,
                            double window_core, double window_skirt) {
  const int n0 = static_cast<int>(g.size());
  cvector tapered = g;
  if (window) {
    for (int i = 0; i < n0; ++i) {
      double y = (i - (n0 - 1) / 2.0) * h;
      tapered[i] *= gevrey_window(y, window_core, window_skirt);
    }
  } else {
    double scale = linf_norm(g);
    double edge = std::max(std::abs(g.front()), std::abs(g.back()));
    if (scale > 0.0 && edge > 1e-10 * scale)
      throw AliasingRisk("input has not decayed at the grid ends; pass a window");
  }
  const int n = next_pow2(2 * n0);
  tapered.resize(n, 0.0);
  Spectrum s;
  s.ghat = fft_forward(tapered);
  const double scale = h / std::sqrt(2.0 * M_PI);
  for (auto& x : s.ghat) x *= scale;
  s.n = n;
  s.h = h;
  return s;
}

}  // namespace detail

// || e^{delta <k,xi>^{1/2}} ghat ||_{L2(dxi)} of a grid function sampled at
// spacing h. Checks that the unweighted spectrum has decayed well below the
// Nyquist frequency.
inline double gevrey_norm_1d(const cvector& g, double h, const GevreyWeight& wgt,
                             bool window = false, double window_core = 0.0,
                             double window_skirt = 1.0) {
  auto s = detail::spectrum_1d(g, h, window, window_core, window_skirt);
  double peak = 0.0;
  for (const auto& x : s.ghat) peak = std::max(peak, std::abs(x));
  if (peak > 0.0) {
    double top = 0.0;
    for (int j = s.n * 45 / 100; j <= s.n * 55 / 100; ++j)
      top = std::max(top, std::abs(s.ghat[j]));
    if (top > 1e-8 * peak)
      throw AliasingRisk("spectrum at Nyquist is " + std::to_string(top / peak) +
                         " of its peak");
  }
  double acc = 0.0;
  for (int j = 0; j < s.n; ++j) {
    double wv = wgt(s.xi(j));
    acc += sq(wv) * std::norm(s.ghat[j]);
  }
  return std::sqrt(acc * s.dxi());
}

// 2D version on a (v, w) matrix G (row-major, rows = v samples): weight
// (|k| + |xi|) e^{delta <k, eta>^{1/2}} with xi the v-frequency and eta the
// w-frequency.
inline double gevrey_norm_2d(const cvector& G, int rows, int cols, double hv,
                             double hw, const GevreyWeight& wgt,
                             bool xi_weight = true) {
  if (static_cast<int>(G.size()) != rows * cols)
    throw ConfigInvalid("gevrey_norm_2d: size mismatch");
  const int nr = next_pow2(rows), nc = next_pow2(cols);
  cvector padded(static_cast<std::size_t>(nr) * nc, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      padded[static_cast<std::size_t>(i) * nc + j] = G[static_cast<std::size_t>(i) * cols + j];
  cvector hat = fft_forward_2d(padded, nr, nc);
  const double scale = hv * hw / (2.0 * M_PI);
  double acc = 0.0;
  for (int i = 0; i < nr; ++i) {
    double xi = dft_frequency(i, nr, hv);
    double xw = xi_weight ? (std::abs(static_cast<double>(wgt.k)) + std::abs(xi)) : 1.0;
    for (int j = 0; j < nc; ++j) {
      double eta = dft_frequency(j, nc, hw);
      double wv = xw * wgt(eta);
      acc += sq(wv) * std::norm(hat[static_cast<std::size_t>(i) * nc + j] * scale);
    }
  }
  const double dxi = 2.0 * M_PI / (nr * hv), deta = 2.0 * M_PI / (nc * hw);
  return std::sqrt(acc * dxi * deta);
}

// ---------------------------------------------------------------------------
// Decay-rate fitting on (t, value) series.
// ---------------------------------------------------------------------------
enum class DecayModel { exponential, power };

struct DecayFit {
  DecayModel model = DecayModel::exponential;
  double rate = 0.0;       // c in e^{-c t}, or p in t^{p}
  double prefactor = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  double residual = 0.0;   // RMS of log residuals on the window
};

inline DecayFit fit_rate(const rvector& ts, const rvector& values, DecayModel model,
                         double window_lo, double window_hi) {
  if (ts.size() != values.size()) throw ConfigInvalid("fit_rate: size mismatch");
  rvector xs, ys;
  double vmin = 1e300, vmax = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < window_lo || ts[i] > window_hi) continue;
    if (!(values[i] > 0.0)) throw DegenerateFit("nonpositive value in fit window");
    vmin = std::min(vmin, values[i]);
    vmax = std::max(vmax, values[i]);
    xs.push_back(model == DecayModel::exponential ? ts[i] : std::log(ts[i]));
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 5) throw DegenerateFit("need at least 5 points in window");
  if (vmax > 0.0 && vmin / vmax < 1e-300) throw DegenerateFit("dynamic range collapsed");
  LineFit lf = fit_line(xs, ys);
  DecayFit f;
  f.model = model;
  f.rate = (model == DecayModel::exponential) ? -lf.slope : lf.slope;
  f.prefactor = std::exp(lf.intercept);
  f.window_lo = window_lo;
  f.window_hi = window_hi;
  f.residual = lf.rms_residual;
  return f;
}

// ---------------------------------------------------------------------------
// Kernel probe for the multiplier e^{mu <k, xi>^{1/2}} with a smooth
// frequency cutoff Psi(xi / R): samples K(y) for |y| > 1 and fits the
// stretched-exponential envelope exp(-c0 |y|^{1/2}).
// ---------------------------------------------------------------------------
inline double probe_cutoff(double x) {
  // 1 on [-1,1], 0 outside (-2,2), smooth in between.
  double a = std::abs(x);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return gevrey_window(a - 1.0, 0.0, 1.0);
}

struct MultiplierProbeReport {
  double mu = 0.0;
  int k = 1;
  double R = 0.0;              // regularization radius actually used
  rvector ys;
  rvector K;                   // sampled kernel values (real by symmetry)
  double c0_fit = 0.0;         // fitted rate against |y|^{1/2}
  double fit_residual_rel = 0.0;
  double doubling_error = 0.0; // max |K_R - K_{2R}| over samples
};

namespace detail {

inline double probe_kernel_value(double mu, int k, double R, double y) {
  // (1/sqrt(2 pi)) * 2 int_0^{2R} e^{mu <k,xi>^{1/2}} Psi(xi/R) cos(y xi) dxi
  const double upper = 2.0 * R;
  int n = next_pow2(std::max(4096, static_cast<int>(upper * std::abs(y) * 8)));
  double prev = 0.0;
  for (int round = 0; round < 6; ++round) {
    const double dxi = upper / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      double xi = i * dxi;
      double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * std::exp(mu * std::sqrt(bracket(static_cast<double>(k), xi))) *
             probe_cutoff(xi / R) * std::cos(y * xi);
    }
    acc *= 2.0 * dxi / std::sqrt(2.0 * M_PI);
    if (round > 0 && std::abs(acc - prev) <= 1e-11 * (1.0 + std::abs(acc))) return acc;
    prev = acc;
    n *= 2;
  }
  return prev;
}

}  // namespace detail

inline MultiplierProbeReport multiplier_kernel_probe(double mu, int k,
                                                     const rvector& ys,
                                                     double R = 300.0) {
  if (!(mu > 0.0 && mu < 1.0)) throw ConfigInvalid("mu must lie in (0,1)");
  if (k == 0) throw ConfigInvalid("k must be nonzero");
  for (double y : ys)
    if (std::abs(y) <= 1.0)
      throw ConfigInvalid("probe samples must satisfy |y| > 1");
  MultiplierProbeReport rep;
  rep.mu = mu;
  rep.k = k;
  rep.R = R;
  rep.ys = ys;
  rep.K.resize(ys.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    double kr = detail::probe_kernel_value(mu, k, R, ys[i]);
    double k2r = detail::probe_kernel_value(mu, k, 2.0 * R, ys[i]);
    worst = std::max(worst, std::abs(kr - k2r));
    rep.K[i] = k2r;
  }
  rep.doubling_error = worst;
  if (worst > 1e-6)
    throw RegularizationUnconverged("doubling R changes samples by " +
                                    std::to_string(worst));
  rvector xs, logs;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    double m = std::abs(rep.K[i]);
    if (m < 1e-280) continue;
    xs.push_back(std::sqrt(std::abs(ys[i])));
    logs.push_back(std::log(m));
  }
  if (xs.size() >= 4) {
    LineFit f = fit_line(xs, logs);
    rep.c0_fit = -f.slope;
    double spread = *std::max_element(logs.begin(), logs.end()) -
                    *std::min_element(logs.begin(), logs.end());
    rep.fit_residual_rel = (spread > 0.0) ? f.rms_residual / spread : 0.0;
  }
  return rep;
}

// Multiplier action at the origin, (M_mu phi)(0) = (2 pi)^{-1/2}
// int e^{mu <k,xi>^{1/2}} Psi(xi/R) phihat(xi) dxi, for a caller-supplied
// unitary-convention transform phihat. Tends to phi(0) as mu -> 0.
inline double multiplier_apply_at_zero(double mu, int k, double R,
                                       const std::function<double(double)>& phihat) {
  const double upper = 2.0 * R;
  const int n = 1 << 16;
  const double dxi = upper / n;
  double acc = 0.0;
  for (int i = -n; i <= n; ++i) {
    double xi = i * dxi;
    double w = (i == -n || i == n) ? 0.5 : 1.0;
    acc += w * std::exp(mu * std::sqrt(bracket(static_cast<double>(k), xi))) *
           probe_cutoff(xi / R) * phihat(xi);
  }
  return acc * dxi / std::sqrt(2.0 * M_PI);
}

}  // namespace shearlab
