#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace shearlab {

using cdouble = std::complex<double>;
using cvector = std::vector<cdouble>;
using rvector = std::vector<double>;

inline constexpr cdouble I{0.0, 1.0};

// ---------------------------------------------------------------------------
// Error taxonomy. Everything solver-facing throws a LabError subclass so the
// CLI can map failures to exit codes uniformly.
// ---------------------------------------------------------------------------
struct LabError : std::runtime_error {
  explicit LabError(const std::string& msg) : std::runtime_error(msg) {}
};

#define SHEARLAB_ERROR(NAME)                                 \
  struct NAME : LabError {                                   \
    explicit NAME(const std::string& msg) : LabError(#NAME ": " + msg) {} \
  }

SHEARLAB_ERROR(MonotonicityViolation);
SHEARLAB_ERROR(AssumptionViolation);
SHEARLAB_ERROR(NonConvergence);
SHEARLAB_ERROR(BoundaryLeakage);
SHEARLAB_ERROR(SingularSystem);
SHEARLAB_ERROR(CriticalLayerUnresolved);
SHEARLAB_ERROR(SignViolation);
SHEARLAB_ERROR(InsufficientScan);
SHEARLAB_ERROR(CouplingSingular);
SHEARLAB_ERROR(DenseSystemSingular);
SHEARLAB_ERROR(PhaseUnderresolved);
SHEARLAB_ERROR(StepTooLarge);
SHEARLAB_ERROR(AliasingRisk);
SHEARLAB_ERROR(DegenerateFit);
SHEARLAB_ERROR(RegularizationUnconverged);
SHEARLAB_ERROR(NearSingular);
SHEARLAB_ERROR(OverflowRisk);
SHEARLAB_ERROR(ConfigInvalid);

#undef SHEARLAB_ERROR

// ---------------------------------------------------------------------------
// Uniform grid on [left, left + (n-1)h].
// ---------------------------------------------------------------------------
struct Grid {
  double left = 0.0;
  double h = 1.0;
  int n = 0;

  Grid() = default;
  Grid(double left_, double h_, int n_) : left(left_), h(h_), n(n_) {}

  static Grid symmetric(double half_width, double spacing) {
    int m = static_cast<int>(std::ceil(half_width / spacing));
    return Grid(-m * spacing, spacing, 2 * m + 1);
  }

  double point(int i) const { return left + i * h; }
  double right() const { return point(n - 1); }

  rvector points() const {
    rvector ys(n);
    for (int i = 0; i < n; ++i) ys[i] = point(i);
    return ys;
  }

  // Index of the grid node nearest to y (clamped).
  int nearest(double y) const {
    int i = static_cast<int>(std::lround((y - left) / h));
    return std::clamp(i, 0, n - 1);
  }

  bool contains(double y) const { return y >= left - 1e-12 && y <= right() + 1e-12; }
};

// ---------------------------------------------------------------------------
// Norms and quadrature on uniform grids (trapezoid weights).
// ---------------------------------------------------------------------------
inline double l2_norm(const cvector& v, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double w = (i == 0 || i + 1 == v.size()) ? 0.5 : 1.0;
    s += w * std::norm(v[i]);
  }
  return std::sqrt(s * h);
}

inline double linf_norm(const cvector& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

inline cdouble trapezoid(const cvector& v, double h) {
  cdouble s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double w = (i == 0 || i + 1 == v.size()) ? 0.5 : 1.0;
    s += w * v[i];
  }
  return s * h;
}

inline double trapezoid(const rvector& v, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double w = (i == 0 || i + 1 == v.size()) ? 0.5 : 1.0;
    s += w * v[i];
  }
  return s * h;
}

// Relative L2 difference, guarded against a zero reference.
inline double rel_l2_diff(const cvector& a, const cvector& b, double h) {
  cvector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double nb = l2_norm(b, h);
  return l2_norm(d, h) / std::max(nb, 1e-300);
}

// ---------------------------------------------------------------------------
// Cubic (4-point Lagrange) interpolation on a uniform grid.
// ---------------------------------------------------------------------------
template <typename T>
inline T interp_cubic(const Grid& g, const std::vector<T>& f, double x) {
  double s = (x - g.left) / g.h;
  int j = static_cast<int>(std::floor(s)) - 1;
  j = std::clamp(j, 0, g.n - 4);
  double t = s - (j + 1);  // offset from the second stencil node
  const T f0 = f[j], f1 = f[j + 1], f2 = f[j + 2], f3 = f[j + 3];
  double c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  double c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  double c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  double c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
  return c0 * f0 + c1 * f1 + c2 * f2 + c3 * f3;
}

// ---------------------------------------------------------------------------
// Complex tridiagonal (Thomas) factorization with repeated right-hand sides.
// No pivoting: all operators assembled here are diagonally dominant.
// ---------------------------------------------------------------------------
class TridiagFactor {
 public:
  TridiagFactor() = default;

  // lower[i] multiplies x[i-1] in row i; upper[i] multiplies x[i+1].
  TridiagFactor(cvector lower, cvector diag, cvector upper)
      : lo_(std::move(lower)), up_(std::move(upper)), dinv_(diag.size()) {
    const std::size_t n = diag.size();
    cvector d = std::move(diag);
    cprime_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      cdouble piv = d[i];
      if (i > 0) piv -= lo_[i] * cprime_[i - 1];
      if (std::abs(piv) < 1e-300)
        throw SingularSystem("tridiagonal pivot vanished at row " + std::to_string(i));
      dinv_[i] = 1.0 / piv;
      cprime_[i] = (i + 1 < n) ? up_[i] * dinv_[i] : cdouble(0.0);
    }
  }

  std::size_t size() const { return dinv_.size(); }

  cvector solve(const cvector& rhs) const {
    const std::size_t n = dinv_.size();
    cvector x(n);
    for (std::size_t i = 0; i < n; ++i) {
      cdouble r = rhs[i];
      if (i > 0) r -= lo_[i] * x[i - 1];
      x[i] = r * dinv_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
    return x;
  }

 private:
  cvector lo_, up_, dinv_, cprime_;
};

// Apply the tridiagonal operator itself (for residual checks).
inline cvector tridiag_apply(const cvector& lower, const cvector& diag,
                             const cvector& upper, const cvector& x) {
  const std::size_t n = diag.size();
  cvector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = diag[i] * x[i];
    if (i > 0) y[i] += lower[i] * x[i - 1];
    if (i + 1 < n) y[i] += upper[i] * x[i + 1];
  }
  return y;
}

// ---------------------------------------------------------------------------
// Least-squares line fit y ~ intercept + slope * x.
// ---------------------------------------------------------------------------
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

inline LineFit fit_line(const rvector& x, const rvector& y) {
  if (x.size() < 2 || x.size() != y.size())
    throw DegenerateFit("need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw DegenerateFit("collinear abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

// ---------------------------------------------------------------------------
// Deterministic parallel map: items are processed in fixed-size blocks and
// any reduction happens serially in index order afterwards, so results are
// independent of the thread count.
// ---------------------------------------------------------------------------
inline int& thread_count() {
  static int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

inline void parallel_for(int n_items, const std::function<void(int)>& fn,
                         int n_threads = 0) {
  if (n_threads <= 0) n_threads = thread_count();
  if (n_threads == 1 || n_items <= 1) {
    for (int i = 0; i < n_items; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(n_threads);
  std::atomic_int next{0};
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n_items; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

inline double sq(double x) { return x * x; }

// Japanese bracket <a,b,...> = sqrt(1 + a^2 + b^2 + ...).
inline double bracket(double a) { return std::sqrt(1.0 + a * a); }
inline double bracket(double a, double b) { return std::sqrt(1.0 + a * a + b * b); }
inline double bracket(double a, double b, double c) {
  return std::sqrt(1.0 + a * a + b * b + c * c);
}

}  // namespace shearlab
