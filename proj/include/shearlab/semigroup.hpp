#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "shearlab/common.hpp"
#include "shearlab/elliptic.hpp"
#include "shearlab/profile.hpp"

namespace shearlab {

// ---------------------------------------------------------------------------
// Dense discretization of the generator A = nu D2 - i k diag(b) +
// i k diag(b'') G_k (the heat factor e^{-nu k^2 t} is handled separately by
// the callers, matching the evolution convention).
// ---------------------------------------------------------------------------
struct GeneratorMatrix {
  Eigen::MatrixXcd A;
  int k = 1;
  double nu = 0.0;
  Grid grid;
};

inline GeneratorMatrix discretize_generator(const ShearProfile& p, int k, double nu,
                                            const Grid& grid) {
  if (k == 0) throw ConfigInvalid("k must be nonzero");
  const int n = grid.n;
  GeneratorMatrix gen;
  gen.k = k;
  gen.nu = nu;
  gen.grid = grid;
  gen.A = Eigen::MatrixXcd::Zero(n, n);
  const double ih2 = nu / sq(grid.h);
  for (int i = 0; i < n; ++i) {
    gen.A(i, i) = -2.0 * ih2 - I * (static_cast<double>(k) * p.b(grid.point(i)));
    if (i > 0) gen.A(i, i - 1) = ih2;
    if (i + 1 < n) gen.A(i, i + 1) = ih2;
  }
  // coupling rows i k b'' G_k, with G_k the tridiagonal inverse
  std::vector<int> rows;
  for (int i = 0; i < n; ++i)
    if (p.bsecond(grid.point(i)) != 0.0) rows.push_back(i);
  if (!rows.empty()) {
    TridiagFactor gfac = poisson_factor(k, grid);
    cvector unit(n, 0.0);
    for (int j = 0; j < n; ++j) {
      unit[j] = 1.0;
      cvector col = gfac.solve(unit);
      unit[j] = 0.0;
      for (int i : rows)
        gen.A(i, j) += I * (static_cast<double>(k) * p.bsecond(grid.point(i))) * col[i];
    }
  }
  return gen;
}

inline GeneratorMatrix discretize_generator(const ShearProfile& p,
                                            const ModeParams& mode, const Grid& grid) {
  return discretize_generator(p, mode.k, mode.nu, grid);
}

namespace detail {

inline Eigen::VectorXcd power_seed(int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = cdouble(1.0 + 0.1 * std::sin(1.0 + i), 0.05 * std::cos(2.0 + i));
  v /= v.norm();
  return v;
}

// Largest singular value by power iteration on M^H M (deterministic seed).
inline double operator_norm(const Eigen::MatrixXcd& M, double tol = 1e-10,
                            int max_iter = 2000) {
  Eigen::VectorXcd v = power_seed(static_cast<int>(M.cols()));
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd w = M * v;
    double s = w.norm();
    v = M.adjoint() * w;
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    v /= nv;
    if (std::abs(s - prev) <= tol * std::max(1.0, s)) return s;
    prev = s;
  }
  return prev;
}

// Smallest singular value of (i lambda - A) from one LU factorization and
// power iteration on the inverse.
inline double sigma_min_shifted(const Eigen::MatrixXcd& A, double lambda,
                                double tol = 1e-10, int max_iter = 2000) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXcd M = -A;
  for (int i = 0; i < n; ++i) M(i, i) += cdouble(0.0, lambda);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  Eigen::VectorXcd v = power_seed(n);
  double prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd w = lu.adjoint().solve(v);
    Eigen::VectorXcd u = lu.solve(w);
    double growth = u.norm();
    if (!std::isfinite(growth) || growth > 1e28) return 0.0;  // on the spectrum
    if (growth == 0.0) return 1e300;
    v = u / growth;
    double sigma = 1.0 / std::sqrt(growth);
    if (std::abs(sigma - prev) <= tol * std::max(sigma, 1e-300)) return sigma;
    prev = sigma;
  }
  return prev;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Resolvent scan along the imaginary axis with local refinement.
// ---------------------------------------------------------------------------
struct ResolventScan {
  rvector lambdas;
  rvector sigma_min;       // per grid point (coarse scan)
  double mu_hat = 0.0;     // refined minimum
  double argmin_lambda = 0.0;
  bool near_singular = false;
  bool edge_growth_ok = true;  // sigma grows towards both scan ends
};

inline ResolventScan resolvent_scan_report(const GeneratorMatrix& gen,
                                           const rvector& lambdas,
                                           int refine_rounds = 12) {
  if (lambdas.size() < 3) throw ConfigInvalid("lambda grid too small");
  ResolventScan scan;
  scan.lambdas = lambdas;
  scan.sigma_min.resize(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), [&](int j) {
    scan.sigma_min[j] = detail::sigma_min_shifted(gen.A, lambdas[j]);
  });
  std::size_t jmin = 0;
  for (std::size_t j = 1; j < lambdas.size(); ++j)
    if (scan.sigma_min[j] < scan.sigma_min[jmin]) jmin = j;
  double lo = lambdas[jmin > 0 ? jmin - 1 : 0];
  double hi = lambdas[std::min(jmin + 1, lambdas.size() - 1)];
  double best_l = lambdas[jmin], best_s = scan.sigma_min[jmin];
  for (int r = 0; r < refine_rounds; ++r) {
    double l1 = lo + (hi - lo) / 3.0, l2 = hi - (hi - lo) / 3.0;
    double s1 = detail::sigma_min_shifted(gen.A, l1);
    double s2 = detail::sigma_min_shifted(gen.A, l2);
    if (s1 < best_s) { best_s = s1; best_l = l1; }
    if (s2 < best_s) { best_s = s2; best_l = l2; }
    if (s1 <= s2) hi = l2; else lo = l1;
  }
  scan.mu_hat = best_s;
  scan.argmin_lambda = best_l;
  scan.near_singular = best_s < 1e-13;
  double interior = *std::max_element(scan.sigma_min.begin(), scan.sigma_min.end());
  scan.edge_growth_ok = scan.sigma_min.front() >= 0.5 * interior &&
                        scan.sigma_min.back() >= 0.5 * interior;
  return scan;
}

// mu_hat only; throws when the axis touches the spectrum.
inline double resolvent_scan(const GeneratorMatrix& gen, const rvector& lambdas) {
  ResolventScan scan = resolvent_scan_report(gen, lambdas);
  if (scan.near_singular)
    throw NearSingular("sigma_min < 1e-13 at lambda = " +
                       std::to_string(scan.argmin_lambda));
  return scan.mu_hat;
}

// ---------------------------------------------------------------------------
// Propagator norm curve ||e^{At}|| at the given times. Uniformly spaced
// times reuse one matrix exponential; otherwise each time is exponentiated
// separately.
// ---------------------------------------------------------------------------
inline std::vector<std::pair<double, double>> semigroup_norm_curve(
    const GeneratorMatrix& gen, const rvector& times) {
  for (double t : times)
    if (t < 0.0) throw ConfigInvalid("times must be nonnegative");
  double tmax = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  double scale = gen.A.cwiseAbs().rowwise().sum().maxCoeff();
  if (scale * tmax > 2e4)
    throw OverflowRisk("||A|| t_max = " + std::to_string(scale * tmax));

  std::vector<std::pair<double, double>> curve;
  bool uniform = times.size() >= 2;
  double dt = times.size() >= 2 ? times[1] - times[0] : 0.0;
  for (std::size_t s = 1; s + 1 < times.size(); ++s)
    if (std::abs(times[s + 1] - times[s] - dt) > 1e-9 * std::max(1.0, dt))
      uniform = false;
  if (uniform && times[0] != 0.0) uniform = false;

  if (uniform && times.size() >= 3) {
    Eigen::MatrixXcd E = (gen.A * dt).exp();
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(gen.A.rows(), gen.A.cols());
    for (double t : times) {
      curve.emplace_back(t, detail::operator_norm(P));
      P = E * P;
    }
  } else {
    for (double t : times) {
      Eigen::MatrixXcd P = (gen.A * t).exp();
      curve.emplace_back(t, detail::operator_norm(P));
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Decay certificate: measured M = sup_t ||e^{At}||, measured mu from the
// resolvent scan, and the smallest envelope constant with
// ||e^{At}|| <= C0 M^2 e^{-mu t} at every sampled time. A scan that touches
// the spectrum certifies no decay: mu = 0 and the envelope is neutral.
// ---------------------------------------------------------------------------
struct DsrReport {
  double M = 1.0;
  double mu = 0.0;
  double C0_required = 1.0;
  bool near_singular = false;
  bool edge_growth_ok = true;
  bool pass = false;
  double cap = 10.0;
  rvector times;
  rvector norms;
  rvector lambdas;
  rvector sigmas;
};

inline DsrReport dsr_envelope_check(const GeneratorMatrix& gen, const rvector& times,
                                    const rvector& lambdas, double C0_cap = 10.0) {
  DsrReport rep;
  rep.cap = C0_cap;
  ResolventScan scan = resolvent_scan_report(gen, lambdas);
  rep.near_singular = scan.near_singular;
  rep.edge_growth_ok = scan.edge_growth_ok;
  rep.mu = scan.near_singular ? 0.0 : scan.mu_hat;
  rep.lambdas = scan.lambdas;
  rep.sigmas = scan.sigma_min;
  auto curve = semigroup_norm_curve(gen, times);
  double M = 0.0;
  for (auto& [t, nrm] : curve) {
    rep.times.push_back(t);
    rep.norms.push_back(nrm);
    M = std::max(M, nrm);
  }
  rep.M = std::max(M, 1e-300);
  double c0 = 0.0;
  for (std::size_t s = 0; s < rep.times.size(); ++s)
    c0 = std::max(c0, rep.norms[s] * std::exp(rep.mu * rep.times[s]) / (rep.M * rep.M));
  rep.C0_required = c0;
  rep.pass = c0 <= C0_cap;
  return rep;
}

}  // namespace shearlab
