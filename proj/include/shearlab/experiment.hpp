#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "shearlab/airy.hpp"
#include "shearlab/diagnostics.hpp"
#include "shearlab/evolution.hpp"
#include "shearlab/io.hpp"
#include "shearlab/orr_sommerfeld.hpp"
#include "shearlab/semigroup.hpp"

namespace shearlab {

inline const char* version_string() { return "0.1.0"; }

using json = nlohmann::json;

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct RunManifest {
  json config_echo;
  std::string version = version_string();
  double wall_clock_sec = 0.0;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> artifacts;  // path, digest

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void add_check(const std::string& name, bool pass, double value, double threshold,
                 const std::string& note = "") {
    checks.push_back({name, pass, value, threshold, note});
  }

  json to_json() const {
    json j;
    j["version"] = version;
    j["wall_clock_sec"] = wall_clock_sec;
    j["all_pass"] = all_pass();
    j["config"] = config_echo;
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name},
                             {"pass", c.pass},
                             {"value", c.value},
                             {"threshold", c.threshold},
                             {"note", c.note}});
    j["artifacts"] = json::array();
    for (const auto& [p, d] : artifacts)
      j["artifacts"].push_back({{"path", p}, {"digest_fnv1a", d}});
    return j;
  }
};

// ---------------------------------------------------------------------------
// Config access with field-level error messages.
// ---------------------------------------------------------------------------
namespace cfg {

inline double num(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ConfigInvalid("field '" + key + "' must be numeric");
  return j.at(key).get<double>();
}

inline int integer(const json& j, const std::string& key, int dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer())
    throw ConfigInvalid("field '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

inline std::string str(const json& j, const std::string& key, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) throw ConfigInvalid("field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline rvector numbers(const json& j, const std::string& key, rvector dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_array()) throw ConfigInvalid("field '" + key + "' must be an array");
  rvector out;
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ConfigInvalid("field '" + key + "' holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

inline json section(const json& j, const std::string& key) {
  return j.contains(key) ? j.at(key) : json::object();
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Shared pieces assembled from a config.
// ---------------------------------------------------------------------------
struct ExperimentSetup {
  ShearProfile profile;
  int k = 1;
  rvector nu_values;
  double half_width = 13.0;
  double points_per_layer = 8.2;
  double init_center = 0.5, init_width = 0.5, init_cut = 2.0;
  double delta = 0.05;
};

inline ExperimentSetup parse_setup(const json& config) {
  ExperimentSetup s;
  json prof = cfg::section(config, "profile");
  s.profile = build_profile(cfg::str(prof, "kind", "couette"),
                            cfg::num(prof, "amplitude", 0.0),
                            cfg::num(prof, "support_radius", 1.0));
  json mode = cfg::section(config, "mode");
  s.k = cfg::integer(mode, "k", 1);
  if (s.k == 0) throw ConfigInvalid("field 'mode.k' must be nonzero");
  double nu = cfg::num(mode, "nu", 1e-3);
  s.nu_values = cfg::numbers(config, "nu_sweep", {nu});
  for (double n : s.nu_values)
    if (!(n > 0.0 && n < 1.0)) throw ConfigInvalid("field 'nu' must lie in (0,1)");
  json grid = cfg::section(config, "grid");
  s.half_width = cfg::num(grid, "half_width", 13.0);
  s.points_per_layer = cfg::num(grid, "points_per_layer", 8.2);
  if (s.half_width <= 2.0) throw ConfigInvalid("field 'grid.half_width' too small");
  json init = cfg::section(config, "initial");
  s.init_center = cfg::num(init, "center", 0.5);
  s.init_width = cfg::num(init, "width", 0.5);
  s.init_cut = cfg::num(init, "cut_radius", 2.0);
  json diag = cfg::section(config, "diagnostics");
  s.delta = cfg::num(diag, "delta", 0.05);
  return s;
}

inline Grid mode_ygrid(const ExperimentSetup& s, double nu) {
  double lw = std::abs(cbrt_signed(nu / s.k));
  return Grid::symmetric(s.half_width, lw / s.points_per_layer);
}

namespace detail {

inline void write_series_csv(const std::filesystem::path& path,
                             const EvolutionSeries& series) {
  CsvWriter csv(path, {"t", "v", "ReF", "ImF", "RePhi", "ImPhi"});
  for (std::size_t ti = 0; ti < series.times.size(); ++ti)
    for (int i = 0; i < series.vgrid.n; ++i)
      csv.row({series.times[ti], series.vgrid.point(i), series.F_t[ti][i].real(),
               series.F_t[ti][i].imag(), series.Phi_t[ti][i].real(),
               series.Phi_t[ti][i].imag()});
}

struct NormsTable {
  rvector t, l2F, gevreyF, l2Phi;
};

inline NormsTable series_norms(const EvolutionSeries& series, double delta, int k) {
  NormsTable tab;
  GevreyWeight wgt{delta, k};
  for (std::size_t ti = 0; ti < series.times.size(); ++ti) {
    tab.t.push_back(series.times[ti]);
    tab.l2F.push_back(l2_norm(series.F_t[ti], series.vgrid.h));
    double core = 0.75 * std::min(-series.vgrid.left, series.vgrid.right());
    tab.gevreyF.push_back(gevrey_norm_1d(series.F_t[ti], series.vgrid.h, wgt, true,
                                         core, 0.2 * core));
    tab.l2Phi.push_back(l2_norm(series.Phi_t[ti], series.vgrid.h));
  }
  return tab;
}

inline void write_norms_csv(const std::filesystem::path& path, const NormsTable& tab) {
  CsvWriter csv(path, {"t", "l2F", "gevreyF", "l2Phi"});
  for (std::size_t i = 0; i < tab.t.size(); ++i)
    csv.row({tab.t[i], tab.l2F[i], tab.gevreyF[i], tab.l2Phi[i]});
}

inline void add_artifact(RunManifest& man, const std::filesystem::path& path) {
  man.artifacts.emplace_back(path.filename().string(), file_digest(path));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate: two-path evolution with profile extraction, norms and fits.
// ---------------------------------------------------------------------------
inline void run_simulate(const json& config, const std::filesystem::path& out,
                         RunManifest& man) {
  ExperimentSetup s = parse_setup(config);
  json time = cfg::section(config, "time");
  rvector times = cfg::numbers(time, "times", {0.0, 5.0, 10.0, 20.0});
  std::sort(times.begin(), times.end());
  json wq = cfg::section(config, "w_quad");
  json checks = cfg::section(config, "checks");
  const double two_path_tol = cfg::num(checks, "two_path_tol", 5e-3);
  const double oracle_tol = cfg::num(checks, "oracle_tol", 1e-3);

  for (double nu : s.nu_values) {
    ModeParams mode(s.k, nu);
    Grid yg = mode_ygrid(s, nu);
    InitialData init = default_initial_data(yg, s.init_center, s.init_width, s.init_cut);
    double bmax = std::abs(s.profile.b(yg.right()));
    double dt = cfg::num(time, "dt", 0.0);
    if (dt > 0.0 && dt * std::abs(static_cast<double>(s.k)) * bmax > 0.1)
      throw ConfigInvalid("field 'time.dt' violates dt * |k| * max|b| <= 0.1 (dt = " +
                          fmt_double(dt) + ")");
    if (dt <= 0.0) dt = 0.08 / (std::abs(static_cast<double>(s.k)) * bmax);
    EvolutionSeries direct = evolve_direct(s.profile, mode, init, times, dt);

    RepParams rp;
    rp.dw = cfg::num(wq, "dw", 0.0);
    rp.w_window = cfg::num(wq, "window", 40.0);
    rp.couple_margin = cfg::num(wq, "couple_margin", 7.0);
    EvolutionSeries rep = evolve_representation(s.profile, mode, init, direct.times, rp);

    double vmax = s.profile.b(yg.right()) - 1.0;
    Grid vg = Grid::symmetric(vmax, yg.h);
    extract_profiles(direct, s.profile, vg);
    extract_profiles(rep, s.profile, vg);

    std::string tag = "_nu" + fmt_double(nu);
    auto p1 = out / ("series_direct" + tag + ".csv");
    auto p2 = out / ("series_representation" + tag + ".csv");
    detail::write_series_csv(p1, direct);
    detail::write_series_csv(p2, rep);
    detail::add_artifact(man, p1);
    detail::add_artifact(man, p2);

    detail::NormsTable tab = detail::series_norms(direct, s.delta, s.k);
    auto p3 = out / ("norms_direct" + tag + ".csv");
    detail::write_norms_csv(p3, tab);
    detail::add_artifact(man, p3);

    for (std::size_t ti = 0; ti < direct.times.size(); ++ti) {
      double d = rel_l2_diff(rep.omega_t[ti], direct.omega_t[ti], yg.h);
      man.add_check("two_path_t" + fmt_double(direct.times[ti]) + tag,
                    d <= two_path_tol, d, two_path_tol);
    }
    man.add_check("elliptic_consistency" + tag,
                  direct.elliptic_consistency(s.k) <= 1e-10,
                  direct.elliptic_consistency(s.k), 1e-10);

    if (s.profile.is_couette()) {
      EvolutionSeries oracle =
          couette_closed_form(mode, yg, init.omega0, direct.times);
      for (std::size_t ti = 0; ti < direct.times.size(); ++ti) {
        double d1 = rel_l2_diff(direct.omega_t[ti], oracle.omega_t[ti], yg.h);
        double d2 = rel_l2_diff(rep.omega_t[ti], oracle.omega_t[ti], yg.h);
        man.add_check("oracle_direct_t" + fmt_double(direct.times[ti]) + tag,
                      d1 <= oracle_tol, d1, oracle_tol);
        man.add_check("oracle_representation_t" + fmt_double(direct.times[ti]) + tag,
                      d2 <= oracle_tol, d2, oracle_tol);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// resolvent: one coupled solve with the default data as forcing.
// ---------------------------------------------------------------------------
inline void run_resolvent(const json& config, const std::filesystem::path& out,
                          RunManifest& man) {
  ExperimentSetup s = parse_setup(config);
  json q = cfg::section(config, "query");
  double nu = s.nu_values.front();
  ModeParams mode(s.k, nu);
  ResolventQuery query(mode.eps(), cfg::num(q, "alpha", 0.0), cfg::num(q, "y0", 0.0));
  Grid yg = mode_ygrid(s, nu);
  InitialData init = default_initial_data(yg, s.init_center, s.init_width, s.init_cut);
  OsSolution sol = os_resolvent_solve(s.profile, mode, query, yg, init.omega0);

  auto path = out / "resolvent_solution.csv";
  CsvWriter csv(path, {"y", "ReW", "ImW", "RePsi", "ImPsi"});
  for (int i = 0; i < yg.n; ++i)
    csv.row({yg.point(i), sol.w[i].real(), sol.w[i].imag(), sol.psi[i].real(),
             sol.psi[i].imag()});
  detail::add_artifact(man, path);

  man.add_check("residual", sol.residual <= 1e-9, sol.residual, 1e-9);
  // energy estimate constant
  cvector dw = centered_derivative(yg, sol.w);
  cvector yw(yg.n);
  for (int i = 0; i < yg.n; ++i) yw[i] = (yg.point(i) - query.y0) * sol.w[i];
  double lw = query.layer_width();
  double C = (l2_norm(yw, yg.h) + lw * l2_norm(sol.w, yg.h) +
              lw * lw * l2_norm(dw, yg.h)) /
             l2_norm(init.omega0, yg.h);
  man.add_check("energy_constant", C <= 20.0, C, 20.0);
  // pointwise envelope constant (recorded, capped loosely)
  double Cp = 0.0;
  cvector d0 = centered_derivative(yg, init.omega0);
  double h1 = l2_norm(init.omega0, yg.h) + l2_norm(d0, yg.h);
  for (int i = 0; i < yg.n; ++i) {
    double br = bracket((yg.point(i) - query.y0) / lw, query.alpha / lw);
    Cp = std::max(Cp, std::abs(sol.w[i]) * lw * br / h1);
  }
  man.add_check("pointwise_envelope_constant", Cp <= 50.0, Cp, 50.0);
}

// ---------------------------------------------------------------------------
// kernel-verify: envelope and entanglement report over a kernel scan.
// ---------------------------------------------------------------------------
inline void run_kernel_verify(const json& config, const std::filesystem::path& out,
                              RunManifest& man) {
  ExperimentSetup s = parse_setup(config);
  json ks = cfg::section(config, "kernel_scan");
  rvector eps_list = cfg::numbers(ks, "eps", {1e-2, 1e-3, 1e-4});
  rvector af_list = cfg::numbers(ks, "alpha_tilde", {0.0, 1.0, 10.0});
  rvector z_list = cfg::numbers(ks, "z_values", []{
    rvector z;
    for (double x = -5.0; x <= 5.0 + 1e-9; x += 1.0) z.push_back(x);
    return z;
  }());
  double yhw = cfg::num(ks, "y_half_width", 25.0);
  double y0 = cfg::num(ks, "y0", 0.0);

  struct Task { double eps, at, Z; };
  std::vector<Task> tasks;
  for (double e : eps_list)
    for (double a : af_list)
      for (double z : z_list) tasks.push_back({e, a, z});
  std::vector<ModelColumn> cols(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), [&](int t) {
    double lw = std::abs(cbrt_signed(tasks[t].eps));
    cols[t] = airy_model_column(s.profile, tasks[t].eps, tasks[t].at * lw, y0,
                                tasks[t].Z, yhw);
  });
  BoundEnvelopeReport rep = verify_airy_bounds(cols);

  auto path = out / "kernel_columns.csv";
  CsvWriter csv(path, {"eps", "alpha_tilde", "Z", "Y", "ReK", "ImK", "ReKp", "ImKp"});
  for (const auto& c : cols)
    for (int i = 0; i < c.Ygrid.n; i += 4)
      csv.row({c.eps, c.alpha_tilde, c.Z, c.Ygrid.point(i), c.K[i].real(),
               c.K[i].imag(), c.dK[i].real(), c.dK[i].imag()});
  detail::add_artifact(man, path);

  json jr = {{"n_columns", rep.n_columns},
             {"diag_band_min", rep.diag_band_min},
             {"diag_band_max", rep.diag_band_max},
             {"diag_ratio", rep.diag_ratio},
             {"c0_fit", rep.c0_fit},
             {"c0_fit_residual_rel", rep.c0_fit_residual_rel},
             {"c0_deriv_fit", rep.c0_deriv_fit},
             {"c0_deriv_residual_rel", rep.c0_deriv_residual_rel},
             {"c0_entangle", rep.c0_entangle},
             {"entangle_min", rep.entangle_min}};
  auto jpath = out / "kernel_report.json";
  std::ofstream(jpath) << jr.dump(2) << "\n";
  detail::add_artifact(man, jpath);

  man.add_check("diag_comparability_ratio", rep.diag_ratio <= 10.0, rep.diag_ratio, 10.0);
  man.add_check("offdiag_decay_rate", rep.c0_fit > 0.0, rep.c0_fit, 0.0);
  man.add_check("offdiag_fit_residual", rep.c0_fit_residual_rel < 0.15,
                rep.c0_fit_residual_rel, 0.15);
  man.add_check("deriv_envelope_rate", rep.c0_deriv_fit > 0.0, rep.c0_deriv_fit, 0.0);
  man.add_check("entanglement_min", rep.entangle_min >= -1e-10, rep.entangle_min, -1e-10);
  man.add_check("entanglement_c0", rep.c0_entangle > 0.0, rep.c0_entangle, 0.0);
}

// ---------------------------------------------------------------------------
// lap-scan: kappa over an (eps, alpha, y0) scan.
// ---------------------------------------------------------------------------
inline void run_lap_scan(const json& config, const std::filesystem::path& out,
                         RunManifest& man) {
  ExperimentSetup s = parse_setup(config);
  json lp = cfg::section(config, "lap");
  rvector eps_list = cfg::numbers(lp, "eps", {1e-2, 1e-3, 1e-4});
  rvector af_list = cfg::numbers(lp, "alpha_factors", {0.0, 1.0});
  rvector y0_list = cfg::numbers(lp, "y0", []{
    rvector y;
    for (double x = -2.0; x <= 2.0 + 1e-9; x += 0.4) y.push_back(x);
    y.push_back(-4.0);
    y.push_back(4.0);
    return y;
  }());
  double hw = cfg::num(lp, "half_width", 10.0);
  double ppl = cfg::num(lp, "points_per_layer", 8.2);

  ModeParams mode(s.k, s.nu_values.front());
  LapScanReport rep = lap_kappa_scan(s.profile, mode, eps_list, af_list, y0_list, hw, ppl);

  auto path = out / "lap_scan.csv";
  CsvWriter csv(path, {"eps", "alpha", "y0", "sigma_min"});
  for (const auto& pt : rep.points) csv.row({pt.eps, pt.alpha, pt.y0, pt.sigma_min});
  detail::add_artifact(man, path);

  if (s.profile.is_couette()) {
    man.add_check("kappa_couette_exact", rep.kappa_hat == 1.0, rep.kappa_hat, 1.0);
  } else {
    man.add_check("kappa_positive", rep.kappa_hat > 0.01, rep.kappa_hat, 0.01);
    rvector per_eps(eps_list.size(), 1.0);
    for (const auto& pt : rep.points)
      for (std::size_t e = 0; e < eps_list.size(); ++e)
        if (pt.eps == eps_list[e]) per_eps[e] = std::min(per_eps[e], pt.sigma_min);
    double lo = *std::min_element(per_eps.begin(), per_eps.end());
    double hi = *std::max_element(per_eps.begin(), per_eps.end());
    man.add_check("kappa_eps_stability", hi / lo <= 2.0, hi / lo, 2.0);
  }
}

// ---------------------------------------------------------------------------
// dsr-check: decay certificates for test matrices and discretized generators.
// ---------------------------------------------------------------------------
inline void run_dsr_check(const json& config, const std::filesystem::path& out,
                          RunManifest& man) {
  ExperimentSetup s = parse_setup(config);
  json dc = cfg::section(config, "dsr");
  const double cap = cfg::num(dc, "c0_cap", 10.0);
  const double hw = cfg::num(dc, "half_width", 6.0);
  const int npts = cfg::integer(dc, "points", 721);
  const double tmax = cfg::num(dc, "t_max", 50.0);
  const int nt = cfg::integer(dc, "time_samples", 26);

  rvector times(nt);
  for (int i = 0; i < nt; ++i) times[i] = tmax * i / (nt - 1);

  auto linspace = [](double a, double b, int n) {
    rvector xs(n);
    for (int i = 0; i < n; ++i) xs[i] = a + (b - a) * i / (n - 1);
    return xs;
  };

  // toy certificates
  {
    GeneratorMatrix gi;
    gi.A = -Eigen::MatrixXcd::Identity(4, 4);
    gi.grid = Grid(0, 1, 4);
    DsrReport r = dsr_envelope_check(gi, linspace(0.0, 5.0, 11), linspace(-3.0, 3.0, 13), cap);
    man.add_check("toy_contraction_C0", std::abs(r.C0_required - 1.0) < 1e-6,
                  r.C0_required, 1.0);
    GeneratorMatrix gs;
    gs.A = Eigen::MatrixXcd::Zero(2, 2);
    gs.A(0, 1) = 1.0;
    gs.A(1, 0) = -1.0;
    gs.grid = Grid(0, 1, 2);
    DsrReport rs = dsr_envelope_check(gs, linspace(0.0, 5.0, 11), linspace(-2.0, 2.0, 9), cap);
    man.add_check("toy_skew_C0", std::abs(rs.C0_required - 1.0) < 1e-6, rs.C0_required, 1.0);
  }

  Grid grid = Grid::symmetric(hw, 2.0 * hw / (npts - 1));
  double bmax = std::abs(s.profile.b(grid.right()));
  rvector mus;
  bool first = true;
  for (double nu : s.nu_values) {
    GeneratorMatrix gen = discretize_generator(s.profile, s.k, nu, grid);
    double Lam = 2.0 * bmax * std::abs(static_cast<double>(s.k)) + 1.0;
    rvector lambdas = linspace(-Lam, Lam, 141);
    if (first) {
      DsrReport rep = dsr_envelope_check(gen, times, lambdas, cap);
      std::string tag = "_nu" + fmt_double(nu);
      auto p1 = out / ("semigroup_norms" + tag + ".csv");
      CsvWriter c1(p1, {"t", "norm"});
      for (std::size_t i = 0; i < rep.times.size(); ++i) c1.row({rep.times[i], rep.norms[i]});
      detail::add_artifact(man, p1);
      auto p2 = out / ("resolvent_scan" + tag + ".csv");
      CsvWriter c2(p2, {"lambda", "sigma_min"});
      for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
        c2.row({rep.lambdas[i], rep.sigmas[i]});
      detail::add_artifact(man, p2);
      json jr = {{"M", rep.M},           {"mu", rep.mu},
                 {"C0_required", rep.C0_required}, {"cap", cap},
                 {"near_singular", rep.near_singular},
                 {"edge_growth_ok", rep.edge_growth_ok}};
      auto jp = out / ("dsr_report" + tag + ".json");
      std::ofstream(jp) << jr.dump(2) << "\n";
      detail::add_artifact(man, jp);
      man.add_check("generator_C0" + tag, rep.pass && !rep.near_singular,
                    rep.C0_required, cap);
      man.add_check("edge_growth" + tag, rep.edge_growth_ok, rep.edge_growth_ok, 1.0);
      mus.push_back(rep.mu);
      first = false;
    } else {
      double mu = resolvent_scan(gen, lambdas);
      mus.push_back(mu);
    }
  }
  double cmin = 1e300;
  for (std::size_t i = 0; i < mus.size(); ++i)
    cmin = std::min(cmin, mus[i] / std::cbrt(s.nu_values[i]));
  man.add_check("mu_nu13_coefficient", cmin > 0.0, cmin, 0.0);
  if (mus.size() >= 3) {
    rvector lx, ly;
    for (std::size_t i = 0; i < mus.size(); ++i) {
      lx.push_back(std::log(s.nu_values[i]));
      ly.push_back(std::log(std::max(mus[i], 1e-300)));
    }
    LineFit f = fit_line(lx, ly);
    man.add_check("mu_nu_scaling_slope", f.slope > 0.0, f.slope, 0.0,
                  "informational: one third for pure shear-diffusion");
  }
}

// ---------------------------------------------------------------------------
// theta-bounds: two-route agreement and the weighted-norm ratio.
// ---------------------------------------------------------------------------
inline void run_theta_bounds(const json& config, const std::filesystem::path& out,
                             RunManifest& man) {
  ExperimentSetup s = parse_setup(config);
  json tb = cfg::section(config, "theta");
  const double w_window = cfg::num(tb, "w_window", 8.0);
  const double dw = cfg::num(tb, "dw", 0.05);
  const double v_half = cfg::num(tb, "v_half_width", 6.0);
  rvector w_checks = cfg::numbers(tb, "w_checks", {-1.5, -0.5, 0.0, 0.4, 1.2});
  const double agree_tol = cfg::num(cfg::section(config, "checks"), "two_path_tol", 5e-3);

  rvector ratios;
  for (double nu : s.nu_values) {
    ModeParams mode(s.k, nu);
    Grid yg = mode_ygrid(s, nu);
    InitialData init = default_initial_data(yg, s.init_center, s.init_width, s.init_cut);
    Grid vg = Grid::symmetric(v_half, yg.h);
    Grid wg = Grid::symmetric(w_window, dw);
    Grid og = Grid::symmetric(v_half, yg.h);
    SpectralDensityField field = spectral_density(s.profile, mode, init, wg, og, vg);

    std::string tag = "_nu" + fmt_double(nu);
    auto path = out / ("theta_field" + tag + ".csv");
    CsvWriter csv(path, {"v", "w", "ReOmega", "ImOmega", "ReTheta", "ImTheta"});
    for (int j = 0; j < wg.n; j += 2)
      for (int i = 0; i < vg.n; i += 4)
        csv.row({vg.point(i), wg.point(j), field.omega_cols[j][i].real(),
                 field.omega_cols[j][i].imag(), field.theta_cols[j][i].real(),
                 field.theta_cols[j][i].imag()});
    detail::add_artifact(man, path);
    json header = {{"k", s.k},
                   {"nu", nu},
                   {"v_grid", {{"left", vg.left}, {"h", vg.h}, {"n", vg.n}}},
                   {"w_grid", {{"left", wg.left}, {"h", wg.h}, {"n", wg.n}}},
                   {"profile",
                    {{"kind", s.profile.is_couette() ? "couette" : "bump"},
                     {"amplitude", s.profile.amplitude},
                     {"support_radius", s.profile.support_radius}}}};
    auto hpath = out / ("theta_field" + tag + ".json");
    std::ofstream(hpath) << header.dump(2) << "\n";
    detail::add_artifact(man, hpath);

    for (double w : w_checks) {
      cvector alt = theta_integral_solve(s.profile, mode, init, w, vg);
      int j = wg.nearest(w);
      double d = rel_l2_diff(alt, field.theta_cols[j], vg.h);
      man.add_check("theta_agreement_w" + fmt_double(w) + tag, d <= agree_tol, d,
                    agree_tol);
    }

    // weighted-norm ratio: both sides tapered identically in w and v
    cvector M = field.pack_theta();
    const int nv = vg.n, nw = wg.n;
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nw; ++j) {
        double taper = gevrey_window(wg.point(j), w_window - 3.0, 2.5) *
                       gevrey_window(vg.point(i), v_half - 2.0, 1.5);
        M[static_cast<std::size_t>(i) * nw + j] *= taper;
      }
    GevreyWeight wgt{s.delta, s.k};
    double num = gevrey_norm_2d(M, nv, nw, vg.h, wg.h, wgt, true);
    cvector F0(vg.n);
    for (int i = 0; i < vg.n; ++i) F0[i] = init.F0(s.profile, vg.point(i));
    double den = gevrey_norm_1d(F0, vg.h, wgt, true, v_half - 2.0, 1.5);
    double ratio = num / std::max(den, 1e-300);
    ratios.push_back(ratio);
    man.add_check("theta_gevrey_ratio_finite" + tag, std::isfinite(ratio), ratio, 0.0);
  }
  if (ratios.size() >= 2) {
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    man.add_check("theta_gevrey_ratio_stability", hi / lo <= 2.0, hi / lo, 2.0);
  }
}

// ---------------------------------------------------------------------------
// fit-decay: rate extraction from a (t, value) table.
// ---------------------------------------------------------------------------
inline void run_fit_decay(const json& config, const std::filesystem::path& out,
                          RunManifest& man) {
  json fd = cfg::section(config, "fit");
  std::string input = cfg::str(fd, "input_csv", "");
  if (input.empty()) throw ConfigInvalid("field 'fit.input_csv' is required");
  std::string model = cfg::str(fd, "model", "exponential");
  rvector window = cfg::numbers(fd, "window", {0.0, 1e300});
  if (window.size() != 2) throw ConfigInvalid("field 'fit.window' must be [lo, hi]");
  auto [ts, vs] = read_tv_csv(input);
  DecayFit fit = fit_rate(ts, vs,
                          model == "power" ? DecayModel::power : DecayModel::exponential,
                          window[0], window[1]);
  json jr = {{"model", model},
             {"rate", fit.rate},
             {"prefactor", fit.prefactor},
             {"window", {fit.window_lo, fit.window_hi}},
             {"residual", fit.residual}};
  auto jpath = out / "decay_fit.json";
  std::ofstream(jpath) << jr.dump(2) << "\n";
  detail::add_artifact(man, jpath);
  man.add_check("fit_residual_finite", std::isfinite(fit.residual), fit.residual, 0.0);
}

// ---------------------------------------------------------------------------
// Dispatch, manifest and report emission.
// ---------------------------------------------------------------------------
inline RunManifest run_experiment(const json& config, const std::filesystem::path& out) {
  auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out);
  RunManifest man;
  man.config_echo = config;
  if (config.contains("threads")) thread_count() = cfg::integer(config, "threads", 2);
  std::string kind = cfg::str(config, "kind", "");
  if (kind == "simulate") run_simulate(config, out, man);
  else if (kind == "resolvent") run_resolvent(config, out, man);
  else if (kind == "kernel_verify") run_kernel_verify(config, out, man);
  else if (kind == "lap_scan") run_lap_scan(config, out, man);
  else if (kind == "dsr_check") run_dsr_check(config, out, man);
  else if (kind == "theta_bounds") run_theta_bounds(config, out, man);
  else if (kind == "fit_decay") run_fit_decay(config, out, man);
  else throw ConfigInvalid("field 'kind' must name an experiment, got '" + kind + "'");

  man.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(out / "manifest.json") << man.to_json().dump(2) << "\n";
  return man;
}

enum class ReportFormat { json_format, text_table };

inline void emit_report(const RunManifest& man, ReportFormat format,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot open " + path.string());
  if (format == ReportFormat::json_format) {
    out << man.to_json().dump(2) << "\n";
    return;
  }
  out << "check                                              result      value"
         "         threshold\n";
  out << "-----                                              ------      -----"
         "         ---------\n";
  for (const auto& c : man.checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-50s %-10s %12.5g %12.5g %s\n", c.name.c_str(),
                  c.pass ? "PASS" : "FAIL", c.value, c.threshold, c.note.c_str());
    out << line;
  }
  out << (man.all_pass() ? "ALL CHECKS PASSED\n" : "CHECK FAILURES PRESENT\n");
}

}  // namespace shearlab
