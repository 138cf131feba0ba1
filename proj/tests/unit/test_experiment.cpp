#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "shearlab/experiment.hpp"

using namespace shearlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("shearlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  fs::path out = fresh_dir("badcfg");
  json bad = {{"kind", "simulate"}, {"mode", {{"k", 0}}}};
  try {
    run_experiment(bad, out);
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    REQUIRE(std::string(e.what()).find("mode.k") != std::string::npos);
  }

  json bad2 = {{"kind", "simulate"}, {"time", {{"dt", "tiny"}}},
               {"mode", {{"k", 1}, {"nu", 1e-2}}}};
  try {
    run_experiment(bad2, out);
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    REQUIRE(std::string(e.what()).find("dt") != std::string::npos);
  }

  json bad3 = {{"kind", "no_such_thing"}};
  REQUIRE_THROWS_AS(run_experiment(bad3, out), ConfigInvalid);

  // a dt that breaks the step precondition is rejected by name
  json bad4 = {{"kind", "simulate"},
               {"profile", {{"kind", "couette"}}},
               {"mode", {{"k", 1}, {"nu", 1e-2}}},
               {"grid", {{"half_width", 10.0}}},
               {"time", {{"dt", 0.5}, {"times", {0.0, 1.0}}}}};
  try {
    run_experiment(bad4, out);
    FAIL("expected ConfigInvalid");
  } catch (const ConfigInvalid& e) {
    REQUIRE(std::string(e.what()).find("time.dt") != std::string::npos);
  }
}

TEST_CASE("minimal couette simulate run passes and is deterministic") {
  json config = {
      {"kind", "simulate"},
      {"threads", 2},
      {"profile", {{"kind", "couette"}}},
      {"mode", {{"k", 1}, {"nu", 1e-2}}},
      {"grid", {{"half_width", 10.0}, {"points_per_layer", 9.0}}},
      {"time", {{"times", {0.0, 2.0}}}},
      {"w_quad", {{"window", 40.0}}},
  };
  fs::path out1 = fresh_dir("sim1");
  RunManifest m1 = run_experiment(config, out1);
  for (const auto& c : m1.checks) {
    INFO(c.name << " value=" << c.value << " thr=" << c.threshold);
    REQUIRE(c.pass);
  }
  REQUIRE(m1.all_pass());

  // rerun with a different thread count: byte-identical artifacts
  json config4 = config;
  config4["threads"] = 4;
  fs::path out2 = fresh_dir("sim2");
  RunManifest m2 = run_experiment(config4, out2);
  REQUIRE(m1.artifacts.size() == m2.artifacts.size());
  for (std::size_t i = 0; i < m1.artifacts.size(); ++i) {
    REQUIRE(m1.artifacts[i].first == m2.artifacts[i].first);
    REQUIRE(m1.artifacts[i].second == m2.artifacts[i].second);  // same digest
  }

  // emitted report round-trips through the JSON parser
  fs::path rp = out1 / "report_roundtrip.json";
  emit_report(m1, ReportFormat::json_format, rp);
  std::ifstream in(rp);
  json parsed = json::parse(in);
  REQUIRE(parsed["all_pass"].get<bool>() == true);
  REQUIRE(parsed["checks"].size() == m1.checks.size());

  // text table carries one row per check
  fs::path tp = out1 / "report_roundtrip.txt";
  emit_report(m1, ReportFormat::text_table, tp);
  std::ifstream tin(tp);
  std::string line;
  int rows = 0;
  while (std::getline(tin, line))
    if (line.find(" PASS ") != std::string::npos) ++rows;
  REQUIRE(rows == static_cast<int>(m1.checks.size()));
}

TEST_CASE("fit-decay experiment reads a table and fits it") {
  fs::path out = fresh_dir("fit");
  fs::path table = out / "input.csv";
  {
    std::ofstream f(table);
    f << "t,value\n";
    for (int i = 0; i < 30; ++i) {
      double t = 0.5 * i;
      f << t << "," << 2.0 * std::exp(-0.4 * t) << "\n";
    }
  }
  json config = {{"kind", "fit_decay"},
                 {"fit",
                  {{"input_csv", table.string()},
                   {"model", "exponential"},
                   {"window", {0.0, 20.0}}}}};
  RunManifest man = run_experiment(config, out);
  REQUIRE(man.all_pass());
  std::ifstream in(out / "decay_fit.json");
  json fit = json::parse(in);
  REQUIRE(fit["rate"].get<double>() == Catch::Approx(0.4).margin(1e-10));
}

TEST_CASE("kernel-verify experiment on a small couette scan") {
  json config = {{"kind", "kernel_verify"},
                 {"threads", 2},
                 {"profile", {{"kind", "couette"}}},
                 {"kernel_scan",
                  {{"eps", {1e-3}},
                   {"alpha_tilde", {0.0, 1.0}},
                   {"z_values", {-3.0, -1.0, 0.0, 1.0, 3.0}},
                   {"y_half_width", 22.0}}}};
  fs::path out = fresh_dir("kv");
  RunManifest man = run_experiment(config, out);
  for (const auto& c : man.checks) {
    INFO(c.name << " value=" << c.value);
    REQUIRE(c.pass);
  }
  REQUIRE(fs::exists(out / "kernel_report.json"));
  REQUIRE(fs::exists(out / "manifest.json"));
}

TEST_CASE("lap-scan experiment: couette exactness through the CLI layer") {
  json config = {{"kind", "lap_scan"},
                 {"threads", 2},
                 {"profile", {{"kind", "couette"}}},
                 {"mode", {{"k", 1}, {"nu", 1e-2}}},
                 {"lap",
                  {{"eps", {1e-2}},
                   {"alpha_factors", {0.0}},
                   {"y0", {0.0, 1.0}},
                   {"half_width", 8.0}}}};
  fs::path out = fresh_dir("lap");
  RunManifest man = run_experiment(config, out);
  REQUIRE(man.all_pass());
}

TEST_CASE("dsr-check experiment with toy matrices and a tiny generator") {
  json config = {{"kind", "dsr_check"},
                 {"threads", 2},
                 {"profile", {{"kind", "couette"}}},
                 {"mode", {{"k", 1}}},
                 {"nu_sweep", {1e-2}},
                 {"dsr",
                  {{"half_width", 5.0},
                   {"points", 201},
                   {"t_max", 20.0},
                   {"time_samples", 11}}}};
  fs::path out = fresh_dir("dsr");
  RunManifest man = run_experiment(config, out);
  for (const auto& c : man.checks) {
    INFO(c.name << " value=" << c.value);
    REQUIRE(c.pass);
  }
}
