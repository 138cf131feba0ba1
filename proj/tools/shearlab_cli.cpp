// Command-line driver: each subcommand reads a JSON config, runs the
// corresponding pipeline, writes artifacts plus manifest.json and report
// files into --out, and exits 0 (all checks pass), 1 (check failure) or
// 2 (configuration or runtime error).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "shearlab/experiment.hpp"

namespace {

int run(const std::string& kind, const std::string& config_path,
        const std::string& out_dir, const std::string& report_format) {
  using namespace shearlab;
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config " << config_path << "\n";
      return 2;
    }
    json config = json::parse(in, nullptr, true, true);  // comments allowed
    if (config.contains("kind")) {
      if (config["kind"].get<std::string>() != kind) {
        std::cerr << "error: config kind '" << config["kind"].get<std::string>()
                  << "' does not match subcommand '" << kind << "'\n";
        return 2;
      }
    } else {
      config["kind"] = kind;
    }
    RunManifest man = run_experiment(config, out_dir);
    std::filesystem::path out(out_dir);
    emit_report(man, ReportFormat::text_table, out / "report.txt");
    emit_report(man, ReportFormat::json_format, out / "report.json");
    std::ifstream rep(out / (report_format == "json" ? "report.json" : "report.txt"));
    std::cout << rep.rdbuf();
    return man.all_pass() ? 0 : 1;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const LabError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shearlab: resolvent and evolution laboratory for linearized "
               "flows around monotone shear profiles"};
  app.require_subcommand(1);

  struct Sub {
    std::string name;
    std::string config;
    std::string out;
    std::string format = "text";
  };
  std::vector<std::string> kinds = {"simulate",  "resolvent", "kernel-verify",
                                    "lap-scan",  "dsr-check", "fit-decay",
                                    "theta-bounds"};
  std::vector<Sub> subs(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    subs[i].name = kinds[i];
    auto* cmd = app.add_subcommand(kinds[i]);
    cmd->add_option("--config", subs[i].config, "JSON experiment config")->required();
    cmd->add_option("--out", subs[i].out, "output directory")->required();
    cmd->add_option("--report-format", subs[i].format, "text | json");
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& sub : subs) {
    if (app.get_subcommand(sub.name)->parsed()) {
      std::string kind = sub.name;
      std::replace(kind.begin(), kind.end(), '-', '_');
      return run(kind, sub.config, sub.out, sub.format);
    }
  }
  return 2;
}
