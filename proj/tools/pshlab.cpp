// Command-line driver: pshlab <command> --config <path> [--set key=value]...
// [--out <dir>] [--canonical], and pshlab plotdata --report <path>.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pshlab/cli.hpp"
#include "pshlab/errors.hpp"

namespace {

int run_experiment(const std::string& command, const std::string& config_path,
                   const std::vector<std::string>& overrides, const std::string& out_dir, bool canonical) {
  using nlohmann::json;
  std::ifstream in(config_path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config file %s\n", config_path.c_str());
    return 1;
  }
  try {
    json doc = json::parse(in);
    if (doc.is_object() && !doc.contains("command")) doc["command"] = command;
    if (doc.is_object() && doc["command"] != command) {
      throw pshlab::InputError("config command '" + doc["command"].dump() + "' does not match '" + command + "'");
    }
    for (const auto& o : overrides) pshlab::apply_override(doc, o);
    const pshlab::ExperimentConfig config = pshlab::parse_config(doc);
    return pshlab::run(config, {out_dir, canonical});
  } catch (const json::parse_error& e) {
    std::fprintf(stderr, "error: %s: %s\n", config_path.c_str(), e.what());
  } catch (const pshlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical harness for weighted Bergman projections and multiplier ideals"};
  app.set_version_flag("--version", std::string(pshlab::kToolVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path, plot_out;
  std::vector<std::string> overrides;
  bool canonical = false;

  for (const char* name : {"quad-check", "theorem", "truncation", "sweep", "blocki", "remark", "ideal"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override a config field: key.path=value");
    sub->add_option("--out", out_dir, "output directory (default: output_dir from the config)");
    sub->add_flag("--canonical", canonical, "omit timestamps and timings for byte-stable reports");
  }
  CLI::App* plot = app.add_subcommand("plotdata", "flatten a sweep or truncation report into a CSV series");
  plot->add_option("--report", report_path, "report.json")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen == plot) {
    try {
      std::ifstream in(report_path);
      const std::string csv = pshlab::emit_plotdata(nlohmann::json::parse(in));
      if (plot_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream(plot_out) << csv;
      }
      return 0;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return run_experiment(chosen->get_name(), config_path, overrides, out_dir, canonical);
}
