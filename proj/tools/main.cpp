// Command-line front end: one subcommand per pipeline stage plus the eps study.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mhdbl/cli.hpp"
#include "mhdbl/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary-layer expansion of the 2D MHD system: solvers, residual studies and audits", "mhdbl"};
  app.require_subcommand(1);
  app.footer(mhdbl::csv_schemas());
  std::string config_path, out_dir = "";
  int jobs = 1;
  bool strict = false, ledger = false;
  for (const auto& name : mhdbl::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "artifact root (MHDBL_OUT overrides)");
    sub->add_option("--jobs", jobs, "worker threads for the study")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", strict, "exit 3 on any violated check");
    sub->add_flag("--ledger", ledger, "write ledger.md listing violations");
  }
  CLI11_PARSE(app, argc, argv);
  try {
    std::ifstream in(config_path);
    std::stringstream text;
    text << in.rdbuf();
    const auto config = mhdbl::parse_config(text.str());
    if (const char* env = std::getenv("MHDBL_OUT")) out_dir = env;
    const std::string sub = app.get_subcommands().front()->get_name();
    return mhdbl::run_subcommand(sub, config, {out_dir, jobs, strict, ledger}, std::cout);
  } catch (const mhdbl::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
