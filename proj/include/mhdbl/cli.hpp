// Run configuration, canonical serialization and the subcommand runner behind the command-line tool.
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "mhdbl/pipeline.hpp"

namespace mhdbl {

struct RunConfig {
  // Required; one of the built-in profile names.
  std::string profile;
  PhysicalParams params;
  GridSpec grid;
  AssumptionThresholds thresholds;
  std::vector<double> eps_sweep{4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};
  // Optional two-column files (Y, value) replacing the shear-flow profiles.
  std::string u0e_table, h0e_table;
  std::string out_dir = "out";
  bool ledger = false;
  // Solver tolerances.
  double layer0_tol = 1e-10;
  int layer0_max_iter = 50;
  double euler_tol = 1e-10;
  int euler_max_iter = 4000;
  double linear_rel_tol = 1e-9;
  int picard_max_iter = 30;
  double picard_rel_tol = 1e-8;
  double baseline_ratio_max = 0.12;
};

// Lines "key = value" with dotted keys or [section] headers; '#' starts a comment. Throws ConfigError.
RunConfig parse_config(const std::string& text);
// Sorted sections and keys, shortest round-trip numbers; parse_config(canonical(c)) reproduces it byte for byte.
std::string canonical(const RunConfig& config);
// 16 hex digits of FNV-1a over the canonical text and the contents of any tabulated files.
std::string config_hash(const RunConfig& config);
// Pipeline configuration with the grid length tied to params.L and tables loaded. Throws DependencyMissing.
PipelineConfig to_pipeline(const RunConfig& config);

struct RunOptions {
  std::string out_dir;
  int jobs = 1;
  bool strict = false;
  bool ledger = false;
};

const std::vector<std::string>& subcommands();
// Column layouts of every CSV artifact.
std::string csv_schemas();

// Runs one subcommand and writes its artifacts under out_dir/<hash>/. Returns 0, or 3 when --strict finds a violation.
int run_subcommand(const std::string& subcommand, const RunConfig& config, const RunOptions& opt, std::ostream& log);

}  // namespace mhdbl
