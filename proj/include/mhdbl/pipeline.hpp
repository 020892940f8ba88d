// End-to-end runs for one eps, structural checks, and the eps-sweep study.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mhdbl/audit.hpp"
#include "mhdbl/composer.hpp"
#include "mhdbl/euler1.hpp"
#include "mhdbl/grid.hpp"
#include "mhdbl/layer0.hpp"
#include "mhdbl/layer1.hpp"
#include "mhdbl/profiles.hpp"
#include "mhdbl/remainder.hpp"

namespace mhdbl {

enum class Stage { validate, layer0, euler1, layer1, compose, remainder };

struct PipelineConfig {
  std::string profile = "mild";
  PhysicalParams params;
  GridSpec grid;
  AssumptionThresholds thresholds;
  Layer0Options layer0;
  EulerOptions euler;
  Layer1Options layer1;
  ComposeOptions compose;
  PicardOptions picard;
  // Upper bound on sup |h_s / u_s| accepted by the baseline.
  double baseline_ratio_max = 0.12;
  // Tabulated replacements of the shear-flow profiles; the wall velocity mismatch of the profile is kept.
  std::optional<Profile1D> u0e_table, h0e_table;
};

struct PipelineResult {
  PhysicalParams params;
  IdealShearFlow flow;
  BoundaryData data;
  AssumptionReport validation;
  std::optional<LayerZeroSolution> l0;
  std::optional<EulerCorrector> ec;
  std::optional<Layer1Sources> sources;
  std::optional<LayerOneSolution> l1;
  std::optional<ApproxSolution> approx;
  std::optional<ResidualBundle> residuals;
  std::optional<ApproxBaseline> baseline;
  std::optional<RemainderState> remainder;
  std::optional<MainTheoremReport> theorem;
};

// Runs every stage up to and including `last`. Solver failures are re-raised with the eps value appended.
PipelineResult run_pipeline(const PipelineConfig& config, Stage last = Stage::remainder);

// Structural invariants of a completed run; one entry per check.
std::vector<CheckResult> structural_checks(const PipelineResult& run, const PipelineConfig& config);

struct AuditRow {
  double energy_ratio = 0.0, positivity_ratio = 0.0, linf_ratio = 0.0;
  double energy_imbalance = 0.0;
};

struct StudyRow {
  double eps = 0.0;
  double R1 = 0.0, R2 = 0.0, R3 = 0.0, R4 = 0.0, weighted = 0.0;
  MainTheoremReport theorem;
  std::vector<double> delta_ratios;
  AuditRow audits;
  std::vector<CheckResult> structure;
};

struct StudyReport {
  std::string profile;
  std::vector<StudyRow> rows;
  RateFit weighted, R1, R3, R24, gap_U, gap_V, gap_H, gap_G, normS;
};

// Checks the sweep preconditions: at least 4 values spanning a decade, each at most L/10.
void validate_sweep(const std::vector<double>& eps_list, double L);

// Full pipeline per eps, run concurrently up to `jobs`; rows ordered as eps_list.
StudyReport scaling_study(const PipelineConfig& base, const std::vector<double>& eps_list, int jobs = 1,
                          bool with_remainder = true);

// Pass/fail of the sweep-level targets: residual, gap and S-norm slopes, contraction trend,
// structural checks on every member and audit ratios. Thresholds are fixed in the implementation.
std::vector<CheckResult> study_acceptance(const StudyReport& report, const PhysicalParams& params);

}  // namespace mhdbl
