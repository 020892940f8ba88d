// Problem data: physical parameters, shear flow, boundary data, cut-offs, validator.
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mhdbl/grid.hpp"

namespace mhdbl {

struct PhysicalParams {
  double eps = 1e-2;
  double nu = 1.0;
  double kappa = 1.0;
  double L = 0.4;
  double u_b = 1.8;
  double gamma = 0.2;
  double zeta = 0.04;

  // Empty when admissible, otherwise one message per violated constraint.
  std::vector<std::string> violations() const;
  void validate() const;
};

// A smooth function of one variable with its first two derivatives.
class Profile1D {
 public:
  using Fn = std::function<double(double, int)>;
  Profile1D() : fn_([](double, int) { return 0.0; }) {}
  explicit Profile1D(Fn fn) : fn_(std::move(fn)) {}

  static Profile1D zero();
  static Profile1D constant(double c);
  // a * exp(-s / scale); a * exp(-s^2); a * s * exp(-s^2); a * (1 + s^2) * exp(-s^2).
  static Profile1D exponential(double a, double scale);
  static Profile1D gaussian(double a);
  static Profile1D gaussian_ramp(double a);
  static Profile1D flat_gaussian(double a);
  // Natural tabulation: samples interpolated with a cubic spline.
  static Profile1D tabulated(std::vector<double> nodes, std::vector<double> values);

  double operator()(double s) const { return fn_(s, 0); }
  double d(double s, int order) const { return fn_(s, order); }

  Profile1D operator+(const Profile1D& o) const;
  Profile1D scaled(double a) const;

 private:
  Fn fn_;
};

struct IdealShearFlow {
  Profile1D u0e;
  Profile1D h0e;
  double u_e = 0.0;
  double h_e = 0.0;

  std::vector<double> sample(const Profile1D& p, std::span<const double> Y, int order = 0) const;
};

// Side data for the Euler corrector. When anchored, the wall values are set
// from the layer0 traces so that corner compatibility holds by construction.
struct BoundaryData {
  Profile1D ubar0, hbar0;
  Profile1D ubar1, hbar1;
  Profile1D u1b, h1b;
  Profile1D Vb0, VbL, Gb0, GbL;
  bool anchored = false;
  Profile1D side_shape;
};

struct AssumptionThresholds {
  double vartheta0 = 0.1;
  double sigma0 = 0.9;
  double ratio_max = 0.1;
  double l = 0.0;
  // Constant C in |VbL - Vb0| <= C L.
  double side_C = 10.0;

  void validate() const;
};

struct CutoffSet {
  double R0 = 2.0;
};

enum class Cutoff { phi, chi, eta };

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 and its derivatives.
double smoothstep(double t, int derivative);
double cutoff_values(const CutoffSet& set, Cutoff which, int derivative, double y);

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  std::string note;
};

struct AssumptionReport {
  std::vector<CheckResult> checks;
  // Which regime of the ratio condition the data fall into.
  std::string ratio_case;
  bool all_pass() const;
  std::vector<std::string> failures() const;
  const CheckResult* find(const std::string& name) const;
};

struct ValidationSampling {
  int ny = 2000;
  int nY = 2000;
  double y_max = 30.0;
  double Y_max = 20.0;
};

AssumptionReport validate_assumptions(const PhysicalParams& params, const IdealShearFlow& flow,
                                      const BoundaryData& data, const AssumptionThresholds& th,
                                      const ValidationSampling& s = {});

struct BuiltinProfile {
  IdealShearFlow flow;
  BoundaryData data;
  double u_b = 0.0;
};

BuiltinProfile builtin_profile(const std::string& name, const PhysicalParams& params);
std::vector<std::string> builtin_profile_names();

// Wall traces consumed when anchoring side data.
struct CornerTraces {
  double v0 = 0.0, vL = 0.0;
  double g0 = 0.0, gL = 0.0;
  double b0 = 0.0, bL = 0.0;
};

BoundaryData anchor_side_data(const BoundaryData& data, const IdealShearFlow& flow, const CornerTraces& t);

// Max decay defect of every boundary profile at the truncation heights.
double boundary_decay_defect(const BoundaryData& data, double y_max, double Y_max);

}  // namespace mhdbl
