// Numerical renderings of the energy, positivity and L-infinity estimates, rate fits and Hardy/Poincare checks.
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mhdbl/grid.hpp"
#include "mhdbl/profiles.hpp"
#include "mhdbl/remainder.hpp"

namespace mhdbl {

struct InequalityReport {
  std::string name;
  std::map<std::string, double> lhs_terms, rhs_terms;
  double lhs = 0.0, rhs = 0.0;
  // lhs / rhs; zero when both sides vanish.
  double ratio = 0.0;
  double threshold = 10.0;
  bool pass = true;
  // Side information such as the weighted coefficient of the positivity bracket.
  std::map<std::string, double> extra;
};

struct EnergyAudit {
  // Terms of the energy identity obtained by testing the rows with (u, eps v, h, eps g).
  std::map<std::string, double> identity_lhs_terms, identity_rhs_terms;
  double identity_lhs = 0.0, identity_rhs = 0.0;
  // |lhs - rhs| / max(|lhs|, |rhs|); zero when both vanish.
  double imbalance = 0.0;
  InequalityReport inequality;
};

EnergyAudit energy_audit(const RemainderState& state, const ApproxBaseline& baseline, const RemainderSources& f,
                         const PhysicalParams& params, double threshold = 10.0);

InequalityReport positivity_audit(const RemainderState& state, const ApproxBaseline& baseline,
                                  const RemainderSources& f, const PhysicalParams& params, double threshold = 10.0);

// Stokes-form sources: -nu Lap u + d_x p, -nu Lap v + d_y p / eps, -kappa Lap h, -kappa Lap g.
RemainderSources stokes_sources(const RemainderState& state, const PhysicalParams& params);

// The ratio is the smallest constant that makes the estimate hold on this state.
InequalityReport linf_audit(const RemainderState& state, const RemainderSources& F, const PhysicalParams& params,
                            double threshold = 10.0);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares of log(value) against log(eps).
RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs);

struct HardyPoincareReport {
  // ||f|| <= L ||d_x f|| for f vanishing at x = 0.
  double poincare_lhs = 0.0, poincare_rhs = 0.0, poincare_ratio = 0.0;
  // ||<y>^{-1} int_0^y f|| <= C ||f|| with C = 2.
  double hardy_lhs = 0.0, hardy_rhs = 0.0, hardy_ratio = 0.0;
  double hardy_constant = 2.0;
  bool pass = true;
};

HardyPoincareReport hardy_poincare_check(const Field2D& f, double L);

}  // namespace mhdbl
