#include "mhdbl/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

// Comparisons against thresholds tolerate round-off of this relative size.
constexpr double kCompareTol = 1e-12;

bool leq(double a, double b) { return a <= b + kCompareTol * std::max(1.0, std::abs(b)); }

}  // namespace

std::vector<std::string> PhysicalParams::violations() const {
  std::vector<std::string> v;
  if (!(eps > 0.0)) v.push_back("eps must be positive");
  if (!(nu > 0.0)) v.push_back("nu must be positive");
  if (!(kappa > 0.0)) v.push_back("kappa must be positive");
  if (!(L > 0.0)) v.push_back("L must be positive");
  if (!(u_b > 0.0)) v.push_back("u_b must be positive");
  if (!(gamma > 0.0 && gamma < 0.25)) v.push_back("gamma must lie in (0, 1/4)");
  if (!(zeta > 0.0)) v.push_back("zeta must be positive");
  if (!leq(gamma + zeta, 0.25)) v.push_back("gamma + zeta must not exceed 1/4");
  if (!(zeta < gamma / 4.0)) v.push_back("zeta must be below gamma/4");
  if (!leq(eps, L / 10.0)) v.push_back("eps must not exceed L/10");
  return v;
}

void PhysicalParams::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError("profiles", "PhysicalParams", v.front());
}

void AssumptionThresholds::validate() const {
  if (!(vartheta0 > 0.0)) throw ConfigError("profiles", "AssumptionThresholds", "vartheta0 must be positive");
  if (!(sigma0 > 0.0 && sigma0 < 1.0)) throw ConfigError("profiles", "AssumptionThresholds", "sigma0 must lie in (0,1)");
  if (!(ratio_max > 0.0 && ratio_max < 1.0))
    throw ConfigError("profiles", "AssumptionThresholds", "ratio_max must lie in (0,1)");
  if (!(l >= 0.0)) throw ConfigError("profiles", "AssumptionThresholds", "l must be non-negative");
  if (!(side_C > 0.0)) throw ConfigError("profiles", "AssumptionThresholds", "side_C must be positive");
}

// ---------------------------------------------------------------- Profile1D

Profile1D Profile1D::zero() { return Profile1D(); }

Profile1D Profile1D::constant(double c) {
  return Profile1D([c](double, int k) { return k == 0 ? c : 0.0; });
}

Profile1D Profile1D::exponential(double a, double scale) {
  return Profile1D([a, scale](double s, int k) { return a * std::pow(-1.0 / scale, k) * std::exp(-s / scale); });
}

Profile1D Profile1D::gaussian(double a) {
  return Profile1D([a](double s, int k) {
    const double e = std::exp(-s * s);
    switch (k) {
      case 0: return a * e;
      case 1: return -2.0 * a * s * e;
      case 2: return a * (4.0 * s * s - 2.0) * e;
      default: return a * (12.0 * s - 8.0 * s * s * s) * e;
    }
  });
}

Profile1D Profile1D::gaussian_ramp(double a) {
  return Profile1D([a](double s, int k) {
    const double e = std::exp(-s * s);
    switch (k) {
      case 0: return a * s * e;
      case 1: return a * (1.0 - 2.0 * s * s) * e;
      case 2: return a * (4.0 * s * s * s - 6.0 * s) * e;
      default: return a * (-8.0 * s * s * s * s + 24.0 * s * s - 6.0) * e;
    }
  });
}

Profile1D Profile1D::flat_gaussian(double a) {
  // Flat to second order at s = 0.
  return Profile1D([a](double s, int k) {
    const double e = std::exp(-s * s), s2 = s * s;
    switch (k) {
      case 0: return a * (1.0 + s2) * e;
      case 1: return -2.0 * a * s2 * s * e;
      default: return a * (4.0 * s2 * s2 - 6.0 * s2) * e;
    }
  });
}

Profile1D Profile1D::tabulated(std::vector<double> nodes, std::vector<double> values) {
  auto sp = std::make_shared<CubicSpline>(std::move(nodes), std::move(values));
  return Profile1D([sp](double s, int k) { return k <= 2 ? sp->derivative(s, k) : 0.0; });
}

Profile1D Profile1D::operator+(const Profile1D& o) const {
  Fn a = fn_, b = o.fn_;
  return Profile1D([a, b](double s, int k) { return a(s, k) + b(s, k); });
}

Profile1D Profile1D::scaled(double c) const {
  Fn a = fn_;
  return Profile1D([a, c](double s, int k) { return c * a(s, k); });
}

std::vector<double> IdealShearFlow::sample(const Profile1D& p, std::span<const double> Y, int order) const {
  std::vector<double> r(Y.size());
  for (std::size_t k = 0; k < Y.size(); ++k) r[k] = p.d(Y[k], order);
  return r;
}

// ---------------------------------------------------------------- cut-offs

double smoothstep(double t, int derivative) {
  if (t <= 0.0 || t >= 1.0) {
    if (derivative == 0) return t <= 0.0 ? 0.0 : 1.0;
    return 0.0;
  }
  switch (derivative) {
    case 0: return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    case 1: return 30.0 * t * t * (1.0 - t) * (1.0 - t);
    case 2: return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    default: throw ConfigError("profiles", "smoothstep", "derivative > 2 unsupported");
  }
}

double cutoff_values(const CutoffSet& set, Cutoff which, int derivative, double y) {
  if (derivative < 0 || derivative > 2) throw ConfigError("profiles", "cutoff_values", "derivative > 2 unsupported");
  if (y < 0.0) throw ConfigError("profiles", "cutoff_values", "argument must be non-negative");
  switch (which) {
    case Cutoff::phi: {
      // 0 on [0, R0], 1 on [2R0, inf).
      const double R = set.R0;
      return smoothstep((y - R) / R, derivative) * std::pow(1.0 / R, derivative);
    }
    case Cutoff::chi: {
      // 1 on [0, 1/2], 0 on [1, inf).
      const double v = smoothstep(2.0 * (y - 0.5), derivative) * std::pow(2.0, derivative);
      return derivative == 0 ? 1.0 - v : -v;
    }
    case Cutoff::eta: {
      // 1 on [0, 1], 0 on [2, inf).
      const double v = smoothstep(y - 1.0, derivative);
      return derivative == 0 ? 1.0 - v : -v;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------- validator

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::vector<std::string> AssumptionReport::failures() const {
  std::vector<std::string> f;
  for (const auto& c : checks)
    if (!c.pass) f.push_back(c.name);
  return f;
}

const CheckResult* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

AssumptionReport validate_assumptions(const PhysicalParams& params, const IdealShearFlow& flow,
                                      const BoundaryData& data, const AssumptionThresholds& th,
                                      const ValidationSampling& s) {
  AssumptionReport rep;
  const auto y = uniform_nodes(s.y_max, s.ny);
  const auto Y = uniform_nodes(s.Y_max, s.nY);
  auto upper = [&](std::string name, double measured, double threshold, std::string note = {}) {
    CheckResult c{std::move(name), leq(measured, threshold), measured, threshold, threshold - measured, std::move(note)};
    rep.checks.push_back(std::move(c));
  };

  {
    auto v = params.violations();
    CheckResult c{"params", v.empty(), static_cast<double>(v.size()), 0.0, v.empty() ? 0.0 : -1.0, {}};
    for (const auto& m : v) c.note += m + "; ";
    rep.checks.push_back(c);
  }

  // (a) u_e + ubar0 > h_e + hbar0 >= vartheta0.
  double min_gap = std::numeric_limits<double>::infinity();
  double min_h = std::numeric_limits<double>::infinity();
  double sup_d1 = 0.0, sup_d2 = 0.0, sup_abs_h = 0.0;
  for (double yy : y) {
    const double U = flow.u_e + data.ubar0(yy);
    const double H = flow.h_e + data.hbar0(yy);
    min_gap = std::min(min_gap, U - H);
    min_h = std::min(min_h, H);
    sup_abs_h = std::max(sup_abs_h, std::abs(H));
    const double w = std::pow(1.0 + yy * yy, 0.5 * (th.l + 1.0));
    sup_d1 = std::max({sup_d1, w * std::abs(data.ubar0.d(yy, 1)), w * std::abs(data.hbar0.d(yy, 1))});
    sup_d2 = std::max({sup_d2, w * std::abs(data.ubar0.d(yy, 2)), w * std::abs(data.hbar0.d(yy, 2))});
  }
  {
    const bool pass = min_gap > kCompareTol && leq(th.vartheta0, min_h);
    CheckResult c{"a_parabolic", pass, min_gap, 0.0, std::min(min_gap, min_h - th.vartheta0),
                  "min(u_e+ubar0-h_e-hbar0); floor min(h_e+hbar0)=" + std::to_string(min_h)};
    rep.checks.push_back(c);
  }
  upper("b_first_derivative", sup_d1, 0.5 * th.sigma0);
  upper("c_second_derivative", sup_d2, 0.5 / th.vartheta0);

  // (d), (e) on the shear flow.
  double sup_ratio = 0.0, sup_dY = 0.0, min_u = std::numeric_limits<double>::infinity(),
         min_hh = std::numeric_limits<double>::infinity();
  for (double YY : Y) {
    const double u = flow.u0e(YY), h = flow.h0e(YY);
    min_u = std::min(min_u, u);
    min_hh = std::min(min_hh, h);
    sup_ratio = std::max(sup_ratio, std::abs(h / u));
    sup_abs_h = std::max(sup_abs_h, std::abs(h));
    const double w = std::sqrt(1.0 + YY * YY);
    sup_dY = std::max({sup_dY, w * std::abs(flow.u0e.d(YY, 1)), w * std::abs(flow.h0e.d(YY, 1))});
  }
  upper("d_ratio", sup_ratio, th.ratio_max);
  upper("e_shear_derivative", sup_dY, th.sigma0);

  // (f) side-data Lipschitz bound in L.
  double sup_side = 0.0;
  for (double YY : Y)
    sup_side = std::max({sup_side, std::abs(data.VbL(YY) - data.Vb0(YY)), std::abs(data.GbL(YY) - data.Gb0(YY))});
  upper("f_side_data", sup_side, th.side_C * params.L, data.anchored ? "anchored side data" : "");

  {
    const bool pos = min_u > 0.0 && min_hh > 0.0;
    CheckResult c{"shear_positive", pos, std::min(min_u, min_hh), 0.0, std::min(min_u, min_hh), {}};
    rep.checks.push_back(c);
  }
  {
    const double d = std::max(std::abs(flow.u0e.d(s.Y_max, 1)), std::abs(flow.h0e.d(s.Y_max, 1)));
    upper("shear_decay", d, 1e-8);
  }
  upper("data_decay", boundary_decay_defect(data, s.y_max, s.Y_max), 1e-8);
  {
    const double wall = std::abs(data.ubar0(0.0) - (params.u_b - flow.u_e)) + std::abs(data.hbar0.d(0.0, 1));
    upper("inflow_wall_compatibility", wall, 1e-8);
  }

  const bool small_field = leq(sup_abs_h, th.ratio_max);
  const bool dominant_velocity = leq(sup_ratio, th.ratio_max);
  rep.ratio_case = small_field && dominant_velocity ? "both"
                   : small_field                    ? "small_field"
                   : dominant_velocity              ? "dominant_velocity"
                                                    : "neither";
  return rep;
}

double boundary_decay_defect(const BoundaryData& d, double y_max, double Y_max) {
  double m = 0.0;
  for (const Profile1D* p : {&d.ubar0, &d.hbar0, &d.ubar1, &d.hbar1}) m = std::max(m, std::abs((*p)(y_max)));
  for (const Profile1D* p : {&d.u1b, &d.h1b, &d.Vb0, &d.VbL, &d.Gb0, &d.GbL, &d.side_shape})
    m = std::max(m, std::abs((*p)(Y_max)));
  return m;
}

// ---------------------------------------------------------------- built-ins

std::vector<std::string> builtin_profile_names() { return {"mild", "strong-shear", "zero-mismatch"}; }

namespace {

IdealShearFlow mild_flow() {
  IdealShearFlow f;
  f.u0e = Profile1D::constant(2.0) + Profile1D::exponential(-0.5, 1.0);
  f.h0e = Profile1D::constant(0.1) + Profile1D::exponential(0.05, 1.0);
  f.u_e = f.u0e(0.0);
  f.h_e = f.h0e(0.0);
  return f;
}

}  // namespace

BuiltinProfile builtin_profile(const std::string& name, const PhysicalParams& params) {
  BuiltinProfile p;
  if (name == "mild") {
    p.flow = mild_flow();
    p.u_b = params.u_b;
    const double mismatch = p.u_b - p.flow.u_e;
    auto& d = p.data;
    // Flat at the wall so the corner x = y = 0 is compatible to first order.
    d.ubar0 = Profile1D::flat_gaussian(mismatch);
    d.hbar0 = Profile1D::flat_gaussian(0.02);
    d.u1b = Profile1D::gaussian(0.1);
    d.h1b = Profile1D::gaussian(0.05);
    d.ubar1 = Profile1D::gaussian(-d.u1b(0.0));
    d.hbar1 = Profile1D::gaussian_ramp(-p.flow.h0e.d(0.0, 1));
    d.anchored = true;
    d.side_shape = Profile1D::gaussian(1.0);
  } else if (name == "strong-shear") {
    IdealShearFlow& f = p.flow;
    f.u0e = Profile1D::constant(2.0) + Profile1D::exponential(-1.5, 0.5);
    f.h0e = Profile1D::constant(0.05) + Profile1D::exponential(0.05, 0.5);
    f.u_e = f.u0e(0.0);
    f.h_e = f.h0e(0.0);
    p.u_b = f.u_e + 0.3;
    auto& d = p.data;
    d.ubar0 = Profile1D::flat_gaussian(p.u_b - f.u_e);
    d.hbar0 = Profile1D::flat_gaussian(0.02);
    d.u1b = Profile1D::gaussian(0.1);
    d.h1b = Profile1D::gaussian(0.05);
    d.ubar1 = Profile1D::gaussian(-d.u1b(0.0));
    d.hbar1 = Profile1D::gaussian_ramp(-f.h0e.d(0.0, 1));
    d.anchored = true;
    d.side_shape = Profile1D::gaussian(1.0);
  } else if (name == "zero-mismatch") {
    // Same velocity shear; the field profile is flat at the wall so that the
    // layer-one Neumann datum -h0e'(0) vanishes and every corrector is zero.
    p.flow = mild_flow();
    p.flow.h0e = Profile1D::constant(0.1) + Profile1D::gaussian(0.05);
    p.flow.h_e = p.flow.h0e(0.0);
    p.u_b = p.flow.u_e;
    p.data.anchored = false;
  } else {
    throw UnknownProfile("profiles", "builtin_profile", "unknown profile '" + name + "'");
  }
  return p;
}

BoundaryData anchor_side_data(const BoundaryData& data, const IdealShearFlow& flow, const CornerTraces& t) {
  BoundaryData d = data;
  if (!data.anchored) return d;
  const Profile1D s = data.side_shape;
  const Profile1D u = flow.u0e, h = flow.h0e;
  d.Vb0 = s.scaled(-t.v0);
  d.VbL = s.scaled(-t.vL);
  // G = (b - vwall * h0e) * s / u0e, which reduces to (h0e * V + b * s) / u0e.
  auto gside = [u, h, s](double vwall, double b) {
    return Profile1D([=](double Y, int k) {
      const double n0 = (b - vwall * h(Y)) * s(Y);
      const double n1 = -vwall * h.d(Y, 1) * s(Y) + (b - vwall * h(Y)) * s.d(Y, 1);
      const double n2 =
          -vwall * h.d(Y, 2) * s(Y) - 2.0 * vwall * h.d(Y, 1) * s.d(Y, 1) + (b - vwall * h(Y)) * s.d(Y, 2);
      const double U = u(Y), U1 = u.d(Y, 1), U2 = u.d(Y, 2);
      if (k == 0) return n0 / U;
      if (k == 1) return n1 / U - n0 * U1 / (U * U);
      return n2 / U - 2.0 * n1 * U1 / (U * U) - n0 * U2 / (U * U) + 2.0 * n0 * U1 * U1 / (U * U * U);
    });
  };
  d.Gb0 = gside(t.v0, t.b0);
  d.GbL = gside(t.vL, t.bL);
  return d;
}

}  // namespace mhdbl
