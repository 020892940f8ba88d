#include "mhdbl/audit.hpp"

#include <algorithm>
#include <cmath>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

double safe_ratio(double lhs, double rhs) {
  if (lhs == 0.0 && rhs == 0.0) return 0.0;
  if (rhs == 0.0) return INFINITY;
  return lhs / rhs;
}

// Trapezoid integral over the last x column of a pointwise expression.
template <class F>
double outflow_integral(const MeshPtr& m, F&& f) {
  const auto w = trapezoid_weights(m->z);
  const int i = m->nx();
  double s = 0.0;
  for (int j = 0; j <= m->nz(); ++j) s += w[j] * f(i, j);
  return s;
}

template <class F>
double inflow_integral(const MeshPtr& m, F&& f) {
  const auto w = trapezoid_weights(m->z);
  double s = 0.0;
  for (int j = 0; j <= m->nz(); ++j) s += w[j] * f(0, j);
  return s;
}

template <class F>
double volume_integral(const MeshPtr& m, F&& f) {
  Field2D t(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) t(i, j) = f(i, j);
  return integrate(t);
}

double sq(double a) { return a * a; }

void finish(InequalityReport& r) {
  r.lhs = 0.0;
  r.rhs = 0.0;
  for (const auto& [k, v] : r.lhs_terms) r.lhs += v;
  for (const auto& [k, v] : r.rhs_terms) r.rhs += v;
  r.ratio = safe_ratio(r.lhs, r.rhs);
  r.pass = r.ratio <= r.threshold;
}

struct Grads {
  Field2D ux, uy, vx, vy, hx, hy, gx, gy;
};

Grads grads(const Field2D& u, const Field2D& v, const Field2D& h, const Field2D& g) {
  return {diff(u, Dir::x, 1), diff(u, Dir::y, 1), diff(v, Dir::x, 1), diff(v, Dir::y, 1),
          diff(h, Dir::x, 1), diff(h, Dir::y, 1), diff(g, Dir::x, 1), diff(g, Dir::y, 1)};
}

}  // namespace

EnergyAudit energy_audit(const RemainderState& s, const ApproxBaseline& b, const RemainderSources& f,
                         const PhysicalParams& params, double threshold) {
  const MeshPtr& m = s.u.mesh();
  const double eps = params.eps, nu = params.nu, ka = params.kappa;
  const Grads d = grads(s.u, s.v, s.h, s.g);
  const Grads c = grads(b.u_s, b.v_s, b.h_s, b.g_s);
  const Field2D qx = diff(s.q, Dir::x, 1), qy = diff(s.q, Dir::y, 1);
  EnergyAudit a;
  auto& L = a.identity_lhs_terms;
  auto& R = a.identity_rhs_terms;
  L["outflow_flux"] = outflow_integral(m, [&](int i, int j) {
    return 0.5 * b.u_s(i, j) * (sq(s.u(i, j)) + eps * sq(s.v(i, j)) + sq(s.h(i, j)) + eps * sq(s.g(i, j)));
  });
  L["viscous"] = volume_integral(m, [&](int i, int j) {
    return nu * (eps * sq(d.ux(i, j)) + sq(d.uy(i, j))) + nu * eps * (eps * sq(d.vx(i, j)) + sq(d.vy(i, j)));
  });
  L["resistive"] = volume_integral(m, [&](int i, int j) {
    return ka * (eps * sq(d.hx(i, j)) + sq(d.hy(i, j))) + ka * eps * (eps * sq(d.gx(i, j)) + sq(d.gy(i, j)));
  });
  L["outflow_stress"] = outflow_integral(m, [&](int i, int j) {
    return s.p(i, j) * s.u(i, j) - nu * eps * d.ux(i, j) * s.u(i, j) - nu * eps * eps * d.vx(i, j) * s.v(i, j) -
           ka * eps * d.hx(i, j) * s.h(i, j) - ka * eps * eps * d.gx(i, j) * s.g(i, j);
  });
  L["multiplier"] = volume_integral(m, [&](int i, int j) { return qx(i, j) * s.h(i, j) + qy(i, j) * s.g(i, j); });
  R["coupling_u"] = -volume_integral(m, [&](int i, int j) {
    const double u = s.u(i, j), v = s.v(i, j), h = s.h(i, j), g = s.g(i, j);
    return c.ux(i, j) * u * u + v * c.uy(i, j) * u - h * c.hx(i, j) * u - g * c.hy(i, j) * u -
           b.h_s(i, j) * d.hx(i, j) * u - b.g_s(i, j) * d.hy(i, j) * u;
  });
  R["coupling_v"] = -eps * volume_integral(m, [&](int i, int j) {
    const double u = s.u(i, j), v = s.v(i, j), h = s.h(i, j), g = s.g(i, j);
    return u * c.vx(i, j) * v + c.vy(i, j) * v * v - h * c.gx(i, j) * v - g * c.gy(i, j) * v -
           b.h_s(i, j) * d.gx(i, j) * v - b.g_s(i, j) * d.gy(i, j) * v;
  });
  R["coupling_h"] = -volume_integral(m, [&](int i, int j) {
    const double u = s.u(i, j), v = s.v(i, j), h = s.h(i, j), g = s.g(i, j);
    return u * c.hx(i, j) * h + v * c.hy(i, j) * h - b.h_s(i, j) * d.ux(i, j) * h - c.ux(i, j) * h * h -
           b.g_s(i, j) * d.uy(i, j) * h - g * c.uy(i, j) * h;
  });
  R["coupling_g"] = -eps * volume_integral(m, [&](int i, int j) {
    const double u = s.u(i, j), v = s.v(i, j), h = s.h(i, j), g = s.g(i, j);
    return u * c.gx(i, j) * g + v * c.gy(i, j) * g - b.h_s(i, j) * d.vx(i, j) * g - h * c.vx(i, j) * g -
           b.g_s(i, j) * d.vy(i, j) * g - g * c.vy(i, j) * g;
  });
  R["forcing"] = inner(f.f1, s.u) + inner(f.f3, s.h) + eps * (inner(f.f2, s.v) + inner(f.f4, s.g));
  for (const auto& [k, v] : L) a.identity_lhs += v;
  for (const auto& [k, v] : R) a.identity_rhs += v;
  const double scale = std::max(std::abs(a.identity_lhs), std::abs(a.identity_rhs));
  a.imbalance = scale == 0.0 ? 0.0 : std::abs(a.identity_lhs - a.identity_rhs) / scale;

  InequalityReport& q = a.inequality;
  q.name = "energy";
  q.threshold = threshold;
  q.lhs_terms["nu_grad_u"] = nu * sq(nabla_eps_norm(s.u, eps));
  q.lhs_terms["kappa_grad_h"] = ka * sq(nabla_eps_norm(s.h, eps));
  q.lhs_terms["outflow_flux"] = outflow_integral(m, [&](int i, int j) {
    return b.u_s(i, j) * (sq(s.u(i, j)) + eps * sq(s.v(i, j)) + eps * sq(s.g(i, j)));
  });
  q.rhs_terms["L_grad_vg"] = params.L * (sq(nabla_eps_norm(s.v, eps)) + sq(nabla_eps_norm(s.g, eps)));
  q.rhs_terms["f13"] = sq(l2_norm(f.f1)) + sq(l2_norm(f.f3));
  q.rhs_terms["f24"] = eps * (sq(l2_norm(f.f2)) + sq(l2_norm(f.f4)));
  finish(q);
  return a;
}

InequalityReport positivity_audit(const RemainderState& s, const ApproxBaseline& b, const RemainderSources& f,
                                  const PhysicalParams& params, double threshold) {
  const MeshPtr& m = s.u.mesh();
  const double eps = params.eps;
  const Field2D vx = diff(s.v, Dir::x, 1), gx = diff(s.g, Dir::x, 1), vy = diff(s.v, Dir::y, 1);
  InequalityReport r;
  r.name = "positivity";
  r.threshold = threshold;
  const double gvg = sq(nabla_eps_norm(s.v, eps)) + sq(nabla_eps_norm(s.g, eps));
  r.lhs_terms["grad_vg"] = gvg;
  r.lhs_terms["inflow"] = inflow_integral(m, [&](int i, int j) {
    return eps * eps * (params.nu * sq(vx(i, j)) + params.kappa * sq(gx(i, j))) / b.u_s(i, j);
  });
  r.lhs_terms["outflow"] = eps * outflow_integral(m, [&](int i, int j) { return sq(vy(i, j)) / b.u_s(i, j); });
  const double coeff = params.L + b.ratio + b.y_dy;
  r.rhs_terms["f13"] = sq(l2_norm(f.f1)) + sq(l2_norm(f.f3));
  r.rhs_terms["f24"] = eps * (sq(l2_norm(f.f2)) + sq(l2_norm(f.f4)));
  r.rhs_terms["grad_uh"] = sq(nabla_eps_norm(s.u, eps)) + sq(nabla_eps_norm(s.h, eps));
  r.rhs_terms["weighted_grad_vg"] = coeff * gvg;
  r.extra["coefficient"] = coeff;
  r.extra["ratio_hs_us"] = b.ratio;
  r.extra["y_dy"] = b.y_dy;
  finish(r);
  return r;
}

RemainderSources stokes_sources(const RemainderState& s, const PhysicalParams& params) {
  const double eps = params.eps;
  const Field2D px = diff(s.p, Dir::x, 1), py = diff(s.p, Dir::y, 1);
  RemainderSources F;
  F.f1 = px;
  F.f1.axpy(-params.nu, delta_eps(s.u, eps));
  F.f2 = (1.0 / eps) * py;
  F.f2.axpy(-params.nu, delta_eps(s.v, eps));
  F.f3 = -params.kappa * delta_eps(s.h, eps);
  F.f4 = -params.kappa * delta_eps(s.g, eps);
  return F;
}

InequalityReport linf_audit(const RemainderState& s, const RemainderSources& F, const PhysicalParams& params,
                            double threshold) {
  const double eps = params.eps, se = std::sqrt(eps), e4 = std::pow(eps, params.gamma / 4.0);
  InequalityReport r;
  r.name = "linf";
  r.threshold = threshold;
  r.lhs_terms["uh"] = e4 * (sup_norm(s.u) + sup_norm(s.h));
  r.lhs_terms["vg"] = e4 * se * (sup_norm(s.v) + sup_norm(s.g));
  r.rhs_terms["gradients"] =
      nabla_eps_norm(s.u, eps) + nabla_eps_norm(s.h, eps) + nabla_eps_norm(s.v, eps) + nabla_eps_norm(s.g, eps);
  r.rhs_terms["F13"] = l2_norm(F.f1) + l2_norm(F.f3);
  r.rhs_terms["F24"] = se * (l2_norm(F.f2) + l2_norm(F.f4));
  finish(r);
  return r;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw NonPositiveValue("audit", "rate_fit", "at least three pairs are required");
  double sx = 0.0, sy = 0.0;
  std::vector<double> X, Y;
  for (const auto& [e, v] : pairs) {
    if (!(e > 0.0) || !(v > 0.0) || !std::isfinite(e) || !std::isfinite(v))
      throw NonPositiveValue("audit", "rate_fit", "log-log fit needs positive finite values");
    X.push_back(std::log(e));
    Y.push_back(std::log(v));
    sx += X.back();
    sy += Y.back();
  }
  const double n = static_cast<double>(X.size()), mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
    syy += (Y[k] - my) * (Y[k] - my);
  }
  if (sxx == 0.0) throw NonPositiveValue("audit", "rate_fit", "all abscissae coincide");
  RateFit r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return r;
}

HardyPoincareReport hardy_poincare_check(const Field2D& f, double L) {
  HardyPoincareReport r;
  const MeshPtr& m = f.mesh();
  r.poincare_lhs = l2_norm(f);
  r.poincare_rhs = L * l2_norm(diff(f, Dir::x, 1));
  r.poincare_ratio = safe_ratio(r.poincare_lhs, r.poincare_rhs);
  Field2D w = tail_integral(f, Orientation::from_wall);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) w(i, j) /= std::sqrt(1.0 + m->z[j] * m->z[j]);
  r.hardy_lhs = l2_norm(w);
  r.hardy_rhs = r.hardy_constant * l2_norm(f);
  r.hardy_ratio = safe_ratio(r.hardy_lhs, r.hardy_rhs);
  r.pass = r.poincare_ratio <= 1.0 && r.hardy_ratio <= 1.0;
  return r;
}

}  // namespace mhdbl
