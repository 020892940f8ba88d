#include "mhdbl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

std::string eps_tag(double eps) {
  std::ostringstream s;
  s << " [eps = " << eps << "]";
  return s.str();
}

// Max |(v_j - v_{j-1}) / dz + (w_j + w_{j-1}) / 2| with w = d_t u: the trapezoid pair used to build v from u.
double trapezoid_pair_defect(const Field2D& u, const Field2D& v, bool along_x) {
  const Mesh& m = *u.mesh();
  double d = 0.0, scale = 1.0;
  if (!along_x) {
    const Field2D w = diff(u, Dir::x, 1);
    scale = std::max(scale, sup_norm(w));
    for (int i = 0; i <= m.nx(); ++i)
      for (int j = 1; j <= m.nz(); ++j)
        d = std::max(d, std::abs((v(i, j) - v(i, j - 1)) / (m.z[j] - m.z[j - 1]) + 0.5 * (w(i, j) + w(i, j - 1))));
  } else {
    // Here v is integrated along x from d_Y u.
    const Field2D w = diff(u, Dir::y, 1);
    scale = std::max(scale, sup_norm(w));
    for (int i = 1; i <= m.nx(); ++i)
      for (int j = 0; j <= m.nz(); ++j)
        d = std::max(d, std::abs((v(i, j) - v(i - 1, j)) / (m.x[i] - m.x[i - 1]) + 0.5 * (w(i, j) + w(i - 1, j))));
  }
  return d / scale;
}

CheckResult check(std::string name, double measured, double threshold, std::string note = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.pass = std::isfinite(measured) && measured <= threshold;
  c.margin = threshold - measured;
  c.note = std::move(note);
  return c;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, Stage last) {
  PipelineResult r;
  r.params = cfg.params;
  const std::string tag = eps_tag(cfg.params.eps);
  try {
    cfg.grid.validate();
    r.params.validate();
    BuiltinProfile b = builtin_profile(cfg.profile, r.params);
    if (cfg.u0e_table) {
      const double mismatch = b.u_b - b.flow.u_e;
      b.flow.u0e = *cfg.u0e_table;
      b.flow.u_e = b.flow.u0e(0.0);
      b.u_b = b.flow.u_e + mismatch;
    }
    if (cfg.h0e_table) {
      b.flow.h0e = *cfg.h0e_table;
      b.flow.h_e = b.flow.h0e(0.0);
    }
    r.params.u_b = b.u_b;
    r.flow = b.flow;
    r.data = b.data;
    r.validation = validate_assumptions(r.params, r.flow, r.data, cfg.thresholds);
    if (last == Stage::validate) return r;

    Layer0Options o0 = cfg.layer0;
    o0.vartheta0 = cfg.thresholds.vartheta0;
    o0.sigma0 = cfg.thresholds.sigma0;
    o0.l = cfg.thresholds.l;
    r.l0 = solve_layer0(layer_mesh(cfg.grid), r.flow, r.data, r.params, o0);
    if (r.data.anchored) r.data = anchor_side_data(r.data, r.flow, corner_traces(*r.l0));
    if (last == Stage::layer0) return r;

    EulerOptions oe = cfg.euler;
    oe.ratio_max = cfg.thresholds.ratio_max;
    r.ec = solve_euler1(*r.l0, r.data, r.flow, euler_mesh(cfg.grid), r.params, oe);
    if (last == Stage::euler1) return r;

    r.sources = assemble_sources(*r.l0, *r.ec, r.flow, r.params);
    Layer1Options o1 = cfg.layer1;
    o1.vartheta0 = cfg.thresholds.vartheta0;
    r.l1 = march_layer1(*r.sources, *r.l0, r.data, r.params, o1);
    if (last == Stage::layer1) return r;

    r.approx = compose(*r.l0, *r.ec, *r.l1, r.flow, r.params, cfg.compose);
    r.residuals = residuals(*r.approx, r.params);
    if (last == Stage::compose) return r;

    r.baseline = build_baseline(*r.l0, *r.approx, r.params, cfg.baseline_ratio_max);
    r.remainder = picard_iterate(*r.baseline, *r.residuals, *r.l1, r.params, cfg.picard);
    r.theorem = reconstruct_and_verify(*r.approx, *r.l0, *r.remainder, r.params);
  } catch (const Error& e) {
    const std::string what = e.what();
    const std::string prefix = e.module() + "::" + e.op() + ": " + e.kind() + ": ";
    throw Error(e.kind(), e.module(), e.op(), what.substr(std::min(prefix.size(), what.size())) + tag);
  }
  return r;
}

std::vector<CheckResult> structural_checks(const PipelineResult& r, const PipelineConfig& cfg) {
  std::vector<CheckResult> out;
  if (r.l0) {
    const double d = std::max(trapezoid_pair_defect(r.l0->u0p, r.l0->v0p, false),
                              trapezoid_pair_defect(r.l0->h0p, r.l0->g0p, false));
    out.push_back(check("layer0_divergence_pair", d, 1e-10, "relative to sup |d_x (u0p, h0p)|"));
  }
  if (r.ec) {
    const EulerCorrector& ec = *r.ec;
    const double d =
        std::max(trapezoid_pair_defect(ec.v1e, ec.u1e, true), trapezoid_pair_defect(ec.g1e, ec.h1e, true));
    out.push_back(check("euler1_divergence_pair", d, 1e-10, "relative to sup |d_Y (v1e, g1e)|"));
    const Mesh& m = *ec.v1e.mesh();
    double rel = 0.0;
    for (int i = 0; i <= m.nx(); ++i)
      for (int j = 0; j <= m.nz(); ++j) {
        const double u0 = r.flow.u0e(m.z[j]), h0 = r.flow.h0e(m.z[j]);
        rel = std::max(rel, std::abs(ec.g1e(i, j) - (h0 / u0) * ec.v1e(i, j) - ec.b[i] / u0));
      }
    out.push_back(check("euler1_algebraic_relation", rel, 1e-12));
    double wall = 0.0;
    for (int i = 0; i <= m.nx(); ++i)
      wall = std::max({wall, std::abs(ec.v1e(i, 0) + r.l0->v0p(i, 0)), std::abs(ec.g1e(i, 0) + r.l0->g0p(i, 0))});
    out.push_back(check("euler1_wall_traces", wall, 1e-9));
  }
  if (r.l1) {
    const double d = std::max(trapezoid_pair_defect(r.l1->up, r.l1->vp, false),
                              trapezoid_pair_defect(r.l1->hp, r.l1->gp, false));
    out.push_back(check("layer1_divergence_pair", d, 1e-10, "raw fields, relative to sup |d_x (up, hp)|"));
  }
  if (r.approx) {
    const ApproxSolution& a = *r.approx;
    const Diff1D d1 = make_diff1d(a.h_app.mesh()->z, 1);
    const double se = std::sqrt(r.params.eps);
    double rho = 0.0, dyh = 0.0;
    for (int i = 0; i <= a.h_app.nx(); ++i) {
      rho = std::max(rho, std::abs(d1.apply(a.euler.h1e_tilde.row(i), 0)));
      // The inflow row is prescribed data.
      if (i == 0) continue;
      // The leading Euler profile enters with its exact wall slope.
      const Field2D& h = a.h_app;
      std::vector<double> col(h.row(i).begin(), h.row(i).end());
      for (int j = 0; j <= h.nz(); ++j) col[j] -= a.h0e(i, j);
      dyh = std::max(dyh, std::abs(d1.apply(col, 0) + se * r.flow.h0e.d(0.0, 1)));
    }
    out.push_back(check("rho_conductor_condition", rho, 1e-10));
    const WallDefects w = wall_defects(a, r.params);
    out.push_back(check("composite_wall_u", w.u, 1e-12));
    out.push_back(check("composite_wall_v", w.v, 1e-12));
    out.push_back(check("composite_wall_g", w.g, 1e-12));
    out.push_back(check("composite_wall_dyh", dyh, 1e-8, "x > 0, leading Euler slope taken exactly"));
  }
  if (r.remainder && r.baseline) {
    const RemainderState& s = *r.remainder;
    const double scale = std::max({1.0, sup_norm(s.u), sup_norm(s.v), sup_norm(s.h), sup_norm(s.g)});
    out.push_back(check("remainder_divergence_u", s.last_solve.div_u, 1e-8));
    out.push_back(check("remainder_divergence_h", s.last_solve.div_h, 1e-8));
    const LinearizedSystem sys(*r.baseline, r.params, cfg.picard.linear);
    out.push_back(check("remainder_boundary_rows", sys.boundary_defect(s) / scale, 1e-9));
    const double qrel = s.last_solve.hg_norm > 0.0 ? s.last_solve.q_norm / s.last_solve.hg_norm : 0.0;
    out.push_back(check("magnetic_multiplier", qrel, 1e-6, "|q| / |(h, g)|"));
  }
  return out;
}

void validate_sweep(const std::vector<double>& eps, double L) {
  if (eps.size() < 4) throw ConfigError("composer", "scaling_study", "need at least 4 eps values");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (!(*lo > 0.0)) throw ConfigError("composer", "scaling_study", "eps values must be positive");
  if (*hi / *lo < 10.0 * (1.0 - 1e-12)) throw ConfigError("composer", "scaling_study", "eps values must span a decade");
  if (*hi > L / 10.0 * (1.0 + 1e-12)) throw ConfigError("composer", "scaling_study", "every eps must be at most L/10");
}

StudyReport scaling_study(const PipelineConfig& base, const std::vector<double>& eps_list, int jobs,
                          bool with_remainder) {
  validate_sweep(eps_list, base.params.L);
  StudyReport rep;
  rep.profile = base.profile;
  rep.rows.resize(eps_list.size());
  std::vector<std::exception_ptr> errors(eps_list.size());
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= eps_list.size()) return;
        k = next++;
      }
      try {
        PipelineConfig cfg = base;
        cfg.params.eps = eps_list[k];
        const PipelineResult r = run_pipeline(cfg, with_remainder ? Stage::remainder : Stage::compose);
        StudyRow row;
        row.eps = eps_list[k];
        row.R1 = r.residuals->R1_L2;
        row.R2 = r.residuals->R2_L2;
        row.R3 = r.residuals->R3_L2;
        row.R4 = r.residuals->R4_L2;
        row.weighted = r.residuals->weighted_sum;
        if (with_remainder) {
          row.theorem = *r.theorem;
          row.delta_ratios = delta_ratios(*r.remainder);
          const RemainderSources f = nonlinear_sources(*r.remainder, *r.residuals, *r.l1, r.params);
          const EnergyAudit en = energy_audit(*r.remainder, *r.baseline, f, r.params);
          row.audits.energy_ratio = en.inequality.ratio;
          row.audits.energy_imbalance = en.imbalance;
          row.audits.positivity_ratio = positivity_audit(*r.remainder, *r.baseline, f, r.params).ratio;
          row.audits.linf_ratio = linf_audit(*r.remainder, stokes_sources(*r.remainder, r.params), r.params).ratio;
        }
        row.structure = structural_checks(r, cfg);
        rep.rows[k] = std::move(row);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(eps_list.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  auto fit = [&](auto get) {
    std::vector<std::pair<double, double>> p;
    for (const auto& row : rep.rows) p.emplace_back(row.eps, get(row));
    return rate_fit(p);
  };
  rep.weighted = fit([](const StudyRow& r) { return r.weighted; });
  rep.R1 = fit([](const StudyRow& r) { return r.R1; });
  rep.R3 = fit([](const StudyRow& r) { return r.R3; });
  rep.R24 = fit([](const StudyRow& r) { return std::sqrt(r.eps) * (r.R2 + r.R4); });
  if (with_remainder) {
    rep.gap_U = fit([](const StudyRow& r) { return r.theorem.gap_U; });
    rep.gap_V = fit([](const StudyRow& r) { return r.theorem.gap_V; });
    rep.gap_H = fit([](const StudyRow& r) { return r.theorem.gap_H; });
    rep.gap_G = fit([](const StudyRow& r) { return r.theorem.gap_G; });
    rep.normS = fit([](const StudyRow& r) { return r.theorem.normS; });
  }
  return rep;
}

std::vector<CheckResult> study_acceptance(const StudyReport& rep, const PhysicalParams& params) {
  std::vector<CheckResult> out;
  auto band = [&](std::string name, double v, double lo, double hi) {
    CheckResult c;
    c.name = std::move(name);
    c.measured = v;
    c.threshold = lo;
    c.pass = std::isfinite(v) && v >= lo && v <= hi;
    c.margin = std::min(v - lo, hi - v);
    std::ostringstream n;
    n << "band [" << lo << ", " << hi << "]";
    c.note = n.str();
    out.push_back(c);
  };
  auto at_least = [&](std::string name, double v, double lo) {
    band(std::move(name), v, lo, std::numeric_limits<double>::infinity());
    out.back().note = "lower bound";
  };
  band("residual_slope", rep.weighted.slope, 0.65, 1.1);
  at_least("residual_fit_r2", rep.weighted.r2, 0.98);
  band("R1_slope", rep.R1.slope, 0.65, 1.1);
  at_least("gap_U_slope", rep.gap_U.slope, 0.45);
  at_least("gap_H_slope", rep.gap_H.slope, 0.45);
  at_least("gap_V_slope", rep.gap_V.slope, 0.45 + params.gamma / 2.0);
  at_least("gap_G_slope", rep.gap_G.slope, 0.45 + params.gamma / 2.0);
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (const auto& r : rep.rows) {
    smin = std::min(smin, r.theorem.normS);
    smax = std::max(smax, r.theorem.normS);
  }
  out.push_back(check("normS_variation", smax / smin, 10.0, "max / min over the sweep, must stay below"));
  out.back().pass = smax / smin < 10.0;
  at_least("normS_slope", rep.normS.slope, -0.1);
  // Contraction: ratios below one and non-increasing as eps decreases.
  std::vector<const StudyRow*> by_eps;
  for (const auto& r : rep.rows) by_eps.push_back(&r);
  std::sort(by_eps.begin(), by_eps.end(), [](auto a, auto b) { return a->eps > b->eps; });
  double worst = 0.0, rise = 0.0;
  for (std::size_t k = 0; k < by_eps.size(); ++k) {
    worst = std::max(worst, by_eps[k]->theorem.asymptotic_ratio);
    if (k > 0) rise = std::max(rise, by_eps[k]->theorem.asymptotic_ratio - by_eps[k - 1]->theorem.asymptotic_ratio);
  }
  out.push_back(check("contraction_ratio", worst, 1.0, "largest asymptotic delta ratio, must stay below"));
  out.back().pass = worst < 1.0;
  out.push_back(check("contraction_trend", rise, 0.0, "largest increase of the ratio as eps decreases"));
  double audit = 0.0;
  std::size_t failed_structure = 0;
  std::string failed_names;
  for (const auto& r : rep.rows) {
    audit = std::max({audit, r.audits.energy_ratio, r.audits.positivity_ratio, r.audits.linf_ratio});
    for (const auto& c : r.structure)
      if (!c.pass) {
        ++failed_structure;
        if (failed_names.find(c.name) == std::string::npos) failed_names += (failed_names.empty() ? "" : ", ") + c.name;
      }
  }
  out.push_back(check("structural_failures", static_cast<double>(failed_structure), 0.0, failed_names));
  out.push_back(check("audit_ratio", audit, 10.0, "largest energy, positivity or L-infinity ratio"));
  return out;
}

}  // namespace mhdbl
