// Acceptance suite: one pass/fail line per criterion; exit status 1 when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "manufactured.hpp"
#include "mhdbl/audit.hpp"
#include "mhdbl/euler1.hpp"
#include "mhdbl/layer0.hpp"
#include "mhdbl/layer1.hpp"
#include "mhdbl/pipeline.hpp"

using namespace mhdbl;

namespace {

// Tolerances.
constexpr double kRuntimeMax = 300.0;
constexpr double kZeroFieldMax = 1e-10;
constexpr double kR1SlopeTarget = 1.0;
constexpr double kR1SlopeTol = 0.05;
constexpr double kEllipticOrderMin = 1.8;
constexpr double kMarchOrderMin = 0.9;
constexpr double kStreamOrderMin = 0.9;
constexpr double kImbalanceOrderMin = 0.9;
constexpr double kAuditRatioMax = 10.0;

const std::vector<double> kSweep{4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "FAILED ") << what;
  }
};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

const CheckResult& find(const std::vector<CheckResult>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.name == name) return c;
  throw std::runtime_error("missing acceptance check " + name);
}

void require_check(Outcome& o, const std::vector<CheckResult>& cs, const std::string& name) {
  const auto& c = find(cs, name);
  o.require(c.pass, name + " " + fmt(c.measured) + " (bound " + fmt(c.threshold) + ")");
}

// Fitted order of err(h) ~ h^p over successive halvings.
double halving_order(const std::vector<double>& err) {
  std::vector<std::pair<double, double>> pairs;
  double h = 1.0;
  for (double e : err) {
    pairs.emplace_back(h, e);
    h *= 0.5;
  }
  return rate_fit(pairs).slope;
}

double max_change(const Field2D& coarse, const Field2D& fine) {
  const int r = fine.nx() / coarse.nx();
  double d = 0.0;
  for (int i = 0; i <= coarse.nx(); ++i)
    for (int j = 0; j <= coarse.nz(); ++j) d = std::max(d, std::abs(coarse(i, j) - fine(r * i, j)));
  return d;
}

GridSpec grid(int nx, int ny, int nY) {
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  g.nY = nY;
  return g;
}

Field2D inject(const Field2D& f, int step, const MeshPtr& m) {
  Field2D r(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) r(i, j) = f(i * step, j);
  return r;
}

void criterion5(Outcome& o) {
  double field_max = 0.0;
  std::vector<std::pair<double, double>> r1;
  double dominance = 0.0;
  for (double eps : kSweep) {
    PipelineConfig c;
    c.profile = "zero-mismatch";
    c.params.eps = eps;
    auto r = run_pipeline(c, Stage::compose);
    for (const Field2D* f : {&r.l0->u0p, &r.l0->v0p, &r.l0->h0p, &r.l0->g0p, &r.ec->v1e, &r.ec->g1e, &r.ec->u1e,
                             &r.ec->h1e, &r.ec->p1e, &r.l1->up, &r.l1->vp, &r.l1->hp, &r.l1->gp})
      field_max = std::max(field_max, sup_norm(*f));
    const auto& R = *r.residuals;
    const auto m = R.R1.mesh();
    Field2D term(m);
    for (int i = 0; i <= m->nx(); ++i)
      for (int j = 0; j <= m->nz(); ++j) term(i, j) = -r.params.nu * eps * r.flow.u0e.d(std::sqrt(eps) * m->z[j], 2);
    dominance = std::max(dominance, sup_norm(R.R1 - term) / sup_norm(term));
    r1.emplace_back(eps, sup_norm(R.R1));
  }
  const double slope = rate_fit(r1).slope;
  o.require(field_max <= kZeroFieldMax, "max field " + fmt(field_max));
  o.require(dominance <= 1e-2, "R1 deviation from nu eps u0e'' " + fmt(dominance) + " relative");
  o.require(std::abs(slope - kR1SlopeTarget) <= kR1SlopeTol, "sup R1 slope " + fmt(slope));
}

void criterion6(Outcome& o) {
  // Elliptic corrector on w = sin(pi x / L) Y exp(-Y).
  PhysicalParams p;
  const auto b = builtin_profile("mild", p);
  p.u_b = b.u_b;
  const auto& flow = b.flow;
  const double k = M_PI / p.L;
  std::vector<double> ell;
  for (int f : {2, 4, 8}) {
    GridSpec g;
    g.nx = 8 * f;
    g.nY = 16 * f;
    g.stretch = std::pow(1.1, 1.0 / f);
    auto m = euler_mesh(g);
    Field2D rhs(m), exact(m);
    for (int i = 0; i <= m->nx(); ++i)
      for (int j = 0; j <= m->nz(); ++j) {
        const double x = m->x[i], Y = m->z[j], e = std::exp(-Y), s = std::sin(k * x);
        const double w = s * Y * e, wY = s * (1.0 - Y) * e, wYY = s * (Y - 2.0) * e, wxx = -k * k * w;
        const double u = flow.u0e(Y), u1 = flow.u0e.d(Y, 1), u2 = flow.u0e.d(Y, 2);
        const double h = flow.h0e(Y), h1 = flow.h0e.d(Y, 1), h2 = flow.h0e.d(Y, 2);
        const double r = h / u, r1 = (h1 * u - h * u1) / (u * u);
        const double r2 = (h2 * u - h * u2) / (u * u) - 2.0 * u1 * (h1 * u - h * u1) / (u * u * u);
        rhs(i, j) = -u * (1.0 - r * r) * (wxx + wYY) + 2.0 * h * r1 * wY + (u2 + h * r2 - h2 * r) * w;
        exact(i, j) = w;
      }
    ell.push_back(sup_norm(solve_scalar_elliptic(rhs, flow).w1 - exact));
  }
  const double ell_order = halving_order(ell);
  o.require(ell_order >= kEllipticOrderMin, "elliptic order " + fmt(ell_order));

  // Layer0 march: successive changes and the stream identity.
  std::vector<LayerZeroSolution> l0;
  std::vector<double> l0_stream;
  for (int nx : {32, 64, 128, 256}) {
    l0.push_back(solve_layer0(layer_mesh(grid(nx, 256, 64)), flow, b.data, p));
    l0_stream.push_back(stream_identity_residual(l0.back(), p));
  }
  std::vector<double> l0_change;
  for (std::size_t k2 = 0; k2 + 1 < l0.size(); ++k2) l0_change.push_back(max_change(l0[k2].u0p, l0[k2 + 1].u0p));
  const double l0_order = halving_order(l0_change), l0_stream_order = halving_order(l0_stream);
  o.require(l0_order >= kMarchOrderMin, "layer0 self-convergence order " + fmt(l0_order));
  o.require(l0_stream_order >= kStreamOrderMin, "layer0 stream identity order " + fmt(l0_stream_order));

  // Layer1 march with Euler input injected from the finest grid so only the march is refined.
  const int fine = 512;
  const GridSpec gf = grid(fine, 256, 64);
  const auto l0f = solve_layer0(layer_mesh(gf), flow, b.data, p);
  const BoundaryData data = b.data.anchored ? anchor_side_data(b.data, flow, corner_traces(l0f)) : b.data;
  const auto ecf = solve_euler1(l0f, data, flow, euler_mesh(gf), p);
  std::vector<Field2D> up;
  std::vector<double> l1_stream;
  for (int nx : {64, 128, 256, 512}) {
    const GridSpec g = grid(nx, 256, 64);
    const int step = fine / nx;
    const auto em = euler_mesh(g);
    const auto l0n = solve_layer0(layer_mesh(g), flow, b.data, p);
    EulerCorrector ec = ecf;
    ec.v1e = inject(ecf.v1e, step, em);
    ec.g1e = inject(ecf.g1e, step, em);
    ec.u1e = inject(ecf.u1e, step, em);
    ec.h1e = inject(ecf.h1e, step, em);
    const auto src = assemble_sources(l0n, ec, flow, p);
    const auto s = march_layer1(src, l0n, data, p);
    l1_stream.push_back(layer1_stream_residual(s, l0n, src, p));
    up.push_back(s.up);
  }
  std::vector<double> l1_change;
  for (std::size_t k2 = 0; k2 + 1 < up.size(); ++k2) l1_change.push_back(max_change(up[k2], up[k2 + 1]));
  const double l1_order = halving_order(l1_change), l1_stream_order = halving_order(l1_stream);
  o.require(l1_order >= kMarchOrderMin, "layer1 self-convergence order " + fmt(l1_order));
  o.require(l1_stream_order >= kStreamOrderMin, "layer1 stream identity order " + fmt(l1_stream_order));
}

void criterion8_imbalance(Outcome& o) {
  std::vector<double> imb;
  for (int nx : {32, 64, 128}) {
    const auto c = testing::manufactured_case(nx, 1e-2);
    imb.push_back(energy_audit(c.state, c.baseline, c.sources, c.params).imbalance);
  }
  const double order = halving_order(imb);
  o.require(order >= kImbalanceOrderMin, "manufactured energy-identity imbalance order " + fmt(order));
}

}  // namespace

int main() {
  std::vector<std::pair<int, Outcome>> results(8);
  for (int k = 0; k < 8; ++k) results[k].first = k + 1;
  auto guarded = [](Outcome& o, const std::function<void(Outcome&)>& body) {
    try {
      body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
  };

  // Criteria 1 to 4, 7 and the audit ratios of 8 share one sweep on the mild profile.
  bool sweep_done = false;
  guarded(results[0].second, [&](Outcome&) {
    PipelineConfig c;
    c.profile = "mild";
    const auto t0 = std::chrono::steady_clock::now();
    const StudyReport rep = scaling_study(c, kSweep, 2, true);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto acc = study_acceptance(rep, c.params);
    auto& o1 = results[0].second;
    require_check(o1, acc, "residual_slope");
    require_check(o1, acc, "residual_fit_r2");
    o1.require(secs < kRuntimeMax, "sweep runtime " + fmt(secs) + " s");
    auto& o2 = results[1].second;
    for (const char* n : {"gap_U_slope", "gap_V_slope", "gap_H_slope", "gap_G_slope"}) require_check(o2, acc, n);
    auto& o3 = results[2].second;
    require_check(o3, acc, "normS_variation");
    require_check(o3, acc, "normS_slope");
    auto& o4 = results[3].second;
    require_check(o4, acc, "contraction_ratio");
    require_check(o4, acc, "contraction_trend");
    auto& o7 = results[6].second;
    for (const auto& row : rep.rows)
      for (const auto& ch : row.structure)
        o7.require(ch.pass, "eps " + fmt(row.eps) + " " + ch.name + " " + fmt(ch.measured));
    // Keep only failures in the detail when everything else passes.
    if (!o7.pass) {
      std::ostringstream brief;
      int passed = 0, total = 0;
      for (const auto& row : rep.rows)
        for (const auto& ch : row.structure) {
          ++total;
          if (ch.pass)
            ++passed;
          else
            brief << "; eps " << fmt(row.eps) << " " << ch.name << " " << fmt(ch.measured) << " > " << fmt(ch.threshold);
        }
      o7.detail.str("");
      o7.detail << passed << "/" << total << " checks pass" << brief.str();
    }
    auto& o8 = results[7].second;
    double worst = 0.0;
    for (const auto& row : rep.rows)
      worst = std::max({worst, row.audits.energy_ratio, row.audits.positivity_ratio, row.audits.linf_ratio});
    o8.require(worst <= kAuditRatioMax, "max audit ratio " + fmt(worst));
    sweep_done = true;
  });
  if (!sweep_done)
    for (int k : {1, 2, 3, 6, 7}) results[k].second.require(false, "mild sweep did not complete");
  guarded(results[4].second, criterion5);
  guarded(results[5].second, criterion6);
  guarded(results[7].second, criterion8_imbalance);

  int failed = 0;
  for (auto& [n, o] : results) {
    std::printf("criterion %d: %s: %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of 8 criteria pass\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
