#include "mhdbl/layer0.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

std::vector<double> cutoff_column(const CutoffSet& c, int derivative, std::span<const double> y) {
  std::vector<double> r(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) r[j] = cutoff_values(c, Cutoff::phi, derivative, y[j]);
  return r;
}

}  // namespace

HomogenizedState homogenize_initial(const MeshPtr& mesh, const IdealShearFlow& flow, const BoundaryData& data,
                                    const PhysicalParams& params, const CutoffSet& cutoffs) {
  if (mesh->axis != VAxis::y) throw GridError("layer0", "homogenize", "layer mesh must use the y axis");
  const auto& y = mesh->z;
  const auto phi = cutoff_column(cutoffs, 0, y);
  const auto phi2 = cutoff_column(cutoffs, 2, y);
  HomogenizedState s{Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh)};
  for (int i = 0; i <= mesh->nx(); ++i)
    for (int j = 0; j <= mesh->nz(); ++j) {
      s.u(i, j) = data.ubar0(y[j]) + (flow.u_e - params.u_b) * (1.0 - phi[j]);
      s.h(i, j) = data.hbar0(y[j]) + flow.h_e * (1.0 - phi[j]);
      s.r1(i, j) = params.nu * (flow.u_e - params.u_b) * phi2[j];
      s.r2(i, j) = params.kappa * flow.h_e * phi2[j];
    }
  return s;
}

HomogenizedState homogenize(const LayerZeroSolution& sol, const PhysicalParams& params, const CutoffSet& cutoffs) {
  const MeshPtr& mesh = sol.u0p.mesh();
  const auto& y = mesh->z;
  const auto phi = cutoff_column(cutoffs, 0, y);
  const auto phi2 = cutoff_column(cutoffs, 2, y);
  HomogenizedState s{Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh)};
  for (int i = 0; i <= mesh->nx(); ++i)
    for (int j = 0; j <= mesh->nz(); ++j) {
      s.u(i, j) = sol.u0p(i, j) + sol.u_e - sol.u_e * phi[j] - sol.u_b * (1.0 - phi[j]);
      s.h(i, j) = sol.h0p(i, j) + sol.h_e - sol.h_e * phi[j];
      s.v(i, j) = sol.v0p(i, j) + sol.trace_v1e[i];
      s.g(i, j) = sol.g0p(i, j) + sol.trace_g1e[i];
      s.r1(i, j) = params.nu * (sol.u_e - sol.u_b) * phi2[j];
      s.r2(i, j) = params.kappa * sol.h_e * phi2[j];
    }
  return s;
}

LayerZeroSolution dehomogenize(const HomogenizedState& s, double u_e, double h_e, double u_b,
                               const CutoffSet& cutoffs) {
  const MeshPtr& mesh = s.u.mesh();
  const auto phi = cutoff_column(cutoffs, 0, mesh->z);
  const int top = mesh->nz();
  LayerZeroSolution r;
  r.u_e = u_e;
  r.h_e = h_e;
  r.u_b = u_b;
  r.u0p = Field2D(mesh);
  r.h0p = Field2D(mesh);
  r.v0p = Field2D(mesh);
  r.g0p = Field2D(mesh);
  r.trace_v1e.assign(mesh->nx() + 1, 0.0);
  r.trace_g1e.assign(mesh->nx() + 1, 0.0);
  for (int i = 0; i <= mesh->nx(); ++i) {
    // The layer part vanishes at the top, so the total there is the Euler trace.
    r.trace_v1e[i] = s.v(i, top);
    r.trace_g1e[i] = s.g(i, top);
    for (int j = 0; j <= top; ++j) {
      r.u0p(i, j) = s.u(i, j) - u_e + u_e * phi[j] + u_b * (1.0 - phi[j]);
      r.h0p(i, j) = s.h(i, j) - h_e + h_e * phi[j];
      r.v0p(i, j) = s.v(i, j) - r.trace_v1e[i];
      r.g0p(i, j) = s.g(i, j) - r.trace_g1e[i];
    }
  }
  return r;
}

namespace {

struct StepWork {
  int n;  // nodes in y
  Diff1D d1, d2;
  std::vector<double> y, wall_neumann;
};

// Unknown ordering: four components per y node.
inline int id(int j, int c) { return 4 * j + c; }

ConditionRecord monitor_row(const LayerZeroSolution& s, int i, const IdealShearFlow& flow, const PhysicalParams& p,
                            const Layer0Options& opt, const StepWork& w) {
  ConditionRecord r;
  r.x = s.u0p.mesh()->x[i];
  r.min_u_total = r.min_h_total = 1e300;
  auto u = s.u0p.row(i);
  auto h = s.h0p.row(i);
  const double se = std::sqrt(p.eps);
  for (int j = 0; j < w.n; ++j) {
    r.min_u_total = std::min(r.min_u_total, s.u_e + u[j]);
    r.min_h_total = std::min(r.min_h_total, s.h_e + h[j]);
    const double wt = std::pow(1.0 + w.y[j] * w.y[j], 0.5 * (opt.l + 1.0));
    r.sup_dy = std::max({r.sup_dy, wt * std::abs(w.d1.apply(u, j)), wt * std::abs(w.d1.apply(h, j))});
    r.sup_dyy = std::max({r.sup_dyy, wt * std::abs(w.d2.apply(u, j)), wt * std::abs(w.d2.apply(h, j))});
    const double Y = se * w.y[j];
    r.max_ratio = std::max(r.max_ratio, std::abs(flow.h0e(Y) + h[j]) / std::abs(flow.u0e(Y) + u[j]));
  }
  r.within_bounds = r.min_h_total >= 0.5 * opt.vartheta0 && r.sup_dy <= opt.sigma0 && r.sup_dyy <= 1.0 / opt.vartheta0;
  return r;
}

}  // namespace

LayerZeroSolution march_layer0(const HomogenizedState& state0, const IdealShearFlow& flow,
                               const PhysicalParams& params, const Layer0Options& opt) {
  const MeshPtr& mesh = state0.u.mesh();
  const int nx = mesh->nx();
  StepWork w;
  w.y = mesh->z;
  w.n = mesh->nz() + 1;
  w.d1 = make_diff1d(w.y, 1);
  w.d2 = make_diff1d(w.y, 2);
  const double u_e = flow.u_e, h_e = flow.h_e, nu = params.nu, ka = params.kappa;

  // Initial row in layer variables.
  HomogenizedState tmp = state0;
  LayerZeroSolution sol = dehomogenize(tmp, u_e, h_e, params.u_b, opt.cutoffs);
  for (int i = 1; i <= nx; ++i)
    for (int j = 0; j < w.n; ++j) {
      sol.u0p(i, j) = sol.u0p(0, j);
      sol.h0p(i, j) = sol.h0p(0, j);
    }
  const double floor = 0.5 * opt.vartheta0;

  const int N = 4 * w.n;
  std::vector<double> V(w.n, 0.0), G(w.n, 0.0);
  Eigen::VectorXd F(N), delta(N);
  Eigen::SparseLU<SpMat> lu;
  std::vector<Trip> trips;
  trips.reserve(static_cast<std::size_t>(N) * 10);

  sol.monitor.push_back(monitor_row(sol, 0, flow, params, opt, w));
  for (int i = 1; i <= nx; ++i) {
    const double dx = mesh->x[i] - mesh->x[i - 1];
    auto un = sol.u0p.row(i - 1);
    auto hn = sol.h0p.row(i - 1);
    auto u = sol.u0p.row(i);
    auto h = sol.h0p.row(i);
    double change = 0.0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      trips.clear();
      // Wall: u0p = u_b - u_e, d_y h0p = 0, V = G = 0.
      F[id(0, 0)] = u[0] - (params.u_b - u_e);
      trips.emplace_back(id(0, 0), id(0, 0), 1.0);
      F[id(0, 1)] = w.d1.apply(h, 0);
      for (int k = 0; k < w.d1.len[0]; ++k) trips.emplace_back(id(0, 1), id(w.d1.start[0] + k, 1), w.d1.w[0][k]);
      F[id(0, 2)] = V[0];
      trips.emplace_back(id(0, 2), id(0, 2), 1.0);
      F[id(0, 3)] = G[0];
      trips.emplace_back(id(0, 3), id(0, 3), 1.0);
      for (int j = 1; j < w.n; ++j) {
        // Normal components from the trapezoid of -d_x (u, h) upward from the wall.
        const double hy = 0.5 * (w.y[j] - w.y[j - 1]);
        F[id(j, 2)] = V[j] - V[j - 1] + hy * ((u[j] - un[j]) + (u[j - 1] - un[j - 1])) / dx;
        trips.emplace_back(id(j, 2), id(j, 2), 1.0);
        trips.emplace_back(id(j, 2), id(j - 1, 2), -1.0);
        trips.emplace_back(id(j, 2), id(j, 0), hy / dx);
        trips.emplace_back(id(j, 2), id(j - 1, 0), hy / dx);
        F[id(j, 3)] = G[j] - G[j - 1] + hy * ((h[j] - hn[j]) + (h[j - 1] - hn[j - 1])) / dx;
        trips.emplace_back(id(j, 3), id(j, 3), 1.0);
        trips.emplace_back(id(j, 3), id(j - 1, 3), -1.0);
        trips.emplace_back(id(j, 3), id(j, 1), hy / dx);
        trips.emplace_back(id(j, 3), id(j - 1, 1), hy / dx);
        if (j == w.n - 1) {
          F[id(j, 0)] = u[j];
          trips.emplace_back(id(j, 0), id(j, 0), 1.0);
          F[id(j, 1)] = h[j];
          trips.emplace_back(id(j, 1), id(j, 1), 1.0);
          continue;
        }
        const double A = u_e + u[j], B = h_e + h[j];
        const double ux = (u[j] - un[j]) / dx, hx = (h[j] - hn[j]) / dx;
        const double uy = w.d1.apply(u, j), hy1 = w.d1.apply(h, j);
        const double uyy = w.d2.apply(u, j), hyy = w.d2.apply(h, j);
        F[id(j, 0)] = A * ux + V[j] * uy - B * hx - G[j] * hy1 - nu * uyy;
        F[id(j, 1)] = A * hx + V[j] * hy1 - B * ux - G[j] * uy - ka * hyy;
        // Newton linearization of both momentum-type rows.
        trips.emplace_back(id(j, 0), id(j, 0), ux + A / dx);
        trips.emplace_back(id(j, 0), id(j, 1), -hx - B / dx);
        trips.emplace_back(id(j, 0), id(j, 2), uy);
        trips.emplace_back(id(j, 0), id(j, 3), -hy1);
        trips.emplace_back(id(j, 1), id(j, 0), hx - B / dx);
        trips.emplace_back(id(j, 1), id(j, 1), A / dx - ux);
        trips.emplace_back(id(j, 1), id(j, 2), hy1);
        trips.emplace_back(id(j, 1), id(j, 3), -uy);
        for (int k = 0; k < w.d1.len[j]; ++k) {
          const int c = w.d1.start[j] + k;
          trips.emplace_back(id(j, 0), id(c, 0), V[j] * w.d1.w[j][k]);
          trips.emplace_back(id(j, 0), id(c, 1), -G[j] * w.d1.w[j][k]);
          trips.emplace_back(id(j, 1), id(c, 1), V[j] * w.d1.w[j][k]);
          trips.emplace_back(id(j, 1), id(c, 0), -G[j] * w.d1.w[j][k]);
        }
        for (int k = 0; k < w.d2.len[j]; ++k) {
          const int c = w.d2.start[j] + k;
          trips.emplace_back(id(j, 0), id(c, 0), -nu * w.d2.w[j][k]);
          trips.emplace_back(id(j, 1), id(c, 1), -ka * w.d2.w[j][k]);
        }
      }
      SpMat J(N, N);
      J.setFromTriplets(trips.begin(), trips.end());
      if (it == 0) lu.analyzePattern(J);
      lu.factorize(J);
      if (lu.info() != Eigen::Success)
        throw SolveFailure("layer0", "march_layer0", "singular step matrix at x index " + std::to_string(i));
      delta = lu.solve(F);
      change = 0.0;
      for (int j = 0; j < w.n; ++j) {
        u[j] -= delta[id(j, 0)];
        h[j] -= delta[id(j, 1)];
        V[j] -= delta[id(j, 2)];
        G[j] -= delta[id(j, 3)];
        for (int c = 0; c < 4; ++c) change = std::max(change, std::abs(delta[id(j, c)]));
      }
      if (!std::isfinite(change)) throw NonFinite("layer0", "march_layer0", "non-finite iterate");
      if (change < opt.tol) break;
    }
    if (change >= opt.tol)
      throw NoConvergence("layer0", "march_layer0",
                          "sub-iterations stalled at x index " + std::to_string(i) + ", change " + std::to_string(change));
    for (int j = 0; j < w.n; ++j) {
      if (u_e + u[j] < floor || h_e + h[j] < floor)
        throw PositivityLost("layer0", "march_layer0",
                             "total field below vartheta0/2 at x index " + std::to_string(i) + ", y = " +
                                 std::to_string(w.y[j]));
    }
    auto rec = monitor_row(sol, i, flow, params, opt, w);
    rec.iterations = it + 1;
    rec.last_change = change;
    sol.monitor.push_back(rec);
  }

  // Normal components from the backward x difference, integrated from the top.
  const Field2D ux = diff(sol.u0p, Dir::x, 1);
  const Field2D hx = diff(sol.h0p, Dir::x, 1);
  sol.v0p = tail_integral(ux, Orientation::from_top);
  sol.g0p = tail_integral(hx, Orientation::from_top);
  sol.trace_v1e.assign(nx + 1, 0.0);
  sol.trace_g1e.assign(nx + 1, 0.0);
  for (int i = 0; i <= nx; ++i) {
    sol.trace_v1e[i] = -sol.v0p(i, 0);
    sol.trace_g1e[i] = -sol.g0p(i, 0);
  }
  require_finite(sol.u0p, "layer0", "march_layer0");
  require_finite(sol.h0p, "layer0", "march_layer0");
  return sol;
}

LayerZeroSolution solve_layer0(const MeshPtr& mesh, const IdealShearFlow& flow, const BoundaryData& data,
                               const PhysicalParams& params, const Layer0Options& opt) {
  const double wall = std::abs(data.ubar0(0.0) - (params.u_b - flow.u_e));
  if (wall > 1e-8)
    throw CompatibilityViolated("layer0", "solve_layer0", "inflow profile does not match the wall velocity");
  return march_layer0(homogenize_initial(mesh, flow, data, params, opt.cutoffs), flow, params, opt);
}

double stream_identity_residual(const LayerZeroSolution& sol, const PhysicalParams& params, double g_shift) {
  const auto& y = sol.u0p.mesh()->z;
  const Diff1D d1 = make_diff1d(y, 1);
  double r = 0.0;
  for (int i = 0; i <= sol.u0p.nx(); ++i) {
    auto h = sol.h0p.row(i);
    for (int j = 0; j <= sol.u0p.nz(); ++j) {
      const double V = sol.v0p(i, j) + sol.trace_v1e[i];
      const double G = sol.g0p(i, j) + sol.trace_g1e[i] + g_shift;
      const double e = V * (sol.h_e + h[j]) - G * (sol.u_e + sol.u0p(i, j)) - params.kappa * d1.apply(h, j);
      r = std::max(r, std::abs(e));
    }
  }
  return r;
}

std::vector<double> wall_flux_b(const LayerZeroSolution& sol) {
  std::vector<double> b(sol.u0p.nx() + 1);
  for (std::size_t i = 0; i < b.size(); ++i)
    b[i] = sol.h_e * sol.v0p(static_cast<int>(i), 0) - sol.u_e * sol.g0p(static_cast<int>(i), 0);
  return b;
}

CornerTraces corner_traces(const LayerZeroSolution& sol) {
  const int n = sol.u0p.nx();
  const auto b = wall_flux_b(sol);
  CornerTraces t;
  t.v0 = sol.v0p(0, 0);
  t.vL = sol.v0p(n, 0);
  t.g0 = sol.g0p(0, 0);
  t.gL = sol.g0p(n, 0);
  t.b0 = b.front();
  t.bL = b.back();
  return t;
}

double layer0_divergence_defect(const LayerZeroSolution& sol) {
  const Field2D ux = diff(sol.u0p, Dir::x, 1);
  const Field2D hx = diff(sol.h0p, Dir::x, 1);
  const Field2D vy = diff(sol.v0p, Dir::y, 1);
  const Field2D gy = diff(sol.g0p, Dir::y, 1);
  return std::max(sup_norm(ux + vy), sup_norm(hx + gy));
}

}  // namespace mhdbl
