#include "mhdbl/layer1.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

inline int id(int j, int c) { return 4 * j + c; }

void require_same_x(const Mesh& a, const Mesh& b, const char* op) {
  if (a.x.size() != b.x.size()) throw GridError("layer1", op, "layer and Euler meshes have different x nodes");
  for (std::size_t i = 0; i < a.x.size(); ++i)
    if (std::abs(a.x[i] - b.x[i]) > 1e-14) throw GridError("layer1", op, "layer and Euler meshes have different x nodes");
}

}  // namespace

WallTraces wall_traces(const EulerCorrector& ec, const IdealShearFlow& flow) {
  const int nx = ec.v1e.nx();
  const Field2D ux = diff(ec.u1e, Dir::x, 1);
  const Field2D hx = diff(ec.h1e, Dir::x, 1);
  const Field2D vY = diff(ec.v1e, Dir::y, 1);
  const Field2D gY = diff(ec.g1e, Dir::y, 1);
  WallTraces w;
  for (int i = 0; i <= nx; ++i) {
    w.u1e.push_back(ec.u1e(i, 0));
    w.h1e.push_back(ec.h1e(i, 0));
    w.v1e.push_back(ec.v1e(i, 0));
    w.g1e.push_back(ec.g1e(i, 0));
    w.dx_u1e.push_back(ux(i, 0));
    w.dx_h1e.push_back(hx(i, 0));
    w.dY_v1e.push_back(vY(i, 0));
    w.dY_g1e.push_back(gY(i, 0));
  }
  w.dY_u0e = flow.u0e.d(0.0, 1);
  w.dY_h0e = flow.h0e.d(0.0, 1);
  return w;
}

Layer1Sources assemble_sources(const LayerZeroSolution& l0, const EulerCorrector& ec, const IdealShearFlow& flow,
                               const PhysicalParams&) {
  const MeshPtr& mesh = l0.u0p.mesh();
  require_same_x(*mesh, *ec.v1e.mesh(), "assemble_sources");
  Layer1Sources s;
  s.wall = wall_traces(ec, flow);
  const WallTraces& w = s.wall;
  const Field2D ux = diff(l0.u0p, Dir::x, 1);
  const Field2D hx = diff(l0.h0p, Dir::x, 1);
  const Field2D uy = diff(l0.u0p, Dir::y, 1);
  const Field2D hy = diff(l0.h0p, Dir::y, 1);
  s.F1 = Field2D(mesh);
  s.F2 = Field2D(mesh);
  const auto& y = mesh->z;
  const double Up = w.dY_u0e, Hp = w.dY_h0e;
  for (int i = 0; i <= mesh->nx(); ++i)
    for (int j = 0; j <= mesh->nz(); ++j) {
      const double u = l0.u0p(i, j), h = l0.h0p(i, j), v = l0.v0p(i, j), g = l0.g0p(i, j);
      s.F1(i, j) = -Up * (y[j] * ux(i, j) + v) - y[j] * w.dY_v1e[i] * uy(i, j) - w.u1e[i] * ux(i, j) -
                   u * w.dx_u1e[i] + Hp * (y[j] * hx(i, j) + g) + y[j] * w.dY_g1e[i] * hy(i, j) +
                   w.h1e[i] * hx(i, j) + h * w.dx_h1e[i];
      s.F2(i, j) = -Hp * v - y[j] * Up * hx(i, j) - y[j] * w.dY_v1e[i] * hy(i, j) - w.dx_h1e[i] * u -
                   w.u1e[i] * hx(i, j) + Up * g + y[j] * Hp * ux(i, j) + y[j] * w.dY_g1e[i] * uy(i, j) +
                   w.h1e[i] * ux(i, j) + w.dx_u1e[i] * h;
    }
  s.u_wall.resize(w.u1e.size());
  for (std::size_t i = 0; i < w.u1e.size(); ++i) s.u_wall[i] = -w.u1e[i];
  s.dyh_wall = -Hp;
  require_finite(s.F1, "layer1", "assemble_sources");
  require_finite(s.F2, "layer1", "assemble_sources");
  return s;
}

LayerOneSolution march_layer1(const Layer1Sources& src, const LayerZeroSolution& l0, const BoundaryData& data,
                              const PhysicalParams& params, const Layer1Options& opt) {
  const MeshPtr& mesh = l0.u0p.mesh();
  if (!src.F1.same_mesh(l0.u0p) || !src.F2.same_mesh(l0.u0p))
    throw GridError("layer1", "march_layer1", "sources and layer0 fields live on different meshes");
  const int nx = mesh->nx();
  const int n = mesh->nz() + 1;
  const auto& y = mesh->z;
  if (static_cast<int>(src.u_wall.size()) != nx + 1)
    throw GridError("layer1", "march_layer1", "wall data length does not match the x nodes");

  const double floor = 0.5 * opt.vartheta0;
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j < n; ++j) {
      const double A = l0.u_e + l0.u0p(i, j), B = l0.h_e + l0.h0p(i, j);
      if (B < floor || A - std::abs(B) <= 0.0)
        throw Degenerate("layer1", "march_layer1",
                         "coefficients lost non-degeneracy at x index " + std::to_string(i) + ", y = " +
                             std::to_string(y[j]));
    }

  const Diff1D d1 = make_diff1d(y, 1);
  const Diff1D d2 = make_diff1d(y, 2);
  const Field2D ux0 = diff(l0.u0p, Dir::x, 1);
  const Field2D hx0 = diff(l0.h0p, Dir::x, 1);
  const Field2D uy0 = diff(l0.u0p, Dir::y, 1);
  const Field2D hy0 = diff(l0.h0p, Dir::y, 1);
  const double nu = params.nu, ka = params.kappa;

  LayerOneSolution sol;
  sol.up = Field2D(mesh);
  sol.hp = Field2D(mesh);
  for (int j = 0; j < n; ++j) {
    sol.up(0, j) = data.ubar1(y[j]);
    sol.hp(0, j) = data.hbar1(y[j]);
  }

  const int N = 4 * n;
  Eigen::VectorXd rhs(N), z(N);
  Eigen::SparseLU<SpMat> lu;
  std::vector<Trip> trips;
  trips.reserve(static_cast<std::size_t>(N) * 12);
  for (int i = 1; i <= nx; ++i) {
    const double dx = mesh->x[i] - mesh->x[i - 1];
    auto un = sol.up.row(i - 1);
    auto hn = sol.hp.row(i - 1);
    trips.clear();
    rhs.setZero();
    // Wall: up given, d_y hp given, vp = gp = 0.
    trips.emplace_back(id(0, 0), id(0, 0), 1.0);
    rhs[id(0, 0)] = src.u_wall[i];
    for (int k = 0; k < d1.len[0]; ++k) trips.emplace_back(id(0, 1), id(d1.start[0] + k, 1), d1.w[0][k]);
    rhs[id(0, 1)] = src.dyh_wall;
    trips.emplace_back(id(0, 2), id(0, 2), 1.0);
    trips.emplace_back(id(0, 3), id(0, 3), 1.0);
    for (int j = 1; j < n; ++j) {
      // vp, gp by the trapezoid of -d_x (up, hp) upward from the wall.
      const double hy = 0.5 * (y[j] - y[j - 1]);
      trips.emplace_back(id(j, 2), id(j, 2), 1.0);
      trips.emplace_back(id(j, 2), id(j - 1, 2), -1.0);
      trips.emplace_back(id(j, 2), id(j, 0), hy / dx);
      trips.emplace_back(id(j, 2), id(j - 1, 0), hy / dx);
      rhs[id(j, 2)] = hy * (un[j] + un[j - 1]) / dx;
      trips.emplace_back(id(j, 3), id(j, 3), 1.0);
      trips.emplace_back(id(j, 3), id(j - 1, 3), -1.0);
      trips.emplace_back(id(j, 3), id(j, 1), hy / dx);
      trips.emplace_back(id(j, 3), id(j - 1, 1), hy / dx);
      rhs[id(j, 3)] = hy * (hn[j] + hn[j - 1]) / dx;
      if (j == n - 1) {
        trips.emplace_back(id(j, 0), id(j, 0), 1.0);
        trips.emplace_back(id(j, 1), id(j, 1), 1.0);
        continue;
      }
      const double A = l0.u_e + l0.u0p(i, j), B = l0.h_e + l0.h0p(i, j);
      const double Vc = l0.v0p(i, j) + src.wall.v1e[i];
      const double Gc = l0.g0p(i, j) + src.wall.g1e[i];
      const double ux = ux0(i, j), hx = hx0(i, j), uy = uy0(i, j), hyy0 = hy0(i, j);
      // Momentum-type row.
      trips.emplace_back(id(j, 0), id(j, 0), A / dx + ux);
      trips.emplace_back(id(j, 0), id(j, 1), -B / dx - hx);
      trips.emplace_back(id(j, 0), id(j, 2), uy);
      trips.emplace_back(id(j, 0), id(j, 3), -hyy0);
      rhs[id(j, 0)] = src.F1(i, j) + (A * un[j] - B * hn[j]) / dx;
      // Induction-type row.
      trips.emplace_back(id(j, 1), id(j, 1), A / dx - ux);
      trips.emplace_back(id(j, 1), id(j, 0), -B / dx + hx);
      trips.emplace_back(id(j, 1), id(j, 2), hyy0);
      trips.emplace_back(id(j, 1), id(j, 3), -uy);
      rhs[id(j, 1)] = src.F2(i, j) + (A * hn[j] - B * un[j]) / dx;
      for (int k = 0; k < d1.len[j]; ++k) {
        const int c = d1.start[j] + k;
        trips.emplace_back(id(j, 0), id(c, 0), Vc * d1.w[j][k]);
        trips.emplace_back(id(j, 0), id(c, 1), -Gc * d1.w[j][k]);
        trips.emplace_back(id(j, 1), id(c, 1), Vc * d1.w[j][k]);
        trips.emplace_back(id(j, 1), id(c, 0), -Gc * d1.w[j][k]);
      }
      for (int k = 0; k < d2.len[j]; ++k) {
        const int c = d2.start[j] + k;
        trips.emplace_back(id(j, 0), id(c, 0), -nu * d2.w[j][k]);
        trips.emplace_back(id(j, 1), id(c, 1), -ka * d2.w[j][k]);
      }
    }
    SpMat M(N, N);
    M.setFromTriplets(trips.begin(), trips.end());
    if (i == 1) lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success)
      throw SolveFailure("layer1", "march_layer1", "singular step matrix at x index " + std::to_string(i));
    z = lu.solve(rhs);
    for (int j = 0; j < n; ++j) {
      sol.up(i, j) = z[id(j, 0)];
      sol.hp(i, j) = z[id(j, 1)];
    }
  }
  require_finite(sol.up, "layer1", "march_layer1");
  require_finite(sol.hp, "layer1", "march_layer1");

  // Normal components from the wall; the i >= 1 rows equal the solved ones.
  sol.vp = -1.0 * tail_integral(diff(sol.up, Dir::x, 1), Orientation::from_wall);
  sol.gp = -1.0 * tail_integral(diff(sol.hp, Dir::x, 1), Orientation::from_wall);
  sol.psi_tilde = tail_integral(sol.hp, Orientation::from_wall);
  sol.F1p_tilde = src.F1;
  sol.F2p_tilde = src.F2;
  return apply_cutoff(std::move(sol), params, opt.cutoffs);
}

LayerOneSolution apply_cutoff(LayerOneSolution raw, const PhysicalParams& params, const CutoffSet& cutoffs) {
  const MeshPtr& mesh = raw.up.mesh();
  const auto& y = mesh->z;
  const double se = std::sqrt(params.eps);
  std::vector<double> chi(y.size()), dchi(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    chi[j] = cutoff_values(cutoffs, Cutoff::chi, 0, se * y[j]);
    dchi[j] = cutoff_values(cutoffs, Cutoff::chi, 1, se * y[j]);
  }
  const Field2D iu = tail_integral(raw.up, Orientation::from_wall);
  const Field2D ih = tail_integral(raw.hp, Orientation::from_wall);
  raw.u1p = Field2D(mesh);
  raw.h1p = Field2D(mesh);
  raw.v1p = Field2D(mesh);
  raw.g1p = Field2D(mesh);
  for (int i = 0; i <= mesh->nx(); ++i)
    for (int j = 0; j <= mesh->nz(); ++j) {
      raw.u1p(i, j) = chi[j] * raw.up(i, j) + se * dchi[j] * iu(i, j);
      raw.h1p(i, j) = chi[j] * raw.hp(i, j) + se * dchi[j] * ih(i, j);
      raw.v1p(i, j) = chi[j] * raw.vp(i, j);
      raw.g1p(i, j) = chi[j] * raw.gp(i, j);
    }
  return raw;
}

double layer1_stream_residual(const LayerOneSolution& sol, const LayerZeroSolution& l0, const Layer1Sources& src,
                              const PhysicalParams& params) {
  const auto& y = sol.up.mesh()->z;
  const WallTraces& w = src.wall;
  const Field2D psix = diff(sol.psi_tilde, Dir::x, 1);
  const Diff1D d1 = make_diff1d(y, 1);
  const double ka = params.kappa;
  double r = 0.0;
  for (int i = 0; i <= sol.up.nx(); ++i) {
    auto hp = sol.hp.row(i);
    const double wall_const = w.u1e[i] * w.g1e[i] - w.h1e[i] * w.v1e[i] + ka * w.dY_h0e;
    for (int j = 0; j <= sol.up.nz(); ++j) {
      const double A = l0.u_e + l0.u0p(i, j), B = l0.h_e + l0.h0p(i, j);
      const double Vc = l0.v0p(i, j) + w.v1e[i], Gc = l0.g0p(i, j) + w.g1e[i];
      const double lhs = A * psix(i, j) + Vc * hp[j] - Gc * sol.up(i, j) + B * sol.vp(i, j) - ka * d1.apply(hp, j);
      const double rhs = -y[j] * w.dY_h0e * l0.v0p(i, j) + y[j] * w.dY_u0e * l0.g0p(i, j) -
                         y[j] * w.dY_v1e[i] * l0.h0p(i, j) + y[j] * w.dY_g1e[i] * l0.u0p(i, j) +
                         w.u1e[i] * l0.g0p(i, j) - w.h1e[i] * l0.v0p(i, j) + wall_const;
      r = std::max(r, std::abs(lhs - rhs));
    }
  }
  return r;
}

double psi_defect(const LayerOneSolution& sol) {
  return sup_norm(diff(sol.psi_tilde, Dir::x, 1) + sol.gp);
}

double layer1_divergence_defect(const LayerOneSolution& sol) {
  const Field2D ux = diff(sol.u1p, Dir::x, 1);
  const Field2D hx = diff(sol.h1p, Dir::x, 1);
  const Field2D vy = diff(sol.v1p, Dir::y, 1);
  const Field2D gy = diff(sol.g1p, Dir::y, 1);
  return std::max(sup_norm(ux + vy), sup_norm(hx + gy));
}

FreezingErrors freezing_errors(const LayerOneSolution& sol, const LayerZeroSolution& l0, const EulerCorrector& ec,
                               const IdealShearFlow& flow, const PhysicalParams& params) {
  const MeshPtr& mesh = sol.up.mesh();
  const double eps = params.eps, se = std::sqrt(eps);
  const WallTraces w = wall_traces(ec, flow);
  const Field2D v1e = euler_to_layer(ec.v1e, eps, mesh);
  const Field2D g1e = euler_to_layer(ec.g1e, eps, mesh);
  const Field2D u1e = euler_to_layer(ec.u1e, eps, mesh);
  const Field2D h1e = euler_to_layer(ec.h1e, eps, mesh);
  const Field2D vY = euler_to_layer(diff(ec.v1e, Dir::y, 1), eps, mesh);
  const Field2D gY = euler_to_layer(diff(ec.g1e, Dir::y, 1), eps, mesh);
  const Field2D u1x = euler_to_layer(diff(ec.u1e, Dir::x, 1), eps, mesh);
  const Field2D h1x = euler_to_layer(diff(ec.h1e, Dir::x, 1), eps, mesh);
  const Field2D upx = diff(sol.up, Dir::x, 1), hpx = diff(sol.hp, Dir::x, 1);
  const Field2D upy = diff(sol.up, Dir::y, 1), hpy = diff(sol.hp, Dir::y, 1);
  const Field2D ux = diff(l0.u0p, Dir::x, 1), hx = diff(l0.h0p, Dir::x, 1);
  const Field2D uy = diff(l0.u0p, Dir::y, 1), hy = diff(l0.h0p, Dir::y, 1);
  const auto& y = mesh->z;
  FreezingErrors e{Field2D(mesh), Field2D(mesh)};
  for (int i = 0; i <= mesh->nx(); ++i)
    for (int j = 0; j <= mesh->nz(); ++j) {
      const double Y = se * y[j];
      const double du = flow.u0e(Y) - flow.u_e, dh = flow.h0e(Y) - flow.h_e;
      const double dUp = flow.u0e.d(Y, 1) - w.dY_u0e, dHp = flow.h0e.d(Y, 1) - w.dY_h0e;
      const double yu = se * flow.u0e.d(Y, 1), yh = se * flow.h0e.d(Y, 1);
      const double dv = v1e(i, j) - w.v1e[i], dg = g1e(i, j) - w.g1e[i];
      const double dvY = vY(i, j) - w.dY_v1e[i], dgY = gY(i, j) - w.dY_g1e[i];
      const double du1 = u1e(i, j) - w.u1e[i], dh1 = h1e(i, j) - w.h1e[i];
      const double du1x = u1x(i, j) - w.dx_u1e[i], dh1x = h1x(i, j) - w.dx_h1e[i];
      const double u = l0.u0p(i, j), h = l0.h0p(i, j), v = l0.v0p(i, j), g = l0.g0p(i, j);
      e.Er1(i, j) = se * (du * upx(i, j) + sol.vp(i, j) * yu + dv * upy(i, j) - dh * hpx(i, j) - sol.gp(i, j) * yh -
                          dg * hpy(i, j) + dUp * (y[j] * ux(i, j) + v) + y[j] * dvY * uy(i, j) + du1 * ux(i, j) +
                          du1x * u - dHp * (y[j] * hx(i, j) + g) - y[j] * dgY * hy(i, j) - dh1 * hx(i, j) -
                          dh1x * h);
      e.Er2(i, j) = se * (du * hpx(i, j) + sol.vp(i, j) * yh + dv * hpy(i, j) - dh * upx(i, j) - sol.gp(i, j) * yu -
                          dg * upy(i, j) + dHp * v + y[j] * hx(i, j) * dUp + y[j] * hy(i, j) * dvY + dh1x * u +
                          du1 * hx(i, j) - dUp * g - y[j] * dHp * ux(i, j) - y[j] * dgY * uy(i, j) -
                          dh1 * ux(i, j) - du1x * h);
    }
  return e;
}

}  // namespace mhdbl
