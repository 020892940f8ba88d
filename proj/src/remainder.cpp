#include "mhdbl/remainder.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

enum Comp { cU = 0, cV = 1, cP = 2, cH = 3, cG = 4, cQ = 5, kComps = 6 };

// Hands a factorization computed once to the Krylov iteration.
class FactorPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };
  FactorPreconditioner() = default;
  void attach(const Eigen::SparseLU<SpMat>* lu) { lu_ = lu; }
  template <class M>
  FactorPreconditioner& analyzePattern(const M&) { return *this; }
  template <class M>
  FactorPreconditioner& factorize(const M&) { return *this; }
  template <class M>
  FactorPreconditioner& compute(const M&) { return *this; }
  template <class Rhs>
  Eigen::VectorXd solve(const Rhs& b) const { return lu_->solve(Eigen::VectorXd(b)); }
  Eigen::ComputationInfo info() const { return lu_ ? Eigen::Success : Eigen::InvalidInput; }

 private:
  const Eigen::SparseLU<SpMat>* lu_ = nullptr;
};

}  // namespace

ApproxBaseline build_baseline(const LayerZeroSolution& l0, const ApproxSolution& a, const PhysicalParams& params,
                              double ratio_max) {
  if (!a.u_app.same_mesh(l0.u0p)) throw GridError("remainder", "build_baseline", "approximation on another mesh");
  const double se = std::sqrt(params.eps);
  ApproxBaseline b;
  b.u_s = a.u0e + l0.u0p + se * a.euler.u1e;
  b.v_s = l0.v0p + a.euler.v1e;
  b.h_s = a.h0e + l0.h0p + se * a.euler.h1e_tilde;
  b.g_s = l0.g0p + a.euler.g1e_tilde;
  for (const Field2D* f : {&b.u_s, &b.v_s, &b.h_s, &b.g_s}) require_finite(*f, "remainder", "build_baseline");
  const Field2D uy = diff(b.u_s, Dir::y, 1), hy = diff(b.h_s, Dir::y, 1);
  const auto& y = b.u_s.mesh()->z;
  for (int i = 0; i <= b.u_s.nx(); ++i)
    for (int j = 0; j <= b.u_s.nz(); ++j) {
      const double us = b.u_s(i, j);
      if (!(us > 0.0)) throw RatioViolated("remainder", "build_baseline", "u_s is not positive");
      b.ratio = std::max(b.ratio, std::abs(b.h_s(i, j) / us));
      b.y_dy = std::max({b.y_dy, std::abs(y[j] * uy(i, j)), std::abs(y[j] * hy(i, j))});
    }
  if (b.ratio > ratio_max)
    throw RatioViolated("remainder", "build_baseline",
                        "sup |h_s/u_s| = " + std::to_string(b.ratio) + " exceeds " + std::to_string(ratio_max));
  return b;
}

RemainderState zero_state(const MeshPtr& mesh) {
  RemainderState s;
  for (Field2D* f : {&s.u, &s.v, &s.h, &s.g, &s.p, &s.q}) *f = Field2D(mesh);
  return s;
}

struct LinearizedSystem::Impl {
  MeshPtr mesh;
  PhysicalParams params;
  LinearOptions opt;
  int nx = 0, ny = 0;
  SpMat A;
  mutable Eigen::SparseLU<SpMat> lu;
  mutable std::once_flag factored;

  void factorize() const {
    std::call_once(factored, [this] {
      lu.analyzePattern(A);
      lu.factorize(A);
    });
    if (lu.info() != Eigen::Success)
      throw SolverDiverged("remainder", "solve_linearized", "factorization failed: " + lu.lastErrorMessage());
  }
  // Rows that carry the momentum/induction equations, per component.
  std::vector<int> pde_row_node[4];

  int node(int i, int j) const { return i * (ny + 1) + j; }
  int id(int i, int j, int c) const { return kComps * node(i, j) + c; }
  int size() const { return kComps * (nx + 1) * (ny + 1); }

  Eigen::VectorXd pack(const RemainderState& s) const {
    Eigen::VectorXd x(size());
    for (int i = 0; i <= nx; ++i)
      for (int j = 0; j <= ny; ++j) {
        x[id(i, j, cU)] = s.u(i, j);
        x[id(i, j, cV)] = s.v(i, j);
        x[id(i, j, cP)] = s.p(i, j);
        x[id(i, j, cH)] = s.h(i, j);
        x[id(i, j, cG)] = s.g(i, j);
        x[id(i, j, cQ)] = s.q(i, j);
      }
    return x;
  }
  RemainderState unpack(const Eigen::VectorXd& x) const {
    RemainderState s = zero_state(mesh);
    for (int i = 0; i <= nx; ++i)
      for (int j = 0; j <= ny; ++j) {
        s.u(i, j) = x[id(i, j, cU)];
        s.v(i, j) = x[id(i, j, cV)];
        s.p(i, j) = x[id(i, j, cP)];
        s.h(i, j) = x[id(i, j, cH)];
        s.g(i, j) = x[id(i, j, cG)];
        s.q(i, j) = x[id(i, j, cQ)];
      }
    return s;
  }
  bool is_pde(int i, int j) const { return i > 0 && i < nx && j > 0 && j < ny; }
  bool is_outflow(int i, int j) const { return i == nx && j > 0 && j < ny; }
};

LinearizedSystem::LinearizedSystem(const ApproxBaseline& b, const PhysicalParams& params, const LinearOptions& opt)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.mesh = b.u_s.mesh();
  m.params = params;
  m.opt = opt;
  m.nx = m.mesh->nx();
  m.ny = m.mesh->nz();
  const int nx = m.nx, ny = m.ny;
  const auto& x = m.mesh->x;
  const auto& y = m.mesh->z;
  const double eps = params.eps, nu = params.nu, ka = params.kappa;
  const Diff1D dx1 = make_diff1d(x, 1), dx2 = make_diff1d(x, 2);
  const Diff1D dy1 = make_diff1d(y, 1), dy2 = make_diff1d(y, 2);
  const Field2D usx = diff(b.u_s, Dir::x, 1), usy = diff(b.u_s, Dir::y, 1);
  const Field2D vsx = diff(b.v_s, Dir::x, 1), vsy = diff(b.v_s, Dir::y, 1);
  const Field2D hsx = diff(b.h_s, Dir::x, 1), hsy = diff(b.h_s, Dir::y, 1);
  const Field2D gsx = diff(b.g_s, Dir::x, 1), gsy = diff(b.g_s, Dir::y, 1);

  std::vector<Trip> t;
  t.reserve(static_cast<std::size_t>(m.size()) * 14);
  auto add = [&](int row, int col, double v) {
    if (v != 0.0) t.emplace_back(row, col, v);
  };
  // Central first and second differences of component c at (i, j), scaled by a.
  auto Dx = [&](int row, int i, int j, int c, double a) {
    for (int k = 0; k < dx1.len[i]; ++k) add(row, m.id(dx1.start[i] + k, j, c), a * dx1.w[i][k]);
  };
  auto Dy = [&](int row, int i, int j, int c, double a) {
    for (int k = 0; k < dy1.len[j]; ++k) add(row, m.id(i, dy1.start[j] + k, c), a * dy1.w[j][k]);
  };
  auto Lap = [&](int row, int i, int j, int c, double a) {
    for (int k = 0; k < dx2.len[i]; ++k) add(row, m.id(dx2.start[i] + k, j, c), a * eps * dx2.w[i][k]);
    for (int k = 0; k < dy2.len[j]; ++k) add(row, m.id(i, dy2.start[j] + k, c), a * dy2.w[j][k]);
  };
  // One-sided pair: backward differences in the constraints, forward differences on the multipliers.
  auto Bx = [&](int row, int i, int j, int c, double a) {
    const double h = x[i] - x[i - 1];
    add(row, m.id(i, j, c), a / h);
    add(row, m.id(i - 1, j, c), -a / h);
  };
  auto By = [&](int row, int i, int j, int c, double a) {
    const double h = y[j] - y[j - 1];
    add(row, m.id(i, j, c), a / h);
    add(row, m.id(i, j - 1, c), -a / h);
  };
  auto Fx = [&](int row, int i, int j, int c, double a) {
    const double h = x[i + 1] - x[i];
    add(row, m.id(i + 1, j, c), a / h);
    add(row, m.id(i, j, c), -a / h);
  };
  auto Fy = [&](int row, int i, int j, int c, double a) {
    const double h = y[j + 1] - y[j];
    add(row, m.id(i, j + 1, c), a / h);
    add(row, m.id(i, j, c), -a / h);
  };

  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) {
      const int rU = m.id(i, j, cU), rV = m.id(i, j, cV), rP = m.id(i, j, cP);
      const int rH = m.id(i, j, cH), rG = m.id(i, j, cG), rQ = m.id(i, j, cQ);
      if (j == 0) {
        // Wall: no-slip, perfect conductor.
        add(rU, rU, 1.0);
        add(rV, rV, 1.0);
        add(rP, rP, 1.0);
        Dy(rH, i, 0, cH, 1.0);
        add(rG, rG, 1.0);
        add(rQ, rQ, 1.0);
      } else if (i == 0 || j == ny) {
        // Inflow and truncation boundary: homogeneous Dirichlet on everything.
        for (int c = 0; c < kComps; ++c) add(m.id(i, j, c), m.id(i, j, c), 1.0);
      } else if (i == nx) {
        // Outflow: continuity, tangential and normal stress, conductor set.
        Bx(rU, i, j, cU, 1.0);
        By(rU, i, j, cV, 1.0);
        Dy(rV, i, j, cU, 1.0);
        Bx(rV, i, j, cV, nu * eps);
        add(rP, rP, 1.0);
        Bx(rP, i, j, cU, -2.0 * nu * eps);
        add(rH, rH, 1.0);
        Bx(rG, i, j, cG, 1.0);
        add(rQ, rQ, 1.0);
      } else {
        const double us = b.u_s(i, j), vs = b.v_s(i, j), hs = b.h_s(i, j), gs = b.g_s(i, j);
        // u row
        Dx(rU, i, j, cU, us);
        add(rU, rU, usx(i, j));
        Dy(rU, i, j, cU, vs);
        add(rU, rV, usy(i, j));
        Fx(rU, i, j, cP, 1.0);
        Lap(rU, i, j, cU, -nu);
        Dx(rU, i, j, cH, -hs);
        add(rU, rH, -hsx(i, j));
        Dy(rU, i, j, cH, -gs);
        add(rU, rG, -hsy(i, j));
        // v row
        Dx(rV, i, j, cV, us);
        add(rV, rU, vsx(i, j));
        Dy(rV, i, j, cV, vs);
        add(rV, rV, vsy(i, j));
        Fy(rV, i, j, cP, 1.0 / eps);
        Lap(rV, i, j, cV, -nu);
        Dx(rV, i, j, cG, -hs);
        add(rV, rH, -gsx(i, j));
        Dy(rV, i, j, cG, -gs);
        add(rV, rG, -gsy(i, j));
        // h row
        Dx(rH, i, j, cH, us);
        add(rH, rU, hsx(i, j));
        Dy(rH, i, j, cH, vs);
        add(rH, rV, hsy(i, j));
        Lap(rH, i, j, cH, -ka);
        Dx(rH, i, j, cU, -hs);
        add(rH, rH, -usx(i, j));
        Dy(rH, i, j, cU, -gs);
        add(rH, rG, -usy(i, j));
        Fx(rH, i, j, cQ, 1.0);
        // g row
        Dx(rG, i, j, cG, us);
        add(rG, rU, gsx(i, j));
        Dy(rG, i, j, cG, vs);
        add(rG, rV, gsy(i, j));
        Lap(rG, i, j, cG, -ka);
        Dx(rG, i, j, cV, -hs);
        add(rG, rH, -vsx(i, j));
        Dy(rG, i, j, cV, -gs);
        add(rG, rG, -vsy(i, j));
        Fy(rG, i, j, cQ, 1.0 / eps);
        // divergence constraints
        Bx(rP, i, j, cU, 1.0);
        By(rP, i, j, cV, 1.0);
        Bx(rQ, i, j, cH, 1.0);
        By(rQ, i, j, cG, 1.0);
      }
    }
  m.A.resize(m.size(), m.size());
  m.A.setFromTriplets(t.begin(), t.end());
  m.A.makeCompressed();
}

LinearizedSystem::~LinearizedSystem() = default;

int LinearizedSystem::unknowns() const { return impl_->size(); }
const MeshPtr& LinearizedSystem::mesh() const { return impl_->mesh; }

const SpMat& LinearizedSystem::matrix() const { return impl_->A; }

RemainderState LinearizedSystem::state_from(const Eigen::VectorXd& x) const {
  if (x.size() != impl_->size()) throw GridError("remainder", "state_from", "vector length differs from the system");
  return impl_->unpack(x);
}

Eigen::VectorXd LinearizedSystem::load_vector(const RemainderSources& f) const {
  const Impl& m = *impl_;
  for (const Field2D* s : {&f.f1, &f.f2, &f.f3, &f.f4}) {
    if (!s->same_mesh(Field2D(m.mesh))) throw GridError("remainder", "solve_linearized", "sources on another mesh");
    require_finite(*s, "remainder", "solve_linearized");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m.size());
  for (int i = 1; i < m.nx; ++i)
    for (int j = 1; j < m.ny; ++j) {
      rhs[m.id(i, j, cU)] = f.f1(i, j);
      rhs[m.id(i, j, cV)] = f.f2(i, j);
      rhs[m.id(i, j, cH)] = f.f3(i, j);
      rhs[m.id(i, j, cG)] = f.f4(i, j);
    }
  return rhs;
}

RemainderState LinearizedSystem::solve(const RemainderSources& f) const {
  const Impl& m = *impl_;
  const Eigen::VectorXd rhs = load_vector(f);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    RemainderState z = zero_state(m.mesh);
    return z;
  }
  m.factorize();
  Eigen::BiCGSTAB<SpMat, FactorPreconditioner> krylov;
  krylov.preconditioner().attach(&m.lu);
  krylov.setTolerance(m.opt.rel_tol);
  krylov.setMaxIterations(m.opt.max_krylov);
  krylov.compute(m.A);
  Eigen::VectorXd sol = krylov.solveWithGuess(rhs, m.lu.solve(rhs));
  const double rel = (m.A * sol - rhs).norm() / bnorm;
  if (!sol.allFinite() || rel > m.opt.rel_tol)
    throw SolverDiverged("remainder", "solve_linearized", "relative residual " + std::to_string(rel));
  RemainderState s = m.unpack(sol);
  s.last_solve.rel_residual = rel;
  s.last_solve.krylov_iterations = static_cast<int>(krylov.iterations());
  s.last_solve.q_norm = l2_norm(s.q);
  s.last_solve.hg_norm = std::hypot(l2_norm(s.h), l2_norm(s.g));
  const auto& x = m.mesh->x;
  const auto& y = m.mesh->z;
  for (int i = 1; i < m.nx; ++i)
    for (int j = 1; j < m.ny; ++j) {
      const double hx = x[i] - x[i - 1], hy = y[j] - y[j - 1];
      s.last_solve.div_u = std::max(
          s.last_solve.div_u, std::abs((s.u(i, j) - s.u(i - 1, j)) / hx + (s.v(i, j) - s.v(i, j - 1)) / hy));
      s.last_solve.div_h = std::max(
          s.last_solve.div_h, std::abs((s.h(i, j) - s.h(i - 1, j)) / hx + (s.g(i, j) - s.g(i, j - 1)) / hy));
    }
  if (m.opt.strict_q && s.last_solve.q_norm > m.opt.q_tol * s.last_solve.hg_norm)
    throw StructuralInconsistency("remainder", "solve_linearized",
                                  "multiplier norm " + std::to_string(s.last_solve.q_norm) + " against field norm " +
                                      std::to_string(s.last_solve.hg_norm));
  return s;
}

RemainderSources LinearizedSystem::apply(const RemainderState& s) const {
  const Impl& m = *impl_;
  const Eigen::VectorXd r = m.A * m.pack(s);
  RemainderSources f{Field2D(m.mesh), Field2D(m.mesh), Field2D(m.mesh), Field2D(m.mesh)};
  for (int i = 1; i < m.nx; ++i)
    for (int j = 1; j < m.ny; ++j) {
      f.f1(i, j) = r[m.id(i, j, cU)];
      f.f2(i, j) = r[m.id(i, j, cV)];
      f.f3(i, j) = r[m.id(i, j, cH)];
      f.f4(i, j) = r[m.id(i, j, cG)];
    }
  return f;
}

double LinearizedSystem::boundary_defect(const RemainderState& s) const {
  const Impl& m = *impl_;
  const Eigen::VectorXd r = m.A * m.pack(s);
  double d = 0.0;
  for (int i = 0; i <= m.nx; ++i)
    for (int j = 0; j <= m.ny; ++j) {
      if (m.is_pde(i, j)) continue;
      for (int c = 0; c < kComps; ++c) d = std::max(d, std::abs(r[m.id(i, j, c)]));
    }
  return d;
}

RemainderState solve_linearized(const ApproxBaseline& baseline, const RemainderSources& f, const PhysicalParams& params,
                                const LinearOptions& opt) {
  const LinearizedSystem sys(baseline, params, opt);
  return sys.solve(f);
}

RemainderSources nonlinear_sources(const RemainderState& s, const ResidualBundle& r, const LayerOneSolution& l1,
                                   const PhysicalParams& params) {
  const double eps = params.eps, se = std::sqrt(eps), eg = std::pow(eps, params.gamma);
  const double scale = -std::pow(eps, -0.5 - params.gamma);
  const MeshPtr& mesh = s.u.mesh();
  if (!r.R1.same_mesh(s.u) || !l1.u1p.same_mesh(s.u))
    throw GridError("remainder", "nonlinear_sources", "inputs on different meshes");
  const Field2D ux = diff(s.u, Dir::x, 1), uy = diff(s.u, Dir::y, 1);
  const Field2D vx = diff(s.v, Dir::x, 1), vy = diff(s.v, Dir::y, 1);
  const Field2D hx = diff(s.h, Dir::x, 1), hy = diff(s.h, Dir::y, 1);
  const Field2D gx = diff(s.g, Dir::x, 1), gy = diff(s.g, Dir::y, 1);
  const Field2D Ux = diff(l1.u1p, Dir::x, 1), Uy = diff(l1.u1p, Dir::y, 1);
  const Field2D Vx = diff(l1.v1p, Dir::x, 1), Vy = diff(l1.v1p, Dir::y, 1);
  const Field2D Hx = diff(l1.h1p, Dir::x, 1), Hy = diff(l1.h1p, Dir::y, 1);
  const Field2D Gx = diff(l1.g1p, Dir::x, 1), Gy = diff(l1.g1p, Dir::y, 1);
  RemainderSources f{Field2D(mesh), Field2D(mesh), Field2D(mesh), Field2D(mesh)};
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    auto at = [k](const Field2D& a) { return a.values()[k]; };
    const double u = at(s.u), v = at(s.v), h = at(s.h), g = at(s.g);
    const double au = at(l1.u1p) + eg * u, av = at(l1.v1p) + eg * v;
    const double ah = at(l1.h1p) + eg * h, ag = at(l1.g1p) + eg * g;
    const double b1 = au * at(ux) + u * at(Ux) + av * at(uy) + v * at(Uy) - ah * at(hx) - h * at(Hx) -
                      ag * at(hy) - g * at(Hy);
    const double b2 = au * at(vx) + u * at(Vx) + av * at(vy) + v * at(Vy) - ah * at(gx) - h * at(Gx) -
                      ag * at(gy) - g * at(Gy);
    const double b3 = au * at(hx) + u * at(Hx) + av * at(hy) + v * at(Hy) - ah * at(ux) - h * at(Ux) -
                      ag * at(uy) - g * at(Uy);
    const double b4 = au * at(gx) + u * at(Gx) + av * at(gy) + v * at(Gy) - ah * at(vx) - h * at(Vx) -
                      ag * at(vy) - g * at(Vy);
    f.f1.values()[k] = scale * at(r.R1) - se * b1;
    f.f2.values()[k] = scale * at(r.R2) - se * b2;
    f.f3.values()[k] = scale * at(r.R3) - se * b3;
    f.f4.values()[k] = scale * at(r.R4) - se * b4;
  }
  return f;
}

double norm_S(const RemainderState& s, const PhysicalParams& params) {
  const double eps = params.eps;
  const double a = std::pow(eps, params.gamma / 2.0), b = std::pow(eps, params.gamma / 2.0 + 0.5);
  return nabla_eps_norm(s.u, eps) + nabla_eps_norm(s.v, eps) + nabla_eps_norm(s.h, eps) + nabla_eps_norm(s.g, eps) +
         a * sup_norm(s.u) + b * sup_norm(s.v) + a * sup_norm(s.h) + b * sup_norm(s.g);
}

RemainderState picard_iterate(const ApproxBaseline& baseline, const ResidualBundle& r, const LayerOneSolution& l1,
                              const PhysicalParams& params, const PicardOptions& opt) {
  const LinearizedSystem sys(baseline, params, opt.linear);
  RemainderState cur = zero_state(baseline.u_s.mesh());
  std::vector<PicardStep> history;
  double prev_delta = -1.0;
  int growth = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    RemainderState next = sys.solve(nonlinear_sources(cur, r, l1, params));
    RemainderState diff_state = zero_state(baseline.u_s.mesh());
    diff_state.u = next.u - cur.u;
    diff_state.v = next.v - cur.v;
    diff_state.h = next.h - cur.h;
    diff_state.g = next.g - cur.g;
    const double delta = norm_S(diff_state, params);
    next.normS = norm_S(next, params);
    if (!std::isfinite(delta) || !std::isfinite(next.normS))
      throw ContractionFailed("remainder", "picard_iterate", "non-finite iterate at step " + std::to_string(it));
    history.push_back({it, next.normS, delta});
    cur = std::move(next);
    cur.history = history;
    if (delta <= opt.rel_tol * cur.normS || cur.normS == 0.0) return cur;
    growth = (prev_delta > 0.0 && delta >= prev_delta) ? growth + 1 : 0;
    if (growth >= opt.max_growth)
      throw ContractionFailed("remainder", "picard_iterate",
                              "delta ratio >= 1 for " + std::to_string(growth) + " consecutive iterations");
    prev_delta = delta;
  }
  return cur;
}

std::vector<double> delta_ratios(const RemainderState& s) {
  std::vector<double> r;
  for (std::size_t k = 1; k < s.history.size(); ++k)
    if (s.history[k - 1].delta > 0.0) r.push_back(s.history[k].delta / s.history[k - 1].delta);
  return r;
}

double asymptotic_ratio(const RemainderState& s, double floor) {
  double last = 0.0;
  for (std::size_t k = 1; k < s.history.size(); ++k) {
    const double scale = std::max(s.history[k].normS, 1e-300);
    if (s.history[k].delta <= floor * scale || s.history[k - 1].delta <= 0.0) break;
    last = s.history[k].delta / s.history[k - 1].delta;
  }
  return last;
}

MainTheoremReport reconstruct_and_verify(const ApproxSolution& a, const LayerZeroSolution& l0, const RemainderState& s,
                                         const PhysicalParams& params) {
  const double eps = params.eps, se = std::sqrt(eps), d = std::pow(eps, 0.5 + params.gamma);
  MainTheoremReport rep;
  rep.eps = eps;
  for (std::size_t k = 0; k < a.u_app.size(); ++k) {
    auto at = [k](const Field2D& f) { return f.values()[k]; };
    const double U = at(a.u_app) + d * at(s.u);
    const double V = se * (at(a.v_app) + d * at(s.v));
    const double H = at(a.h_app) + d * at(s.h);
    const double G = se * (at(a.g_app) + d * at(s.g));
    rep.gap_U = std::max(rep.gap_U, std::abs(U - at(a.u0e) - at(l0.u0p)));
    rep.gap_V = std::max(rep.gap_V, std::abs(V - se * at(l0.v0p) - se * at(a.euler.v1e)));
    rep.gap_H = std::max(rep.gap_H, std::abs(H - at(a.h0e) - at(l0.h0p)));
    rep.gap_G = std::max(rep.gap_G, std::abs(G - se * at(l0.g0p) - se * at(a.euler.g1e)));
  }
  rep.normS = s.normS;
  rep.iterations = static_cast<int>(s.history.size());
  rep.q_norm = s.last_solve.q_norm;
  rep.asymptotic_ratio = asymptotic_ratio(s);
  return rep;
}

}  // namespace mhdbl
