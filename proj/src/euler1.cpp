#include "mhdbl/euler1.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Trip = Eigen::Triplet<double>;

// Coefficients of the reduced scalar operator at height Y.
struct ScalarCoeffs {
  double diffusion, drift, reaction;
};

ScalarCoeffs scalar_coeffs(const IdealShearFlow& f, double Y) {
  const double u = f.u0e(Y), u1 = f.u0e.d(Y, 1), u2 = f.u0e.d(Y, 2);
  const double h = f.h0e(Y), h1 = f.h0e.d(Y, 1), h2 = f.h0e.d(Y, 2);
  const double r = h / u;
  const double r1 = (h1 * u - h * u1) / (u * u);
  const double r2 = (h2 * u - h * u2) / (u * u) - 2.0 * u1 * (h1 * u - h * u1) / (u * u * u);
  return {-u * (1.0 - r * r), 2.0 * h * r1, u2 + h * r2 - h2 * r};
}

Field2D laplacian(const Field2D& f) { return diff(f, Dir::x, 2) + diff(f, Dir::y, 2); }

}  // namespace

Field2D corrector_operator(const Field2D& v, const Field2D& g, const IdealShearFlow& flow) {
  const auto& Y = v.mesh()->z;
  const Field2D lv = laplacian(v), lg = laplacian(g);
  Field2D r(v.mesh());
  for (int i = 0; i <= v.nx(); ++i)
    for (int j = 0; j <= v.nz(); ++j) {
      const double y = Y[j];
      r(i, j) = -flow.u0e(y) * lv(i, j) + flow.u0e.d(y, 2) * v(i, j) + flow.h0e(y) * lg(i, j) -
                flow.h0e.d(y, 2) * g(i, j);
    }
  return r;
}

LiftingFields build_lifting(const LayerZeroSolution& l0, const BoundaryData& data, const IdealShearFlow& flow,
                            const MeshPtr& euler, const PhysicalParams& params, const EulerOptions& opt) {
  if (euler->axis != VAxis::Y) throw GridError("euler1", "build_lifting", "corrector mesh must use the Y axis");
  if (euler->x != l0.u0p.mesh()->x) throw GridError("euler1", "build_lifting", "x nodes differ from layer0");
  const int nx = euler->nx();
  const double L = euler->x.back();
  LiftingFields lf;
  lf.b = wall_flux_b(l0);
  lf.v0w.resize(nx + 1);
  lf.g0w.resize(nx + 1);
  for (int i = 0; i <= nx; ++i) {
    lf.v0w[i] = l0.v0p(i, 0);
    lf.g0w[i] = l0.g0p(i, 0);
  }
  const double v0 = lf.v0w.front(), vL = lf.v0w.back(), g0 = lf.g0w.front(), gL = lf.g0w.back();
  const double cv = std::abs(data.Vb0(0.0) + v0) + std::abs(data.VbL(0.0) + vL);
  const double cg = std::abs(data.Gb0(0.0) + g0) + std::abs(data.GbL(0.0) + gL);
  if (cv > opt.compat_tol || cg > opt.compat_tol)
    throw CompatibilityViolated("euler1", "build_lifting",
                                "corner data differ from the layer0 wall traces by " + std::to_string(std::max(cv, cg)));
  lf.difference_form = {std::abs(v0) <= opt.degenerate_tol, std::abs(vL) <= opt.degenerate_tol,
                        std::abs(g0) <= opt.degenerate_tol, std::abs(gL) <= opt.degenerate_tol};
  // One endpoint term: side(Y) * trace(x) / corner, or side(Y) - trace(x) when the corner vanishes.
  auto term = [](bool diff_form, double side, double trace, double corner) {
    return diff_form ? side - trace : side * trace / corner;
  };
  lf.Bv = Field2D(euler);
  lf.Bg = Field2D(euler);
  for (int i = 0; i <= nx; ++i) {
    const double s = euler->x[i] / L;
    for (int j = 0; j <= euler->nz(); ++j) {
      const double Y = euler->z[j];
      lf.Bv(i, j) = (1.0 - s) * term(lf.difference_form[0], data.Vb0(Y), lf.v0w[i], v0) +
                    s * term(lf.difference_form[1], data.VbL(Y), lf.v0w[i], vL);
      lf.Bg(i, j) = (1.0 - s) * term(lf.difference_form[2], data.Gb0(Y), lf.g0w[i], g0) +
                    s * term(lf.difference_form[3], data.GbL(Y), lf.g0w[i], gL);
    }
  }
  lf.Fe = corrector_operator(lf.Bv, lf.Bg, flow);
  const double ec = opt.eps_c > 0.0 ? opt.eps_c : params.eps;
  const CutoffSet cs;
  lf.Eb = Field2D(euler);
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= euler->nz(); ++j)
      lf.Eb(i, j) = cutoff_values(cs, Cutoff::chi, 0, euler->z[j] / ec) * lf.Fe(i, 0);
  require_finite(lf.Fe, "euler1", "build_lifting");
  return lf;
}

CorrectorSolve solve_scalar_elliptic(const Field2D& rhs, const IdealShearFlow& flow, const EulerOptions& opt) {
  const MeshPtr& m = rhs.mesh();
  const int nx = m->nx(), nz = m->nz();
  double sup_ratio = 0.0;
  for (double Y : m->z) sup_ratio = std::max(sup_ratio, std::abs(flow.h0e(Y) / flow.u0e(Y)));
  if (sup_ratio > opt.ratio_max * (1.0 + 1e-12))
    throw Degenerate("euler1", "solve_corrector",
                     "sup |h0e/u0e| = " + std::to_string(sup_ratio) + " exceeds ratio_max");
  const int ni = nx - 1, nj = nz - 1;
  if (ni < 1 || nj < 1) throw GridError("euler1", "solve_corrector", "no interior nodes");
  auto id = [nj](int i, int j) { return (i - 1) * nj + (j - 1); };
  const Diff1D dx2 = make_diff1d(m->x, 2);
  const Diff1D dy1 = make_diff1d(m->z, 1);
  const Diff1D dy2 = make_diff1d(m->z, 2);
  std::vector<Trip> trips;
  trips.reserve(static_cast<std::size_t>(ni) * nj * 6);
  Eigen::VectorXd F(ni * nj);
  for (int j = 1; j < nz; ++j) {
    const ScalarCoeffs c = scalar_coeffs(flow, m->z[j]);
    for (int i = 1; i < nx; ++i) {
      const int row = id(i, j);
      F[row] = rhs(i, j);
      double diag = c.reaction;
      for (int k = 0; k < 3; ++k) {
        const int ii = dx2.start[i] + k;
        const double wgt = c.diffusion * dx2.w[i][k];
        if (ii == i) diag += wgt;
        else if (ii >= 1 && ii < nx) trips.emplace_back(row, id(ii, j), wgt);
      }
      for (int k = 0; k < 3; ++k) {
        const int jj = dy2.start[j] + k;
        const double wgt = c.diffusion * dy2.w[j][k] + c.drift * dy1.w[j][k];
        if (jj == j) diag += wgt;
        else if (jj >= 1 && jj < nz) trips.emplace_back(row, id(i, jj), wgt);
      }
      trips.emplace_back(row, row, diag);
    }
  }
  SpMat A(ni * nj, ni * nj);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver;
  solver.preconditioner().setDroptol(1e-6);
  solver.preconditioner().setFillfactor(20);
  solver.setTolerance(opt.tol);
  solver.setMaxIterations(opt.max_iter);
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw SolverDiverged("euler1", "solve_corrector", "preconditioner construction failed");
  Eigen::VectorXd w = F.norm() > 0.0 ? Eigen::VectorXd(solver.solve(F)) : Eigen::VectorXd::Zero(ni * nj);
  CorrectorSolve out;
  out.iterations = F.norm() > 0.0 ? static_cast<int>(solver.iterations()) : 0;
  out.rel_residual = F.norm() > 0.0 ? (A * w - F).norm() / F.norm() : 0.0;
  if (!w.allFinite() || out.rel_residual > 10.0 * opt.tol)
    throw SolverDiverged("euler1", "solve_corrector",
                         "Krylov stagnation, relative residual " + std::to_string(out.rel_residual));
  out.w1 = Field2D(m);
  for (int i = 1; i < nx; ++i)
    for (int j = 1; j < nz; ++j) out.w1(i, j) = w[id(i, j)];
  return out;
}

CorrectorSolve solve_corrector(const LiftingFields& lift, const IdealShearFlow& flow, const EulerOptions& opt) {
  const MeshPtr& m = lift.Bv.mesh();
  // w2 = r w1 + S with S = r Bv + b / u0e - Bg.
  Field2D S(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) {
      const double Y = m->z[j];
      const double u = flow.u0e(Y);
      S(i, j) = flow.h0e(Y) / u * lift.Bv(i, j) + lift.b[i] / u - lift.Bg(i, j);
    }
  const Field2D lapS = laplacian(S);
  Field2D rhs(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) {
      const double Y = m->z[j];
      rhs(i, j) = lift.Eb(i, j) - lift.Fe(i, j) - flow.h0e(Y) * lapS(i, j) + flow.h0e.d(Y, 2) * S(i, j);
    }
  CorrectorSolve out = solve_scalar_elliptic(rhs, flow, opt);
  out.w2 = Field2D(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) {
      const double Y = m->z[j];
      out.w2(i, j) = flow.h0e(Y) / flow.u0e(Y) * out.w1(i, j) + S(i, j);
    }
  return out;
}

double positivity_certificate(const Field2D& w1, const IdealShearFlow& flow) {
  const MeshPtr& m = w1.mesh();
  Field2D q(m), u2(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) {
      const double u = flow.u0e(m->z[j]);
      q(i, j) = w1(i, j) / u;
      u2(i, j) = u * u;
    }
  const Field2D dq = diff(q, Dir::y, 1);
  const Field2D dw = diff(w1, Dir::y, 1);
  const double den = inner(dw, dw);
  if (den < 1e-14) return std::numeric_limits<double>::infinity();
  return integrate(hadamard(u2, hadamard(dq, dq))) / den;
}

EulerCorrector recover_fields(const CorrectorSolve& w, const LiftingFields& lift, const IdealShearFlow& flow,
                              const BoundaryData& data) {
  const MeshPtr& m = lift.Bv.mesh();
  EulerCorrector ec;
  ec.w1 = w.w1;
  ec.w2 = w.w2;
  ec.b = lift.b;
  ec.iterations = w.iterations;
  ec.rel_residual = w.rel_residual;
  ec.v1e = lift.Bv + w.w1;
  ec.g1e = lift.Bg + w.w2;
  const Field2D vY = diff(ec.v1e, Dir::y, 1);
  const Field2D gY = diff(ec.g1e, Dir::y, 1);
  const Field2D iv = cumulative_x(vY), ig = cumulative_x(gY);
  ec.u1e = Field2D(m);
  ec.h1e = Field2D(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) {
      const double Y = m->z[j];
      ec.u1e(i, j) = data.u1b(Y) - iv(i, j);
      ec.h1e(i, j) = data.h1b(Y) - ig(i, j);
    }
  const Field2D vx = diff(ec.v1e, Dir::x, 1), gx = diff(ec.g1e, Dir::x, 1);
  Field2D integrand(m);
  for (int i = 0; i <= m->nx(); ++i)
    for (int j = 0; j <= m->nz(); ++j) {
      const double Y = m->z[j];
      integrand(i, j) = flow.u0e(Y) * vx(i, j) - flow.h0e(Y) * gx(i, j);
    }
  ec.p1e = tail_integral(integrand, Orientation::from_top);
  for (const Field2D* f : {&ec.v1e, &ec.g1e, &ec.u1e, &ec.h1e, &ec.p1e}) require_finite(*f, "euler1", "recover_fields");
  return ec;
}

EulerCorrector solve_euler1(const LayerZeroSolution& l0, const BoundaryData& data, const IdealShearFlow& flow,
                            const MeshPtr& euler, const PhysicalParams& params, const EulerOptions& opt) {
  const LiftingFields lift = build_lifting(l0, data, flow, euler, params, opt);
  return recover_fields(solve_corrector(lift, flow, opt), lift, flow, data);
}

EulerOnLayer sample_on_layer(const EulerCorrector& ec, const MeshPtr& layer, double eps, const CutoffSet& cutoffs) {
  EulerOnLayer s;
  s.v1e = euler_to_layer(ec.v1e, eps, layer);
  s.g1e = euler_to_layer(ec.g1e, eps, layer);
  s.u1e = euler_to_layer(ec.u1e, eps, layer);
  s.h1e = euler_to_layer(ec.h1e, eps, layer);
  s.p1e = euler_to_layer(ec.p1e, eps, layer);
  const double se = std::sqrt(eps);
  const auto& y = layer->z;
  const Diff1D d1 = make_diff1d(y, 1);
  s.dYh1e_wall.resize(layer->nx() + 1);
  s.rho = Field2D(layer);
  for (int i = 0; i <= layer->nx(); ++i) {
    s.dYh1e_wall[i] = d1.apply(s.h1e.row(i), 0) / se;
    for (int j = 0; j <= layer->nz(); ++j)
      s.rho(i, j) = -s.dYh1e_wall[i] * y[j] * cutoff_values(cutoffs, Cutoff::eta, 0, y[j]);
  }
  s.h1e_tilde = s.h1e;
  s.h1e_tilde.axpy(se, s.rho);
  s.g1e_tilde = s.g1e;
  s.g1e_tilde.axpy(-eps, tail_integral(diff(s.rho, Dir::x, 1), Orientation::from_wall));
  return s;
}

}  // namespace mhdbl
