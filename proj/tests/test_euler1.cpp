#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "mhdbl/errors.hpp"
#include "mhdbl/euler1.hpp"

using namespace mhdbl;

namespace {

struct MildRun {
  PhysicalParams p;
  BuiltinProfile b;
  LayerZeroSolution l0;
  BoundaryData data;
  EulerCorrector ec;
};

MildRun mild_run(int nx = 32, int nY = 64) {
  MildRun r;
  r.b = builtin_profile("mild", r.p);
  r.p.u_b = r.b.u_b;
  GridSpec g;
  g.nx = nx;
  g.ny = 128;
  g.nY = nY;
  r.l0 = solve_layer0(layer_mesh(g), r.b.flow, r.b.data, r.p);
  r.data = anchor_side_data(r.b.data, r.b.flow, corner_traces(r.l0));
  r.ec = solve_euler1(r.l0, r.data, r.b.flow, euler_mesh(g), r.p);
  return r;
}

// Coefficients of the scalar operator from the profile derivatives.
void coefficients(const IdealShearFlow& f, double Y, double& diffusion, double& drift, double& reaction) {
  const double u = f.u0e(Y), u1 = f.u0e.d(Y, 1), u2 = f.u0e.d(Y, 2);
  const double h = f.h0e(Y), h1 = f.h0e.d(Y, 1), h2 = f.h0e.d(Y, 2);
  const double r = h / u;
  const double r1 = (h1 * u - h * u1) / (u * u);
  const double r2 = (h2 * u - h * u2) / (u * u) - 2.0 * u1 * (h1 * u - h * u1) / (u * u * u);
  diffusion = -u * (1.0 - r * r);
  drift = 2.0 * h * r1;
  reaction = u2 + h * r2 - h2 * r;
}

}  // namespace

TEST_CASE("zero lifting gives the zero corrector") {
  PhysicalParams p;
  auto b = builtin_profile("zero-mismatch", p);
  p.u_b = b.u_b;
  GridSpec g;
  g.nx = 16;
  g.ny = 64;
  g.nY = 32;
  auto l0 = solve_layer0(layer_mesh(g), b.flow, b.data, p);
  auto lift = build_lifting(l0, b.data, b.flow, euler_mesh(g), p);
  for (const Field2D* f : {&lift.Bv, &lift.Bg, &lift.Fe, &lift.Eb}) CHECK(sup_norm(*f) <= 1e-12);
  auto ec = solve_euler1(l0, b.data, b.flow, euler_mesh(g), p);
  for (const Field2D* f : {&ec.v1e, &ec.g1e, &ec.u1e, &ec.h1e, &ec.p1e}) CHECK(sup_norm(*f) <= 1e-14);
}

TEST_CASE("manufactured corrector converges at second order") {
  PhysicalParams p;
  const auto flow = builtin_profile("mild", p).flow;
  const double L = p.L, k = M_PI / L;
  auto err = [&](int f) {
    GridSpec g;
    g.L = L;
    g.nx = 8 * f;
    g.nY = 16 * f;
    g.stretch = std::pow(1.1, 1.0 / f);
    auto m = euler_mesh(g);
    Field2D rhs(m), exact(m);
    for (int i = 0; i <= m->nx(); ++i)
      for (int j = 0; j <= m->nz(); ++j) {
        const double x = m->x[i], Y = m->z[j], e = std::exp(-Y), s = std::sin(k * x);
        const double w = s * Y * e, wY = s * (1.0 - Y) * e, wYY = s * (Y - 2.0) * e, wxx = -k * k * w;
        double a, d, c;
        coefficients(flow, Y, a, d, c);
        rhs(i, j) = a * (wxx + wYY) + d * wY + c * w;
        exact(i, j) = w;
      }
    return sup_norm(solve_scalar_elliptic(rhs, flow).w1 - exact);
  };
  const double e1 = err(2), e2 = err(4), e3 = err(8);
  CHECK(std::log2(e1 / e2) >= 1.8);
  CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("Krylov corrector matches a dense solve on an 8x8 grid") {
  PhysicalParams p;
  const auto flow = builtin_profile("mild", p).flow;
  auto m = make_mesh(uniform_nodes(p.L, 8), stretched_nodes(6.0, 8, 1.1), VAxis::Y);
  Field2D rhs(m, [](double x, double Y) { return std::cos(3.0 * x) * std::exp(-Y) + Y * x; });
  const int n = 7 * 7;
  auto id = [](int i, int j) { return (i - 1) * 7 + (j - 1); };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd F(n);
  // Columns from the grid difference operators applied to unit fields.
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 8; ++j) {
      Field2D e(m, 0.0);
      e(i, j) = 1.0;
      const Field2D lap = diff(e, Dir::x, 2) + diff(e, Dir::y, 2);
      const Field2D dy = diff(e, Dir::y, 1);
      for (int ii = 1; ii < 8; ++ii)
        for (int jj = 1; jj < 8; ++jj) {
          double a, d, c;
          coefficients(flow, m->z[jj], a, d, c);
          A(id(ii, jj), id(i, j)) = a * lap(ii, jj) + d * dy(ii, jj) + c * e(ii, jj);
        }
      F[id(i, j)] = rhs(i, j);
    }
  const Eigen::VectorXd w = A.fullPivLu().solve(F);
  auto s = solve_scalar_elliptic(rhs, flow);
  double d = 0.0;
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 8; ++j) d = std::max(d, std::abs(s.w1(i, j) - w[id(i, j)]));
  CHECK(d <= 1e-9 * std::max(1.0, w.lpNorm<Eigen::Infinity>()));
  for (int j = 0; j <= 8; ++j) CHECK(s.w1(0, j) == 0.0);
}

TEST_CASE("positivity certificate is one for a constant tangential profile") {
  IdealShearFlow f;
  f.u0e = Profile1D::constant(1.5);
  f.h0e = Profile1D::constant(0.1);
  f.u_e = 1.5;
  f.h_e = 0.1;
  auto m = make_mesh(uniform_nodes(0.4, 16), stretched_nodes(10.0, 64, 1.03), VAxis::Y);
  Field2D w(m, [](double x, double Y) { return std::sin(7.0 * x) * Y * std::exp(-Y); });
  CHECK(positivity_certificate(w, f) == doctest::Approx(1.0).epsilon(1e-12));
  auto r = mild_run(16, 64);
  CHECK(positivity_certificate(r.ec.w1, r.b.flow) >= 0.5);
}

TEST_CASE("mild corrector: algebraic relation, wall traces and conductor condition") {
  auto r = mild_run();
  const auto& m = *r.ec.v1e.mesh();
  const auto& f = r.b.flow;
  for (int i = 0; i <= m.nx(); ++i) {
    CHECK(r.ec.v1e(i, 0) == doctest::Approx(-r.l0.v0p(i, 0)).epsilon(1e-10));
    CHECK(r.ec.g1e(i, 0) == doctest::Approx(-r.l0.g0p(i, 0)).epsilon(1e-10));
    for (int j = 0; j <= m.nz(); j += 5) {
      const double Y = m.z[j];
      CHECK(r.ec.g1e(i, j) == doctest::Approx(f.h0e(Y) / f.u0e(Y) * r.ec.v1e(i, j) + r.ec.b[i] / f.u0e(Y))
                                  .epsilon(1e-12));
    }
  }
  GridSpec g;
  g.nx = 32;
  auto on = sample_on_layer(r.ec, layer_mesh(g), r.p.eps, {});
  const Diff1D d1 = make_diff1d(on.h1e_tilde.mesh()->z, 1);
  for (int i = 0; i <= on.h1e_tilde.nx(); ++i) {
    CHECK(std::abs(d1.apply(on.h1e_tilde.row(i), 0)) <= 1e-10);
    CHECK(on.g1e_tilde(i, 0) == doctest::Approx(on.g1e(i, 0)).epsilon(1e-12));
  }
}

TEST_CASE("u1e and h1e are the x-trapezoid of the vertical divergence") {
  auto r = mild_run();
  const Field2D vY = diff(r.ec.v1e, Dir::y, 1);
  const auto& m = *vY.mesh();
  double d = 0.0;
  for (int i = 1; i <= m.nx(); ++i)
    for (int j = 0; j <= m.nz(); ++j)
      d = std::max(d, std::abs((r.ec.u1e(i, j) - r.ec.u1e(i - 1, j)) / (m.x[i] - m.x[i - 1]) +
                               0.5 * (vY(i, j) + vY(i - 1, j))));
  CHECK(d <= 1e-10 * std::max(1.0, sup_norm(vY)));
}

TEST_CASE("corner data off the layer traces are rejected") {
  auto r = mild_run(16, 32);
  BoundaryData bad = r.data;
  bad.Vb0 = r.data.Vb0 + Profile1D::gaussian(0.1);
  GridSpec g;
  g.nx = 16;
  g.ny = 128;
  g.nY = 32;
  CHECK_THROWS_AS(build_lifting(r.l0, bad, r.b.flow, euler_mesh(g), r.p), CompatibilityViolated);
}
