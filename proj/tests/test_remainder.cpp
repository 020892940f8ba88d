#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "mhdbl/errors.hpp"
#include "mhdbl/pipeline.hpp"
#include "mhdbl/remainder.hpp"

using namespace mhdbl;

namespace {

MeshPtr small_mesh(int nx, int ny, double y_max = 8.0) {
  return make_mesh(uniform_nodes(0.4, nx), stretched_nodes(y_max, ny, 1.05), VAxis::y);
}

ApproxBaseline smooth_baseline(const MeshPtr& m) {
  ApproxBaseline b;
  b.u_s = Field2D(m, [](double x, double y) { return 1.5 + 0.2 * std::exp(-y) * (1.0 + x); });
  b.v_s = Field2D(m, [](double, double y) { return 0.01 * y * std::exp(-y); });
  b.h_s = Field2D(m, [](double, double y) { return 0.1 + 0.02 * std::exp(-y); });
  b.g_s = Field2D(m, 0.0);
  return b;
}

RemainderSources smooth_sources(const MeshPtr& m) {
  auto bump = [](double a) {
    return [a](double x, double y) { return a * std::sin(7.0 * x + a) * std::exp(-y) * (1.0 + y); };
  };
  return {Field2D(m, bump(1.0)), Field2D(m, bump(-0.5)), Field2D(m, bump(0.3)), Field2D(m, bump(0.8))};
}

double state_diff(const RemainderState& a, const RemainderState& b, double s) {
  double d = 0.0;
  for (auto [x, y] : {std::pair{&a.u, &b.u}, {&a.v, &b.v}, {&a.h, &b.h}, {&a.g, &b.g}, {&a.p, &b.p}, {&a.q, &b.q}})
    d = std::max(d, sup_norm(*x - s * *y));
  return d;
}

double state_sup(const RemainderState& a) {
  return std::max({sup_norm(a.u), sup_norm(a.v), sup_norm(a.h), sup_norm(a.g), sup_norm(a.p), sup_norm(a.q)});
}

LayerOneSolution smooth_layer1(const MeshPtr& m) {
  LayerOneSolution l;
  l.u1p = Field2D(m, [](double x, double y) { return (1.0 + x) * std::exp(-y); });
  l.v1p = Field2D(m, [](double x, double y) { return -y * std::exp(-y) * (0.5 + x); });
  l.h1p = Field2D(m, [](double x, double y) { return 0.2 * std::cos(x) * std::exp(-y); });
  l.g1p = Field2D(m, [](double x, double y) { return 0.1 * x * y * std::exp(-y); });
  return l;
}

ResidualBundle smooth_residuals(const MeshPtr& m) {
  ResidualBundle r;
  r.R1 = Field2D(m, [](double x, double y) { return 1e-3 * std::exp(-y) * (1.0 + x); });
  r.R2 = Field2D(m, [](double x, double y) { return -2e-3 * y * std::exp(-y) * x; });
  r.R3 = Field2D(m, [](double, double y) { return 5e-4 * std::exp(-2.0 * y); });
  r.R4 = Field2D(m, [](double x, double y) { return 1e-3 * std::sin(x) * std::exp(-y); });
  return r;
}

}  // namespace

TEST_CASE("zero sources give the zero remainder") {
  auto m = small_mesh(8, 8);
  PhysicalParams p;
  RemainderSources f{Field2D(m), Field2D(m), Field2D(m), Field2D(m)};
  auto s = solve_linearized(smooth_baseline(m), f, p);
  CHECK(state_sup(s) == 0.0);
  CHECK(s.last_solve.q_norm == 0.0);
}

TEST_CASE("the linearized solve is linear") {
  auto m = small_mesh(16, 24);
  PhysicalParams p;
  const LinearizedSystem sys(smooth_baseline(m), p);
  auto f = smooth_sources(m);
  auto s1 = sys.solve(f);
  for (Field2D* x : {&f.f1, &f.f2, &f.f3, &f.f4}) *x *= 2.0;
  auto s2 = sys.solve(f);
  CHECK(state_diff(s2, s1, 2.0) <= 1e-9 * state_sup(s1));
}

TEST_CASE("8x8 solve matches a dense direct solve and satisfies every row") {
  auto m = small_mesh(8, 8);
  PhysicalParams p;
  const LinearizedSystem sys(smooth_baseline(m), p);
  auto f = smooth_sources(m);
  const Eigen::VectorXd b = sys.load_vector(f);
  const Eigen::MatrixXd A = Eigen::MatrixXd(sys.matrix());
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  CHECK((A * x - b).norm() <= 1e-9 * b.norm());
  auto s = sys.solve(f);
  auto dense = sys.state_from(x);
  CHECK(state_diff(s, dense, 1.0) <= 1e-9 * std::max(1.0, state_sup(dense)));
  CHECK(s.last_solve.rel_residual <= 1e-9);
  CHECK(sys.boundary_defect(s) <= 1e-9 * std::max(1.0, state_sup(s)));
  CHECK(s.last_solve.div_u <= 1e-8);
  CHECK(s.last_solve.div_h <= 1e-8);
  auto back = sys.apply(s);
  for (int i = 1; i < 8; ++i)
    for (int j = 1; j < 8; ++j) CHECK(back.f1(i, j) == doctest::Approx(f.f1(i, j)).epsilon(1e-8).scale(1.0));
}

TEST_CASE("boundary rows of a refined solve") {
  auto m = small_mesh(24, 48, 20.0);
  PhysicalParams p;
  const LinearizedSystem sys(smooth_baseline(m), p);
  auto s = sys.solve(smooth_sources(m));
  const double scale = std::max(1.0, state_sup(s));
  CHECK(sys.boundary_defect(s) <= 1e-9 * scale);
  for (int i = 0; i <= 24; ++i) {
    CHECK(std::abs(s.u(i, 0)) <= 1e-12 * scale);
    CHECK(std::abs(s.v(i, 0)) <= 1e-12 * scale);
    CHECK(std::abs(s.g(i, 0)) <= 1e-12 * scale);
  }
  for (int j = 0; j <= 48; ++j) {
    CHECK(std::abs(s.u(0, j)) <= 1e-12 * scale);
    CHECK(std::abs(s.h(0, j)) <= 1e-12 * scale);
    CHECK(std::abs(s.h(24, j)) <= 1e-12 * scale);
  }
  LinearOptions strict;
  strict.strict_q = true;
  const LinearizedSystem sys_strict(smooth_baseline(m), p, strict);
  if (s.last_solve.q_norm > strict.q_tol * s.last_solve.hg_norm)
    CHECK_THROWS_AS(sys_strict.solve(smooth_sources(m)), StructuralInconsistency);
}

TEST_CASE("S norm: zero, homogeneity and an analytic value") {
  PhysicalParams p;
  auto m = small_mesh(16, 64, 20.0);
  auto s = zero_state(m);
  CHECK(norm_S(s, p) == 0.0);
  s.u = Field2D(m, [](double x, double y) { return std::sin(3.0 * x) * y * std::exp(-y); });
  s.g = Field2D(m, [](double x, double y) { return x * std::exp(-y); });
  auto t = s;
  t.u *= -3.0;
  t.g *= -3.0;
  CHECK(norm_S(t, p) == doctest::Approx(3.0 * norm_S(s, p)).epsilon(1e-13));

  // eps = 1, u = y e^{-y}: |grad u| = sqrt(L / 4) and sup u = 1/e on the half line.
  PhysicalParams one;
  one.eps = 1.0;
  auto fine = make_mesh(uniform_nodes(0.4, 8), stretched_nodes(30.0, 4000, 1.0005), VAxis::y);
  auto a = zero_state(fine);
  a.u = Field2D(fine, [](double, double y) { return y * std::exp(-y); });
  CHECK(norm_S(a, one) == doctest::Approx(std::sqrt(0.1) + std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("nonlinear sources: scaled residuals at zero and quadratic in the state") {
  auto m = small_mesh(12, 16);
  PhysicalParams p;
  const auto r = smooth_residuals(m);
  LayerOneSolution zero_l1;
  for (Field2D* f : {&zero_l1.u1p, &zero_l1.v1p, &zero_l1.h1p, &zero_l1.g1p}) *f = Field2D(m);
  auto f0 = nonlinear_sources(zero_state(m), r, zero_l1, p);
  const double c = -std::pow(p.eps, -0.5 - p.gamma);
  CHECK(sup_norm(f0.f1 - c * r.R1) == 0.0);
  CHECK(sup_norm(f0.f4 - c * r.R4) == 0.0);

  const auto l1 = smooth_layer1(m);
  RemainderState base = zero_state(m);
  base.u = Field2D(m, [](double x, double y) { return x * y * std::exp(-y); });
  base.v = Field2D(m, [](double x, double y) { return std::cos(x) * std::exp(-y); });
  base.h = Field2D(m, [](double x, double y) { return (1.0 - x) * std::exp(-0.5 * y); });
  base.g = Field2D(m, [](double x, double y) { return x * x * std::exp(-y); });
  auto at = [&](double lam) {
    RemainderState s = base;
    for (Field2D* f : {&s.u, &s.v, &s.h, &s.g}) *f *= lam;
    return nonlinear_sources(s, r, l1, p);
  };
  // A polynomial of degree two in lambda has a vanishing third difference.
  const auto a0 = at(0.0), a1 = at(1.0), a2 = at(2.0), a3 = at(3.0);
  const auto third = [](const Field2D& x0, const Field2D& x1, const Field2D& x2, const Field2D& x3) {
    return sup_norm(x0 - 3.0 * x1 + 3.0 * x2 - x3) / std::max(1.0, sup_norm(x3));
  };
  CHECK(third(a0.f1, a1.f1, a2.f1, a3.f1) <= 1e-12);
  CHECK(third(a0.f2, a1.f2, a2.f2, a3.f2) <= 1e-12);
  CHECK(third(a0.f3, a1.f3, a2.f3, a3.f3) <= 1e-12);
  CHECK(third(a0.f4, a1.f4, a2.f4, a3.f4) <= 1e-12);
  // The second difference is the eps^gamma quadratic part and does not vanish.
  CHECK(sup_norm(a0.f1 - 2.0 * a1.f1 + a2.f1) > 0.0);
}

TEST_CASE("zero approximate residuals give the zero fixed point after one iteration") {
  auto m = small_mesh(8, 8);
  PhysicalParams p;
  ResidualBundle r;
  for (Field2D* f : {&r.R1, &r.R2, &r.R3, &r.R4}) *f = Field2D(m);
  auto s = picard_iterate(smooth_baseline(m), r, smooth_layer1(m), p);
  CHECK(s.history.size() == 1);
  CHECK(s.normS == 0.0);
}

TEST_CASE("zero-mismatch baseline is the leading Euler flow") {
  PipelineConfig c;
  c.profile = "zero-mismatch";
  c.grid.nx = 16;
  c.grid.ny = 64;
  c.grid.nY = 32;
  auto r = run_pipeline(c, Stage::compose);
  auto b = build_baseline(*r.l0, *r.approx, r.params);
  const auto& y = b.u_s.mesh()->z;
  const double se = std::sqrt(r.params.eps);
  double ratio = 0.0;
  for (int j = 0; j <= b.u_s.nz(); ++j) {
    const double Y = se * y[j];
    CHECK(b.u_s(3, j) == doctest::Approx(r.flow.u0e(Y)).epsilon(1e-12));
    CHECK(b.h_s(3, j) == doctest::Approx(r.flow.h0e(Y)).epsilon(1e-12));
    ratio = std::max(ratio, std::abs(r.flow.h0e(Y) / r.flow.u0e(Y)));
  }
  CHECK(b.ratio == doctest::Approx(ratio).epsilon(1e-12));
  CHECK_THROWS_AS(build_baseline(*r.l0, *r.approx, r.params, 0.5 * ratio), RatioViolated);
}

TEST_CASE("mild Picard iteration contracts") {
  PipelineConfig c;
  c.grid.nx = 32;
  c.grid.ny = 64;
  c.grid.nY = 64;
  auto r = run_pipeline(c);
  const auto ratios = delta_ratios(*r.remainder);
  REQUIRE(ratios.size() >= 2);
  CHECK(asymptotic_ratio(*r.remainder) < 0.5);
  CHECK(r.remainder->history.back().delta <= c.picard.rel_tol * r.remainder->normS);
  CHECK(r.baseline->ratio <= 0.12);
  CHECK(r.theorem->iterations == static_cast<int>(r.remainder->history.size()));
}
