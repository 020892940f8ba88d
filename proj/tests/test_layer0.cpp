#include <cmath>

#include "doctest.h"
#include "mhdbl/layer0.hpp"

using namespace mhdbl;

namespace {

LayerZeroSolution run(const std::string& profile, int nx, int ny, PhysicalParams p = {}) {
  auto b = builtin_profile(profile, p);
  p.u_b = b.u_b;
  GridSpec g;
  g.nx = nx;
  g.ny = ny;
  return solve_layer0(layer_mesh(g), b.flow, b.data, p);
}

double max_change(const Field2D& coarse, const Field2D& fine) {
  const int r = fine.nx() / coarse.nx();
  double d = 0.0;
  for (int i = 0; i <= coarse.nx(); ++i)
    for (int j = 0; j <= coarse.nz(); ++j) d = std::max(d, std::abs(coarse(i, j) - fine(r * i, j)));
  return d;
}

}  // namespace

TEST_CASE("zero-mismatch data give the zero layer") {
  auto s = run("zero-mismatch", 32, 64);
  for (const Field2D* f : {&s.u0p, &s.v0p, &s.h0p, &s.g0p}) CHECK(sup_norm(*f) <= 1e-12);
  for (double t : s.trace_v1e) CHECK(std::abs(t) <= 1e-12);
}

TEST_CASE("mild layer: wall rows, traces and monitored bounds") {
  PhysicalParams p;
  auto s = run("mild", 64, 128, p);
  const auto& y = s.u0p.mesh()->z;
  const Diff1D d1 = make_diff1d(y, 1);
  for (int i = 0; i <= s.u0p.nx(); ++i) {
    CHECK(s.u0p(i, 0) == doctest::Approx(s.u_b - s.u_e).epsilon(1e-12));
    CHECK(s.v0p(i, 0) == -s.trace_v1e[i]);
    CHECK(s.g0p(i, 0) == -s.trace_g1e[i]);
    if (i > 0) CHECK(std::abs(d1.apply(s.h0p.row(i), 0)) <= 1e-10);
  }
  for (const auto& m : s.monitor) {
    CHECK(m.within_bounds);
    CHECK(m.min_h_total >= 0.05);
    CHECK(m.last_change <= 1e-10);
  }
  const auto b = wall_flux_b(s);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(b[i] == doctest::Approx(s.h_e * s.v0p(i, 0) - s.u_e * s.g0p(i, 0)).epsilon(1e-12));
}

TEST_CASE("homogenize and dehomogenize are inverse") {
  PhysicalParams p;
  auto s = run("mild", 16, 64, p);
  CutoffSet c;
  auto back = dehomogenize(homogenize(s, p, c), s.u_e, s.h_e, s.u_b, c);
  CHECK(sup_norm(back.u0p - s.u0p) <= 1e-13);
  CHECK(sup_norm(back.h0p - s.h0p) <= 1e-13);
  CHECK(sup_norm(back.v0p - s.v0p) <= 1e-13);
  CHECK(sup_norm(back.g0p - s.g0p) <= 1e-13);
}

TEST_CASE("x-march self-convergence is first order") {
  auto a = run("mild", 32, 128), b = run("mild", 64, 128), c = run("mild", 128, 128);
  const double d1 = max_change(a.u0p, b.u0p), d2 = max_change(b.u0p, c.u0p);
  CHECK(d1 / d2 >= 1.8);
}

TEST_CASE("stream identity residual decreases at first order") {
  PhysicalParams p;
  std::vector<double> r;
  for (int nx : {32, 64, 128}) r.push_back(stream_identity_residual(run("mild", nx, 128, p), p));
  CHECK(std::log2(r[0] / r[1]) >= 0.9);
  CHECK(std::log2(r[1] / r[2]) >= 0.9);
}

TEST_CASE("corrupted g shifts the stream identity by the total tangential velocity") {
  PhysicalParams p;
  auto s = run("mild", 32, 128, p);
  const double base = stream_identity_residual(s, p);
  const double shifted = stream_identity_residual(s, p, 0.1);
  double umax = 0.0;
  for (double v : s.u0p.values()) umax = std::max(umax, std::abs(s.u_e + v));
  CHECK(std::abs(shifted - 0.1 * umax) <= base + 1e-12);
}

TEST_CASE("normal components are the trapezoid of the x-derivative") {
  auto s = run("mild", 32, 128);
  const auto& y = s.u0p.mesh()->z;
  for (auto [u, v] : {std::pair{&s.u0p, &s.v0p}, std::pair{&s.h0p, &s.g0p}}) {
    const Field2D ux = diff(*u, Dir::x, 1);
    double d = 0.0;
    for (int i = 0; i <= ux.nx(); ++i)
      for (int j = 1; j <= ux.nz(); ++j)
        d = std::max(d, std::abs(((*v)(i, j) - (*v)(i, j - 1)) / (y[j] - y[j - 1]) + 0.5 * (ux(i, j) + ux(i, j - 1))));
    CHECK(d <= 1e-10 * std::max(1.0, sup_norm(ux)));
  }
}
