#include <cmath>

#include "doctest.h"
#include "mhdbl/composer.hpp"
#include "mhdbl/errors.hpp"
#include "mhdbl/pipeline.hpp"

using namespace mhdbl;

namespace {

PipelineConfig small(const std::string& profile, double eps = 1e-2) {
  PipelineConfig c;
  c.profile = profile;
  c.params.eps = eps;
  c.grid.nx = 32;
  c.grid.ny = 128;
  c.grid.nY = 64;
  return c;
}

}  // namespace

TEST_CASE("constant states solve the scaled system") {
  auto m = make_mesh(uniform_nodes(0.4, 12), stretched_nodes(10.0, 20, 1.05), VAxis::y);
  PhysicalParams p;
  auto r = apply_scaled_operators(Field2D(m, 1.7), Field2D(m, 0.0), Field2D(m, 0.3), Field2D(m, 0.0), Field2D(m, 2.0),
                                  p);
  for (const Field2D* f : {&r.R1, &r.R2, &r.R3, &r.R4}) CHECK(sup_norm(*f) <= 1e-11);
}

TEST_CASE("zero-mismatch composition is the sampled Euler flow") {
  const auto c = small("zero-mismatch");
  auto r = run_pipeline(c, Stage::compose);
  const auto& a = *r.approx;
  const auto& y = a.u_app.mesh()->z;
  const double eps = r.params.eps, se = std::sqrt(eps);
  for (int i = 0; i <= a.u_app.nx(); i += 5)
    for (int j = 0; j <= a.u_app.nz(); ++j) {
      CHECK(a.u_app(i, j) == doctest::Approx(r.flow.u0e(se * y[j])).epsilon(1e-12));
      CHECK(a.h_app(i, j) == doctest::Approx(r.flow.h0e(se * y[j])).epsilon(1e-12));
    }
  CHECK(sup_norm(a.v_app) <= 1e-12);
  CHECK(sup_norm(a.g_app) <= 1e-12);
  CHECK(sup_norm(a.p2p) <= 1e-12);
  // R1 reduces to -nu eps u0e'' at Y = sqrt(eps) y.
  Field2D term(a.u_app.mesh());
  for (int i = 0; i <= term.nx(); ++i)
    for (int j = 0; j <= term.nz(); ++j) term(i, j) = -r.params.nu * eps * r.flow.u0e.d(se * y[j], 2);
  CHECK(sup_norm(r.residuals->R1 - term) <= 1e-3 * sup_norm(term));
}

TEST_CASE("mild composition: wall rows, pressure top value and first-order gap") {
  const auto c = small("mild");
  auto r = run_pipeline(c, Stage::compose);
  const auto& a = *r.approx;
  auto w = wall_defects(a, r.params);
  CHECK(w.u <= 1e-12);
  CHECK(w.v <= 1e-12);
  CHECK(w.g <= 1e-12);
  for (int i = 0; i <= a.p2p.nx(); ++i) {
    CHECK(a.u_app(i, 0) == doctest::Approx(r.params.u_b).epsilon(1e-12));
    CHECK(a.p2p(i, a.p2p.nz()) == 0.0);
  }
  // Triangle bound by the sqrt(eps)-weighted first-order fields.
  const double se = std::sqrt(r.params.eps);
  const double gap = sup_norm(a.u_app - a.u0e - r.l0->u0p);
  CHECK(gap <= se * (sup_norm(a.euler.u1e) + sup_norm(r.l1->u1p)) + 1e-12);
  CHECK(gap > 0.0);
}

TEST_CASE("residual norms are consistent with the weighted sum") {
  const auto c = small("mild");
  auto r = run_pipeline(c, Stage::compose);
  const auto& R = *r.residuals;
  CHECK(R.R1_L2 == doctest::Approx(l2_norm(R.R1)).epsilon(1e-14));
  CHECK(R.weighted_sum ==
        doctest::Approx(R.R1_L2 + R.R3_L2 + std::sqrt(r.params.eps) * (R.R2_L2 + R.R4_L2)).epsilon(1e-14));
}
