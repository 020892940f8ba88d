#include "mhdbl/composer.hpp"

#include <algorithm>
#include <cmath>

#include "mhdbl/errors.hpp"

namespace mhdbl {

Field2D pressure_p2p(const LayerZeroSolution& l0, const EulerOnLayer& euler, const IdealShearFlow& flow,
                     const PhysicalParams& params) {
  const MeshPtr& mesh = l0.u0p.mesh();
  if (!euler.v1e.same_mesh(l0.u0p)) throw GridError("composer", "pressure_p2p", "sampled Euler fields on another mesh");
  const double se = std::sqrt(params.eps);
  const Field2D vx = diff(l0.v0p, Dir::x, 1), vy = diff(l0.v0p, Dir::y, 1), vyy = diff(l0.v0p, Dir::y, 2);
  const Field2D gx = diff(l0.g0p, Dir::x, 1), gy = diff(l0.g0p, Dir::y, 1);
  const Field2D v1x = diff(euler.v1e, Dir::x, 1), g1x = diff(euler.g1e, Dir::x, 1);
  Field2D f(mesh);
  const auto& y = mesh->z;
  for (int i = 0; i <= mesh->nx(); ++i)
    for (int j = 0; j <= mesh->nz(); ++j) {
      const double Y = se * y[j];
      const double u = l0.u0p(i, j), h = l0.h0p(i, j);
      f(i, j) = (flow.u0e(Y) + u) * vx(i, j) + u * v1x(i, j) + (l0.v0p(i, j) + euler.v1e(i, j)) * vy(i, j) -
                (flow.h0e(Y) + h) * gx(i, j) - h * g1x(i, j) - (l0.g0p(i, j) + euler.g1e(i, j)) * gy(i, j) -
                params.nu * vyy(i, j);
    }
  return tail_integral(f, Orientation::from_top);
}

ApproxSolution compose(const LayerZeroSolution& l0, const EulerCorrector& ec, const LayerOneSolution& l1,
                       const IdealShearFlow& flow, const PhysicalParams& params, const ComposeOptions& opt) {
  const MeshPtr& mesh = l0.u0p.mesh();
  if (!l1.u1p.same_mesh(l0.u0p)) throw GridError("composer", "compose", "layer0 and layer1 meshes differ");
  const double eps = params.eps, se = std::sqrt(eps);
  ApproxSolution a;
  a.eps = eps;
  a.euler = sample_on_layer(ec, mesh, eps, opt.cutoffs);
  a.u0e = profile_to_layer([&](double Y) { return flow.u0e(Y); }, eps, mesh);
  a.h0e = profile_to_layer([&](double Y) { return flow.h0e(Y); }, eps, mesh);
  a.p2p = pressure_p2p(l0, a.euler, flow, params);
  const double w1 = opt.include_layer1 ? se : 0.0;
  a.u_app = a.u0e + l0.u0p + se * a.euler.u1e;
  a.u_app.axpy(w1, l1.u1p);
  a.v_app = l0.v0p + a.euler.v1e;
  a.v_app.axpy(w1, l1.v1p);
  a.h_app = a.h0e + l0.h0p + se * a.euler.h1e_tilde;
  a.h_app.axpy(w1, l1.h1p);
  a.g_app = l0.g0p + a.euler.g1e_tilde;
  a.g_app.axpy(w1, l1.g1p);
  a.p_app = se * a.euler.p1e + eps * a.p2p;
  for (double& v : a.p_app.values()) v += se * a.p1p;
  for (const Field2D* f : {&a.u_app, &a.v_app, &a.h_app, &a.g_app, &a.p_app}) require_finite(*f, "composer", "compose");
  return a;
}

ResidualBundle apply_scaled_operators(const Field2D& u, const Field2D& v, const Field2D& h, const Field2D& g,
                                      const Field2D& p, const PhysicalParams& params) {
  const double eps = params.eps, nu = params.nu, ka = params.kappa;
  const Field2D ux = diff(u, Dir::x, 1), uy = diff(u, Dir::y, 1);
  const Field2D vx = diff(v, Dir::x, 1), vy = diff(v, Dir::y, 1);
  const Field2D hx = diff(h, Dir::x, 1), hy = diff(h, Dir::y, 1);
  const Field2D gx = diff(g, Dir::x, 1), gy = diff(g, Dir::y, 1);
  const Field2D px = diff(p, Dir::x, 1), py = diff(p, Dir::y, 1);
  const Field2D lu = delta_eps(u, eps), lv = delta_eps(v, eps), lh = delta_eps(h, eps), lg = delta_eps(g, eps);
  const MeshPtr& m = u.mesh();
  ResidualBundle r{Field2D(m), Field2D(m), Field2D(m), Field2D(m)};
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double U = u.values()[k], V = v.values()[k], H = h.values()[k], G = g.values()[k];
    auto at = [k](const Field2D& f) { return f.values()[k]; };
    r.R1.values()[k] = U * at(ux) + V * at(uy) + at(px) - H * at(hx) - G * at(hy) - nu * at(lu);
    r.R2.values()[k] = U * at(vx) + V * at(vy) + at(py) / eps - H * at(gx) - G * at(gy) - nu * at(lv);
    r.R3.values()[k] = U * at(hx) + V * at(hy) - H * at(ux) - G * at(uy) - ka * at(lh);
    r.R4.values()[k] = U * at(gx) + V * at(gy) - H * at(vx) - G * at(vy) - ka * at(lg);
  }
  r.R1_L2 = l2_norm(r.R1);
  r.R2_L2 = l2_norm(r.R2);
  r.R3_L2 = l2_norm(r.R3);
  r.R4_L2 = l2_norm(r.R4);
  r.weighted_sum = r.R1_L2 + r.R3_L2 + std::sqrt(eps) * (r.R2_L2 + r.R4_L2);
  return r;
}

ResidualBundle residuals(const ApproxSolution& a, const PhysicalParams& params) {
  return apply_scaled_operators(a.u_app, a.v_app, a.h_app, a.g_app, a.p_app, params);
}

WallDefects wall_defects(const ApproxSolution& a, const PhysicalParams& params) {
  const Diff1D d1 = make_diff1d(a.h_app.mesh()->z, 1);
  WallDefects w;
  for (int i = 0; i <= a.u_app.nx(); ++i) {
    w.u = std::max(w.u, std::abs(a.u_app(i, 0) - params.u_b));
    w.v = std::max(w.v, std::abs(a.v_app(i, 0)));
    w.g = std::max(w.g, std::abs(a.g_app(i, 0)));
    w.dyh = std::max(w.dyh, std::abs(d1.apply(a.h_app.row(i), 0)));
  }
  return w;
}

}  // namespace mhdbl
