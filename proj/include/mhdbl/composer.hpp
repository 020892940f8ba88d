// Composite approximate solution, second-order layer pressure, and residuals of the scaled system.
#pragma once

#include <string>
#include <vector>

#include "mhdbl/euler1.hpp"
#include "mhdbl/grid.hpp"
#include "mhdbl/layer0.hpp"
#include "mhdbl/layer1.hpp"
#include "mhdbl/profiles.hpp"

namespace mhdbl {

struct ApproxSolution {
  Field2D u_app, v_app, h_app, g_app, p_app;
  // First-order layer pressure is a constant, fixed to zero.
  double p1p = 0.0;
  Field2D p2p;
  // Euler-side fields sampled at Y = sqrt(eps) y.
  EulerOnLayer euler;
  // Leading-order Euler profiles sampled on the layer mesh.
  Field2D u0e, h0e;
  double eps = 0.0;
};

struct ComposeOptions {
  bool include_layer1 = true;
  CutoffSet cutoffs;
};

// Integrand of the second-order layer pressure, integrated from the top.
Field2D pressure_p2p(const LayerZeroSolution& l0, const EulerOnLayer& euler, const IdealShearFlow& flow,
                     const PhysicalParams& params);

ApproxSolution compose(const LayerZeroSolution& l0, const EulerCorrector& ec, const LayerOneSolution& l1,
                       const IdealShearFlow& flow, const PhysicalParams& params, const ComposeOptions& opt = {});

struct ResidualBundle {
  Field2D R1, R2, R3, R4;
  double R1_L2 = 0.0, R2_L2 = 0.0, R3_L2 = 0.0, R4_L2 = 0.0;
  // ||R1|| + ||R3|| + sqrt(eps) (||R2|| + ||R4||).
  double weighted_sum = 0.0;
};

// Applies the four momentum/induction operators of the scaled viscous system with central stencils.
ResidualBundle apply_scaled_operators(const Field2D& u, const Field2D& v, const Field2D& h, const Field2D& g,
                                      const Field2D& p, const PhysicalParams& params);

ResidualBundle residuals(const ApproxSolution& approx, const PhysicalParams& params);

// Max wall defects of the composite fields: |u - u_b|, |v|, |g|, |d_y h|.
struct WallDefects {
  double u = 0.0, v = 0.0, g = 0.0, dyh = 0.0;
};
WallDefects wall_defects(const ApproxSolution& approx, const PhysicalParams& params);

}  // namespace mhdbl
