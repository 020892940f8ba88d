// First-order ideal-MHD corrector: lifting, scalar elliptic solve, field recovery.
#pragma once

#include <array>
#include <vector>

#include "mhdbl/grid.hpp"
#include "mhdbl/layer0.hpp"
#include "mhdbl/profiles.hpp"

namespace mhdbl {

struct EulerOptions {
  // Mollification width of the wall corrector; non-positive means the physical eps.
  double eps_c = -1.0;
  double tol = 1e-10;
  int max_iter = 4000;
  double degenerate_tol = 1e-10;
  double compat_tol = 1e-8;
  double ratio_max = 0.1;
};

struct LiftingFields {
  Field2D Bv, Bg, Fe, Eb;
  // b(x) = h_e v0p(x,0) - u_e g0p(x,0) on the x nodes.
  std::vector<double> b;
  // Wall traces v0p(x,0), g0p(x,0).
  std::vector<double> v0w, g0w;
  // Which corners used the difference form (v at 0, v at L, g at 0, g at L).
  std::array<bool, 4> difference_form{false, false, false, false};
};

struct CorrectorSolve {
  Field2D w1, w2;
  int iterations = 0;
  double rel_residual = 0.0;
};

struct EulerCorrector {
  Field2D w1, w2;
  Field2D v1e, g1e, u1e, h1e, p1e;
  std::vector<double> b;
  int iterations = 0;
  double rel_residual = 0.0;
};

// Fields that live on the layer grid after sampling at Y = sqrt(eps) y.
struct EulerOnLayer {
  Field2D v1e, g1e, u1e, h1e, p1e;
  Field2D rho;
  Field2D h1e_tilde, g1e_tilde;
  // d_Y h1e(x, 0) as seen by the layer-grid wall stencil.
  std::vector<double> dYh1e_wall;
};

LiftingFields build_lifting(const LayerZeroSolution& l0, const BoundaryData& data, const IdealShearFlow& flow,
                            const MeshPtr& euler, const PhysicalParams& params, const EulerOptions& opt = {});

// Applies -u0e Lap Bv + u0e'' Bv + h0e Lap Bg - h0e'' Bg with the grid stencils.
Field2D corrector_operator(const Field2D& v, const Field2D& g, const IdealShearFlow& flow);

// Solves -u0e (1 - r^2) Lap w + 2 h0e r' d_Y w + (u0e'' + h0e r'' - h0e'' r) w = rhs, w = 0 on the boundary,
// with r = h0e / u0e. Interior rows only are read from rhs.
CorrectorSolve solve_scalar_elliptic(const Field2D& rhs, const IdealShearFlow& flow, const EulerOptions& opt = {});

// The modified elliptic system reduced to w1 via the algebraic relation for w2.
CorrectorSolve solve_corrector(const LiftingFields& lift, const IdealShearFlow& flow, const EulerOptions& opt = {});

double positivity_certificate(const Field2D& w1, const IdealShearFlow& flow);

EulerCorrector recover_fields(const CorrectorSolve& w, const LiftingFields& lift, const IdealShearFlow& flow,
                              const BoundaryData& data);

EulerCorrector solve_euler1(const LayerZeroSolution& l0, const BoundaryData& data, const IdealShearFlow& flow,
                            const MeshPtr& euler, const PhysicalParams& params, const EulerOptions& opt = {});

// Samples the corrector on the layer grid and builds the wall corrector rho and the tilde fields.
EulerOnLayer sample_on_layer(const EulerCorrector& ec, const MeshPtr& layer, double eps, const CutoffSet& cutoffs);

}  // namespace mhdbl
