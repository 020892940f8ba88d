// First-order linear boundary layer with wall-frozen Euler coefficients, and its cut-off.
#pragma once

#include <vector>

#include "mhdbl/euler1.hpp"
#include "mhdbl/grid.hpp"
#include "mhdbl/layer0.hpp"
#include "mhdbl/profiles.hpp"

namespace mhdbl {

// Euler-side coefficients frozen at the wall Y = 0, one value per x node.
struct WallTraces {
  std::vector<double> u1e, h1e, v1e, g1e;
  std::vector<double> dx_u1e, dx_h1e, dY_v1e, dY_g1e;
  double dY_u0e = 0.0, dY_h0e = 0.0;
};

// Right-hand sides and boundary forcing of the first-order layer system.
struct Layer1Sources {
  Field2D F1, F2;
  // Dirichlet wall value of up and Neumann wall value of d_y hp.
  std::vector<double> u_wall;
  double dyh_wall = 0.0;
  WallTraces wall;
};

struct Layer1Options {
  // Non-degeneracy floor on h_e + h0p is vartheta0 / 2.
  double vartheta0 = 0.1;
  CutoffSet cutoffs;
};

struct LayerOneSolution {
  Field2D up, vp, hp, gp;
  Field2D u1p, v1p, h1p, g1p;
  Field2D psi_tilde;
  Field2D F1p_tilde, F2p_tilde;
};

WallTraces wall_traces(const EulerCorrector& ec, const IdealShearFlow& flow);

Layer1Sources assemble_sources(const LayerZeroSolution& l0, const EulerCorrector& ec, const IdealShearFlow& flow,
                               const PhysicalParams& params);

// Backward Euler in x; one coupled sparse solve per step. Inflow rows come from data.ubar1, data.hbar1.
LayerOneSolution march_layer1(const Layer1Sources& src, const LayerZeroSolution& l0, const BoundaryData& data,
                              const PhysicalParams& params, const Layer1Options& opt = {});

// Fills u1p, v1p, h1p, g1p from the raw fields with chi(sqrt(eps) y).
LayerOneSolution apply_cutoff(LayerOneSolution raw, const PhysicalParams& params, const CutoffSet& cutoffs = {});

// Max |LHS - RHS| of the integrated magnetic relation for the raw fields.
double layer1_stream_residual(const LayerOneSolution& sol, const LayerZeroSolution& l0, const Layer1Sources& src,
                              const PhysicalParams& params);

// Max |d_x psi_tilde + gp| with the backward x difference.
double psi_defect(const LayerOneSolution& sol);

// Max divergence defect of (u1p, v1p) and (h1p, g1p) with the marching differences.
double layer1_divergence_defect(const LayerOneSolution& sol);

// Errors booked by freezing the Euler coefficients at the wall, including the sqrt(eps) factor.
struct FreezingErrors {
  Field2D Er1, Er2;
};
FreezingErrors freezing_errors(const LayerOneSolution& sol, const LayerZeroSolution& l0, const EulerCorrector& ec,
                               const IdealShearFlow& flow, const PhysicalParams& params);

}  // namespace mhdbl
