// Leading-order nonlinear boundary layer: implicit march in x.
#pragma once

#include <vector>

#include "mhdbl/grid.hpp"
#include "mhdbl/profiles.hpp"

namespace mhdbl {

// Shifted unknowns with homogeneous wall and far-field conditions.
// v, g are the total normal components (layer plus Euler trace), zero at the wall.
struct HomogenizedState {
  Field2D u, v, h, g;
  // Sources nu (u_e - u_b) phi'' and kappa h_e phi''.
  Field2D r1, r2;
};

struct Layer0Options {
  double tol = 1e-10;
  int max_iter = 50;
  // Positivity floor is vartheta0 / 2; sigma0 and l set the monitored derivative bounds.
  double vartheta0 = 0.1;
  double sigma0 = 0.9;
  double l = 0.0;
  CutoffSet cutoffs;
};

// Per-step record of the quantities bounded along the solution.
struct ConditionRecord {
  double x = 0.0;
  double min_u_total = 0.0;  // min (u_e + u0p)
  double min_h_total = 0.0;  // min (h_e + h0p)
  double sup_dy = 0.0;       // sup <y>^{l+1} |d_y (u0p, h0p)|
  double sup_dyy = 0.0;      // sup <y>^{l+1} |d_y^2 (u0p, h0p)|
  double max_ratio = 0.0;    // sup |h0e(sqrt(eps) y) + h0p| / |u0e(sqrt(eps) y) + u0p|
  int iterations = 0;
  double last_change = 0.0;
  bool within_bounds = true;
};

struct LayerZeroSolution {
  Field2D u0p, v0p, h0p, g0p;
  // Minus the wall-to-top integral of d_x (u0p, h0p); equal to -(v0p, g0p)(x, 0).
  std::vector<double> trace_v1e, trace_g1e;
  std::vector<ConditionRecord> monitor;
  double u_e = 0.0, h_e = 0.0, u_b = 0.0;
};

HomogenizedState homogenize_initial(const MeshPtr& mesh, const IdealShearFlow& flow, const BoundaryData& data,
                                    const PhysicalParams& params, const CutoffSet& cutoffs);
HomogenizedState homogenize(const LayerZeroSolution& sol, const PhysicalParams& params, const CutoffSet& cutoffs);
LayerZeroSolution dehomogenize(const HomogenizedState& state, double u_e, double h_e, double u_b,
                               const CutoffSet& cutoffs);

// Marches from the x = 0 row of `state0`; backward Euler in x with Newton sub-iterations.
LayerZeroSolution march_layer0(const HomogenizedState& state0, const IdealShearFlow& flow,
                               const PhysicalParams& params, const Layer0Options& opt = {});

// Convenience: homogenize the data and march on the given mesh.
LayerZeroSolution solve_layer0(const MeshPtr& mesh, const IdealShearFlow& flow, const BoundaryData& data,
                               const PhysicalParams& params, const Layer0Options& opt = {});

// Max |v (h_e + h0p) - g (u_e + u0p) - kappa d_y h0p| with (v, g) the total normal components.
double stream_identity_residual(const LayerZeroSolution& sol, const PhysicalParams& params,
                                double g_shift = 0.0);

// b(x) = h_e v0p(x,0) - u_e g0p(x,0).
std::vector<double> wall_flux_b(const LayerZeroSolution& sol);
CornerTraces corner_traces(const LayerZeroSolution& sol);

// Max |d_x u0p + d_y v0p| and |d_x h0p + d_y g0p| with the marching differences.
double layer0_divergence_defect(const LayerZeroSolution& sol);

}  // namespace mhdbl
