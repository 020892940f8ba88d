// Linearized remainder system, Picard iteration, the S norm and reconstruction of the full solution.
#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "mhdbl/composer.hpp"
#include "mhdbl/grid.hpp"
#include "mhdbl/layer0.hpp"
#include "mhdbl/layer1.hpp"
#include "mhdbl/profiles.hpp"

namespace mhdbl {

// Linearization state: leading Euler and layer profiles plus the first-order Euler fields, without layer1.
struct ApproxBaseline {
  Field2D u_s, v_s, h_s, g_s;
  // sup |h_s / u_s| and sup |y d_y (u_s, h_s)|.
  double ratio = 0.0;
  double y_dy = 0.0;
};

ApproxBaseline build_baseline(const LayerZeroSolution& l0, const ApproxSolution& approx, const PhysicalParams& params,
                              double ratio_max = 0.12);

// Right-hand sides of the four momentum/induction rows.
struct RemainderSources {
  Field2D f1, f2, f3, f4;
};

struct PicardStep {
  int iteration = 0;
  double normS = 0.0;
  double delta = 0.0;
};

struct LinearSolveInfo {
  double rel_residual = 0.0;
  int krylov_iterations = 0;
  double q_norm = 0.0;
  double hg_norm = 0.0;
  // Max discrete divergence of (u, v) and (h, g) over the constraint rows.
  double div_u = 0.0;
  double div_h = 0.0;
};

struct RemainderState {
  Field2D u, v, h, g, p;
  // Multiplier of the magnetic divergence constraint.
  Field2D q;
  double normS = 0.0;
  std::vector<PicardStep> history;
  LinearSolveInfo last_solve;
};

RemainderState zero_state(const MeshPtr& mesh);

struct LinearOptions {
  double rel_tol = 1e-9;
  int max_krylov = 200;
  // Accepted |q| relative to |(h, g)|; checked only when strict_q is set.
  double q_tol = 1e-6;
  bool strict_q = false;
};

// Assembled linear operator for one baseline; factorized on the first solve and reused across Picard iterations.
class LinearizedSystem {
 public:
  LinearizedSystem(const ApproxBaseline& baseline, const PhysicalParams& params, const LinearOptions& opt = {});
  ~LinearizedSystem();
  LinearizedSystem(const LinearizedSystem&) = delete;
  LinearizedSystem& operator=(const LinearizedSystem&) = delete;

  RemainderState solve(const RemainderSources& f) const;
  // Applies the assembled rows to a state; PDE rows land in f1..f4, constraint and boundary rows are dropped.
  RemainderSources apply(const RemainderState& s) const;
  // Max violation of the wall, inflow, outflow and top rows.
  double boundary_defect(const RemainderState& s) const;
  // Assembled matrix, right-hand side for given sources and the state of a solution vector.
  const Eigen::SparseMatrix<double>& matrix() const;
  Eigen::VectorXd load_vector(const RemainderSources& f) const;
  RemainderState state_from(const Eigen::VectorXd& x) const;
  int unknowns() const;
  const MeshPtr& mesh() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RemainderState solve_linearized(const ApproxBaseline& baseline, const RemainderSources& f, const PhysicalParams& params,
                                const LinearOptions& opt = {});

// -eps^{-1/2-gamma} R_app minus sqrt(eps) times the layer1 coupling and the eps^gamma quadratic terms.
RemainderSources nonlinear_sources(const RemainderState& state, const ResidualBundle& approx_errors,
                                   const LayerOneSolution& l1, const PhysicalParams& params);

double norm_S(const RemainderState& state, const PhysicalParams& params);

struct PicardOptions {
  int max_iter = 30;
  double rel_tol = 1e-8;
  // Consecutive delta ratios >= 1 that abort the iteration.
  int max_growth = 3;
  LinearOptions linear;
};

RemainderState picard_iterate(const ApproxBaseline& baseline, const ResidualBundle& approx_errors,
                              const LayerOneSolution& l1, const PhysicalParams& params, const PicardOptions& opt = {});

// Successive delta ratios of a Picard history.
std::vector<double> delta_ratios(const RemainderState& state);
// Last ratio measured while delta is above the round-off floor.
double asymptotic_ratio(const RemainderState& state, double floor = 1e-11);

struct MainTheoremReport {
  double eps = 0.0;
  // Sup-norm gaps in the original variables.
  double gap_U = 0.0, gap_V = 0.0, gap_H = 0.0, gap_G = 0.0;
  double normS = 0.0;
  int iterations = 0;
  double q_norm = 0.0;
  double asymptotic_ratio = 0.0;
};

MainTheoremReport reconstruct_and_verify(const ApproxSolution& approx, const LayerZeroSolution& l0,
                                         const RemainderState& state, const PhysicalParams& params);

}  // namespace mhdbl
