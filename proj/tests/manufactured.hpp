// Smooth divergence-free remainder state on a given layer grid, with its baseline and sources.
#pragma once

#include <cmath>

#include "mhdbl/audit.hpp"
#include "mhdbl/remainder.hpp"

namespace mhdbl::testing {

struct ManufacturedCase {
  PhysicalParams params;
  ApproxBaseline baseline;
  RemainderState state;
  RemainderSources sources;
};

// Stream functions x^2 y^2 e^{-y} and x^2 y^3 e^{-y}; p = x e^{-y}; sources from the assembled rows.
inline ManufacturedCase manufactured_case(int nx, double eps) {
  ManufacturedCase c;
  c.params.eps = eps;
  GridSpec g;
  g.nx = nx;
  g.ny = 2 * nx;
  g.y_max = 20.0;
  g.stretch = std::pow(1.02, 128.0 / g.ny);
  const MeshPtr m = layer_mesh(g);
  c.baseline.u_s = Field2D(m, [](double x, double y) { return 1.5 + 0.2 * std::exp(-y) * (1.0 + x); });
  c.baseline.v_s = Field2D(m, 0.0);
  c.baseline.h_s = Field2D(m, 0.1);
  c.baseline.g_s = Field2D(m, 0.0);
  c.state = zero_state(m);
  c.state.u = Field2D(m, [](double x, double y) { return x * x * (2 * y - y * y) * std::exp(-y); });
  c.state.v = Field2D(m, [](double x, double y) { return -2 * x * y * y * std::exp(-y); });
  c.state.h = Field2D(m, [](double x, double y) { return x * x * (3 * y * y - y * y * y) * std::exp(-y); });
  c.state.g = Field2D(m, [](double x, double y) { return -2 * x * y * y * y * std::exp(-y); });
  c.state.p = Field2D(m, [](double x, double y) { return x * std::exp(-y); });
  const LinearizedSystem sys(c.baseline, c.params);
  c.sources = sys.apply(c.state);
  return c;
}

}  // namespace mhdbl::testing
