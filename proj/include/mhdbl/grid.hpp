// Tensor grids, finite-difference operators, quadrature and weighted norms.
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mhdbl {

// Domain truncation and resolution. x is uniform, the vertical axes are geometric.
struct GridSpec {
  double L = 0.4;
  double y_max = 30.0;
  double Y_max = 20.0;
  int nx = 64;
  int ny = 128;
  int nY = 128;
  double stretch = 1.02;

  void validate() const;
};

std::vector<double> uniform_nodes(double length, int cells);
// Geometric spacing h_k = h0 * stretch^k; first node 0, last node exactly `length`.
std::vector<double> stretched_nodes(double length, int cells, double stretch);

// Which vertical coordinate a field is sampled on.
enum class VAxis { y, Y };

struct Mesh {
  std::vector<double> x;
  std::vector<double> z;
  VAxis axis = VAxis::y;

  int nx() const { return static_cast<int>(x.size()) - 1; }
  int nz() const { return static_cast<int>(z.size()) - 1; }
};

using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr layer_mesh(const GridSpec& g);
MeshPtr euler_mesh(const GridSpec& g);
MeshPtr make_mesh(std::vector<double> x, std::vector<double> z, VAxis axis);

// Scalar samples on a tensor mesh, stored row-major with x outermost.
class Field2D {
 public:
  Field2D() = default;
  explicit Field2D(MeshPtr mesh, double fill = 0.0);
  Field2D(MeshPtr mesh, const std::function<double(double, double)>& f);

  const MeshPtr& mesh() const { return mesh_; }
  int nx() const { return mesh_->nx(); }
  int nz() const { return mesh_->nz(); }
  std::size_t size() const { return v_.size(); }

  double& operator()(int i, int j) { return v_[idx(i, j)]; }
  double operator()(int i, int j) const { return v_[idx(i, j)]; }
  std::span<double> row(int i) { return {v_.data() + idx(i, 0), static_cast<std::size_t>(nz() + 1)}; }
  std::span<const double> row(int i) const {
    return {v_.data() + idx(i, 0), static_cast<std::size_t>(nz() + 1)};
  }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool all_finite() const;
  bool same_mesh(const Field2D& o) const;

  Field2D& operator+=(const Field2D& o);
  Field2D& operator-=(const Field2D& o);
  Field2D& operator*=(double s);
  Field2D& axpy(double a, const Field2D& o);

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(mesh_->nz() + 1) + static_cast<std::size_t>(j);
  }
  MeshPtr mesh_;
  std::vector<double> v_;
};

Field2D operator+(Field2D a, const Field2D& b);
Field2D operator-(Field2D a, const Field2D& b);
Field2D operator*(double s, Field2D a);
Field2D hadamard(const Field2D& a, const Field2D& b);

// Finite-difference weights of order `deriv` at `x0` from arbitrary nodes.
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int deriv);

// Row stencils of a 1-D difference operator: central 3-point inside,
// one-sided second-order rows at the ends.
struct Diff1D {
  std::vector<int> start;
  std::vector<std::array<double, 4>> w;
  std::vector<int> len;

  int size() const { return static_cast<int>(start.size()); }
  double apply(std::span<const double> f, int j) const;
};

Diff1D make_diff1d(std::span<const double> nodes, int order);

enum class Dir { x, y };
enum class Scheme { central, backward };

Field2D diff(const Field2D& f, Dir dir, int order, Scheme scheme = Scheme::central);
Field2D delta_eps(const Field2D& f, double eps);

enum class Orientation { from_top, from_wall };

// Composite trapezoid. from_top: integral from z_j to the last node (0 at the top);
// from_wall: integral from the first node up to z_j (0 at the wall).
std::vector<double> tail_integral(std::span<const double> f, std::span<const double> z,
                                  Orientation o = Orientation::from_top);
Field2D tail_integral(const Field2D& f, Orientation o = Orientation::from_top);
// Cumulative trapezoid along x, zero on the inflow row.
Field2D cumulative_x(const Field2D& f);

std::vector<double> trapezoid_weights(std::span<const double> nodes);
double integrate_column(std::span<const double> f, std::span<const double> z);
double integrate(const Field2D& f);
double inner(const Field2D& a, const Field2D& b);
double l2_norm(const Field2D& f);
double sup_norm(const Field2D& f);
double nabla_eps_norm(const Field2D& f, double eps);

struct NormSpec {
  int m = 0;
  double l = 0.0;
};

enum class Slice { fixed_x, full_domain };

// H^m_l norm; the weight exponent is l + k with k the number of vertical derivatives.
double weighted_norm(const Field2D& f, NormSpec spec, Slice slice, int ix = 0);

// C^2 cubic spline with end second derivatives taken from 4-point one-sided stencils.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> nodes, std::vector<double> values);
  double operator()(double s) const;
  double derivative(double s, int order) const;

 private:
  int locate(double s) const;
  std::vector<double> z_;
  std::vector<double> f_;
  std::vector<double> m_;
};

// Samples an Euler-coordinate field at Y = sqrt(eps) * y on the layer mesh.
Field2D euler_to_layer(const Field2D& fY, double eps, const MeshPtr& layer);
// Same for a function of Y only, evaluated exactly.
Field2D profile_to_layer(const std::function<double(double)>& f, double eps, const MeshPtr& layer);

void require_finite(const Field2D& f, const char* module, const char* op);

}  // namespace mhdbl
