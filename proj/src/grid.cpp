#include "mhdbl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mhdbl/errors.hpp"

namespace mhdbl {

namespace {

void grid_fail(const char* op, const std::string& what) { throw GridError("grid", op, what); }

}  // namespace

void GridSpec::validate() const {
  if (!(L > 0.0) || !(y_max > 0.0) || !(Y_max > 0.0)) grid_fail("GridSpec", "L, y_max, Y_max must be positive");
  if (nx < 8 || ny < 16 || nY < 16) grid_fail("GridSpec", "need nx >= 8, ny >= 16, nY >= 16");
  if (!(stretch >= 1.0)) grid_fail("GridSpec", "stretch must be >= 1");
}

std::vector<double> uniform_nodes(double length, int cells) {
  if (cells < 1 || !(length > 0.0)) grid_fail("uniform_nodes", "bad length or cell count");
  std::vector<double> z(static_cast<std::size_t>(cells) + 1);
  for (int k = 0; k <= cells; ++k) z[k] = length * static_cast<double>(k) / cells;
  z.back() = length;
  return z;
}

std::vector<double> stretched_nodes(double length, int cells, double stretch) {
  if (stretch == 1.0) return uniform_nodes(length, cells);
  if (cells < 1 || !(length > 0.0) || !(stretch > 1.0)) grid_fail("stretched_nodes", "bad arguments");
  const double h0 = length * (stretch - 1.0) / (std::pow(stretch, cells) - 1.0);
  std::vector<double> z(static_cast<std::size_t>(cells) + 1, 0.0);
  double h = h0;
  for (int k = 1; k <= cells; ++k) {
    z[k] = z[k - 1] + h;
    h *= stretch;
  }
  z.back() = length;
  for (int k = 1; k <= cells; ++k)
    if (!(z[k] > z[k - 1])) grid_fail("stretched_nodes", "nodes not strictly increasing");
  return z;
}

MeshPtr make_mesh(std::vector<double> x, std::vector<double> z, VAxis axis) {
  auto m = std::make_shared<Mesh>();
  m->x = std::move(x);
  m->z = std::move(z);
  m->axis = axis;
  return m;
}

MeshPtr layer_mesh(const GridSpec& g) {
  g.validate();
  return make_mesh(uniform_nodes(g.L, g.nx), stretched_nodes(g.y_max, g.ny, g.stretch), VAxis::y);
}

MeshPtr euler_mesh(const GridSpec& g) {
  g.validate();
  return make_mesh(uniform_nodes(g.L, g.nx), stretched_nodes(g.Y_max, g.nY, g.stretch), VAxis::Y);
}

// ---------------------------------------------------------------- Field2D

Field2D::Field2D(MeshPtr mesh, double fill)
    : mesh_(std::move(mesh)),
      v_(static_cast<std::size_t>(mesh_->nx() + 1) * static_cast<std::size_t>(mesh_->nz() + 1), fill) {}

Field2D::Field2D(MeshPtr mesh, const std::function<double(double, double)>& f) : Field2D(std::move(mesh)) {
  for (int i = 0; i <= nx(); ++i)
    for (int j = 0; j <= nz(); ++j) (*this)(i, j) = f(mesh_->x[i], mesh_->z[j]);
}

bool Field2D::all_finite() const {
  return std::all_of(v_.begin(), v_.end(), [](double a) { return std::isfinite(a); });
}

bool Field2D::same_mesh(const Field2D& o) const {
  if (mesh_ == o.mesh_) return true;
  return mesh_ && o.mesh_ && mesh_->x == o.mesh_->x && mesh_->z == o.mesh_->z && mesh_->axis == o.mesh_->axis;
}

Field2D& Field2D::operator+=(const Field2D& o) { return axpy(1.0, o); }
Field2D& Field2D::operator-=(const Field2D& o) { return axpy(-1.0, o); }

Field2D& Field2D::operator*=(double s) {
  for (double& a : v_) a *= s;
  return *this;
}

Field2D& Field2D::axpy(double a, const Field2D& o) {
  if (!same_mesh(o)) grid_fail("axpy", "mesh mismatch");
  for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += a * o.v_[k];
  return *this;
}

Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
Field2D operator*(double s, Field2D a) { return a *= s; }

Field2D hadamard(const Field2D& a, const Field2D& b) {
  if (!a.same_mesh(b)) grid_fail("hadamard", "mesh mismatch");
  Field2D r = a;
  for (std::size_t k = 0; k < r.size(); ++k) r.values()[k] *= b.values()[k];
  return r;
}

void require_finite(const Field2D& f, const char* module, const char* op) {
  if (!f.all_finite()) throw NonFinite(module, op, "field contains NaN or Inf");
}

// ---------------------------------------------------------------- stencils

std::vector<double> fd_weights(double x0, std::span<const double> nodes, int deriv) {
  const int n = static_cast<int>(nodes.size());
  const int M = deriv;
  std::vector<std::vector<double>> c(n, std::vector<double>(M + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, M);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][M];
  return w;
}

double Diff1D::apply(std::span<const double> f, int j) const {
  double s = 0.0;
  const int s0 = start[j];
  for (int k = 0; k < len[j]; ++k) s += w[j][k] * f[s0 + k];
  return s;
}

Diff1D make_diff1d(std::span<const double> nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  if (n < 3) grid_fail("diff", "fewer than 3 nodes in the differentiation direction");
  if (order != 1 && order != 2) grid_fail("diff", "order must be 1 or 2");
  Diff1D d;
  d.start.resize(n);
  d.w.resize(n);
  d.len.resize(n);
  auto set_row = [&](int j, int s0, int len) {
    auto wts = fd_weights(nodes[j], nodes.subspan(s0, len), order);
    d.start[j] = s0;
    d.len[j] = len;
    d.w[j] = {0.0, 0.0, 0.0, 0.0};
    for (int k = 0; k < len; ++k) d.w[j][k] = wts[k];
  };
  const int end_len = (order == 2 && n >= 4) ? 4 : 3;
  set_row(0, 0, end_len);
  for (int j = 1; j < n - 1; ++j) set_row(j, j - 1, 3);
  set_row(n - 1, n - end_len, end_len);
  return d;
}

Field2D diff(const Field2D& f, Dir dir, int order, Scheme scheme) {
  const Mesh& m = *f.mesh();
  Field2D r(f.mesh());
  if (scheme == Scheme::backward) {
    if (order != 1) grid_fail("diff", "backward scheme supports order 1 only");
    const auto& nodes = dir == Dir::x ? m.x : m.z;
    if (nodes.size() < 3) grid_fail("diff", "fewer than 3 nodes in the differentiation direction");
    if (dir == Dir::x) {
      // The first row has no upstream neighbour: second-order one-sided stencil.
      const auto w0 = fd_weights(m.x[0], std::span<const double>(m.x).subspan(0, 3), 1);
      for (int j = 0; j <= f.nz(); ++j) r(0, j) = w0[0] * f(0, j) + w0[1] * f(1, j) + w0[2] * f(2, j);
      for (int i = 1; i <= f.nx(); ++i) {
        const double h = m.x[i] - m.x[i - 1];
        for (int j = 0; j <= f.nz(); ++j) r(i, j) = (f(i, j) - f(i - 1, j)) / h;
      }
    } else {
      for (int i = 0; i <= f.nx(); ++i)
        for (int j = 0; j <= f.nz(); ++j) {
          const int a = j == 0 ? 0 : j - 1;
          const int b = j == 0 ? 1 : j;
          r(i, j) = (f(i, b) - f(i, a)) / (m.z[b] - m.z[a]);
        }
    }
    require_finite(r, "grid", "diff");
    return r;
  }
  if (dir == Dir::x) {
    const Diff1D d = make_diff1d(m.x, order);
    for (int i = 0; i <= f.nx(); ++i) {
      const int s0 = d.start[i];
      for (int j = 0; j <= f.nz(); ++j) {
        double s = 0.0;
        for (int k = 0; k < d.len[i]; ++k) s += d.w[i][k] * f(s0 + k, j);
        r(i, j) = s;
      }
    }
  } else {
    const Diff1D d = make_diff1d(m.z, order);
    for (int i = 0; i <= f.nx(); ++i) {
      auto in = f.row(i);
      auto out = r.row(i);
      for (int j = 0; j <= f.nz(); ++j) out[j] = d.apply(in, j);
    }
  }
  require_finite(r, "grid", "diff");
  return r;
}

Field2D delta_eps(const Field2D& f, double eps) {
  if (!(eps >= 0.0)) grid_fail("delta_eps", "eps must be non-negative");
  Field2D r = diff(f, Dir::y, 2);
  if (eps != 0.0) r.axpy(eps, diff(f, Dir::x, 2));
  return r;
}

// ---------------------------------------------------------------- quadrature

std::vector<double> tail_integral(std::span<const double> f, std::span<const double> z, Orientation o) {
  const int n = static_cast<int>(z.size());
  std::vector<double> r(n, 0.0);
  if (o == Orientation::from_top) {
    for (int j = n - 2; j >= 0; --j) r[j] = r[j + 1] + 0.5 * (z[j + 1] - z[j]) * (f[j] + f[j + 1]);
  } else {
    for (int j = 1; j < n; ++j) r[j] = r[j - 1] + 0.5 * (z[j] - z[j - 1]) * (f[j] + f[j - 1]);
  }
  return r;
}

Field2D tail_integral(const Field2D& f, Orientation o) {
  Field2D r(f.mesh());
  for (int i = 0; i <= f.nx(); ++i) {
    auto col = tail_integral(f.row(i), f.mesh()->z, o);
    std::copy(col.begin(), col.end(), r.row(i).begin());
  }
  return r;
}

Field2D cumulative_x(const Field2D& f) {
  Field2D r(f.mesh());
  const auto& x = f.mesh()->x;
  for (int i = 1; i <= f.nx(); ++i)
    for (int j = 0; j <= f.nz(); ++j) r(i, j) = r(i - 1, j) + 0.5 * (x[i] - x[i - 1]) * (f(i, j) + f(i - 1, j));
  return r;
}

std::vector<double> trapezoid_weights(std::span<const double> nodes) {
  const int n = static_cast<int>(nodes.size());
  std::vector<double> w(n, 0.0);
  for (int k = 0; k + 1 < n; ++k) {
    const double h = nodes[k + 1] - nodes[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

double integrate_column(std::span<const double> f, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < z.size(); ++k) s += 0.5 * (z[k + 1] - z[k]) * (f[k] + f[k + 1]);
  return s;
}

double integrate(const Field2D& f) {
  const auto wx = trapezoid_weights(f.mesh()->x);
  const auto wz = trapezoid_weights(f.mesh()->z);
  double s = 0.0;
  for (int i = 0; i <= f.nx(); ++i) {
    double c = 0.0;
    for (int j = 0; j <= f.nz(); ++j) c += wz[j] * f(i, j);
    s += wx[i] * c;
  }
  return s;
}

double inner(const Field2D& a, const Field2D& b) { return integrate(hadamard(a, b)); }

double l2_norm(const Field2D& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double sup_norm(const Field2D& f) {
  double s = 0.0;
  for (double a : f.values()) s = std::max(s, std::abs(a));
  return s;
}

double nabla_eps_norm(const Field2D& f, double eps) {
  if (!(eps >= 0.0)) grid_fail("nabla_eps_norm", "eps must be non-negative");
  const Field2D fy = diff(f, Dir::y, 1);
  double s = inner(fy, fy);
  if (eps > 0.0) {
    const Field2D fx = diff(f, Dir::x, 1);
    s += eps * inner(fx, fx);
  }
  return std::sqrt(s);
}

double weighted_norm(const Field2D& f, NormSpec spec, Slice slice, int ix) {
  if (spec.m < 0 || spec.m > 5) grid_fail("weighted_norm", "derivative order must be in [0, 5]");
  if (!(spec.l >= 0.0)) grid_fail("weighted_norm", "weight exponent must be non-negative");
  if (slice == Slice::fixed_x && (ix < 0 || ix > f.nx())) grid_fail("weighted_norm", "x index out of range");
  const auto& z = f.mesh()->z;
  const auto wx = trapezoid_weights(f.mesh()->x);
  const auto wz = trapezoid_weights(z);
  double total = 0.0;
  Field2D dxb = f;
  for (int beta = 0; beta <= spec.m; ++beta) {
    if (beta > 0) dxb = diff(dxb, Dir::x, 1);
    Field2D d = dxb;
    for (int k = 0; beta + k <= spec.m; ++k) {
      if (k > 0) d = diff(d, Dir::y, 1);
      const double p = 2.0 * (spec.l + k);
      auto column_sq = [&](int i) {
        double c = 0.0;
        for (int j = 0; j <= f.nz(); ++j) c += wz[j] * std::pow(1.0 + z[j] * z[j], 0.5 * p) * d(i, j) * d(i, j);
        return c;
      };
      if (slice == Slice::fixed_x) {
        total += column_sq(ix);
      } else {
        for (int i = 0; i <= f.nx(); ++i) total += wx[i] * column_sq(i);
      }
    }
  }
  return std::sqrt(total);
}

// ---------------------------------------------------------------- spline

CubicSpline::CubicSpline(std::vector<double> nodes, std::vector<double> values)
    : z_(std::move(nodes)), f_(std::move(values)) {
  const int n = static_cast<int>(z_.size());
  if (n < 4 || f_.size() != z_.size()) grid_fail("CubicSpline", "need at least 4 matching samples");
  std::span<const double> zs(z_);
  auto end_second = [&](int s0, int at) {
    auto w = fd_weights(z_[at], zs.subspan(s0, 4), 2);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += w[k] * f_[s0 + k];
    return s;
  };
  m_.assign(n, 0.0);
  m_[0] = end_second(0, 0);
  m_[n - 1] = end_second(n - 4, n - 1);
  // Thomas solve for interior second derivatives.
  std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
  d[0] = m_[0];
  d[n - 1] = m_[n - 1];
  for (int j = 1; j < n - 1; ++j) {
    const double h0 = z_[j] - z_[j - 1];
    const double h1 = z_[j + 1] - z_[j];
    a[j] = h0 / 6.0;
    b[j] = (h0 + h1) / 3.0;
    c[j] = h1 / 6.0;
    d[j] = (f_[j + 1] - f_[j]) / h1 - (f_[j] - f_[j - 1]) / h0;
  }
  for (int j = 1; j < n; ++j) {
    const double w = a[j] / b[j - 1];
    b[j] -= w * c[j - 1];
    d[j] -= w * d[j - 1];
  }
  m_[n - 1] = d[n - 1] / b[n - 1];
  for (int j = n - 2; j >= 0; --j) m_[j] = (d[j] - c[j] * m_[j + 1]) / b[j];
}

int CubicSpline::locate(double s) const {
  auto it = std::upper_bound(z_.begin(), z_.end(), s);
  int k = static_cast<int>(it - z_.begin()) - 1;
  return std::clamp(k, 0, static_cast<int>(z_.size()) - 2);
}

double CubicSpline::operator()(double s) const { return derivative(s, 0); }

double CubicSpline::derivative(double s, int order) const {
  const int k = locate(s);
  const double h = z_[k + 1] - z_[k];
  const double A = (z_[k + 1] - s) / h;
  const double B = (s - z_[k]) / h;
  switch (order) {
    case 0:
      return A * f_[k] + B * f_[k + 1] + ((A * A * A - A) * m_[k] + (B * B * B - B) * m_[k + 1]) * h * h / 6.0;
    case 1:
      return (f_[k + 1] - f_[k]) / h - (3.0 * A * A - 1.0) * h * m_[k] / 6.0 + (3.0 * B * B - 1.0) * h * m_[k + 1] / 6.0;
    case 2:
      return A * m_[k] + B * m_[k + 1];
    default:
      grid_fail("CubicSpline", "derivative order must be 0, 1 or 2");
  }
  return 0.0;
}

Field2D euler_to_layer(const Field2D& fY, double eps, const MeshPtr& layer) {
  if (fY.mesh()->axis != VAxis::Y) grid_fail("euler_to_layer", "source field is not on the Y axis");
  if (fY.mesh()->x != layer->x) grid_fail("euler_to_layer", "x nodes differ between meshes");
  const double se = std::sqrt(eps);
  const double Ytop = se * layer->z.back();
  if (Ytop > fY.mesh()->z.back() * (1.0 + 1e-12))
    grid_fail("euler_to_layer", "sqrt(eps) * y_max exceeds Y_max");
  Field2D r(layer);
  for (int i = 0; i <= fY.nx(); ++i) {
    auto row = fY.row(i);
    CubicSpline s(fY.mesh()->z, std::vector<double>(row.begin(), row.end()));
    for (int j = 0; j <= r.nz(); ++j) r(i, j) = s(se * layer->z[j]);
  }
  return r;
}

Field2D profile_to_layer(const std::function<double(double)>& f, double eps, const MeshPtr& layer) {
  const double se = std::sqrt(eps);
  Field2D r(layer);
  for (int i = 0; i <= r.nx(); ++i)
    for (int j = 0; j <= r.nz(); ++j) r(i, j) = f(se * layer->z[j]);
  return r;
}

}  // namespace mhdbl
