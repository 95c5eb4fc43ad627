#pragma once

#include <functional>
#include <vector>

#include "twnls/grid.hpp"

namespace twnls {

/// Nodes within this many layers of a box face use one-sided stencils.
constexpr int kBoundaryLayers = 2;
/// Default per-axis node cap for the direct twisted convolution.
constexpr int kConvolutionCap = 96;

/// d/d(axis a) with 4th-order finite differences; axes 0..n-1 are x, n..2n-1 are y.
GridFunction partial(const GridFunction& f, int axis);
GridFunction second_partial(const GridFunction& f, int axis);
/// True if the node is at least kBoundaryLayers away from every face.
bool is_interior(const Grid& grid, std::size_t node, int layers = kBoundaryLayers);

/// L_j = d/dx_j + i y_j / 2, j in [0, n).
GridFunction apply_L(const GridFunction& f, int j);
/// M_j = d/dy_j - i x_j / 2, j in [0, n).
GridFunction apply_M(const GridFunction& f, int j);
/// -Laplacian + |z|^2/4 - i sum_j (x_j d/dy_j - y_j d/dx_j).
GridFunction apply_twisted_laplacian(const GridFunction& f);

/// Uniform time nodes t0 + m dt for m_lo <= m <= m_hi.
struct TimeLattice {
  double t0 = 0.0;
  double dt = 1.0;
  int m_lo = 0;
  int m_hi = 0;

  /// [t0 - T, t0 + T] with dt = T / Mt.
  static TimeLattice symmetric(double t0, double T, int Mt);
  /// Nodes t0, t0 + dt, ..., t0 + T with dt = T / Mt; T < 0 runs backward.
  static TimeLattice one_sided(double t0, double T, int Mt);

  int size() const { return m_hi - m_lo + 1; }
  int origin() const { return -m_lo; }
  double time(int i) const { return t0 + (m_lo + i) * dt; }
  double start() const { return time(0); }
  double end() const { return time(size() - 1); }
  /// Time-quadrature weight of node i: node-centred cells clipped to the interval.
  double weight(int i) const;
  double length() const;
};

class SpaceTimeFunction {
 public:
  SpaceTimeFunction(GridPtr grid, TimeLattice lattice);
  SpaceTimeFunction(TimeLattice lattice, std::vector<GridFunction> slices);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const TimeLattice& lattice() const { return lattice_; }
  int size() const { return static_cast<int>(slices_.size()); }
  GridFunction& operator[](int i) { return slices_[i]; }
  const GridFunction& operator[](int i) const { return slices_[i]; }

 private:
  GridPtr grid_;
  TimeLattice lattice_;
  std::vector<GridFunction> slices_;
};

struct SobolevReport {
  double base = 0.0;
  std::vector<double> lj;
  std::vector<double> mj;
  double norm = 0.0;
};

/// max{ ||f||_p, ||L_j f||_p, ||M_j f||_p }.
SobolevReport sobolev_norm(const GridFunction& f, double p);

/// (sum_i w_i ||u(t_i)||_p^q)^{1/q}, or the max over slices for q = infinity.
double mixed_norm(const SpaceTimeFunction& u, double p, double q);
/// Mixed norm from precomputed slice norms.
double mixed_norm_from_slices(const std::vector<double>& slice_norms, const TimeLattice& lattice, double q);

struct GradientCheck {
  double max_violation = 0.0;
  std::size_t nodes_checked = 0;
  std::ptrdiff_t worst_node = -1;
};

/// Checks |d/dx_j |u|| <= |L_j u| + eps and |d/dy_j |u|| <= |M_j u| + eps at interior nodes where
/// |u| > 1e-8 max|u|; eps is the local gap between 4th- and 2nd-order differences of |u|.
/// With magnetic = false the plain partials replace L_j and M_j.
GradientCheck gradient_abs_inequality(const GridFunction& u, bool magnetic = true);

/// (f x g)(z) = sum_v f(v) g(z - v) e^{-(i/2) Im(z . conj v)} h^2 over the nodes v of f,
/// which equals the twisted convolution integral sum_w f(z - w) g(w) e^{(i/2) Im(z . conj w)}.
/// g is interpolated bilinearly and taken as 0 outside the box. n = 1 only.
GridFunction twisted_convolve(const GridFunction& f, const GridFunction& g, int cap = kConvolutionCap);
/// Same with an analytic g(x, y), evaluated exactly.
GridFunction twisted_convolve(const GridFunction& f, const std::function<cplx(double, double)>& g,
                              int cap = kConvolutionCap);

}  // namespace twnls
