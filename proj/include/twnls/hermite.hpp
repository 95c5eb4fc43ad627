#pragma once

#include <functional>
#include <vector>

#include "twnls/grid.hpp"

namespace twnls {

/// Largest Hermite/Laguerre degree accepted by the evaluators.
constexpr int kMaxDegree = 128;

/// Orthonormal Hermite function h_k(x) by the normalized three-term recurrence.
/// Values that underflow double precision are returned as 0.
double hermite_eval(int k, double x);
/// h_0(x)..h_kmax(x) into out (size kmax + 1).
void hermite_all(int kmax, double x, double* out);

/// Generalized Laguerre polynomial L_k^a(r).
double laguerre_eval(int k, double a, double r);

/// h_k at a fixed set of abscissae, k = 0..kmax.
class HermiteTable {
 public:
  HermiteTable(int kmax, std::vector<double> abscissae);
  /// Table on the axis abscissae of a grid.
  HermiteTable(int kmax, const Grid& grid);

  int kmax() const { return kmax_; }
  const std::vector<double>& abscissae() const { return x_; }
  double operator()(int k, std::size_t i) const { return v_[static_cast<std::size_t>(k) * x_.size() + i]; }
  const double* row(int k) const { return v_.data() + static_cast<std::size_t>(k) * x_.size(); }

 private:
  int kmax_;
  std::vector<double> x_;
  std::vector<double> v_;
};

struct MultiIndex {
  std::vector<int> c;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> v) : c(v) {}
  explicit MultiIndex(std::vector<int> v) : c(std::move(v)) {}

  int size() const { return static_cast<int>(c.size()); }
  int order() const;
  int operator[](int i) const { return c[i]; }
  bool operator==(const MultiIndex&) const = default;
};

/// Laguerre function phi_k(z) = L_k^{n-1}(|z|^2/2) e^{-|z|^2/4}.
GridFunction phi_k(int k, GridPtr grid);
double phi_k_value(int k, int n, double r2);

using AxisFunction = std::function<cplx(double)>;

/// Parameters of the xi-quadrature used by the Fourier-Wigner transform.
struct WignerQuadrature {
  double range_factor = 1.5;  ///< R_xi = range_factor * R
  int density_factor = 2;     ///< N_xi = density_factor * N
};

/// V(f, g) for tensor-product f = prod f_j(x_j), g = prod g_j(x_j); f and g hold n factors.
GridFunction fourier_wigner(const std::vector<AxisFunction>& f, const std::vector<AxisFunction>& g,
                            GridPtr grid, WignerQuadrature quad = {});

/// One-dimensional special Hermite factors V(h_a, h_b)(x, y), a, b <= kmax, on an N x N plane.
/// Entry (a, b) is stored with x index major: value(a, b, ix * N + iy).
class WignerTable {
 public:
  WignerTable(int kmax, const Grid& grid, WignerQuadrature quad = {});

  int kmax() const { return kmax_; }
  int N() const { return N_; }
  const cplx* plane(int a, int b) const {
    return v_.data() + (static_cast<std::size_t>(a) * (kmax_ + 1) + b) * plane_size_;
  }

 private:
  int kmax_;
  int N_;
  std::size_t plane_size_;
  std::vector<cplx> v_;
};

/// Phi_{mu nu} = V(h_mu, h_nu) sampled on the grid.
GridFunction special_hermite(const MultiIndex& mu, const MultiIndex& nu, GridPtr grid,
                             WignerQuadrature quad = {});

/// Multiplies the per-pair factors of a table into Phi_{mu nu}.
GridFunction special_hermite(const MultiIndex& mu, const MultiIndex& nu, GridPtr grid,
                             const WignerTable& table);

}  // namespace twnls
