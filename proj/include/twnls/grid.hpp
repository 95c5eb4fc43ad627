#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace twnls {

using cplx = std::complex<double>;

/// Uniform midpoint lattice on the box (-R, R)^{2n}, axes ordered x_1..x_n, y_1..y_n.
/// Node order is row-major: the last axis varies fastest.
class Grid {
 public:
  Grid(int n, double R, int N);

  int n() const { return n_; }
  double R() const { return R_; }
  int N() const { return N_; }
  double h() const { return h_; }
  int dims() const { return 2 * n_; }
  std::size_t size() const { return size_; }
  /// Quadrature weight h^{2n}.
  double weight() const { return weight_; }

  /// The N abscissae shared by every axis.
  const std::vector<double>& axis() const { return axis_; }
  std::size_t stride(int a) const { return strides_[a]; }
  int axis_index(std::size_t node, int a) const {
    return static_cast<int>((node / strides_[a]) % static_cast<std::size_t>(N_));
  }
  double coord(std::size_t node, int a) const { return axis_[axis_index(node, a)]; }
  /// Writes the 2n coordinates of a node into out.
  void coords(std::size_t node, std::span<double> out) const;
  double abs2(std::size_t node) const;

  bool operator==(const Grid& o) const { return n_ == o.n_ && R_ == o.R_ && N_ == o.N_; }

 private:
  int n_;
  double R_;
  int N_;
  double h_;
  double weight_;
  std::size_t size_;
  std::vector<double> axis_;
  std::vector<std::size_t> strides_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int n, double R, int N);

/// Complex samples of a function on a Grid.
class GridFunction {
 public:
  explicit GridFunction(GridPtr grid);
  GridFunction(GridPtr grid, std::vector<cplx> values);

  /// Samples fn(coords) where coords has 2n entries (x_1..x_n, y_1..y_n).
  template <class F>
  static GridFunction sample(GridPtr grid, F&& fn) {
    GridFunction out(grid);
    std::vector<double> c(grid->dims());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      grid->coords(i, c);
      out.v_[i] = fn(std::span<const double>(c));
    }
    return out;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  cplx* data() { return v_.data(); }
  const cplx* data() const { return v_.data(); }
  std::vector<cplx>& values() { return v_; }
  const std::vector<cplx>& values() const { return v_; }
  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }

  bool all_finite() const;
  /// Index of the first non-finite sample, or -1.
  std::ptrdiff_t first_nonfinite() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(cplx a);

 private:
  GridPtr grid_;
  std::vector<cplx> v_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx a, GridFunction f);

void require_same_grid(const Grid& a, const Grid& b);

/// Sum of values times h^{2n}.
cplx quadrature(const GridFunction& f);
/// Quadrature of f * conj(g).
cplx inner_product(const GridFunction& f, const GridFunction& g);
/// (quadrature of |f|^p)^{1/p}; p = infinity gives the max modulus.
double lp_norm(const GridFunction& f, double p);
double lp_norm(std::span<const cplx> values, double weight, double p);

enum class DumpFormat { csv, binary };

/// Writes '#'-prefixed metadata lines, the header `n,R,N`, then (re, im) pairs in node order.
void write_grid_function(std::ostream& os, const GridFunction& f, DumpFormat format,
                         const std::vector<std::pair<std::string, std::string>>& meta = {});
GridFunction read_grid_function(std::istream& is);
void save_grid_function(const std::string& path, const GridFunction& f, DumpFormat format,
                        const std::vector<std::pair<std::string, std::string>>& meta = {});
GridFunction load_grid_function(const std::string& path);

}  // namespace twnls
