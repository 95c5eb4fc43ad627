#include "twnls/twisted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twnls/errors.hpp"

namespace twnls {

namespace {

// One-sided rows for the first two nodes; the far end mirrors them.
constexpr double kD1Edge0[5] = {-25, 48, -36, 16, -3};
constexpr double kD1Edge1[5] = {-3, -10, 18, -6, 1};
constexpr double kD2Edge0[6] = {45, -154, 214, -156, 61, -10};
constexpr double kD2Edge1[6] = {10, -15, -4, 14, -6, 1};

template <class T>
T d1_at(const T* base, std::size_t s, int k, int N, double inv12h) {
  auto at = [&](int m) { return base[static_cast<std::size_t>(m) * s]; };
  if (k >= 2 && k <= N - 3) return (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) * inv12h;
  T acc(0);
  if (k < 2) {
    const double* c = k == 0 ? kD1Edge0 : kD1Edge1;
    for (int m = 0; m < 5; ++m) acc += c[m] * at(m);
    return acc * inv12h;
  }
  const double* c = k == N - 1 ? kD1Edge0 : kD1Edge1;
  for (int m = 0; m < 5; ++m) acc += c[m] * at(N - 1 - m);
  return -acc * inv12h;
}

template <class T>
T d2_at(const T* base, std::size_t s, int k, int N, double inv12h2) {
  auto at = [&](int m) { return base[static_cast<std::size_t>(m) * s]; };
  if (k >= 2 && k <= N - 3)
    return (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2)) * inv12h2;
  T acc(0);
  if (k < 2) {
    const double* c = k == 0 ? kD2Edge0 : kD2Edge1;
    for (int m = 0; m < 6; ++m) acc += c[m] * at(m);
    return acc * inv12h2;
  }
  const double* c = k == N - 1 ? kD2Edge0 : kD2Edge1;
  for (int m = 0; m < 6; ++m) acc += c[m] * at(N - 1 - m);
  return acc * inv12h2;
}

void check_axis(const Grid& g, int axis) {
  if (axis < 0 || axis >= g.dims()) throw InvalidArgument("axis index out of range");
}

void check_component(const Grid& g, int j) {
  if (j < 0 || j >= g.n()) throw InvalidArgument("component index j out of range");
}

template <class T>
void apply_d1(const Grid& g, const T* in, T* out, int axis) {
  const std::size_t s = g.stride(axis);
  const int N = g.N();
  const double inv = 1.0 / (12.0 * g.h());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.size()); ++i) {
    const int k = g.axis_index(i, axis);
    out[i] = d1_at(in + (i - k * s), s, k, N, inv);
  }
}

}  // namespace

bool is_interior(const Grid& grid, std::size_t node, int layers) {
  for (int a = 0; a < grid.dims(); ++a) {
    const int k = grid.axis_index(node, a);
    if (k < layers || k >= grid.N() - layers) return false;
  }
  return true;
}

GridFunction partial(const GridFunction& f, int axis) {
  const Grid& g = f.grid();
  check_axis(g, axis);
  GridFunction out(f.grid_ptr());
  apply_d1(g, f.data(), out.data(), axis);
  return out;
}

GridFunction second_partial(const GridFunction& f, int axis) {
  const Grid& g = f.grid();
  check_axis(g, axis);
  GridFunction out(f.grid_ptr());
  const std::size_t s = g.stride(axis);
  const int N = g.N();
  const double inv = 1.0 / (12.0 * g.h() * g.h());
  const cplx* in = f.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.size()); ++i) {
    const int k = g.axis_index(i, axis);
    out[i] = d2_at(in + (i - k * s), s, k, N, inv);
  }
  return out;
}

GridFunction apply_L(const GridFunction& f, int j) {
  const Grid& g = f.grid();
  check_component(g, j);
  GridFunction out = partial(f, j);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] += cplx(0.0, 0.5 * g.coord(i, g.n() + j)) * f[i];
  return out;
}

GridFunction apply_M(const GridFunction& f, int j) {
  const Grid& g = f.grid();
  check_component(g, j);
  GridFunction out = partial(f, g.n() + j);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] -= cplx(0.0, 0.5 * g.coord(i, j)) * f[i];
  return out;
}

GridFunction apply_twisted_laplacian(const GridFunction& f) {
  const Grid& g = f.grid();
  const int n = g.n();
  GridFunction out(f.grid_ptr());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = 0.25 * g.abs2(i) * f[i];
  for (int a = 0; a < g.dims(); ++a) out -= second_partial(f, a);
  const cplx mi(0.0, -1.0);
  for (int j = 0; j < n; ++j) {
    const GridFunction dx = partial(f, j);
    const GridFunction dy = partial(f, n + j);
    for (std::size_t i = 0; i < g.size(); ++i)
      out[i] += mi * (g.coord(i, j) * dy[i] - g.coord(i, n + j) * dx[i]);
  }
  return out;
}

TimeLattice TimeLattice::symmetric(double t0, double T, int Mt) {
  if (!(T > 0)) throw InvalidArgument("time lattice: T must be positive");
  if (Mt < 1) throw InvalidArgument("time lattice: Mt must be at least 1");
  return TimeLattice{t0, T / Mt, -Mt, Mt};
}

TimeLattice TimeLattice::one_sided(double t0, double T, int Mt) {
  if (T == 0 || !std::isfinite(T)) throw InvalidArgument("time lattice: T must be nonzero");
  if (Mt < 1) throw InvalidArgument("time lattice: Mt must be at least 1");
  return TimeLattice{t0, T / Mt, 0, Mt};
}

double TimeLattice::weight(int i) const {
  const double a = std::abs(dt);
  if (size() == 1) return 0.0;
  return (i == 0 || i == size() - 1) ? 0.5 * a : a;
}

double TimeLattice::length() const { return (m_hi - m_lo) * std::abs(dt); }

SpaceTimeFunction::SpaceTimeFunction(GridPtr grid, TimeLattice lattice)
    : grid_(std::move(grid)), lattice_(lattice) {
  slices_.assign(lattice_.size(), GridFunction(grid_));
}

SpaceTimeFunction::SpaceTimeFunction(TimeLattice lattice, std::vector<GridFunction> slices)
    : lattice_(lattice), slices_(std::move(slices)) {
  if (static_cast<int>(slices_.size()) != lattice_.size())
    throw InvalidArgument("space-time function: slice count does not match lattice");
  if (slices_.empty()) throw InvalidArgument("space-time function: no slices");
  grid_ = slices_.front().grid_ptr();
  for (const auto& s : slices_) require_same_grid(*grid_, s.grid());
}

SobolevReport sobolev_norm(const GridFunction& f, double p) {
  SobolevReport r;
  r.base = lp_norm(f, p);
  r.norm = r.base;
  for (int j = 0; j < f.grid().n(); ++j) {
    r.lj.push_back(lp_norm(apply_L(f, j), p));
    r.mj.push_back(lp_norm(apply_M(f, j), p));
    r.norm = std::max({r.norm, r.lj.back(), r.mj.back()});
  }
  return r;
}

double mixed_norm_from_slices(const std::vector<double>& slice_norms, const TimeLattice& lattice, double q) {
  if (std::isnan(q) || q < 1) throw InvalidArgument("mixed_norm: q must be >= 1");
  if (static_cast<int>(slice_norms.size()) != lattice.size())
    throw InvalidArgument("mixed_norm: slice count does not match lattice");
  if (std::isinf(q)) return *std::max_element(slice_norms.begin(), slice_norms.end());
  double s = 0;
  for (int i = 0; i < lattice.size(); ++i) s += lattice.weight(i) * std::pow(slice_norms[i], q);
  return std::pow(s, 1.0 / q);
}

double mixed_norm(const SpaceTimeFunction& u, double p, double q) {
  std::vector<double> norms(u.size());
  for (int i = 0; i < u.size(); ++i) norms[i] = lp_norm(u[i], p);
  return mixed_norm_from_slices(norms, u.lattice(), q);
}

GradientCheck gradient_abs_inequality(const GridFunction& u, bool magnetic) {
  const Grid& g = u.grid();
  const int n = g.n();
  std::vector<double> mod(g.size());
  double umax = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mod[i] = std::abs(u[i]);
    umax = std::max(umax, mod[i]);
  }
  GradientCheck rep;
  if (umax == 0) return rep;
  std::vector<double> dmod(g.size());
  const double inv2h = 1.0 / (2.0 * g.h());
  for (int a = 0; a < g.dims(); ++a) {
    apply_d1(g, mod.data(), dmod.data(), a);
    const int j = a % n;
    const GridFunction su = magnetic ? (a < n ? apply_L(u, j) : apply_M(u, j)) : partial(u, a);
    const std::size_t s = g.stride(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (mod[i] <= 1e-8 * umax || !is_interior(g, i)) continue;
      ++rep.nodes_checked;
      // Grid slack: gap between the 4th- and 2nd-order differences of |u|, large only where |u| has a kink.
      const double eps = std::abs(dmod[i] - (mod[i + s] - mod[i - s]) * inv2h);
      const double v = std::abs(dmod[i]) - std::abs(su[i]) - eps;
      if (v > rep.max_violation) {
        rep.max_violation = v;
        rep.worst_node = static_cast<std::ptrdiff_t>(i);
      }
    }
  }
  return rep;
}

namespace {

void check_convolution(const Grid& g, int cap) {
  if (g.n() != 1) throw InvalidArgument("twisted_convolve: only n = 1 is supported");
  if (g.N() > cap)
    throw ConvolutionCapError("twisted_convolve: N = " + std::to_string(g.N()) + " exceeds the cap " +
                              std::to_string(cap));
}

// gd holds g on the difference lattice (dx h, dy h), dx, dy in [-(N-1), N-1], index (dx + N - 1) * (2N - 1) + dy + N - 1.
GridFunction convolve_difference(const GridFunction& f, const std::vector<cplx>& gd) {
  const Grid& g = f.grid();
  const int N = g.N();
  const int W = 2 * N - 1;
  const auto& ax = g.axis();
  // e^{-(i/2) y a} and e^{(i/2) x b}
  std::vector<cplx> A(static_cast<std::size_t>(N) * N), B(static_cast<std::size_t>(N) * N);
  for (int p = 0; p < N; ++p)
    for (int k = 0; k < N; ++k) {
      A[p * N + k] = std::polar(1.0, -0.5 * ax[p] * ax[k]);
      B[p * N + k] = std::polar(1.0, 0.5 * ax[p] * ax[k]);
    }
  GridFunction out(f.grid_ptr());
  const double w = g.weight();
#pragma omp parallel
  {
    std::vector<cplx> fb(N);
#pragma omp for schedule(static)
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        cplx total = 0;
        for (int k = 0; k < N; ++k) {
          const cplx* grow = gd.data() + static_cast<std::size_t>(i - k + N - 1) * W + (j + N - 1);
          const cplx* frow = f.data() + static_cast<std::size_t>(k) * N;
          const cplx* brow = B.data() + static_cast<std::size_t>(i) * N;
          cplx s = 0;
          for (int l = 0; l < N; ++l) s += frow[l] * grow[-l] * brow[l];
          total += A[static_cast<std::size_t>(j) * N + k] * s;
        }
        out[static_cast<std::size_t>(i) * N + j] = total * w;
      }
    }
  }
  return out;
}

}  // namespace

GridFunction twisted_convolve(const GridFunction& f, const std::function<cplx(double, double)>& g, int cap) {
  const Grid& gr = f.grid();
  check_convolution(gr, cap);
  const int N = gr.N();
  const int W = 2 * N - 1;
  const double h = gr.h();
  std::vector<cplx> gd(static_cast<std::size_t>(W) * W);
  for (int a = 0; a < W; ++a)
    for (int b = 0; b < W; ++b) gd[static_cast<std::size_t>(a) * W + b] = g((a - N + 1) * h, (b - N + 1) * h);
  return convolve_difference(f, gd);
}

GridFunction twisted_convolve(const GridFunction& f, const GridFunction& g, int cap) {
  require_same_grid(f.grid(), g.grid());
  const Grid& gr = f.grid();
  check_convolution(gr, cap);
  const int N = gr.N();
  const double h = gr.h(), R = gr.R();
  auto node = [&](int ix, int iy) -> cplx {
    if (ix < 0 || iy < 0 || ix >= N || iy >= N) return 0.0;
    return g[static_cast<std::size_t>(ix) * N + iy];
  };
  auto interp = [&](double x, double y) -> cplx {
    const double u = (x + R) / h - 0.5, v = (y + R) / h - 0.5;
    const int i0 = static_cast<int>(std::floor(u)), j0 = static_cast<int>(std::floor(v));
    const double fu = u - i0, fv = v - j0;
    return (1 - fu) * ((1 - fv) * node(i0, j0) + fv * node(i0, j0 + 1)) +
           fu * ((1 - fv) * node(i0 + 1, j0) + fv * node(i0 + 1, j0 + 1));
  };
  return twisted_convolve(f, std::function<cplx(double, double)>(interp), cap);
}

}  // namespace twnls
