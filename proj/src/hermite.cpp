#include "twnls/hermite.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "twnls/errors.hpp"

namespace twnls {

namespace {

constexpr double kRescale = 1e150;
const double kLogRescale = std::log(kRescale);

void check_degree(int k) {
  if (k < 0 || k > kMaxDegree)
    throw InvalidArgument("degree " + std::to_string(k) + " outside [0, " + std::to_string(kMaxDegree) + "]");
}

}  // namespace

// The recurrence runs on h_k e^{x^2/2} with a running log-scale so large |x| does not
// flush h_0 to zero before the polynomial growth is applied.
void hermite_all(int kmax, double x, double* out) {
  check_degree(kmax);
  double log_scale = -0.5 * x * x;
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  out[0] = cur * std::exp(log_scale);
  for (int k = 0; k < kmax; ++k) {
    const double next = x * std::sqrt(2.0 / (k + 1)) * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      prev /= kRescale;
      log_scale += kLogRescale;
    }
    out[k + 1] = cur * std::exp(log_scale);
  }
}

double hermite_eval(int k, double x) {
  check_degree(k);
  double buf[kMaxDegree + 1];
  hermite_all(k, x, buf);
  return buf[k];
}

double laguerre_eval(int k, double a, double r) {
  check_degree(k);
  if (!(a >= 0)) throw InvalidArgument("laguerre_eval: parameter a must be >= 0");
  if (!(r >= 0)) throw InvalidArgument("laguerre_eval: argument r must be >= 0");
  double prev = 0.0, cur = 1.0;
  for (int j = 0; j < k; ++j) {
    const double next = ((2 * j + 1 + a - r) * cur - (j + a) * prev) / (j + 1);
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteTable::HermiteTable(int kmax, std::vector<double> abscissae) : kmax_(kmax), x_(std::move(abscissae)) {
  check_degree(kmax);
  const std::size_t m = x_.size();
  v_.resize(static_cast<std::size_t>(kmax + 1) * m);
  std::vector<double> buf(kmax + 1);
  for (std::size_t i = 0; i < m; ++i) {
    hermite_all(kmax, x_[i], buf.data());
    for (int k = 0; k <= kmax; ++k) v_[k * m + i] = buf[k];
  }
}

HermiteTable::HermiteTable(int kmax, const Grid& grid) : HermiteTable(kmax, grid.axis()) {}

int MultiIndex::order() const {
  int s = 0;
  for (int v : c) {
    if (v < 0) throw InvalidArgument("multi-index components must be nonnegative");
    s += v;
  }
  return s;
}

double phi_k_value(int k, int n, double r2) {
  return laguerre_eval(k, n - 1, 0.5 * r2) * std::exp(-0.25 * r2);
}

GridFunction phi_k(int k, GridPtr grid) {
  check_degree(k);
  GridFunction out(grid);
  const int n = grid->n();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid->size()); ++i)
    out[i] = phi_k_value(k, n, grid->abs2(i));
  return out;
}

namespace {

struct XiRule {
  std::vector<double> xi;
  double w;
};

XiRule xi_rule(const Grid& grid, WignerQuadrature quad) {
  if (!(quad.range_factor > 0) || quad.density_factor < 1)
    throw InvalidArgument("fourier_wigner: invalid xi quadrature");
  const double Rx = quad.range_factor * grid.R();
  const int Nx = quad.density_factor * grid.N();
  XiRule r;
  r.w = 2.0 * Rx / Nx;
  r.xi.resize(Nx);
  for (int l = 0; l < Nx; ++l) r.xi[l] = -Rx + (l + 0.5) * r.w;
  return r;
}

// Planes V(f_p, g_p)(x_i, y_j) for a batch of 1-D pairs, given sampler(y, values_f, values_g)
// that fills f_p(xi + y/2) and g_p(xi - y/2) for every p.
template <class Fill>
std::vector<cplx> wigner_planes(const Grid& grid, WignerQuadrature quad, int npairs, Fill&& fill) {
  const XiRule rule = xi_rule(grid, quad);
  const int N = grid.N();
  const int Nx = static_cast<int>(rule.xi.size());
  const auto& ax = grid.axis();
  Eigen::MatrixXd C(Nx, N), S(Nx, N);
  for (int l = 0; l < Nx; ++l)
    for (int i = 0; i < N; ++i) {
      C(l, i) = std::cos(ax[i] * rule.xi[l]);
      S(l, i) = std::sin(ax[i] * rule.xi[l]);
    }
  const double scale = rule.w / std::sqrt(2.0 * std::numbers::pi);
  const std::size_t plane = static_cast<std::size_t>(N) * N;
  std::vector<cplx> out(plane * npairs);
#pragma omp parallel
  {
    Eigen::MatrixXcd P(npairs, Nx);
    Eigen::MatrixXd Pr(npairs, Nx), Pi(npairs, Nx), Vr(npairs, N), Vi(npairs, N);
#pragma omp for schedule(static)
    for (int iy = 0; iy < N; ++iy) {
      fill(ax[iy], rule.xi, P);
      P *= scale;
      Pr = P.real();
      Pi = P.imag();
      // (Pr + i Pi)(C + i S)
      Vr.noalias() = Pr * C;
      Vr.noalias() -= Pi * S;
      Vi.noalias() = Pr * S;
      Vi.noalias() += Pi * C;
      for (int p = 0; p < npairs; ++p)
        for (int ix = 0; ix < N; ++ix)
          out[p * plane + static_cast<std::size_t>(ix) * N + iy] = cplx(Vr(p, ix), Vi(p, ix));
    }
  }
  return out;
}

GridFunction tensor_product(const std::vector<const cplx*>& planes, GridPtr grid) {
  const Grid& g = *grid;
  const int n = g.n();
  GridFunction out(grid);
  const std::size_t N = g.N();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(g.size()); ++i) {
    cplx v = 1.0;
    for (int j = 0; j < n; ++j) v *= planes[j][g.axis_index(i, j) * N + g.axis_index(i, n + j)];
    out[i] = v;
  }
  return out;
}

}  // namespace

GridFunction fourier_wigner(const std::vector<AxisFunction>& f, const std::vector<AxisFunction>& g,
                            GridPtr grid, WignerQuadrature quad) {
  const int n = grid->n();
  if (static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != n)
    throw InvalidArgument("fourier_wigner: need one factor per complex dimension");
  auto planes = wigner_planes(*grid, quad, n, [&](double y, const std::vector<double>& xi, Eigen::MatrixXcd& P) {
    for (int j = 0; j < n; ++j)
      for (std::size_t l = 0; l < xi.size(); ++l)
        P(j, l) = f[j](xi[l] + 0.5 * y) * std::conj(g[j](xi[l] - 0.5 * y));
  });
  const std::size_t plane = static_cast<std::size_t>(grid->N()) * grid->N();
  std::vector<const cplx*> ptr(n);
  for (int j = 0; j < n; ++j) ptr[j] = planes.data() + j * plane;
  return tensor_product(ptr, grid);
}

WignerTable::WignerTable(int kmax, const Grid& grid, WignerQuadrature quad)
    : kmax_(kmax), N_(grid.N()), plane_size_(static_cast<std::size_t>(grid.N()) * grid.N()) {
  check_degree(kmax);
  const int K1 = kmax + 1;
  v_ = wigner_planes(grid, quad, K1 * K1, [K1, kmax](double y, const std::vector<double>& xi, Eigen::MatrixXcd& P) {
    std::vector<double> hp(K1), hm(K1);
    for (std::size_t l = 0; l < xi.size(); ++l) {
      hermite_all(kmax, xi[l] + 0.5 * y, hp.data());
      hermite_all(kmax, xi[l] - 0.5 * y, hm.data());
      for (int a = 0; a < K1; ++a)
        for (int b = 0; b < K1; ++b) P(a * K1 + b, l) = hp[a] * hm[b];
    }
  });
}

GridFunction special_hermite(const MultiIndex& mu, const MultiIndex& nu, GridPtr grid,
                             const WignerTable& table) {
  const int n = grid->n();
  if (mu.size() != n || nu.size() != n) throw InvalidArgument("special_hermite: multi-index length must equal n");
  if (table.N() != grid->N()) throw GridMismatch("special_hermite: table built for another grid");
  mu.order();
  nu.order();
  std::vector<const cplx*> ptr(n);
  for (int j = 0; j < n; ++j) {
    if (mu[j] > table.kmax() || nu[j] > table.kmax())
      throw InvalidArgument("special_hermite: index exceeds table capacity");
    ptr[j] = table.plane(mu[j], nu[j]);
  }
  return tensor_product(ptr, grid);
}

GridFunction special_hermite(const MultiIndex& mu, const MultiIndex& nu, GridPtr grid, WignerQuadrature quad) {
  const int n = grid->n();
  if (mu.size() != n || nu.size() != n) throw InvalidArgument("special_hermite: multi-index length must equal n");
  if (mu.order() > kMaxDegree || nu.order() > kMaxDegree)
    throw InvalidArgument("special_hermite: index out of range");
  std::vector<AxisFunction> f, g;
  for (int j = 0; j < n; ++j) {
    f.emplace_back([k = mu[j]](double x) { return cplx(hermite_eval(k, x)); });
    g.emplace_back([k = nu[j]](double x) { return cplx(hermite_eval(k, x)); });
  }
  return fourier_wigner(f, g, grid, quad);
}

}  // namespace twnls
