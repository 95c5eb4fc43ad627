#include "twnls/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "twnls/errors.hpp"

namespace twnls {

namespace {

void multi_indices(int n, int K, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.emplace_back(cur);
    return;
  }
  int used = 0;
  for (int v : cur) used += v;
  for (int v = 0; v + used <= K; ++v) {
    cur.push_back(v);
    multi_indices(n, K, cur, out);
    cur.pop_back();
  }
}

}  // namespace

SpectralBasis::SpectralBasis(GridPtr grid, int K, WignerQuadrature quad) : grid_(std::move(grid)), K_(K) {
  if (K < 0) throw InvalidArgument("spectral basis: K must be >= 0");
  const int n = grid_->n();
  std::vector<MultiIndex> mis;
  std::vector<int> cur;
  multi_indices(n, K, cur, mis);
  for (const auto& mu : mis)
    for (const auto& nu : mis) {
      index_.push_back({mu, nu});
      level_.push_back(nu.order());
    }
  const int nb = size();
  omega_.resize(nb);
  for (int j = 0; j < nb; ++j) omega_[j] = 2.0 * level_[j] + n;
  const WignerTable table(K, *grid_, quad);
  B_.resize(static_cast<Eigen::Index>(grid_->size()), nb);
  for (int j = 0; j < nb; ++j) {
    if (n == 1) {
      const cplx* p = table.plane(index_[j].mu[0], index_[j].nu[0]);
      std::copy(p, p + grid_->size(), B_.col(j).data());
    } else {
      const GridFunction phi = special_hermite(index_[j].mu, index_[j].nu, grid_, table);
      std::copy(phi.data(), phi.data() + phi.size(), B_.col(j).data());
    }
  }
}

int SpectralBasis::find(const MultiIndex& mu, const MultiIndex& nu) const {
  for (int j = 0; j < size(); ++j)
    if (index_[j].mu == mu && index_[j].nu == nu) return j;
  return -1;
}

Eigen::MatrixXcd SpectralBasis::analyze(const Eigen::Ref<const Eigen::MatrixXcd>& samples) const {
  if (samples.rows() != B_.rows()) throw GridMismatch("analyze: sample count does not match basis grid");
  Eigen::MatrixXcd c = B_.adjoint() * samples;
  c *= grid_->weight();
  return c;
}

Eigen::MatrixXcd SpectralBasis::synthesize(const Eigen::Ref<const Eigen::MatrixXcd>& coeffs) const {
  if (coeffs.rows() != B_.cols()) throw InvalidArgument("synthesize: coefficient count does not match basis");
  return B_ * coeffs;
}

BasisPtr shared_basis(GridPtr grid, int K) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, int, int>, std::weak_ptr<const SpectralBasis>> cache;
  const auto key = std::make_tuple(grid->n(), grid->R(), grid->N(), K);
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end())
    if (auto sp = it->second.lock()) return sp;
  auto sp = std::make_shared<const SpectralBasis>(std::move(grid), K);
  cache[key] = sp;
  return sp;
}

cplx SpectralCoeffs::at(const MultiIndex& mu, const MultiIndex& nu) const {
  const int j = basis->find(mu, nu);
  if (j < 0 || mu.order() > K || nu.order() > K) return 0.0;
  return c[j];
}

Eigen::Map<const Eigen::VectorXcd> as_vector(const GridFunction& f) {
  return Eigen::Map<const Eigen::VectorXcd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

double parseval_residual(double coeff_norm2, double data_norm2) {
  if (data_norm2 == 0) return coeff_norm2 == 0 ? 0.0 : 1.0;
  return std::abs(coeff_norm2 - data_norm2) / data_norm2;
}

SpectralCoeffs analyze(const GridFunction& f, BasisPtr basis, int K) {
  if (!basis) throw InvalidArgument("analyze: null basis");
  require_same_grid(f.grid(), basis->grid());
  if (K < 0) K = basis->K();
  if (K > basis->K())
    throw InvalidArgument("analyze: K = " + std::to_string(K) + " exceeds basis capacity " +
                          std::to_string(basis->K()));
  SpectralCoeffs out;
  out.basis = basis;
  out.K = K;
  out.c = basis->analyze(as_vector(f));
  if (K < basis->K())
    for (int j = 0; j < basis->size(); ++j)
      if (basis->indices()[j].mu.order() > K || basis->levels()[j] > K) out.c[j] = 0.0;
  const double n2 = std::pow(lp_norm(f, 2.0), 2);
  out.parseval_residual = parseval_residual(out.c.squaredNorm(), n2);
  return out;
}

GridFunction synthesize(const SpectralCoeffs& c) {
  GridFunction out(c.basis->grid_ptr());
  Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
      c.basis->matrix() * c.c;
  return out;
}

GridFunction project_k(const GridFunction& f, int k, ProjectionMethod method, BasisPtr basis, int cap) {
  if (k < 0) throw InvalidArgument("project_k: level must be >= 0");
  if (method == ProjectionMethod::laguerre) {
    const int n = f.grid().n();
    GridFunction out = twisted_convolve(
        f, [k, n](double x, double y) { return cplx(phi_k_value(k, n, x * x + y * y)); }, cap);
    out *= std::pow(2.0 * std::numbers::pi, -n);
    return out;
  }
  if (!basis) basis = shared_basis(f.grid_ptr(), std::max(k, 8));
  SpectralCoeffs c = analyze(f, basis);
  for (int j = 0; j < basis->size(); ++j)
    if (basis->levels()[j] != k) c.c[j] = 0.0;
  return synthesize(c);
}

SpectralCoeffs propagate_coeffs(const SpectralCoeffs& c, double t) {
  SpectralCoeffs out = c;
  const Eigen::VectorXd& w = c.basis->eigenvalues();
  for (Eigen::Index j = 0; j < out.c.size(); ++j) out.c[j] *= std::polar(1.0, -t * w[j]);
  return out;
}

GridFunction propagate_eigen(const SpectralCoeffs& c, double t) { return synthesize(propagate_coeffs(c, t)); }

GridFunction propagate_eigen(const GridFunction& f, double t, BasisPtr basis, double gate) {
  const SpectralCoeffs c = analyze(f, basis);
  if (c.parseval_residual > gate)
    throw RepresentabilityError("propagate_eigen: Parseval residual " + num_text(c.parseval_residual) +
                                " exceeds " + num_text(gate) + "; raise K or refine the grid");
  return propagate_eigen(c, t);
}

cplx schrodinger_kernel(double t, double r2, int n) {
  const double s = std::sin(t);
  const cplx pre = std::pow(4.0 * std::numbers::pi, -n) * std::polar(1.0, -0.5 * n * std::numbers::pi) /
                   std::pow(s, n);
  return pre * std::polar(1.0, std::cos(t) / s * r2 / 4.0);
}

GridFunction propagate_kernel(const GridFunction& f, double t, double min_distance, int cap) {
  const double d = std::abs(t - std::numbers::pi * std::round(t / std::numbers::pi));
  if (d < min_distance)
    throw SingularTimeError("propagate_kernel: t = " + num_text(t) + " is within " +
                            num_text(min_distance) + " of a multiple of pi");
  const int n = f.grid().n();
  return twisted_convolve(f, [t, n](double x, double y) { return schrodinger_kernel(t, x * x + y * y, n); }, cap);
}

Admissibility is_admissible(double q, double p, int n) {
  if (n < 1) return {false, "dimension n must be positive"};
  if (!(q > 2)) return {false, "q must exceed 2 (admissible pairs need 2 < q < infinity)"};
  if (!std::isfinite(q)) return {false, "q must be finite (admissible pairs need 2 < q < infinity)"};
  if (!(p >= 1)) return {false, "p must be at least 1"};
  const double s = n * (0.5 - 1.0 / p);
  if (s < 0) return {false, "p must be at least 2 (need n(1/2 - 1/p) >= 0)"};
  // Equality cases such as (3, 6) must not be lost to rounding.
  if (1.0 / q < s - 1e-12)
    return {false, "1/q = " + num_text(1.0 / q) + " is below n(1/2 - 1/p) = " + num_text(s)};
  return {true, ""};
}

AdmissiblePair AdmissiblePair::make(double q, double p, int n) {
  const Admissibility a = is_admissible(q, p, n);
  if (!a) throw InvalidArgument("inadmissible pair (q, p) = (" + num_text(q) + ", " + num_text(p) +
                                "): " + a.reason);
  return {q, p, n};
}

GridFunction CoeffTrajectory::slice(int i) const {
  GridFunction out(basis->grid_ptr());
  Eigen::Map<Eigen::VectorXcd>(out.data(), static_cast<Eigen::Index>(out.size())).noalias() =
      basis->matrix() * c.col(i);
  return out;
}

SpaceTimeFunction CoeffTrajectory::to_space_time() const {
  std::vector<GridFunction> s;
  s.reserve(size());
  for (int i = 0; i < size(); ++i) s.push_back(slice(i));
  return SpaceTimeFunction(lattice, std::move(s));
}

std::vector<double> CoeffTrajectory::l2_norms() const {
  std::vector<double> out(size());
  for (int i = 0; i < size(); ++i) out[i] = c.col(i).norm();
  return out;
}

std::vector<double> slice_lp_norms(const BasisPtr& basis, const Eigen::MatrixXcd& coeffs, double p) {
  std::vector<double> out(coeffs.cols());
  const double w = basis->grid().weight();
  for_each_slice_block(basis, coeffs, [&](int i0, const Eigen::MatrixXcd& S) {
    for (int k = 0; k < S.cols(); ++k)
      out[i0 + k] = lp_norm(std::span<const cplx>(S.col(k).data(), static_cast<std::size_t>(S.rows())), w, p);
  });
  return out;
}

}  // namespace twnls
