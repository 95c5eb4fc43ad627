#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "twnls/errors.hpp"
#include "twnls/hermite.hpp"
#include "twnls/spectral.hpp"

using namespace twnls;

namespace {

// h_k from the explicit physicists' polynomial H_k = k! sum (-1)^m (2x)^{k-2m} / (m! (k-2m)!),
// which is what the Rodrigues formula evaluates to.
double hermite_oracle(int k, double x) {
  long double H = 0;
  for (int m = 0; 2 * m <= k; ++m) {
    const long double term = std::pow(-1.0L, m) * std::pow(2.0L * x, k - 2 * m) /
                             (std::tgamma(m + 1.0L) * std::tgamma(k - 2 * m + 1.0L));
    H += term;
  }
  H *= std::tgamma(k + 1.0L);
  const long double norm = std::sqrt(std::pow(2.0L, k) * std::tgamma(k + 1.0L) * std::sqrt(std::numbers::pi_v<long double>));
  return static_cast<double>(H / norm * std::exp(-0.5L * x * x));
}

// L_k^a(r) = sum_m (-1)^m binom(k + a, k - m) r^m / m!
double laguerre_oracle(int k, double a, double r) {
  long double s = 0;
  for (int m = 0; m <= k; ++m) {
    const long double binom = std::tgamma(k + a + 1.0L) / (std::tgamma(k - m + 1.0L) * std::tgamma(a + m + 1.0L));
    s += std::pow(-1.0L, m) * binom * std::pow(static_cast<long double>(r), m) / std::tgamma(m + 1.0L);
  }
  return static_cast<double>(s);
}

// Composite Simpson oracle for V(f, g)(x, y) with n = 1.
cplx fw_oracle(const AxisFunction& f, const AxisFunction& g, double x, double y) {
  const int M = 40000;
  const double a = -30, b = 30, h = (b - a) / M;
  cplx s = 0;
  for (int i = 0; i <= M; ++i) {
    const double xi = a + i * h;
    const double w = (i == 0 || i == M) ? 1 : (i % 2 ? 4 : 2);
    s += w * std::polar(1.0, x * xi) * f(xi + 0.5 * y) * std::conj(g(xi - 0.5 * y));
  }
  return s * h / 3.0 / std::sqrt(2 * std::numbers::pi);
}

}  // namespace

TEST_CASE("hermite_eval examples") {
  CHECK(hermite_eval(0, 0.0) == doctest::Approx(0.7511255444).epsilon(1e-10));
  CHECK(hermite_eval(1, 0.0) == 0.0);
  CHECK(hermite_eval(5, 1.3) == doctest::Approx(hermite_oracle(5, 1.3)).epsilon(1e-12));
}

TEST_CASE("hermite_eval matches the Rodrigues oracle for small degrees") {
  for (int k = 0; k <= 10; ++k)
    for (double x : {-4.1, -2.0, -0.7, 0.0, 0.35, 1.3, 2.9, 5.5}) {
      CHECK(std::abs(hermite_eval(k, x) - hermite_oracle(k, x)) <= 1e-13);
    }
}

TEST_CASE("hermite_eval underflow and degree guard") {
  CHECK(hermite_eval(0, 50.0) == 0.0);
  CHECK(hermite_eval(3, 1e3) == 0.0);
  const double v = hermite_eval(100, 20.0);
  CHECK(std::isfinite(v));
  CHECK(v != 0.0);
  CHECK_THROWS_AS(hermite_eval(-1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(hermite_eval(kMaxDegree + 1, 0.0), InvalidArgument);
  double buf[kMaxDegree + 1];
  hermite_all(64, 3.0, buf);
  for (int k = 0; k <= 64; ++k) CHECK(buf[k] == hermite_eval(k, 3.0));
}

TEST_CASE("HermiteTable orthonormality on a grid axis") {
  auto g = make_grid(1, 12, 256);
  HermiteTable t(20, *g);
  for (int j = 0; j <= 20; ++j)
    for (int k = 0; k <= 20; ++k) {
      double s = 0;
      for (std::size_t i = 0; i < t.abscissae().size(); ++i) s += t(j, i) * t(k, i);
      CHECK(std::abs(s * g->h() - (j == k ? 1.0 : 0.0)) <= 1e-8);
    }
}

TEST_CASE("Hermite ladder relations with 4th-order differences") {
  const int M = 2048;
  const double L = 14, h = 2 * L / M;
  for (int k = 0; k <= 20; ++k) {
    double r_up = 0, r_down = 0;
    for (int i = 0; i < M; ++i) {
      const double x = -L + (i + 0.5) * h;
      const double d = (hermite_eval(k, x - 2 * h) - 8 * hermite_eval(k, x - h) + 8 * hermite_eval(k, x + h) -
                        hermite_eval(k, x + 2 * h)) / (12 * h);
      const double up = -d + x * hermite_eval(k, x) - std::sqrt(2.0 * k + 2) * hermite_eval(k + 1, x);
      const double down = d + x * hermite_eval(k, x) - (k > 0 ? std::sqrt(2.0 * k) * hermite_eval(k - 1, x) : 0.0);
      r_up += up * up * h;
      r_down += down * down * h;
    }
    CHECK(std::sqrt(r_up) <= 1e-4);
    CHECK(std::sqrt(r_down) <= 1e-4);
  }
}

TEST_CASE("laguerre_eval examples and series oracle") {
  for (double a : {0.0, 1.0, 2.5})
    for (double r : {0.0, 0.4, 3.0}) CHECK(laguerre_eval(0, a, r) == 1.0);
  for (double r : {0.0, 0.4, 3.0}) CHECK(laguerre_eval(1, 0, r) == doctest::Approx(1 - r));
  CHECK(laguerre_eval(3, 0, 2.0) == doctest::Approx(laguerre_oracle(3, 0, 2.0)).epsilon(1e-14));
  CHECK(laguerre_eval(3, 0, 2.0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  for (int k = 0; k <= 6; ++k)
    for (double a : {0.0, 1.0, 2.0})
      for (double r : {0.1, 1.7, 4.2, 9.0})
        CHECK(laguerre_eval(k, a, r) == doctest::Approx(laguerre_oracle(k, a, r)).epsilon(1e-12));
  CHECK_THROWS_AS(laguerre_eval(2, -1, 1.0), InvalidArgument);
}

TEST_CASE("phi_k examples") {
  auto g = make_grid(1, 12, 256);
  GridFunction p0 = phi_k(0, g);
  GridFunction p1 = phi_k(1, g);
  for (std::size_t i = 0; i < g->size(); i += 997) {
    const double r2 = g->abs2(i);
    CHECK(p0[i].real() == doctest::Approx(std::exp(-r2 / 4)).epsilon(1e-14));
    CHECK(p1[i].real() == doctest::Approx((1 - r2 / 2) * std::exp(-r2 / 4)).epsilon(1e-12));
  }
  CHECK(std::abs(quadrature(p0) - 4 * std::numbers::pi) <= 1e-10);
}

TEST_CASE("fourier_wigner closed form and direct oracle") {
  auto g = make_grid(1, 12, 256);
  const AxisFunction h0 = [](double x) { return cplx(hermite_eval(0, x)); };
  GridFunction v = fourier_wigner({h0}, {h0}, g);
  GridFunction exact = GridFunction::sample(g, [](auto z) {
    return cplx(std::exp(-(z[0] * z[0] + z[1] * z[1]) / 4) / std::sqrt(2 * std::numbers::pi));
  });
  CHECK(testsupport::l2_dist(v, exact) / lp_norm(exact, 2) <= 1e-8);
  CHECK(std::abs(lp_norm(v, 2) - 1.0) <= 1e-8);

  // Non-Hermite inputs against an independent Simpson rule.
  auto gs = make_grid(1, 6, 64);
  const AxisFunction f = [](double x) { return cplx(std::exp(-0.6 * (x - 0.4) * (x - 0.4)), 0.0) * std::polar(1.0, 0.8 * x); };
  const AxisFunction k = [](double x) { return cplx(x * std::exp(-0.5 * x * x), 0.2 * std::exp(-x * x)); };
  GridFunction vs = fourier_wigner({f}, {k}, gs);
  for (std::size_t i = 0; i < gs->size(); i += 97) {
    const cplx o = fw_oracle(f, k, gs->coord(i, 0), gs->coord(i, 1));
    CHECK(std::abs(vs[i] - o) <= 1e-9);
  }
}

TEST_CASE("special_hermite Phi_00 and orthonormality for indices <= 4") {
  auto g = make_grid(1, 12, 256);
  GridFunction p00 = special_hermite({0}, {0}, g);
  GridFunction exact = GridFunction::sample(g, [](auto z) {
    return cplx(std::exp(-(z[0] * z[0] + z[1] * z[1]) / 4) / std::sqrt(2 * std::numbers::pi));
  });
  CHECK(testsupport::l2_dist(p00, exact) <= 1e-8);
  CHECK(std::abs(inner_product(p00, p00) - 1.0) <= 1e-8);

  WignerTable table(4, *g);
  std::vector<GridFunction> phis;
  for (int mu = 0; mu <= 4; ++mu)
    for (int nu = 0; nu <= 4; ++nu) phis.push_back(special_hermite({mu}, {nu}, g, table));
  double dev = 0;
  for (std::size_t a = 0; a < phis.size(); ++a)
    for (std::size_t b = 0; b < phis.size(); ++b)
      dev = std::max(dev, std::abs(inner_product(phis[a], phis[b]) - (a == b ? 1.0 : 0.0)));
  CHECK(dev <= 1e-8);
  CHECK(testsupport::l2_dist(phis[2 * 5 + 3], special_hermite({2}, {3}, g)) <= 1e-12);
}

TEST_CASE("Gram matrix at K = 8 and graceful degradation of the xi rule") {
  auto g = make_grid(1, 12, 256);
  SpectralBasis b(g, 8);
  Eigen::MatrixXcd G = b.matrix().adjoint() * b.matrix() * g->weight();
  const double dev = (G - Eigen::MatrixXcd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff();
  CHECK(dev <= 1e-6);

  for (WignerQuadrature q : {WignerQuadrature{0.75, 2}, WignerQuadrature{1.5, 1}, WignerQuadrature{0.75, 1}}) {
    SpectralBasis coarse(g, 8, q);
    Eigen::MatrixXcd Gc = coarse.matrix().adjoint() * coarse.matrix() * g->weight();
    const double dev_c = (Gc - Eigen::MatrixXcd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff();
    MESSAGE("Gram deviation " << dev << " -> " << dev_c << " with range " << q.range_factor << "R, density "
                              << q.density_factor << "N");
    CHECK(dev_c <= 1e-6);
  }
}

TEST_CASE("special_hermite index validation and n = 2 tensor product") {
  auto g = make_grid(1, 6, 16);
  CHECK_THROWS_AS(special_hermite({-1}, {0}, g), InvalidArgument);
  CHECK_THROWS_AS(special_hermite({0, 0}, {0, 0}, g), InvalidArgument);
  CHECK_THROWS_AS(special_hermite({kMaxDegree + 1}, {0}, g), InvalidArgument);

  auto g1 = make_grid(1, 6, 24);
  auto g2 = make_grid(2, 6, 24);
  GridFunction a = special_hermite({1}, {0}, g1);
  GridFunction b = special_hermite({0}, {2}, g1);
  GridFunction p = special_hermite({1, 0}, {0, 2}, g2);
  for (std::size_t i = 0; i < g2->size(); i += 131) {
    const std::size_t ia = g2->axis_index(i, 0) * 24 + g2->axis_index(i, 2);
    const std::size_t ib = g2->axis_index(i, 1) * 24 + g2->axis_index(i, 3);
    CHECK(std::abs(p[i] - a[ia] * b[ib]) <= 1e-14);
  }
  CHECK(std::abs(lp_norm(p, 2) - 1.0) <= 1e-6);
}
