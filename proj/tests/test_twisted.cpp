#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "twnls/errors.hpp"
#include "twnls/hermite.hpp"
#include "twnls/twisted.hpp"

using namespace twnls;
using testsupport::l2_dist;

namespace {

GridFunction gauss4(const GridPtr& g) {
  return GridFunction::sample(g, [](auto z) { return cplx(std::exp(-(z[0] * z[0] + z[1] * z[1]) / 4)); });
}

double max_interior_error(const GridFunction& a, const GridFunction& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (is_interior(a.grid(), i)) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("L_1 and M_1 on the radial Gaussian") {
  // 4th-order truncation at N = 256 is h^4/30 |f'''''| ~ 2.6e-6, so the 1e-6 bound is checked at N = 512.
  auto g = make_grid(1, 12, 512);
  GridFunction f = gauss4(g);
  GridFunction lf = GridFunction::sample(g, [](auto z) {
    return cplx(-z[0] / 2, z[1] / 2) * std::exp(-(z[0] * z[0] + z[1] * z[1]) / 4);
  });
  GridFunction mf = GridFunction::sample(g, [](auto z) {
    return cplx(-z[1] / 2, -z[0] / 2) * std::exp(-(z[0] * z[0] + z[1] * z[1]) / 4);
  });
  CHECK(max_interior_error(apply_L(f, 0), lf) <= 1e-6);
  CHECK(max_interior_error(apply_M(f, 0), mf) <= 1e-6);

  GridFunction zero(g);
  CHECK(lp_norm(apply_L(zero, 0), INFINITY) == 0.0);
  CHECK(lp_norm(apply_M(zero, 0), INFINITY) == 0.0);
  CHECK_THROWS_AS(apply_L(f, 1), InvalidArgument);
}

TEST_CASE("property: L_j and M_j are linear") {
  auto g = make_grid(1, 5, 24);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(-2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction f = testsupport::random_grid_function(g, rng);
    GridFunction h = testsupport::random_grid_function(g, rng);
    const cplx a(ud(rng), ud(rng)), b(ud(rng), ud(rng));
    GridFunction comb = a * f + b * h;
    CHECK(l2_dist(apply_L(comb, 0), a * apply_L(f, 0) + b * apply_L(h, 0)) <= 1e-11 * lp_norm(apply_L(comb, 0), 2));
    CHECK(l2_dist(apply_M(comb, 0), a * apply_M(f, 0) + b * apply_M(h, 0)) <= 1e-11 * lp_norm(apply_M(comb, 0), 2));
  }
}

TEST_CASE("difference stencils are exact on low-degree polynomials, boundary rows included") {
  auto g = make_grid(1, 4, 16);
  GridFunction p = GridFunction::sample(g, [](auto z) { return cplx(std::pow(z[0], 4) - 2 * z[1] * z[1] * z[1] + z[0] * z[1]); });
  GridFunction dp = GridFunction::sample(g, [](auto z) { return cplx(4 * std::pow(z[0], 3) + z[1]); });
  GridFunction dyp = GridFunction::sample(g, [](auto z) { return cplx(-6 * z[1] * z[1] + z[0]); });
  GridFunction d2p = GridFunction::sample(g, [](auto z) { return cplx(12 * z[0] * z[0]); });
  CHECK(lp_norm(partial(p, 0) - dp, INFINITY) <= 1e-10);
  CHECK(lp_norm(partial(p, 1) - dyp, INFINITY) <= 1e-10);
  CHECK(lp_norm(second_partial(p, 0) - d2p, INFINITY) <= 1e-9);
}

TEST_CASE("twisted Laplacian eigenrelation for mu, nu <= 4") {
  auto g = make_grid(1, 12, 256);
  WignerTable table(4, *g);
  double worst = 0;
  for (int mu = 0; mu <= 4; ++mu)
    for (int nu = 0; nu <= 4; ++nu) {
      GridFunction phi = special_hermite({mu}, {nu}, g, table);
      GridFunction r = apply_twisted_laplacian(phi) - cplx(2.0 * nu + 1) * phi;
      worst = std::max(worst, lp_norm(r, 2) / lp_norm(cplx(2.0 * nu + 1) * phi, 2));
    }
  MESSAGE("worst relative eigen residual " << worst);
  CHECK(worst <= 1e-4);
  CHECK(worst >= 1e-6);  // finite differences, not a symbolic identity
  CHECK(lp_norm(apply_twisted_laplacian(GridFunction(g)), INFINITY) == 0.0);
}

TEST_CASE("twisted Laplacian eigenrelation smoke test for n = 2") {
  auto g = make_grid(2, 7, 32);
  GridFunction phi = special_hermite({1, 0}, {0, 1}, g);
  GridFunction r = apply_twisted_laplacian(phi) - cplx(4.0) * phi;
  CHECK(lp_norm(r, 2) / lp_norm(phi, 2) <= 2e-2);
}

TEST_CASE("twisted convolution with the Laguerre kernel projects onto eigenspaces") {
  auto g = make_grid(1, 10, 96);
  GridFunction p00 = special_hermite({0}, {0}, g);
  GridFunction p01 = special_hermite({0}, {1}, g);
  GridFunction p10 = special_hermite({1}, {0}, g);
  auto phi0 = [](double x, double y) { return cplx(std::exp(-(x * x + y * y) / 4)); };
  const cplx s = 1.0 / (2 * std::numbers::pi);
  CHECK(l2_dist(s * twisted_convolve(p00, phi0), p00) <= 1e-3);
  CHECK(lp_norm(s * twisted_convolve(p01, phi0), 2) <= 1e-3);
  CHECK(l2_dist(s * twisted_convolve(p10, phi0), p10) <= 1e-3);
  CHECK(lp_norm(twisted_convolve(p00, GridFunction(g)), INFINITY) == 0.0);

  GridFunction sampled = phi_k(0, g);
  // Sampled kernel: bilinear interpolation onto the difference lattice costs O(h^2).
  CHECK(l2_dist(s * twisted_convolve(p00, sampled), p00) <= 1e-2);
}

TEST_CASE("twisted convolution guards") {
  auto big = make_grid(1, 12, 128);
  GridFunction f(big);
  CHECK_THROWS_AS(twisted_convolve(f, f), ConvolutionCapError);
  CHECK_NOTHROW(twisted_convolve(GridFunction(make_grid(1, 4, 8)), GridFunction(make_grid(1, 4, 8))));
  GridFunction f2(make_grid(2, 4, 8));
  CHECK_THROWS_AS(twisted_convolve(f2, f2), InvalidArgument);
}

TEST_CASE("sobolev_norm examples") {
  auto g = make_grid(1, 12, 256);
  GridFunction p00 = special_hermite({0}, {0}, g);
  SobolevReport r = sobolev_norm(p00, 2);
  CHECK(std::isfinite(r.norm));
  CHECK(r.norm >= 1 - 1e-6);
  CHECK(r.lj.size() == 1);
  CHECK(r.lj[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  CHECK(r.norm == std::max({r.base, r.lj[0], r.mj[0]}));
  CHECK(sobolev_norm(cplx(2.0) * p00, 4).norm == doctest::Approx(2 * sobolev_norm(p00, 4).norm).epsilon(1e-14));
  SobolevReport z = sobolev_norm(GridFunction(g), 2);
  CHECK(z.norm == 0.0);
  CHECK(z.lj[0] == 0.0);
  CHECK(z.mj[0] == 0.0);
}

TEST_CASE("time lattices") {
  TimeLattice s = TimeLattice::symmetric(0.5, 0.2, 4);
  CHECK(s.size() == 9);
  CHECK(s.time(0) == doctest::Approx(0.3));
  CHECK(s.time(s.origin()) == 0.5);
  double w = 0;
  for (int i = 0; i < s.size(); ++i) w += s.weight(i);
  CHECK(w == doctest::Approx(0.4).epsilon(1e-15));
  TimeLattice b = TimeLattice::one_sided(1.0, -0.5, 5);
  CHECK(b.end() == doctest::Approx(0.5));
  CHECK(b.length() == doctest::Approx(0.5));
  CHECK_THROWS_AS(TimeLattice::symmetric(0, -1, 4), InvalidArgument);
  CHECK_THROWS_AS(TimeLattice::symmetric(0, 1, 0), InvalidArgument);
}

TEST_CASE("mixed_norm examples") {
  auto g = make_grid(1, 6, 32);
  GridFunction f = gauss4(g);
  const double T = 0.7;
  SpaceTimeFunction u(TimeLattice::symmetric(0, T, 5), std::vector<GridFunction>(11, f));
  for (double p : {2.0, 4.0})
    for (double q : {3.0, 4.0, 8.0})
      CHECK(mixed_norm(u, p, q) == doctest::Approx(std::pow(2 * T, 1 / q) * lp_norm(f, p)).epsilon(1e-13));

  std::vector<GridFunction> sl;
  for (int i = 0; i < 11; ++i) sl.push_back(cplx(1.0 + 0.1 * i) * f);
  SpaceTimeFunction v(TimeLattice::symmetric(0, T, 5), sl);
  CHECK(mixed_norm(v, 2, INFINITY) == doctest::Approx(2.0 * lp_norm(f, 2)).epsilon(1e-14));

  std::vector<GridFunction> longer;
  for (int i = 0; i < 21; ++i) longer.push_back(cplx(1.0 + 0.1 * std::abs(i - 10) * (i < 10 ? 0.5 : 1.0)) * f);
  SpaceTimeFunction w(TimeLattice::symmetric(0, 2 * T, 10), longer);
  std::vector<GridFunction> inner(longer.begin() + 5, longer.begin() + 16);
  SpaceTimeFunction wi(TimeLattice::symmetric(0, T, 5), inner);
  CHECK(mixed_norm(w, 2, INFINITY) >= mixed_norm(wi, 2, INFINITY));

  CHECK_THROWS_AS(SpaceTimeFunction(TimeLattice::symmetric(0, T, 5), std::vector<GridFunction>(3, f)), InvalidArgument);
}

TEST_CASE("gradient of the modulus is dominated by the magnetic derivatives") {
  auto g = make_grid(1, 12, 256);
  GridFunction p00 = special_hermite({0}, {0}, g);
  GradientCheck r = gradient_abs_inequality(p00);
  CHECK(r.nodes_checked > 0);
  CHECK(r.max_violation <= 1e-4);

  GridFunction pos = gauss4(g);
  CHECK(gradient_abs_inequality(pos, false).max_violation <= 1e-14);

  GradientCheck z = gradient_abs_inequality(GridFunction(g));
  CHECK(z.max_violation == 0.0);
  CHECK(z.nodes_checked == 0);

  std::mt19937_64 rng(4);
  WignerTable t(3, *g);
  GridFunction mix = cplx(0.7, 0.2) * special_hermite({1}, {2}, g, t) + cplx(-0.3, 0.5) * special_hermite({3}, {0}, g, t);
  CHECK(gradient_abs_inequality(mix).max_violation <= 1e-3);
}
