#pragma once

#include <cmath>
#include <random>

#include "twnls/spectral.hpp"

namespace testsupport {

using twnls::cplx;

// Complex normal coefficients on |mu|, |nu| <= K (n = 1 columns of the basis), unit l2 norm.
inline Eigen::VectorXcd random_coeffs(const twnls::SpectralBasis& b, int K, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(b.size());
  for (int j = 0; j < b.size(); ++j)
    if (b.indices()[j].mu.order() <= K && b.levels()[j] <= K) c[j] = cplx(nd(rng), nd(rng));
  return c / c.norm();
}

inline twnls::GridFunction from_coeffs(const twnls::BasisPtr& b, const Eigen::VectorXcd& c) {
  twnls::SpectralCoeffs s;
  s.basis = b;
  s.K = b->K();
  s.c = c;
  return twnls::synthesize(s);
}

inline twnls::GridFunction random_grid_function(const twnls::GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  twnls::GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(nd(rng), nd(rng));
  return f;
}

inline double l2_dist(const twnls::GridFunction& a, const twnls::GridFunction& b) {
  return twnls::lp_norm(a - b, 2.0);
}

}  // namespace testsupport
