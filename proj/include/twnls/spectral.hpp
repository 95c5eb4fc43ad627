#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "twnls/grid.hpp"
#include "twnls/hermite.hpp"
#include "twnls/twisted.hpp"

namespace twnls {

/// Parseval residual above which data counts as not representable.
constexpr double kParsevalGate = 1e-6;

struct BasisIndex {
  MultiIndex mu;
  MultiIndex nu;
};

/// The truncated special Hermite basis {Phi_{mu nu} : |mu|, |nu| <= K} sampled on a grid.
class SpectralBasis {
 public:
  SpectralBasis(GridPtr grid, int K, WignerQuadrature quad = {});

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int K() const { return K_; }
  int size() const { return static_cast<int>(index_.size()); }
  const std::vector<BasisIndex>& indices() const { return index_; }
  /// |nu| of each column.
  const std::vector<int>& levels() const { return level_; }
  /// Eigenvalues 2|nu| + n of each column.
  const Eigen::VectorXd& eigenvalues() const { return omega_; }
  /// Column j holds Phi_{mu nu} for indices()[j] in node order.
  const Eigen::MatrixXcd& matrix() const { return B_; }
  /// Column of (mu, nu), or -1.
  int find(const MultiIndex& mu, const MultiIndex& nu) const;

  /// Coefficients h^{2n} B^* F of the sample columns F (nodes x m).
  Eigen::MatrixXcd analyze(const Eigen::Ref<const Eigen::MatrixXcd>& samples) const;
  /// Samples B C of the coefficient columns C (size x m).
  Eigen::MatrixXcd synthesize(const Eigen::Ref<const Eigen::MatrixXcd>& coeffs) const;

 private:
  GridPtr grid_;
  int K_;
  std::vector<BasisIndex> index_;
  std::vector<int> level_;
  Eigen::VectorXd omega_;
  Eigen::MatrixXcd B_;
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

/// Builds a basis, reusing one that is still alive for the same grid and order.
BasisPtr shared_basis(GridPtr grid, int K);

struct SpectralCoeffs {
  BasisPtr basis;
  int K = 0;
  Eigen::VectorXcd c;
  /// |sum |c|^2 - ||f||_2^2| / ||f||_2^2 of the analyzed data (0 for f = 0).
  double parseval_residual = 0.0;

  cplx at(const MultiIndex& mu, const MultiIndex& nu) const;
  double l2_norm() const { return c.norm(); }
};

Eigen::Map<const Eigen::VectorXcd> as_vector(const GridFunction& f);

/// c_{mu nu} = <f, Phi_{mu nu}> for |mu|, |nu| <= K; K < 0 uses the basis order.
SpectralCoeffs analyze(const GridFunction& f, BasisPtr basis, int K = -1);
GridFunction synthesize(const SpectralCoeffs& c);
double parseval_residual(double coeff_norm2, double data_norm2);

enum class ProjectionMethod { galerkin, laguerre };

/// Spectral projection onto the eigenvalue 2k + n.
GridFunction project_k(const GridFunction& f, int k, ProjectionMethod method, BasisPtr basis = nullptr,
                       int cap = kConvolutionCap);

/// Exact diagonal multiplier e^{-it(2|nu|+n)}.
SpectralCoeffs propagate_coeffs(const SpectralCoeffs& c, double t);
/// Throws RepresentabilityError when the Parseval residual exceeds gate.
GridFunction propagate_eigen(const GridFunction& f, double t, BasisPtr basis, double gate = kParsevalGate);
GridFunction propagate_eigen(const SpectralCoeffs& c, double t);

/// K_{it}(z) = (4 pi i)^{-n} (sin t)^{-n} e^{i cot(t) |z|^2 / 4}, principal branch of i^{-n}.
cplx schrodinger_kernel(double t, double r2, int n);
/// f x K_{it} by direct twisted convolution. Requires dist(t, pi Z) >= min_distance.
GridFunction propagate_kernel(const GridFunction& f, double t, double min_distance = 0.2, int cap = kConvolutionCap);

struct Admissibility {
  bool ok = false;
  std::string reason;
  explicit operator bool() const { return ok; }
};

/// 2 < q < infinity and 1/q >= n (1/2 - 1/p) >= 0.
Admissibility is_admissible(double q, double p, int n);

struct AdmissiblePair {
  double q;
  double p;
  int n;

  /// Throws InvalidArgument with the reason if (q, p) is not admissible.
  static AdmissiblePair make(double q, double p, int n);
  double q_conj() const { return q / (q - 1); }
  double p_conj() const { return std::isinf(p) ? 1.0 : p / (p - 1); }
};

/// Coefficients of a function at every node of a time lattice (basis size x nodes).
struct CoeffTrajectory {
  BasisPtr basis;
  TimeLattice lattice;
  Eigen::MatrixXcd c;

  int size() const { return static_cast<int>(c.cols()); }
  GridFunction slice(int i) const;
  SpaceTimeFunction to_space_time() const;
  /// L^2 norms from the coefficients.
  std::vector<double> l2_norms() const;
};

/// Calls fn(first_node, samples) for consecutive blocks of synthesized slices (nodes x block).
template <class Fn>
void for_each_slice_block(const BasisPtr& basis, const Eigen::MatrixXcd& coeffs, Fn&& fn, int block = 16) {
  Eigen::MatrixXcd S;
  for (int i0 = 0; i0 < coeffs.cols(); i0 += block) {
    const int m = std::min<int>(block, static_cast<int>(coeffs.cols()) - i0);
    S.noalias() = basis->matrix() * coeffs.middleCols(i0, m);
    fn(i0, S);
  }
}

/// L^p norm of every synthesized slice.
std::vector<double> slice_lp_norms(const BasisPtr& basis, const Eigen::MatrixXcd& coeffs, double p);

}  // namespace twnls
