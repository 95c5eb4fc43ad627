#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twnls/nls.hpp"
#include "twnls/spectral.hpp"

namespace twnls {

struct DetailRow {
  std::string probe;
  double t = 0.0;  ///< time sample, or interval half-length for space-time quotients
  double p = 0.0;
  double quotient = 0.0;
};

struct EstimateReport {
  std::string name;
  std::uint64_t seed = 0;
  int samples = 0;
  double max_quotient = 0.0;
  /// Max quotient on the refined discretization; NaN if no refinement ran.
  double refined_quotient = 0.0;
  bool pass = false;
  std::string note;
  std::vector<DetailRow> detail;
};

struct VerifyConfig {
  int n = 1;
  double R = 12.0;
  int N = 256;
  std::uint64_t seed = 1;
  bool refine = true;

  int dispersive_probes = 50;
  int dispersive_K = 6;
  std::vector<double> t_samples{0.3, 0.8, 1.5707963267948966, 2.2, 2.8};
  std::vector<double> dispersive_p{INFINITY, 4.0};

  int strichartz_probes = 6;
  int strichartz_K = 4;
  double a = 3.141592653589793;
  int Mt = 32;
  std::vector<std::pair<double, double>> pairs{{4.0, 4.0}, {3.0, 6.0}};

  int commutation_probes = 3;
  int commutation_K = 6;
  std::vector<double> commutation_t{0.3, 1.0, 2.5};

  int nonlinearity_probes = 3;
  double nonlinearity_T = 0.5;
  int nonlinearity_Mt = 16;
  double alpha = 2.0;

  double equivalence_T = 0.1;
  int equivalence_Mt = 16;
};

/// Relative refinement change allowed for constants without a known value.
constexpr double kRefinementTolerance = 0.05;
/// Dispersive quotient ceiling (constant 2 plus grid slack).
constexpr double kDispersiveCeiling = 1.05;
constexpr double kCommutationTolerance = 5e-4;

/// Complex normal coefficients on |mu|, |nu| <= K with unit l2 norm; grid independent.
Eigen::VectorXcd random_probe(const SpectralBasis& basis, int K, std::uint64_t seed, int index);

/// ||e^{-itL} f||_p / (2 |sin t|^{-2n(1/2-1/p)} ||f||_{p'}) on random probes.
EstimateReport check_dispersive(const VerifyConfig& cfg);
/// Same quotient for explicit data f and one (t, p).
double dispersive_quotient(const GridFunction& f, double t, double p, const BasisPtr& basis);

/// ||e^{-itL} f||_{L^{p,q}([-a,a])} / ||f||_2 for the pair (q, p).
double strichartz_homogeneous_quotient(const BasisPtr& basis, const Eigen::VectorXcd& c, const AdmissiblePair& pair,
                                       double a, int Mt);

/// Space-time probe g(s) = sum_k e^{i kappa_k s} c_k.
struct ForcingProbe {
  std::vector<double> kappa;
  std::vector<Eigen::VectorXcd> c;
};

ForcingProbe random_forcing(const SpectralBasis& basis, int K, std::uint64_t seed, int index);
/// Exact coefficients of g and of its retarded integral int_0^t e^{-i(t-s)L} g(s) ds on a lattice.
Eigen::MatrixXcd forcing_coeffs(const BasisPtr& basis, const ForcingProbe& g, const TimeLattice& lattice);
Eigen::MatrixXcd retarded_coeffs(const BasisPtr& basis, const ForcingProbe& g, const TimeLattice& lattice);

/// Retarded integral in L^{p,q} (inhomogeneous) or L^{2,infinity} (retarded) over ||g||_{L^{p',q'}}.
double strichartz_forcing_quotient(const BasisPtr& basis, const ForcingProbe& g, const AdmissiblePair& pair, double a,
                                   int Mt, bool to_energy);

EstimateReport check_strichartz_homogeneous(const VerifyConfig& cfg, const AdmissiblePair& pair);
EstimateReport check_strichartz_inhomogeneous(const VerifyConfig& cfg, const AdmissiblePair& pair);
EstimateReport check_retarded(const VerifyConfig& cfg, const AdmissiblePair& pair);

/// ||S e^{-itL} f - e^{-itL} S f||_2 / ||f||_{W^{1,2}} for S in {L_j, M_j}.
double commutation_quotient(const GridFunction& f, double t, Ladder S, int j, const BasisPtr& basis);
EstimateReport check_commutation(const VerifyConfig& cfg);

struct NonlinearityQuotients {
  double plain = 0.0;   ///< ||G||_{L^{p',q'}} / (T^{1/q'-1/q} ||u||^alpha_{L^inf W^{1,2}} ||u||_{L^{p,q}})
  double ladder = 0.0;  ///< max over S of the same with S G and ||u||_{L^q W^{1,p}}
};

NonlinearityQuotients nonlinearity_quotients(const NonlinearitySpec& spec, const SpaceTimeFunction& u,
                                             const AdmissiblePair& pair);
EstimateReport check_nonlinearity_estimates(const VerifyConfig& cfg);
/// ||f||_p / ||f||_{W^{1,2}} over random probes for p in {4, 6}.
EstimateReport check_embedding(const VerifyConfig& cfg);

/// Max relative PDE residual of a converged run; passes at <= max(10 picard_tol, C_dt dt^2).
EstimateReport check_equivalence_residual(const SolutionReport& report, const NonlinearitySpec& spec, double C_dt,
                                          double picard_tol);
/// Residual at Mt and 2 Mt; passes if the ratio lies in [3, 5] or both sit at solver tolerance.
EstimateReport check_equivalence(const VerifyConfig& cfg);

/// Suite names: dispersive, strichartz, commutation, nonlinearity, equivalence, all.
std::vector<EstimateReport> run_suite(const std::string& suite, const VerifyConfig& cfg);
const std::vector<std::string>& suite_names();

/// Twice the largest Strichartz quotient among the reports, or 0 if none.
double calibrate_C(const std::vector<EstimateReport>& reports);

}  // namespace twnls
