#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "twnls/spectral.hpp"

namespace twnls {

/// Strichartz constant used for local-time estimates unless overridden.
/// Twice the largest quotient of the default Strichartz probe set.
constexpr double kDefaultCcal = 1.681792830507429;

/// G(z, t, w) = psi(x, y, t, |w|) w.
struct NonlinearitySpec {
  enum class Kind { power, custom };

  using Psi = std::function<cplx(std::span<const double> z, double t, double rho)>;
  using PsiAxis = std::function<cplx(std::span<const double> z, double t, double rho, int axis)>;

  Kind kind = Kind::power;
  double alpha = 0.0;
  cplx lambda = 0.0;  ///< power coupling, psi = lambda rho^alpha
  double growth_C = 0.0;
  Psi psi;
  PsiAxis dpsi_z;  ///< partial in coordinate axis (x_1..x_n, y_1..y_n)
  Psi dpsi_rho;

  static NonlinearitySpec power(double alpha, cplx lambda);
  static NonlinearitySpec zero();
  static NonlinearitySpec custom(double alpha, double growth_C, Psi psi, PsiAxis dpsi_z, Psi dpsi_rho);

  bool is_zero() const { return kind == Kind::power && lambda == cplx(0.0); }
  cplx eval_psi(std::span<const double> z, double t, double rho) const;
  cplx eval_dpsi_z(std::span<const double> z, double t, double rho, int axis) const;
  cplx eval_dpsi_rho(std::span<const double> z, double t, double rho) const;
};

struct GrowthCheck {
  double worst_ratio = 0.0;  ///< max over samples of max(|psi|, |d psi|, |rho d4 psi|) / (C rho^alpha)
  bool ok = true;
};

/// Samples the growth condition at random points of a box of half-width R.
GrowthCheck growth_check(const NonlinearitySpec& spec, int n, double R = 12.0, std::uint64_t seed = 1,
                         int samples = 1000);
/// Growth check plus the exponent bound alpha < 2/(n-1) for n >= 2.
void validate(const NonlinearitySpec& spec, int n);

GridFunction eval_G(const NonlinearitySpec& spec, const GridFunction& u, double t);

enum class Ladder { L, M };

/// S[psi u] = psi Su + u d4psi Re(conj(u)/|u| Su) + u dpsi, with the middle term 0 where
/// |u| <= 1e-14 max|u|; dpsi is the x_j partial for L_j and the y_j partial for M_j.
GridFunction eval_SG(const NonlinearitySpec& spec, const GridFunction& u, const GridFunction& Su, double t,
                     Ladder S, int j);

enum class InitialIterate { linear_flow, constant_data, zero };

struct SolverConfig {
  int K = 8;
  double t0 = 0.0;
  double T = 0.1;
  int Mt = 64;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double q = 0.0;  ///< 0 selects default_q
  double C_cal = kDefaultCcal;
  double lambda_T = 0.5;
  bool enforce_T0 = true;
  double parseval_gate = kParsevalGate;
  InitialIterate initial = InitialIterate::linear_flow;
  bool diagnostics = true;
  int block = 32;
};

/// Largest admissible q <= 4 for p = alpha + 2.
double default_q(double alpha, int n);
/// q from the config or its default, checked for admissibility with p = alpha + 2.
AdmissiblePair solver_pair(const SolverConfig& cfg, const NonlinearitySpec& spec, int n);

struct T0Estimate {
  double T0 = 0.0;
  double M = 0.0;
};

/// M = 2 C ||f||, T0 = ((M - C ||f||) / (C M^{1+alpha}))^{qq'/(q-q')}; f = 0 gives M = 1,
/// T0 = (2C)^{qq'/(q'-q)}.
T0Estimate estimate_T0(double f_sobolev, const NonlinearitySpec& spec, double q, double C_cal);
/// alpha qq'/(q - q'), the power of the norm that sets segment lengths.
double segment_exponent(double alpha, double q);

struct SolutionReport {
  CoeffTrajectory u;
  bool converged = false;
  int iterates = 0;
  std::vector<double> distances;
  std::vector<double> contraction_ratios;
  double final_residual = 0.0;
  std::vector<double> times;
  std::vector<double> mass_trace;
  std::vector<double> sobolev_trace;  ///< ||u(t)||_{W^{1,2}}
  std::vector<double> linf_trace;
  double sup_sobolev = 0.0;           ///< L^inf W^{1,2}
  double lq_sobolev_p = 0.0;          ///< L^q W^{1,p}
  double truncation = 0.0;            ///< max_t ||(1-P)G||_2 / ||G||_2
  double T0 = 0.0;
  double q = 0.0;
  double p = 0.0;
};

/// Linear flow e^{-i(t - t0)L} c on every node of the lattice.
Eigen::MatrixXcd linear_flow(const BasisPtr& basis, const Eigen::VectorXcd& c, const TimeLattice& lattice);

/// Coefficients of H(u) for the trajectory U, with the s-integral from the lattice origin
/// by the trapezoid rule and exact propagators. truncation receives max_t ||(1-P)G|| / ||G||.
Eigen::MatrixXcd duhamel_coeffs(const BasisPtr& basis, const TimeLattice& lattice, const Eigen::VectorXcd& cf,
                                const Eigen::MatrixXcd& U, const NonlinearitySpec& spec, double* truncation = nullptr,
                                int block = 32);

/// H(u) on the grid. Every slice of u and f must pass the Parseval gate.
SpaceTimeFunction duhamel_apply(const SpaceTimeFunction& u, const GridFunction& f, const NonlinearitySpec& spec,
                                const SolverConfig& cfg, BasisPtr basis = nullptr);

/// d(u, v) = ||u - v||_{L^{2,inf}} + ||u - v||_{L^{p,q}}.
double picard_distance(const BasisPtr& basis, const TimeLattice& lattice, const Eigen::MatrixXcd& D, double p,
                       double q);

/// Picard iteration on [t0 - T, t0 + T].
SolutionReport picard_solve(const GridFunction& f, const NonlinearitySpec& spec, const SolverConfig& cfg,
                            BasisPtr basis = nullptr);
/// Picard iteration on an arbitrary lattice from coefficients; no T0 gate.
SolutionReport picard_solve_coeffs(const BasisPtr& basis, const Eigen::VectorXcd& cf, const TimeLattice& lattice,
                                   const NonlinearitySpec& spec, const SolverConfig& cfg);

/// Strang splitting on [t0 - T, t0 + T] with step dt; nonlinear substeps on the grid,
/// linear substeps in coefficient space. Real power nonlinearities only.
struct SplitStepResult {
  CoeffTrajectory u;
  std::vector<double> mass_trace;
  double max_step_mass_change = 0.0;  ///< max relative mass change in one step
};
SplitStepResult split_step_solve(const GridFunction& f, const NonlinearitySpec& spec, double T, double dt,
                                 double t0 = 0.0, BasisPtr basis = nullptr);

/// L^{2,inf} distance between two trajectories on nested symmetric lattices with a common origin.
double trajectory_distance(const CoeffTrajectory& a, const CoeffTrajectory& b);

struct PdeResidual {
  std::vector<double> times;
  std::vector<double> relative;  ///< ||i d_t c - omega c - P G|| / ||omega c|| per interior node
  double max_relative = 0.0;
  double truncation = 0.0;       ///< max_t ||(1-P)G|| / ||G||
};

/// Residual of i u_t - L u - G in coefficient space with 4th-order time differences.
PdeResidual pde_residual(const CoeffTrajectory& u, const NonlinearitySpec& spec);

enum class Verdict { reached_horizon, blowup_suspected, representability_failure, segment_budget_exhausted };
std::string to_string(Verdict v);

struct ContinuationConfig {
  double horizon = 1.0;  ///< signed; negative continues backward
  double blowup_factor = 1e3;
  int max_segments = 2000;
  double truncation_limit = 1e-2;
};

struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  double sobolev_start = 0.0;
  double sobolev_end = 0.0;
  double T0 = 0.0;
  int iterates = 0;
  bool clipped = false;  ///< shortened to land on the horizon
};

struct ContinuationReport {
  std::vector<Segment> segments;
  Verdict verdict = Verdict::reached_horizon;
  std::string message;
  std::vector<std::pair<double, double>> growth_curve;  ///< (t, ||u(t)||_{W^{1,2}})
  double exponent = 0.0;                                ///< alpha qq'/(q - q')
  Eigen::VectorXcd final_state;
};

ContinuationReport continue_maximal(const GridFunction& f, const NonlinearitySpec& spec, const SolverConfig& cfg,
                                    const ContinuationConfig& cc, BasisPtr basis = nullptr);

/// Band-limited perturbation with unit W^{1,2} norm.
GridFunction random_perturbation(const BasisPtr& basis, int K, std::uint64_t seed);

struct StabilityRow {
  double eps = 0.0;
  double deviation = 0.0;  ///< sup_t ||u_eps(t) - u(t)||_{W^{1,2}}
  bool covered = true;
  int segments = 0;
  std::string note;
};

struct StabilityReport {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<StabilityRow> rows;
};

/// Solves from f and f + eps g in lockstep over [t0, t0 + length] and records the deviation.
StabilityReport stability_experiment(const GridFunction& f, const GridFunction& g, const std::vector<double>& eps,
                                     const NonlinearitySpec& spec, const SolverConfig& cfg, double length,
                                     BasisPtr basis = nullptr);

}  // namespace twnls
