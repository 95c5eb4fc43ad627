#include "twnls/nls.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "twnls/errors.hpp"

namespace twnls {

NonlinearitySpec NonlinearitySpec::power(double alpha, cplx lambda) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw InvalidArgument("nonlinearity: alpha must be >= 0");
  NonlinearitySpec s;
  s.kind = Kind::power;
  s.alpha = alpha;
  s.lambda = lambda;
  s.growth_C = std::abs(lambda) * std::max(1.0, alpha);
  return s;
}

NonlinearitySpec NonlinearitySpec::zero() { return power(0.0, 0.0); }

NonlinearitySpec NonlinearitySpec::custom(double alpha, double growth_C, Psi psi, PsiAxis dpsi_z, Psi dpsi_rho) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw InvalidArgument("nonlinearity: alpha must be >= 0");
  if (!(growth_C >= 0)) throw InvalidArgument("nonlinearity: growth constant must be >= 0");
  if (!psi || !dpsi_z || !dpsi_rho) throw InvalidArgument("nonlinearity: custom kind needs psi and its partials");
  NonlinearitySpec s;
  s.kind = Kind::custom;
  s.alpha = alpha;
  s.growth_C = growth_C;
  s.psi = std::move(psi);
  s.dpsi_z = std::move(dpsi_z);
  s.dpsi_rho = std::move(dpsi_rho);
  return s;
}

cplx NonlinearitySpec::eval_psi(std::span<const double> z, double t, double rho) const {
  if (kind == Kind::power) return lambda * std::pow(rho, alpha);
  return psi(z, t, rho);
}

cplx NonlinearitySpec::eval_dpsi_z(std::span<const double> z, double t, double rho, int axis) const {
  if (kind == Kind::power) return 0.0;
  return dpsi_z(z, t, rho, axis);
}

cplx NonlinearitySpec::eval_dpsi_rho(std::span<const double> z, double t, double rho) const {
  if (kind == Kind::power) return alpha == 0 ? cplx(0.0) : lambda * alpha * std::pow(rho, alpha - 1);
  return dpsi_rho(z, t, rho);
}

GrowthCheck growth_check(const NonlinearitySpec& spec, int n, double R, std::uint64_t seed, int samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uz(-R, R), ut(-10, 10), ul(-6, 2);
  std::vector<double> z(2 * n);
  GrowthCheck r;
  for (int s = 0; s < samples; ++s) {
    for (auto& c : z) c = uz(rng);
    const double t = ut(rng);
    const double rho = std::pow(10.0, ul(rng));
    double m = std::abs(spec.eval_psi(z, t, rho));
    for (int a = 0; a < 2 * n; ++a) m = std::max(m, std::abs(spec.eval_dpsi_z(z, t, rho, a)));
    m = std::max(m, rho * std::abs(spec.eval_dpsi_rho(z, t, rho)));
    const double bound = spec.growth_C * std::pow(rho, spec.alpha);
    const double ratio = bound > 0 ? m / bound : (m > 0 ? INFINITY : 0.0);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
  }
  r.ok = r.worst_ratio <= 1.0 + 1e-12;
  return r;
}

void validate(const NonlinearitySpec& spec, int n) {
  if (n >= 2 && !(spec.alpha < 2.0 / (n - 1)))
    throw InvalidArgument("nonlinearity: alpha must be below 2/(n-1) = " + num_text(2.0 / (n - 1)));
  const GrowthCheck g = growth_check(spec, n);
  if (!g.ok)
    throw InvalidArgument("nonlinearity: growth condition violated, worst ratio " + num_text(g.worst_ratio));
}

namespace {

std::string node_message(const Grid& g, std::size_t i) {
  std::ostringstream os;
  os << "non-finite nonlinearity at node " << i << " (";
  for (int a = 0; a < g.dims(); ++a) os << (a ? ", " : "") << g.coord(i, a);
  os << ")";
  return os.str();
}

void apply_G(const NonlinearitySpec& spec, const Grid& g, const cplx* u, cplx* out, double t) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
  if (spec.kind == NonlinearitySpec::Kind::power) {
    const cplx lam = spec.lambda;
    const double a = spec.alpha;
    if (a == 2.0) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = lam * std::norm(u[i]) * u[i];
    } else {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = lam * std::pow(std::abs(u[i]), a) * u[i];
    }
  } else {
#pragma omp parallel
    {
      std::vector<double> z(g.dims());
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        g.coords(i, z);
        out[i] = spec.psi(z, t, std::abs(u[i])) * u[i];
      }
    }
  }
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (!std::isfinite(out[i].real()) || !std::isfinite(out[i].imag()))
      throw RepresentabilityError(node_message(g, i), i);
}

}  // namespace

GridFunction eval_G(const NonlinearitySpec& spec, const GridFunction& u, double t) {
  GridFunction out(u.grid_ptr());
  apply_G(spec, u.grid(), u.data(), out.data(), t);
  return out;
}

GridFunction eval_SG(const NonlinearitySpec& spec, const GridFunction& u, const GridFunction& Su, double t, Ladder S,
                     int j) {
  require_same_grid(u.grid(), Su.grid());
  const Grid& g = u.grid();
  if (j < 0 || j >= g.n()) throw InvalidArgument("eval_SG: component index out of range");
  const int axis = S == Ladder::L ? j : g.n() + j;
  double umax = 0;
  for (std::size_t i = 0; i < u.size(); ++i) umax = std::max(umax, std::abs(u[i]));
  GridFunction out(u.grid_ptr());
  std::vector<double> z(g.dims());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, z);
    const double rho = std::abs(u[i]);
    cplx v = spec.eval_psi(z, t, rho) * Su[i] + u[i] * spec.eval_dpsi_z(z, t, rho, axis);
    if (rho > 1e-14 * umax) v += u[i] * spec.eval_dpsi_rho(z, t, rho) * std::real(std::conj(u[i]) / rho * Su[i]);
    out[i] = v;
  }
  return out;
}

double default_q(double alpha, int n) {
  const double p = alpha + 2.0;
  const double s = n * (0.5 - 1.0 / p);
  return s <= 0 ? 4.0 : std::min(4.0, 1.0 / s);
}

AdmissiblePair solver_pair(const SolverConfig& cfg, const NonlinearitySpec& spec, int n) {
  const double q = cfg.q > 0 ? cfg.q : default_q(spec.alpha, n);
  return AdmissiblePair::make(q, spec.alpha + 2.0, n);
}

double segment_exponent(double alpha, double q) {
  const double qc = q / (q - 1);
  return alpha * q * qc / (q - qc);
}

T0Estimate estimate_T0(double f_sobolev, const NonlinearitySpec& spec, double q, double C_cal) {
  if (!(f_sobolev >= 0)) throw InvalidArgument("estimate_T0: norm must be >= 0");
  if (!(C_cal > 0)) throw InvalidArgument("estimate_T0: C_cal must be positive");
  if (!(q > 2)) throw InvalidArgument("estimate_T0: q must exceed 2");
  const double qc = q / (q - 1);
  const double e = q * qc / (q - qc);
  if (f_sobolev == 0) return {std::pow(2 * C_cal, -e), 1.0};
  const double M = 2 * C_cal * f_sobolev;
  const double base = (M - C_cal * f_sobolev) / (C_cal * std::pow(M, 1 + spec.alpha));
  return {std::pow(base, e), M};
}

Eigen::MatrixXcd linear_flow(const BasisPtr& basis, const Eigen::VectorXcd& c, const TimeLattice& lattice) {
  const Eigen::VectorXd& w = basis->eigenvalues();
  Eigen::MatrixXcd U(c.size(), lattice.size());
  for (int m = 0; m < lattice.size(); ++m) {
    const double s = lattice.time(m) - lattice.t0;
    for (Eigen::Index j = 0; j < c.size(); ++j) U(j, m) = std::polar(1.0, -s * w[j]) * c[j];
  }
  return U;
}

namespace {

// Nonlinearity coefficients P G(u(t_m)) for every node; truncation = max ||(1-P)G|| / ||G||.
Eigen::MatrixXcd nonlinearity_coeffs(const BasisPtr& basis, const TimeLattice& lattice, const Eigen::MatrixXcd& U,
                                     const NonlinearitySpec& spec, double* truncation, int block) {
  Eigen::MatrixXcd Gc(U.rows(), U.cols());
  if (spec.is_zero()) {
    Gc.setZero();
    if (truncation) *truncation = 0.0;
    return Gc;
  }
  const Grid& g = basis->grid();
  const double w = g.weight();
  double trunc = 0;
  Eigen::MatrixXcd G;
  for_each_slice_block(
      basis, U,
      [&](int i0, const Eigen::MatrixXcd& S) {
        G.resize(S.rows(), S.cols());
        for (int k = 0; k < S.cols(); ++k) {
          try {
            apply_G(spec, g, S.col(k).data(), G.col(k).data(), lattice.time(i0 + k));
          } catch (const RepresentabilityError& e) {
            throw RepresentabilityError(std::string(e.what()) + " at time index " + std::to_string(i0 + k), i0 + k);
          }
        }
        Gc.middleCols(i0, S.cols()) = basis->analyze(G);
        for (int k = 0; k < S.cols(); ++k) {
          const double gn = G.col(k).squaredNorm() * w;
          if (gn > 0)
            trunc = std::max(trunc, std::sqrt(std::max(0.0, gn - Gc.col(i0 + k).squaredNorm()) / gn));
        }
      },
      block);
  if (truncation) *truncation = trunc;
  return Gc;
}

}  // namespace

Eigen::MatrixXcd duhamel_coeffs(const BasisPtr& basis, const TimeLattice& lattice, const Eigen::VectorXcd& cf,
                                const Eigen::MatrixXcd& U, const NonlinearitySpec& spec, double* truncation,
                                int block) {
  if (U.cols() != lattice.size() || U.rows() != basis->size())
    throw InvalidArgument("duhamel: trajectory shape does not match basis and lattice");
  Eigen::MatrixXcd H = linear_flow(basis, cf, lattice);
  if (spec.is_zero()) {
    if (truncation) *truncation = 0.0;
    return H;
  }
  const Eigen::MatrixXcd Gc = nonlinearity_coeffs(basis, lattice, U, spec, truncation, block);
  const Eigen::VectorXd& w = basis->eigenvalues();
  const int o = lattice.origin();
  const cplx mi(0.0, -1.0);
  for (int dir : {1, -1}) {
    const double step = dir * lattice.dt;
    Eigen::VectorXcd E(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) E[j] = std::polar(1.0, -w[j] * step);
    Eigen::VectorXcd I = Eigen::VectorXcd::Zero(w.size());
    for (int m = o + dir; m >= 0 && m < lattice.size(); m += dir) {
      I = E.cwiseProduct(I) + (0.5 * step) * (E.cwiseProduct(Gc.col(m - dir)) + Gc.col(m));
      H.col(m) += mi * I;
    }
  }
  return H;
}

double picard_distance(const BasisPtr& basis, const TimeLattice& lattice, const Eigen::MatrixXcd& D, double p,
                       double q) {
  std::vector<double> l2(D.cols());
  for (int i = 0; i < D.cols(); ++i) l2[i] = D.col(i).norm();
  const double sup = *std::max_element(l2.begin(), l2.end());
  const std::vector<double> lp = p == 2.0 ? l2 : slice_lp_norms(basis, D, p);
  return sup + mixed_norm_from_slices(lp, lattice, q);
}

namespace {

struct SlicePair {
  double s2;
  double sp;
};

SlicePair sobolev_pair(const GridFunction& u, double p) {
  double s2 = lp_norm(u, 2), sp = lp_norm(u, p);
  for (int j = 0; j < u.grid().n(); ++j) {
    const GridFunction lu = apply_L(u, j), mu = apply_M(u, j);
    s2 = std::max({s2, lp_norm(lu, 2), lp_norm(mu, 2)});
    sp = std::max({sp, lp_norm(lu, p), lp_norm(mu, p)});
  }
  return {s2, sp};
}

GridFunction state(const BasisPtr& basis, const Eigen::VectorXcd& c) {
  return synthesize(SpectralCoeffs{basis, basis->K(), c, 0.0});
}

double sobolev_of(const BasisPtr& basis, const Eigen::VectorXcd& c) {
  return sobolev_norm(state(basis, c), 2).norm;
}

void fill_diagnostics(SolutionReport& r, const NonlinearitySpec& spec) {
  const CoeffTrajectory& u = r.u;
  const int m = u.size();
  r.times.resize(m);
  r.mass_trace.resize(m);
  r.sobolev_trace.resize(m);
  r.linf_trace.resize(m);
  std::vector<double> sp(m);
  for (int i = 0; i < m; ++i) {
    r.times[i] = u.lattice.time(i);
    r.mass_trace[i] = u.c.col(i).norm();
    const GridFunction s = u.slice(i);
    r.linf_trace[i] = lp_norm(s, INFINITY);
    const SlicePair sv = sobolev_pair(s, spec.alpha + 2.0);
    r.sobolev_trace[i] = sv.s2;
    sp[i] = sv.sp;
  }
  r.sup_sobolev = *std::max_element(r.sobolev_trace.begin(), r.sobolev_trace.end());
  r.lq_sobolev_p = mixed_norm_from_slices(sp, u.lattice, r.q);
}

}  // namespace

SolutionReport picard_solve_coeffs(const BasisPtr& basis, const Eigen::VectorXcd& cf, const TimeLattice& lattice,
                                   const NonlinearitySpec& spec, const SolverConfig& cfg) {
  if (!(cfg.picard_tol > 0)) throw InvalidArgument("solver: picard_tol must be positive");
  if (cfg.picard_max < 1) throw InvalidArgument("solver: picard_max must be at least 1");
  const AdmissiblePair pair = solver_pair(cfg, spec, basis->grid().n());
  SolutionReport r;
  r.q = pair.q;
  r.p = pair.p;
  r.u.basis = basis;
  r.u.lattice = lattice;

  Eigen::MatrixXcd U;
  switch (cfg.initial) {
    case InitialIterate::linear_flow: U = linear_flow(basis, cf, lattice); break;
    case InitialIterate::constant_data: U = cf.replicate(1, lattice.size()); break;
    case InitialIterate::zero: U = Eigen::MatrixXcd::Zero(cf.size(), lattice.size()); break;
  }
  int above_one = 0;
  for (int it = 1; it <= cfg.picard_max; ++it) {
    Eigen::MatrixXcd next = duhamel_coeffs(basis, lattice, cf, U, spec, &r.truncation, cfg.block);
    const double d = picard_distance(basis, lattice, next - U, pair.p, pair.q);
    if (!r.distances.empty()) {
      const double ratio = r.distances.back() > 0 ? d / r.distances.back() : 0.0;
      r.contraction_ratios.push_back(ratio);
      above_one = ratio >= 1.0 ? above_one + 1 : 0;
    }
    r.distances.push_back(d);
    U = std::move(next);
    r.iterates = it;
    if (d <= cfg.picard_tol) {
      r.converged = true;
      break;
    }
    if (above_one >= 3) {
      std::ostringstream os;
      os << "Picard iteration is not contracting (ratio >= 1 for 3 consecutive iterations, last d = " << d
         << "); reduce T";
      throw NonContractionError(os.str());
    }
  }
  const Eigen::MatrixXcd check = duhamel_coeffs(basis, lattice, cf, U, spec, nullptr, cfg.block);
  r.final_residual = picard_distance(basis, lattice, check - U, pair.p, pair.q);
  r.u.c = std::move(U);
  if (cfg.diagnostics) fill_diagnostics(r, spec);
  return r;
}

SolutionReport picard_solve(const GridFunction& f, const NonlinearitySpec& spec, const SolverConfig& cfg,
                            BasisPtr basis) {
  const int n = f.grid().n();
  validate(spec, n);
  if (!basis) basis = shared_basis(f.grid_ptr(), cfg.K);
  require_same_grid(f.grid(), basis->grid());
  if (!f.all_finite()) throw RepresentabilityError("initial data has non-finite samples", f.first_nonfinite());
  const SpectralCoeffs cf = analyze(f, basis);
  if (cf.parseval_residual > cfg.parseval_gate)
    throw RepresentabilityError("initial data not representable at K = " + std::to_string(basis->K()) +
                                " (Parseval residual " + num_text(cf.parseval_residual) + ")");
  const AdmissiblePair pair = solver_pair(cfg, spec, n);
  if (!(cfg.lambda_T > 0 && cfg.lambda_T <= 1)) throw InvalidArgument("solver: lambda_T must lie in (0, 1]");
  const double T0 = estimate_T0(sobolev_norm(f, 2).norm, spec, pair.q, cfg.C_cal).T0;
  if (cfg.enforce_T0 && !spec.is_zero() && cfg.T > cfg.lambda_T * T0) {
    std::ostringstream os;
    os << "T = " << cfg.T << " exceeds lambda T0 = " << cfg.lambda_T * T0 << " (T0 = " << T0
       << ", C_cal = " << cfg.C_cal << "); use T <= " << cfg.lambda_T * T0;
    throw TimeStepTooLarge(os.str(), cfg.lambda_T * T0);
  }
  SolutionReport r = picard_solve_coeffs(basis, cf.c, TimeLattice::symmetric(cfg.t0, cfg.T, cfg.Mt), spec, cfg);
  r.T0 = T0;
  return r;
}

SpaceTimeFunction duhamel_apply(const SpaceTimeFunction& u, const GridFunction& f, const NonlinearitySpec& spec,
                                const SolverConfig& cfg, BasisPtr basis) {
  if (!basis) basis = shared_basis(f.grid_ptr(), cfg.K);
  require_same_grid(u.grid(), basis->grid());
  const SpectralCoeffs cf = analyze(f, basis);
  if (cf.parseval_residual > cfg.parseval_gate) throw RepresentabilityError("duhamel: initial data not representable");
  Eigen::MatrixXcd U(basis->size(), u.size());
  for (int i = 0; i < u.size(); ++i) {
    const SpectralCoeffs c = analyze(u[i], basis);
    if (c.parseval_residual > cfg.parseval_gate)
      throw RepresentabilityError("duhamel: slice " + std::to_string(i) + " not representable", i);
    U.col(i) = c.c;
  }
  CoeffTrajectory h{basis, u.lattice(), duhamel_coeffs(basis, u.lattice(), cf.c, U, spec, nullptr, cfg.block)};
  return h.to_space_time();
}

SplitStepResult split_step_solve(const GridFunction& f, const NonlinearitySpec& spec, double T, double dt, double t0,
                                 BasisPtr basis) {
  if (spec.kind != NonlinearitySpec::Kind::power || spec.lambda.imag() != 0)
    throw InvalidArgument("split_step_solve: needs a power nonlinearity with real coupling");
  if (!(T > 0) || !(dt > 0)) throw InvalidArgument("split_step_solve: T and dt must be positive");
  const int Mt = static_cast<int>(std::lround(T / dt));
  if (Mt < 1 || std::abs(Mt * dt - T) > 1e-9 * T) throw InvalidArgument("split_step_solve: T must be a multiple of dt");
  if (!basis) basis = shared_basis(f.grid_ptr(), 8);
  const SpectralCoeffs cf = analyze(f, basis);
  if (cf.parseval_residual > kParsevalGate) throw RepresentabilityError("split_step_solve: data not representable");

  SplitStepResult r;
  r.u.basis = basis;
  r.u.lattice = TimeLattice::symmetric(t0, T, Mt);
  r.u.c.resize(basis->size(), 2 * Mt + 1);
  r.mass_trace.assign(2 * Mt + 1, 0.0);
  const int o = Mt;
  r.u.c.col(o) = cf.c;
  r.mass_trace[o] = cf.c.norm();
  const double lam = spec.lambda.real(), a = spec.alpha;
  const Eigen::VectorXd& w = basis->eigenvalues();
  const Eigen::Index nodes = static_cast<Eigen::Index>(basis->grid().size());
  const double gw = basis->grid().weight();

  auto nonlinear = [&](Eigen::VectorXcd& u, double tau) {
    if (lam == 0) return;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < nodes; ++i) u[i] *= std::polar(1.0, -lam * std::pow(std::abs(u[i]), a) * tau);
  };
  for (int dir : {1, -1}) {
    const double h = dir * T / Mt;
    Eigen::VectorXcd E(w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) E[j] = std::polar(1.0, -w[j] * h);
    Eigen::VectorXcd u = basis->matrix() * cf.c;
    double mass = std::sqrt(u.squaredNorm() * gw);
    for (int k = 1; k <= Mt; ++k) {
      nonlinear(u, 0.5 * h);
      Eigen::VectorXcd c = basis->analyze(u);
      c = E.cwiseProduct(c);
      u.noalias() = basis->matrix() * c;
      nonlinear(u, 0.5 * h);
      const Eigen::VectorXcd rec = basis->analyze(u);
      r.u.c.col(o + dir * k) = rec;
      const double m1 = std::sqrt(u.squaredNorm() * gw);
      r.mass_trace[o + dir * k] = rec.norm();
      if (mass > 0) r.max_step_mass_change = std::max(r.max_step_mass_change, std::abs(m1 - mass) / mass);
      mass = m1;
    }
  }
  return r;
}

double trajectory_distance(const CoeffTrajectory& a, const CoeffTrajectory& b) {
  const CoeffTrajectory& coarse = a.size() <= b.size() ? a : b;
  const CoeffTrajectory& fine = a.size() <= b.size() ? b : a;
  const int Mc = coarse.lattice.m_hi, Mf = fine.lattice.m_hi;
  if (coarse.lattice.m_lo != -Mc || fine.lattice.m_lo != -Mf || coarse.lattice.t0 != fine.lattice.t0 ||
      Mf % Mc != 0 || std::abs(coarse.lattice.dt - fine.lattice.dt * (Mf / Mc)) > 1e-12 * std::abs(coarse.lattice.dt))
    throw InvalidArgument("trajectory_distance: lattices are not nested");
  if (coarse.c.rows() != fine.c.rows()) throw InvalidArgument("trajectory_distance: bases differ");
  const int stride = Mf / Mc;
  double d = 0;
  for (int i = 0; i < coarse.size(); ++i) d = std::max(d, (coarse.c.col(i) - fine.c.col(i * stride)).norm());
  return d;
}

PdeResidual pde_residual(const CoeffTrajectory& u, const NonlinearitySpec& spec) {
  const int m = u.size();
  if (m < 5) throw InvalidArgument("pde_residual: need at least 5 time nodes for the stencil");
  PdeResidual r;
  const Eigen::MatrixXcd Gc = nonlinearity_coeffs(u.basis, u.lattice, u.c, spec, &r.truncation, 32);
  const Eigen::VectorXd& w = u.basis->eigenvalues();
  const double dt = u.lattice.dt;
  const cplx I(0.0, 1.0);
  for (int k = 2; k < m - 2; ++k) {
    const Eigen::VectorXcd dc = (u.c.col(k - 2) - 8.0 * u.c.col(k - 1) + 8.0 * u.c.col(k + 1) - u.c.col(k + 2)) / (12 * dt);
    const Eigen::VectorXcd lu = w.cast<cplx>().cwiseProduct(u.c.col(k));
    const Eigen::VectorXcd res = I * dc - lu - Gc.col(k);
    const double denom = lu.norm();
    r.times.push_back(u.lattice.time(k));
    r.relative.push_back(denom > 0 ? res.norm() / denom : res.norm());
  }
  r.max_relative = *std::max_element(r.relative.begin(), r.relative.end());
  return r;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::reached_horizon: return "reached_horizon";
    case Verdict::blowup_suspected: return "blowup_suspected";
    case Verdict::representability_failure: return "representability_failure";
    case Verdict::segment_budget_exhausted: return "segment_budget_exhausted";
  }
  return "unknown";
}

ContinuationReport continue_maximal(const GridFunction& f, const NonlinearitySpec& spec, const SolverConfig& cfg,
                                    const ContinuationConfig& cc, BasisPtr basis) {
  const int n = f.grid().n();
  validate(spec, n);
  if (cc.horizon == 0 || !std::isfinite(cc.horizon)) throw InvalidArgument("continuation: horizon must be nonzero");
  if (!basis) basis = shared_basis(f.grid_ptr(), cfg.K);
  const SpectralCoeffs cf = analyze(f, basis);
  if (cf.parseval_residual > cfg.parseval_gate)
    throw RepresentabilityError("continuation: initial data not representable");
  const AdmissiblePair pair = solver_pair(cfg, spec, n);
  ContinuationReport rep;
  rep.exponent = segment_exponent(spec.alpha, pair.q);
  const double dir = cc.horizon > 0 ? 1.0 : -1.0;
  const double total = std::abs(cc.horizon);
  Eigen::VectorXcd c = cf.c;
  double t = cfg.t0;
  const double s0 = sobolev_of(basis, c);
  double s = s0;
  rep.growth_curve.emplace_back(t, s);
  for (;;) {
    if (static_cast<int>(rep.segments.size()) >= cc.max_segments) {
      rep.verdict = Verdict::segment_budget_exhausted;
      rep.message = "segment budget of " + std::to_string(cc.max_segments) + " exhausted at t = " + num_text(t);
      break;
    }
    if (s0 > 0 && s > cc.blowup_factor * s0) {
      rep.verdict = Verdict::blowup_suspected;
      rep.message = "Sobolev norm exceeded " + num_text(cc.blowup_factor) + " x initial at t = " + num_text(t);
      break;
    }
    Segment seg;
    seg.t_start = t;
    seg.sobolev_start = s;
    seg.T0 = estimate_T0(s, spec, pair.q, cfg.C_cal).T0;
    double len = cfg.lambda_T * seg.T0;
    const double remaining = total - std::abs(t - cfg.t0);
    if (len >= remaining * (1 - 1e-12)) {
      len = remaining;
      seg.clipped = true;
    }
    const TimeLattice lat = TimeLattice::one_sided(t, dir * len, cfg.Mt);
    SolutionReport sr;
    try {
      sr = picard_solve_coeffs(basis, c, lat, spec, cfg);
    } catch (const RepresentabilityError& e) {
      rep.verdict = Verdict::representability_failure;
      rep.message = e.what();
      break;
    }
    if (!sr.converged)
      throw NonContractionError("continuation: Picard did not converge within " + std::to_string(cfg.picard_max) +
                                " iterations on segment starting at t = " + num_text(t));
    c = sr.u.c.col(sr.u.size() - 1);
    t = lat.end();
    seg.t_end = t;
    seg.iterates = sr.iterates;
    if (sr.sobolev_trace.empty()) {
      s = sobolev_of(basis, c);
      rep.growth_curve.emplace_back(t, s);
    } else {
      s = sr.sobolev_trace.back();
      for (int i = 1; i < sr.u.size(); ++i) rep.growth_curve.emplace_back(sr.times[i], sr.sobolev_trace[i]);
    }
    seg.sobolev_end = s;
    rep.segments.push_back(seg);
    if (sr.truncation > cc.truncation_limit) {
      rep.verdict = Verdict::representability_failure;
      rep.message = "nonlinearity truncation " + num_text(sr.truncation) + " exceeds " +
                    num_text(cc.truncation_limit) + " at t = " + num_text(t);
      break;
    }
    if (seg.clipped) {
      rep.verdict = Verdict::reached_horizon;
      break;
    }
  }
  rep.final_state = c;
  return rep;
}

GridFunction random_perturbation(const BasisPtr& basis, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(basis->size());
  for (int j = 0; j < basis->size(); ++j)
    if (basis->indices()[j].mu.order() <= K && basis->levels()[j] <= K) c[j] = cplx(nd(rng), nd(rng));
  GridFunction g = state(basis, c);
  g *= 1.0 / sobolev_norm(g, 2).norm;
  return g;
}

StabilityReport stability_experiment(const GridFunction& f, const GridFunction& g, const std::vector<double>& eps,
                                     const NonlinearitySpec& spec, const SolverConfig& cfg, double length,
                                     BasisPtr basis) {
  const int n = f.grid().n();
  validate(spec, n);
  if (!(length > 0)) throw InvalidArgument("stability: interval length must be positive");
  if (!basis) basis = shared_basis(f.grid_ptr(), cfg.K);
  const SpectralCoeffs cf = analyze(f, basis), cg = analyze(g, basis);
  if (cf.parseval_residual > cfg.parseval_gate || cg.parseval_residual > cfg.parseval_gate)
    throw RepresentabilityError("stability: data or perturbation not representable");
  const AdmissiblePair pair = solver_pair(cfg, spec, n);
  StabilityReport rep;
  rep.t_start = cfg.t0;
  rep.t_end = cfg.t0 + length;
  for (double e : eps) {
    StabilityRow row;
    row.eps = e;
    Eigen::VectorXcd c0 = cf.c, c1 = cf.c + e * cg.c;
    double t = cfg.t0;
    try {
      for (;;) {
        if (row.segments >= 10000) throw NumericalError("segment budget exhausted");
        const double T0 = std::min(estimate_T0(sobolev_of(basis, c0), spec, pair.q, cfg.C_cal).T0,
                                   estimate_T0(sobolev_of(basis, c1), spec, pair.q, cfg.C_cal).T0);
        double len = cfg.lambda_T * T0;
        const double remaining = rep.t_end - t;
        const bool last = len >= remaining * (1 - 1e-12);
        if (last) len = remaining;
        const TimeLattice lat = TimeLattice::one_sided(t, len, cfg.Mt);
        SolverConfig quiet = cfg;
        quiet.diagnostics = false;
        const SolutionReport r0 = picard_solve_coeffs(basis, c0, lat, spec, quiet);
        const SolutionReport r1 = picard_solve_coeffs(basis, c1, lat, spec, quiet);
        if (!r0.converged || !r1.converged) throw NonContractionError("Picard did not converge");
        for (int i = row.segments == 0 ? 0 : 1; i < lat.size(); ++i)
          row.deviation = std::max(row.deviation, sobolev_of(basis, r1.u.c.col(i) - r0.u.c.col(i)));
        c0 = r0.u.c.col(lat.size() - 1);
        c1 = r1.u.c.col(lat.size() - 1);
        t = lat.end();
        ++row.segments;
        if (last) break;
      }
    } catch (const NumericalError& err) {
      row.covered = false;
      row.note = err.what();
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace twnls
