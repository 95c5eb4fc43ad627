#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "twnls/hermite.hpp"
#include "twnls/nls.hpp"
#include "twnls/spectral.hpp"
#include "twnls/twisted.hpp"
#include "twnls/verify.hpp"

using namespace twnls;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... v) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, v...);
  return buf;
}

GridPtr default_grid() { return make_grid(1, 12.0, 256); }

GridFunction phi(int mu, int nu, const GridPtr& g, double a = 1.0) {
  GridFunction f = special_hermite({mu}, {nu}, g);
  f *= a;
  return f;
}

Outcome basis_fidelity() {
  const BasisPtr b = shared_basis(default_grid(), 4);
  const Eigen::MatrixXcd& B = b->matrix();
  const Eigen::MatrixXcd gram = (B.adjoint() * B) * b->grid().weight();
  const double dev = (gram - Eigen::MatrixXcd::Identity(b->size(), b->size())).cwiseAbs().maxCoeff();
  return {dev <= 1e-6, fmt("max |G - I| = %.3g over %d functions", dev, b->size())};
}

Outcome eigenrelation() {
  const GridPtr g = default_grid();
  double worst = 0, worst_abs = 0;
  for (int mu = 0; mu <= 4; ++mu)
    for (int nu = 0; nu <= 4; ++nu) {
      const GridFunction f = phi(mu, nu, g);
      const double w = 2 * nu + 1;
      const double r = lp_norm(apply_twisted_laplacian(f) - w * f, 2);
      worst = std::max(worst, r / (w * lp_norm(f, 2)));
      worst_abs = std::max(worst_abs, r);
    }
  return {worst <= 1e-4, fmt("max relative residual %.3g (absolute %.3g)", worst, worst_abs)};
}

Outcome propagator_algebra() {
  const BasisPtr b = shared_basis(default_grid(), 8);
  std::mt19937_64 rng(2024);
  SpectralCoeffs c{b, b->K(), testsupport::random_coeffs(*b, 8, rng), 0.0};
  double group = 0, unit = 0, half = 0, full = 0;
  for (const auto& [s, t] : std::vector<std::pair<double, double>>{{0.3, 0.9}, {-1.2, 2.5}, {4.0, -7.5}}) {
    const SpectralCoeffs st = propagate_coeffs(propagate_coeffs(c, s), t);
    group = std::max(group, (st.c - propagate_coeffs(c, s + t).c).cwiseAbs().maxCoeff());
    unit = std::max(unit, std::abs(propagate_coeffs(c, s).c.norm() - c.c.norm()));
  }
  half = (propagate_coeffs(c, pi).c + c.c).cwiseAbs().maxCoeff();
  for (double t : {0.4, 1.7, -2.9})
    full = std::max(full, (propagate_coeffs(c, t + 2 * pi).c - propagate_coeffs(c, t).c).cwiseAbs().maxCoeff());
  const bool ok = group <= 1e-12 && unit <= 1e-12 && half <= 1e-12 && full <= 1e-12;
  return {ok, fmt("group %.2g, unitarity %.2g, e^{-i pi L}f + f %.2g, 2pi period %.2g", group, unit, half, full)};
}

Outcome kernel_vs_eigen() {
  const BasisPtr b = shared_basis(make_grid(1, 10.0, 96), 4);
  std::mt19937_64 rng(4);
  const GridFunction f = testsupport::from_coeffs(b, testsupport::random_coeffs(*b, 4, rng));
  double worst = 0;
  for (double t : {0.5, 1.0, 2.0})
    worst = std::max(worst, lp_norm(propagate_kernel(f, t) - propagate_eigen(f, t, b), 2) / lp_norm(f, 2));
  return {worst <= 1e-2, fmt("max L2 distance %.3g for unit data", worst)};
}

Outcome dispersive() {
  const EstimateReport r = check_dispersive(VerifyConfig{});
  return {r.pass && r.max_quotient <= 1.05 && r.samples == 500,
          fmt("max quotient %.4g over %d samples", r.max_quotient, r.samples)};
}

struct Golden {
  const char* name;
  double max_quotient;
  double refined;
};

constexpr Golden kStrichartzGolden[] = {
    {"strichartz_homogeneous(q=4,p=4)", 0.8408964152537143, 0.8408964152537146},
    {"strichartz_inhomogeneous(q=4,p=4)", 0.06430436633250708, 0.0643052904706771},
    {"strichartz_retarded(q=4,p=4)", 0.13154084623660167, 0.13154132385783607},
    {"strichartz_homogeneous(q=3,p=6)", 0.8326831776556043, 0.8326831776556035},
    {"strichartz_inhomogeneous(q=3,p=6)", 0.04764349593159895, 0.047644695912838125},
    {"strichartz_retarded(q=3,p=6)", 0.10677010540915902, 0.10677046751774735},
};

Outcome strichartz() {
  const std::vector<EstimateReport> rs = run_suite("strichartz", VerifyConfig{});
  bool ok = rs.size() == std::size(kStrichartzGolden);
  double worst_change = 0, worst_golden = 0;
  for (std::size_t i = 0; ok && i < rs.size(); ++i) {
    const EstimateReport& r = rs[i];
    const Golden& g = kStrichartzGolden[i];
    const bool finite = std::isfinite(r.max_quotient) && std::isfinite(r.refined_quotient);
    const double change = std::abs(r.refined_quotient - r.max_quotient) / r.max_quotient;
    const double drift = std::max(std::abs(r.max_quotient / g.max_quotient - 1), std::abs(r.refined_quotient / g.refined - 1));
    worst_change = std::max(worst_change, change);
    worst_golden = std::max(worst_golden, drift);
    ok = ok && r.name == g.name && finite && r.pass && change <= 0.05 && drift <= 1e-6;
  }
  return {ok, fmt("%zu reports, max refinement change %.3g, max golden drift %.3g", rs.size(), worst_change,
                  worst_golden)};
}

Outcome commutation() {
  const EstimateReport r = check_commutation(VerifyConfig{});
  return {r.pass && r.max_quotient <= 5e-4, fmt("max relative commutator %.3g over %d samples", r.max_quotient,
                                                r.samples)};
}

double mass_drift(const SolutionReport& r) {
  const double m0 = r.mass_trace[r.u.lattice.origin()];
  double d = 0;
  for (double m : r.mass_trace) d = std::max(d, std::abs(m - m0) / m0);
  return d;
}

Outcome solver_contract() {
  const BasisPtr b = shared_basis(default_grid(), 8);
  const GridFunction f = phi(0, 0, b->grid_ptr(), 0.1);
  const NonlinearitySpec spec = NonlinearitySpec::power(2.0, 1.0);
  SolverConfig cfg;
  const SolutionReport r = picard_solve(f, spec, cfg, b);
  double max_ratio = 0;
  for (double c : r.contraction_ratios) max_ratio = std::max(max_ratio, c);
  const SplitStepResult ss = split_step_solve(f, spec, cfg.T, cfg.T / 256, 0.0, b);
  const double dist = trajectory_distance(r.u, ss.u);
  const double drift = mass_drift(r);
  const bool ok = cfg.T <= 0.5 * r.T0 && r.converged && max_ratio < 1 && r.final_residual <= 1e-8 &&
                  drift <= 1e-5 && dist <= 1e-3;
  return {ok, fmt("T0 %.3g, %d iterates, max ratio %.2g, residual %.2g, mass drift %.2g, split-step distance %.2g",
                  r.T0, r.iterates, max_ratio, r.final_residual, drift, dist)};
}

Outcome uniqueness_stability() {
  const BasisPtr b = shared_basis(default_grid(), 8);
  const GridFunction f = phi(0, 0, b->grid_ptr(), 0.1);
  const NonlinearitySpec spec = NonlinearitySpec::power(2.0, 1.0);
  SolverConfig cfg;
  cfg.diagnostics = false;
  const SolutionReport a = picard_solve(f, spec, cfg, b);
  cfg.initial = InitialIterate::constant_data;
  const SolutionReport z = picard_solve(f, spec, cfg, b);
  const double d = trajectory_distance(a.u, z.u);

  SolverConfig sc;
  sc.Mt = 16;
  const GridFunction data = phi(1, 0, b->grid_ptr(), 0.3);
  const GridFunction g = random_perturbation(b, 4, 1);
  const std::vector<double> eps{0.1, 0.05, 0.025};
  const StabilityReport st = stability_experiment(data, g, eps, spec, sc, 0.5, b);
  bool mono = st.rows.size() == eps.size();
  std::ostringstream rows;
  for (std::size_t i = 0; i < st.rows.size(); ++i) {
    mono = mono && st.rows[i].covered && (i == 0 || st.rows[i].deviation < st.rows[i - 1].deviation);
    rows << (i ? ", " : "") << fmt("%.6g", st.rows[i].deviation);
  }
  const bool ok = a.converged && z.converged && d <= 10 * cfg.picard_tol && mono;
  return {ok, fmt("start distance %.2g (limit %.2g), iterates %d/%d; %d segments, deviations ", d,
                  10 * cfg.picard_tol, a.iterates, z.iterates, st.rows.empty() ? 0 : st.rows[0].segments) +
                  rows.str()};
}

Outcome equivalence() {
  const BasisPtr b = shared_basis(default_grid(), 8);
  const GridFunction f = phi(0, 0, b->grid_ptr());
  const NonlinearitySpec spec = NonlinearitySpec::power(2.0, 1.0);
  SolverConfig sc;
  sc.enforce_T0 = false;
  sc.picard_tol = 1e-14;
  sc.picard_max = 100;
  sc.diagnostics = false;
  sc.Mt = 16;
  const double coarse = pde_residual(picard_solve(f, spec, sc, b).u, spec).max_relative;
  sc.Mt = 32;
  const double fine = pde_residual(picard_solve(f, spec, sc, b).u, spec).max_relative;
  const double ratio = coarse / fine;
  return {ratio >= 3 && ratio <= 5, fmt("residual %.3g -> %.3g, ratio %.4g", coarse, fine, ratio)};
}

Outcome blowup_mechanics() {
  const BasisPtr b = shared_basis(make_grid(1, 12.0, 128), 12);
  const GridFunction f = phi(1, 0, b->grid_ptr(), 3.0);
  SolverConfig cfg;
  cfg.K = 12;
  cfg.Mt = 16;
  cfg.C_cal = 0.34;
  ContinuationConfig cc;
  cc.horizon = 0.5;
  const ContinuationReport r = continue_maximal(f, NonlinearitySpec::power(2.0, -1.0), cfg, cc, b);
  bool ok = r.segments.size() >= 3;
  double worst = 0;
  const Segment& s0 = r.segments.front();
  const double ref = (s0.t_end - s0.t_start) * std::pow(s0.sobolev_start, r.exponent);
  int counted = 0;
  for (const Segment& s : r.segments) {
    if (s.clipped) continue;
    worst = std::max(worst, std::abs((s.t_end - s.t_start) * std::pow(s.sobolev_start, r.exponent) / ref - 1));
    ++counted;
  }
  ok = ok && worst <= 0.2;
  return {ok, fmt("verdict %s, %d segments, exponent %.3g, norm %.4g -> %.4g, max deviation %.3g",
                  to_string(r.verdict).c_str(), counted, r.exponent, s0.sobolev_start,
                  r.segments.back().sobolev_end, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<Criterion> criteria{
      {1, "basis fidelity", 60, basis_fidelity},
      {2, "eigenrelation", 0, eigenrelation},
      {3, "propagator algebra", 0, propagator_algebra},
      {4, "kernel vs eigen", 300, kernel_vs_eigen},
      {5, "dispersive estimate", 0, dispersive},
      {6, "Strichartz suites", 0, strichartz},
      {7, "commutation", 0, commutation},
      {8, "solver contract", 600, solver_contract},
      {9, "uniqueness and stability", 0, uniqueness_stability},
      {10, "equivalence residual", 0, equivalence},
      {11, "blowup-alternative mechanics", 0, blowup_mechanics},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      o.pass = false;
      o.detail += fmt("; runtime above %.0f s", c.time_limit);
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
