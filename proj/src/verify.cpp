#include "twnls/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "twnls/errors.hpp"
#include "twnls/hermite.hpp"
#include "twnls/twisted.hpp"

namespace twnls {

namespace {

std::string pair_label(const AdmissiblePair& pr) {
  std::ostringstream os;
  os << "(q=" << pr.q << ",p=" << pr.p << ")";
  return os.str();
}

double conj_exponent(double p) { return std::isinf(p) ? 1.0 : p / (p - 1); }

double relative_change(double coarse, double fine) {
  return coarse > 0 ? std::abs(fine / coarse - 1) : (fine == 0 ? 0.0 : INFINITY);
}

GridPtr refined_grid(const VerifyConfig& cfg) { return make_grid(cfg.n, cfg.R, 2 * cfg.N); }

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t out[2];
  ss.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::uint64_t index_key(const BasisIndex& ix) {
  std::uint64_t k = 1469598103934665603ull;
  for (int v : ix.mu.c) k = (k ^ static_cast<std::uint64_t>(v + 1)) * 1099511628211ull;
  k = (k ^ 0xffull) * 1099511628211ull;
  for (int v : ix.nu.c) k = (k ^ static_cast<std::uint64_t>(v + 1)) * 1099511628211ull;
  return k;
}

Eigen::VectorXcd unit_vector(const SpectralBasis& basis, int j) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(basis.size());
  c[j] = 1.0;
  return c;
}

int ground_index(const SpectralBasis& basis) {
  const int n = basis.grid().n();
  return basis.find(MultiIndex{std::vector<int>(n, 0)}, MultiIndex{std::vector<int>(n, 0)});
}

GridFunction coeff_state(const BasisPtr& basis, const Eigen::VectorXcd& c) {
  return synthesize(SpectralCoeffs{basis, basis->K(), c, 0.0});
}

void finish_refinement(EstimateReport& r) {
  const double change = relative_change(r.max_quotient, r.refined_quotient);
  r.pass = std::isfinite(r.max_quotient) && std::isfinite(r.refined_quotient) && change <= kRefinementTolerance;
  std::ostringstream os;
  os << "refinement change " << change;
  r.note = os.str();
}

}  // namespace

Eigen::VectorXcd random_probe(const SpectralBasis& basis, int K, std::uint64_t seed, int index) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    const BasisIndex& ix = basis.indices()[j];
    if (ix.mu.order() > K || ix.nu.order() > K) continue;
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(index), index_key(ix)));
    const double re = nd(rng), im = nd(rng);
    c[j] = cplx(re, im);
  }
  return c / c.norm();
}

double dispersive_quotient(const GridFunction& f, double t, double p, const BasisPtr& basis) {
  if (std::abs(std::sin(t)) < 1e-12) throw InvalidArgument("dispersive_quotient: t lies on pi Z");
  const int n = f.grid().n();
  const GridFunction u = propagate_eigen(f, t, basis);
  const double e = std::isinf(p) ? 2.0 * n * 0.5 : 2.0 * n * (0.5 - 1.0 / p);
  const double bound = 2.0 * std::pow(std::abs(std::sin(t)), -e) * lp_norm(f, conj_exponent(p));
  return lp_norm(u, p) / bound;
}

EstimateReport check_dispersive(const VerifyConfig& cfg) {
  for (double t : cfg.t_samples) {
    const double d = std::abs(std::remainder(t, M_PI));
    if (d < 0.2) throw InvalidArgument("check_dispersive: time samples must stay 0.2 away from pi Z");
  }
  EstimateReport r;
  r.name = "dispersive";
  r.seed = cfg.seed;
  auto run = [&](GridPtr grid, bool record) {
    const BasisPtr basis = shared_basis(grid, cfg.dispersive_K);
    const Eigen::VectorXd& w = basis->eigenvalues();
    const int nt = static_cast<int>(cfg.t_samples.size());
    double worst = 0;
    for (int i = 0; i < cfg.dispersive_probes; ++i) {
      const Eigen::VectorXcd c = random_probe(*basis, cfg.dispersive_K, cfg.seed, i);
      const GridFunction f = coeff_state(basis, c);
      Eigen::MatrixXcd C(c.size(), nt);
      for (int k = 0; k < nt; ++k)
        for (Eigen::Index j = 0; j < c.size(); ++j) C(j, k) = std::polar(1.0, -w[j] * cfg.t_samples[k]) * c[j];
      for (double p : cfg.dispersive_p) {
        const double e = std::isinf(p) ? cfg.n : 2.0 * cfg.n * (0.5 - 1.0 / p);
        const double fp = lp_norm(f, conj_exponent(p));
        const std::vector<double> lhs = slice_lp_norms(basis, C, p);
        for (int k = 0; k < nt; ++k) {
          const double t = cfg.t_samples[k];
          const double q = lhs[k] / (2.0 * std::pow(std::abs(std::sin(t)), -e) * fp);
          worst = std::max(worst, q);
          if (record) r.detail.push_back({"probe" + std::to_string(i), t, p, q});
        }
      }
    }
    return worst;
  };
  r.max_quotient = run(make_grid(cfg.n, cfg.R, cfg.N), true);
  r.samples = static_cast<int>(r.detail.size());
  r.refined_quotient = cfg.refine ? run(refined_grid(cfg), false) : NAN;
  r.pass = r.max_quotient <= kDispersiveCeiling && (!cfg.refine || r.refined_quotient <= kDispersiveCeiling);
  r.note = "ceiling " + num_text(kDispersiveCeiling);
  return r;
}

double strichartz_homogeneous_quotient(const BasisPtr& basis, const Eigen::VectorXcd& c, const AdmissiblePair& pair,
                                       double a, int Mt) {
  const TimeLattice lat = TimeLattice::symmetric(0.0, a, Mt);
  const Eigen::MatrixXcd U = linear_flow(basis, c, lat);
  return mixed_norm_from_slices(slice_lp_norms(basis, U, pair.p), lat, pair.q) / c.norm();
}

ForcingProbe random_forcing(const SpectralBasis& basis, int K, std::uint64_t seed, int index) {
  std::mt19937_64 rng(mix(seed, 0x5eedull, static_cast<std::uint64_t>(index)));
  std::uniform_real_distribution<double> uk(-3.0, 3.0);
  ForcingProbe g;
  for (int k = 0; k < 2; ++k) {
    g.kappa.push_back(uk(rng));
    g.c.push_back(random_probe(basis, K, seed, 100000 + 2 * index + k));
  }
  return g;
}

Eigen::MatrixXcd forcing_coeffs(const BasisPtr& basis, const ForcingProbe& g, const TimeLattice& lattice) {
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(basis->size(), lattice.size());
  for (int m = 0; m < lattice.size(); ++m)
    for (std::size_t k = 0; k < g.c.size(); ++k) G.col(m) += std::polar(1.0, g.kappa[k] * lattice.time(m)) * g.c[k];
  return G;
}

Eigen::MatrixXcd retarded_coeffs(const BasisPtr& basis, const ForcingProbe& g, const TimeLattice& lattice) {
  const Eigen::VectorXd& w = basis->eigenvalues();
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(basis->size(), lattice.size());
  const cplx I(0.0, 1.0);
  for (int m = 0; m < lattice.size(); ++m) {
    const double t = lattice.time(m);
    for (std::size_t k = 0; k < g.c.size(); ++k)
      for (int j = 0; j < basis->size(); ++j) {
        const double s = w[j] + g.kappa[k];
        const cplx integral = std::abs(s * t) < 1e-12 ? cplx(t) : (std::exp(I * (s * t)) - 1.0) / (I * s);
        H(j, m) += std::polar(1.0, -w[j] * t) * integral * g.c[k][j];
      }
  }
  return H;
}

double strichartz_forcing_quotient(const BasisPtr& basis, const ForcingProbe& g, const AdmissiblePair& pair, double a,
                                   int Mt, bool to_energy) {
  const TimeLattice lat = TimeLattice::symmetric(0.0, a, Mt);
  const Eigen::MatrixXcd G = forcing_coeffs(basis, g, lat);
  const Eigen::MatrixXcd H = retarded_coeffs(basis, g, lat);
  const double den = mixed_norm_from_slices(slice_lp_norms(basis, G, pair.p_conj()), lat, pair.q_conj());
  double num = 0;
  if (to_energy) {
    for (int m = 0; m < H.cols(); ++m) num = std::max(num, H.col(m).norm());
  } else {
    num = mixed_norm_from_slices(slice_lp_norms(basis, H, pair.p), lat, pair.q);
  }
  return num / den;
}

namespace {

template <class Fn>
EstimateReport strichartz_suite(const VerifyConfig& cfg, const std::string& name, Fn&& quotient) {
  EstimateReport r;
  r.name = name;
  r.seed = cfg.seed;
  auto run = [&](GridPtr grid, int Mt, bool record) {
    const BasisPtr basis = shared_basis(grid, cfg.strichartz_K);
    double worst = 0;
    for (int i = 0; i < cfg.strichartz_probes; ++i) {
      const double q = quotient(basis, i, Mt);
      worst = std::max(worst, q);
      if (record) r.detail.push_back({"probe" + std::to_string(i), cfg.a, 0.0, q});
    }
    return worst;
  };
  r.max_quotient = run(make_grid(cfg.n, cfg.R, cfg.N), cfg.Mt, true);
  r.samples = static_cast<int>(r.detail.size());
  if (cfg.refine) {
    r.refined_quotient = run(refined_grid(cfg), 2 * cfg.Mt, false);
    finish_refinement(r);
  } else {
    r.refined_quotient = NAN;
    r.pass = std::isfinite(r.max_quotient);
  }
  return r;
}

}  // namespace

EstimateReport check_strichartz_homogeneous(const VerifyConfig& cfg, const AdmissiblePair& pair) {
  EstimateReport r = strichartz_suite(cfg, "strichartz_homogeneous" + pair_label(pair),
                                      [&](const BasisPtr& b, int i, int Mt) {
                                        const Eigen::VectorXcd c = i == 0 ? unit_vector(*b, ground_index(*b))
                                                                          : random_probe(*b, cfg.strichartz_K, cfg.seed, i);
                                        return strichartz_homogeneous_quotient(b, c, pair, cfg.a, Mt);
                                      });
  for (auto& d : r.detail) d.p = pair.p;
  if (!r.detail.empty()) r.detail[0].probe = "phi00";
  return r;
}

EstimateReport check_strichartz_inhomogeneous(const VerifyConfig& cfg, const AdmissiblePair& pair) {
  EstimateReport r = strichartz_suite(cfg, "strichartz_inhomogeneous" + pair_label(pair),
                                      [&](const BasisPtr& b, int i, int Mt) {
                                        return strichartz_forcing_quotient(
                                            b, random_forcing(*b, cfg.strichartz_K, cfg.seed, i), pair, cfg.a, Mt, false);
                                      });
  for (auto& d : r.detail) d.p = pair.p;
  return r;
}

EstimateReport check_retarded(const VerifyConfig& cfg, const AdmissiblePair& pair) {
  EstimateReport r = strichartz_suite(cfg, "strichartz_retarded" + pair_label(pair),
                                      [&](const BasisPtr& b, int i, int Mt) {
                                        return strichartz_forcing_quotient(
                                            b, random_forcing(*b, cfg.strichartz_K, cfg.seed, i), pair, cfg.a, Mt, true);
                                      });
  for (auto& d : r.detail) d.p = 2.0;
  return r;
}

double commutation_quotient(const GridFunction& f, double t, Ladder S, int j, const BasisPtr& basis) {
  auto apply = [&](const GridFunction& g) { return S == Ladder::L ? apply_L(g, j) : apply_M(g, j); };
  const GridFunction lhs = apply(propagate_eigen(f, t, basis));
  const GridFunction rhs = propagate_eigen(apply(f), t, basis);
  return lp_norm(lhs - rhs, 2) / sobolev_norm(f, 2).norm;
}

EstimateReport check_commutation(const VerifyConfig& cfg) {
  EstimateReport r;
  r.name = "commutation";
  r.seed = cfg.seed;
  const BasisPtr basis = shared_basis(make_grid(cfg.n, cfg.R, cfg.N), std::max(8, cfg.commutation_K + 2));
  for (int i = 0; i < cfg.commutation_probes; ++i) {
    const GridFunction f = coeff_state(basis, random_probe(*basis, cfg.commutation_K, cfg.seed, i));
    for (int j = 0; j < cfg.n; ++j)
      for (Ladder S : {Ladder::L, Ladder::M})
        for (double t : cfg.commutation_t) {
          const double q = commutation_quotient(f, t, S, j, basis);
          r.max_quotient = std::max(r.max_quotient, q);
          r.detail.push_back({"probe" + std::to_string(i) + (S == Ladder::L ? ":L" : ":M") + std::to_string(j + 1),
                              t, 2.0, q});
        }
  }
  r.samples = static_cast<int>(r.detail.size());
  r.refined_quotient = NAN;
  r.pass = r.max_quotient <= kCommutationTolerance;
  r.note = "tolerance " + num_text(kCommutationTolerance);
  return r;
}

NonlinearityQuotients nonlinearity_quotients(const NonlinearitySpec& spec, const SpaceTimeFunction& u,
                                             const AdmissiblePair& pair) {
  const TimeLattice& lat = u.lattice();
  const int n = u.grid().n();
  const double pc = pair.p_conj(), qc = pair.q_conj();
  const double T = 0.5 * lat.length();
  const double tfac = std::pow(T, (pair.q - qc) / (pair.q * qc));
  const int m = u.size();
  std::vector<double> sup(m), up(m), wp(m), gp(m);
  std::vector<std::vector<double>> sg(2 * n, std::vector<double>(m));
  for (int i = 0; i < m; ++i) {
    const GridFunction& ui = u[i];
    const double t = lat.time(i);
    double s2 = lp_norm(ui, 2), sp = lp_norm(ui, pair.p);
    up[i] = sp;
    gp[i] = lp_norm(eval_G(spec, ui, t), pc);
    for (int j = 0; j < n; ++j) {
      const GridFunction lu = apply_L(ui, j), mu = apply_M(ui, j);
      s2 = std::max({s2, lp_norm(lu, 2), lp_norm(mu, 2)});
      sp = std::max({sp, lp_norm(lu, pair.p), lp_norm(mu, pair.p)});
      sg[2 * j][i] = lp_norm(eval_SG(spec, ui, lu, t, Ladder::L, j), pc);
      sg[2 * j + 1][i] = lp_norm(eval_SG(spec, ui, mu, t, Ladder::M, j), pc);
    }
    sup[i] = s2;
    wp[i] = sp;
  }
  const double s_inf = *std::max_element(sup.begin(), sup.end());
  const double scale = tfac * std::pow(s_inf, spec.alpha);
  NonlinearityQuotients out;
  const double u_pq = mixed_norm_from_slices(up, lat, pair.q);
  const double w_pq = mixed_norm_from_slices(wp, lat, pair.q);
  if (u_pq == 0) return out;
  out.plain = mixed_norm_from_slices(gp, lat, qc) / (scale * u_pq);
  for (const auto& s : sg) out.ladder = std::max(out.ladder, mixed_norm_from_slices(s, lat, qc) / (scale * w_pq));
  return out;
}

EstimateReport check_nonlinearity_estimates(const VerifyConfig& cfg) {
  const NonlinearitySpec spec = NonlinearitySpec::power(cfg.alpha, 1.0);
  const AdmissiblePair pair = AdmissiblePair::make(default_q(cfg.alpha, cfg.n), cfg.alpha + 2, cfg.n);
  EstimateReport r;
  r.name = "nonlinearity" + pair_label(pair);
  r.seed = cfg.seed;
  auto run = [&](GridPtr grid, int Mt, bool record) {
    const BasisPtr basis = shared_basis(grid, cfg.strichartz_K);
    const TimeLattice lat = TimeLattice::symmetric(0.0, cfg.nonlinearity_T, Mt);
    double worst = 0;
    for (int i = 0; i < cfg.nonlinearity_probes; ++i) {
      const Eigen::VectorXcd c =
          i == 0 ? unit_vector(*basis, ground_index(*basis)) : random_probe(*basis, cfg.strichartz_K, cfg.seed, i);
      const CoeffTrajectory traj{basis, lat, linear_flow(basis, c, lat)};
      const NonlinearityQuotients q = nonlinearity_quotients(spec, traj.to_space_time(), pair);
      worst = std::max({worst, q.plain, q.ladder});
      if (record) {
        const std::string label = i == 0 ? "phi00" : "probe" + std::to_string(i);
        r.detail.push_back({label + ":G", cfg.nonlinearity_T, pair.p, q.plain});
        r.detail.push_back({label + ":SG", cfg.nonlinearity_T, pair.p, q.ladder});
      }
    }
    return worst;
  };
  r.max_quotient = run(make_grid(cfg.n, cfg.R, cfg.N), cfg.nonlinearity_Mt, true);
  r.samples = static_cast<int>(r.detail.size());
  if (cfg.refine) {
    r.refined_quotient = run(refined_grid(cfg), 2 * cfg.nonlinearity_Mt, false);
    finish_refinement(r);
  } else {
    r.refined_quotient = NAN;
    r.pass = std::isfinite(r.max_quotient);
  }
  return r;
}

EstimateReport check_embedding(const VerifyConfig& cfg) {
  EstimateReport r;
  r.name = "embedding";
  r.seed = cfg.seed;
  auto run = [&](GridPtr grid, bool record) {
    const BasisPtr basis = shared_basis(grid, cfg.strichartz_K);
    double worst = 0;
    for (int i = 0; i < cfg.nonlinearity_probes; ++i) {
      const Eigen::VectorXcd c =
          i == 0 ? unit_vector(*basis, ground_index(*basis)) : random_probe(*basis, cfg.strichartz_K, cfg.seed, i);
      const GridFunction f = coeff_state(basis, c);
      const double s = sobolev_norm(f, 2).norm;
      for (double p : {4.0, 6.0}) {
        const double q = lp_norm(f, p) / s;
        worst = std::max(worst, q);
        if (record) r.detail.push_back({i == 0 ? "phi00" : "probe" + std::to_string(i), 0.0, p, q});
      }
    }
    return worst;
  };
  r.max_quotient = run(make_grid(cfg.n, cfg.R, cfg.N), true);
  r.samples = static_cast<int>(r.detail.size());
  if (cfg.refine) {
    r.refined_quotient = run(refined_grid(cfg), false);
    finish_refinement(r);
  } else {
    r.refined_quotient = NAN;
    r.pass = std::isfinite(r.max_quotient);
  }
  return r;
}

EstimateReport check_equivalence_residual(const SolutionReport& report, const NonlinearitySpec& spec, double C_dt,
                                          double picard_tol) {
  const PdeResidual pr = pde_residual(report.u, spec);
  EstimateReport r;
  r.name = "equivalence";
  r.samples = static_cast<int>(pr.relative.size());
  r.max_quotient = pr.max_relative;
  r.refined_quotient = NAN;
  const double dt = std::abs(report.u.lattice.dt);
  r.pass = std::isfinite(pr.max_relative) && pr.max_relative <= std::max(10 * picard_tol, C_dt * dt * dt);
  for (std::size_t i = 0; i < pr.times.size(); ++i) r.detail.push_back({"node", pr.times[i], 2.0, pr.relative[i]});
  std::ostringstream os;
  os << "truncation " << pr.truncation;
  r.note = os.str();
  return r;
}

EstimateReport check_equivalence(const VerifyConfig& cfg) {
  const BasisPtr basis = shared_basis(make_grid(cfg.n, cfg.R, cfg.N), 8);
  const int n = cfg.n;
  const GridFunction f = special_hermite(MultiIndex{std::vector<int>(n, 0)}, MultiIndex{std::vector<int>(n, 0)},
                                         basis->grid_ptr());
  const NonlinearitySpec spec = NonlinearitySpec::power(cfg.alpha, 1.0);
  SolverConfig sc;
  sc.T = cfg.equivalence_T;
  sc.enforce_T0 = false;
  sc.picard_tol = 1e-14;
  sc.picard_max = 100;
  sc.diagnostics = false;
  sc.Mt = 2 * cfg.equivalence_Mt;
  const SolutionReport fine = picard_solve(f, spec, sc, basis);
  sc.Mt = cfg.equivalence_Mt;
  const SolutionReport coarse = picard_solve(f, spec, sc, basis);
  const double r_fine = pde_residual(fine.u, spec).max_relative;
  const double dtf = std::abs(fine.u.lattice.dt);
  EstimateReport r = check_equivalence_residual(coarse, spec, 1.25 * r_fine / (dtf * dtf), sc.picard_tol);
  r.seed = cfg.seed;
  r.refined_quotient = r_fine;
  const double ratio = r.max_quotient / r_fine;
  const bool at_tol = r.max_quotient <= 10 * sc.picard_tol && r_fine <= 10 * sc.picard_tol;
  r.pass = at_tol || (r.pass && ratio >= 3.0 && ratio <= 5.0);
  std::ostringstream os;
  os << r.note << ", halving ratio " << ratio << ", picard iterates " << coarse.iterates << "/" << fine.iterates;
  r.note = os.str();
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"dispersive", "strichartz", "commutation", "nonlinearity", "equivalence",
                                              "all"};
  return names;
}

std::vector<EstimateReport> run_suite(const std::string& suite, const VerifyConfig& cfg) {
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw InvalidArgument("unknown suite '" + suite +
                          "' (expected dispersive, strichartz, commutation, nonlinearity, equivalence or all)");
  const bool all = suite == "all";
  std::vector<BasisPtr> keep;
  if (all || suite == "strichartz" || suite == "nonlinearity") {
    keep.push_back(shared_basis(make_grid(cfg.n, cfg.R, cfg.N), cfg.strichartz_K));
    if (cfg.refine) keep.push_back(shared_basis(refined_grid(cfg), cfg.strichartz_K));
  }
  std::vector<EstimateReport> out;
  if (all || suite == "dispersive") out.push_back(check_dispersive(cfg));
  if (all || suite == "strichartz")
    for (const auto& [q, p] : cfg.pairs) {
      const AdmissiblePair pair = AdmissiblePair::make(q, p, cfg.n);
      out.push_back(check_strichartz_homogeneous(cfg, pair));
      out.push_back(check_strichartz_inhomogeneous(cfg, pair));
      out.push_back(check_retarded(cfg, pair));
    }
  if (all || suite == "commutation") out.push_back(check_commutation(cfg));
  if (all || suite == "nonlinearity") {
    out.push_back(check_nonlinearity_estimates(cfg));
    out.push_back(check_embedding(cfg));
  }
  if (all || suite == "equivalence") out.push_back(check_equivalence(cfg));
  return out;
}

double calibrate_C(const std::vector<EstimateReport>& reports) {
  double c = 0;
  for (const auto& r : reports)
    if (r.name.rfind("strichartz", 0) == 0) {
      c = std::max(c, r.max_quotient);
      if (std::isfinite(r.refined_quotient)) c = std::max(c, r.refined_quotient);
    }
  return 2.0 * c;
}

}  // namespace twnls
