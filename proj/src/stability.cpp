#include "choquard/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "choquard/error.hpp"
#include "choquard/parallel.hpp"
#include "choquard/spectral.hpp"

namespace chq {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// (h^3/N) sum (1 + |k|^2) conj(a_hat) b_hat, Nyquist kept as in the
// quadratic form of neg_laplacian.
cplx h1_inner(const ComplexField& a, const ComplexField& b) {
  const cvector fa = to_spectrum(a);
  const cvector fb = to_spectrum(b);
  const SpectralGrid& g = a.grid();
  const auto k = g.wavenumbers();
  const int n = g.n();
  cplx s = 0.0;
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix, ++idx)
        s += (1.0 + k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz]) * std::conj(fa[idx]) * fb[idx];
  return s * (g.cell_volume() / static_cast<double>(a.size()));
}

double h1_norm_sq(const ComplexField& a) { return integrate_weighted(a) + spectral_gradient_sqnorm(a); }

// Ingredients of the dilation ladder that do not depend on lambda.
struct Ladder {
  double grad = 0.0, mass = 0.0, F = 0.0, s = 0.0, omega = 0.0;
  RealField density;  // h^3 |v|^2
  RealField r;
  RadialProfile v1, v2;
  bool zero = true;

  Ladder(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m)
      : density(v.grid_ptr()), r(radius_field(v.grid_ptr())) {
    check_params(m.mu, m.p);
    grad = spectral_gradient_sqnorm(v);
    mass = integrate_weighted(v);
    F = hartree_term(v, m.mu, m.p);
    s = dilation_exponent(m.mu, m.p);
    omega = m.omega;
    const double h3 = v.grid().cell_volume();
    for (std::size_t i = 0; i < v.size(); ++i) density[i] = h3 * std::norm(v[i]);
    zero = spec.is_zero();
    if (!zero) {
      v1 = spec.v1_profile();
      v2 = spec.v2_profile();
    }
  }

  double potential(double lambda) const {
    if (zero) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double x = r[i] / lambda;
      sum += (v1.f(x) + v2.f(x)) * density[i];
    }
    return sum;
  }
  double quadratic(double lambda) const { return lambda * lambda * grad + omega * mass + potential(lambda); }
  double I(double lambda) const { return quadratic(lambda) - std::pow(lambda, s) * F; }
};

std::vector<double> second_differences(const std::vector<double>& g, std::size_t count, double step) {
  std::vector<double> d;
  for (std::size_t i = 1; i + 1 < count; ++i) d.push_back((g[i + 1] - 2.0 * g[i] + g[i - 1]) / (step * step));
  return d;
}

}  // namespace

cplx x_inner(const ComplexField& a, const ComplexField& b, const SampledPotential& pot) {
  a.check_same_grid(b);
  cplx s = h1_inner(a, b);
  if (!pot.zero) {
    a.check_grid(pot.V1.grid());
    cplx w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w += pot.V1[i] * std::conj(a[i]) * b[i];
    s += w * a.grid().cell_volume();
  }
  return s;
}

double x_norm(const ComplexField& a, const SampledPotential& pot) {
  return std::sqrt(std::max(0.0, std::real(x_inner(a, a, pot))));
}

OrbitalDistance orbital_distance(const ComplexField& u, const ComplexField& phi, const SampledPotential& pot) {
  u.check_same_grid(phi);
  OrbitalDistance out;
  const cplx ip = x_inner(phi, u, pot);
  const double scale = x_norm(u, pot) * x_norm(phi, pot);
  if (std::abs(ip) <= 1e-14 * scale || scale == 0.0) {
    out.degenerate = true;
    out.theta = 0.0;
  } else {
    out.theta = std::arg(ip);
  }
  ComplexField d = u;
  d.axpy(-std::polar(1.0, out.theta), phi);
  out.dist = x_norm(d, pot);
  return out;
}

OrbitalDistance orbital_distance(const ComplexField& u, const ComplexField& phi, const PotentialSpec& spec) {
  return orbital_distance(u, phi, build_potential(spec, phi.grid_ptr()));
}

double nehari_along_dilation(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m, double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_argument, "dilation factor must be positive");
  return Ladder(v, spec, m).I(lambda);
}

NehariDilation nehari_dilation(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m,
                               double search) {
  require(search > 1.0, ErrorCode::invalid_argument, "search range must exceed 1");
  const Ladder L(v, spec, m);
  require(L.F > 0.0, ErrorCode::invalid_argument, "Nehari dilation needs F_mu(v) > 0");
  NehariDilation out;
  auto f = [&](double lam) {
    ++out.evaluations;
    return L.I(lam);
  };
  const double f1 = f(1.0);
  if (f1 == 0.0) return out;

  // Walk outward from 1 on a geometric ladder until I changes sign.
  const int steps = 64;
  const double q = std::pow(search, 1.0 / steps);
  double a = 1.0, fa = f1, b = 0.0, fb = 0.0;
  bool found = false;
  double up = 1.0, down = 1.0, f_up = f1, f_down = f1;
  for (int k = 1; k <= steps && !found; ++k) {
    const double nu = up * q, fu = f(nu);
    if ((fu > 0.0) != (f_up > 0.0)) {
      a = up, fa = f_up, b = nu, fb = fu, found = true;
      break;
    }
    up = nu, f_up = fu;
    const double nd = down / q, fd = f(nd);
    if ((fd > 0.0) != (f_down > 0.0)) {
      a = nd, fa = fd, b = down, fb = f_down, found = true;
      break;
    }
    down = nd, f_down = fd;
  }
  require(found, ErrorCode::convergence, "no sign change of I(v^lambda) in the search range");

  // Illinois variant of regula falsi.
  int side = 0;
  double c = a, fc = fa;
  for (int it = 0; it < 200; ++it) {
    c = (a * fb - b * fa) / (fb - fa);
    fc = f(c);
    if (fc == 0.0 || std::abs(b - a) <= 4e-16 * c) break;
    if ((fc > 0.0) == (fb > 0.0)) {
      b = c, fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c, fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(fc) <= 1e-15 * L.quadratic(c)) break;
  }
  out.lambda = c;
  out.I_relative = std::abs(L.I(c)) / L.quadratic(c);
  return out;
}

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::instability: return "instability";
    case ExperimentKind::stability: return "stability";
    case ExperimentKind::limit_study: return "limit_study";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "?";
}

const Criterion& ExperimentVerdict::add(std::string name, double measured, std::string relation, double threshold) {
  Criterion c{std::move(name), std::move(relation), measured, threshold, false};
  if (c.relation == "<")
    c.passed = measured < threshold;
  else if (c.relation == "<=")
    c.passed = measured <= threshold;
  else if (c.relation == ">")
    c.passed = measured > threshold;
  else if (c.relation == ">=")
    c.passed = measured >= threshold;
  else
    fail(ErrorCode::invalid_argument, "unknown relation '" + c.relation + "'");
  criteria.push_back(std::move(c));
  return criteria.back();
}

void ExperimentVerdict::settle() {
  if (verdict == Verdict::not_applicable) return;
  verdict = std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; })
                ? Verdict::pass
                : Verdict::fail;
}

const Criterion* ExperimentVerdict::find(const std::string& name) const {
  for (const Criterion& c : criteria)
    if (c.name == name) return &c;
  return nullptr;
}

InstabilityReport instability_experiment(const GroundStateResult& gs, const PotentialSpec& spec,
                                         const InstabilityOptions& opts) {
  require(opts.lambda > 0.0, ErrorCode::invalid_argument, "lambda must be positive");
  require(opts.growth_factor > 1.0, ErrorCode::invalid_argument, "growth factor must exceed 1");
  require(opts.comparison_stride >= 0, ErrorCode::invalid_argument, "comparison stride must be nonnegative");
  const ModelParams& m = gs.params;
  const ComplexField& phi = gs.phi;
  const SampledPotential pot = build_potential(spec, phi.grid_ptr());

  InstabilityReport rep;
  ExperimentVerdict& v = rep.verdict;
  v.kind = ExperimentKind::instability;
  v.mu = m.mu, v.p = m.p, v.omega = m.omega, v.lambda = opts.lambda;
  if (!gs.converged) v.warnings.push_back("ground state not converged (residual " + std::to_string(gs.residual) + ")");
  if (m.p <= 2.0 + (2.0 - m.mu) / 3.0)
    v.warnings.push_back("p is not above 2 + (2 - mu)/3; blow-up is not expected");
  rep.gate = d2E_lambda(phi, pot, m.mu, m.p).raw;
  if (rep.gate >= 0.0)
    v.warnings.push_back("d2E/dlambda2 at lambda = 1 is " + std::to_string(rep.gate) + ", not negative");

  ComplexField u0 = dilate(phi, opts.lambda);
  const double n_phi = l2_norm(phi), n_u0 = l2_norm(u0);
  rep.mass_defect = std::abs(n_u0 * n_u0 / (n_phi * n_phi) - 1.0);
  u0 *= n_phi / n_u0;

  const FunctionalReport f_phi = functional_report(phi, pot, m);
  const FunctionalReport f_u0 = functional_report(u0, pot, m);
  rep.E_phi = f_phi.E, rep.E_u0 = f_u0.E, rep.P_u0 = f_u0.P;
  v.add("(a) E(u0) - E(phi)", f_u0.E - f_phi.E, "<", 0.0);
  v.add("(a) |Q(u0) - Q(phi)| / Q(phi)", std::abs(f_u0.Q - f_phi.Q) / f_phi.Q, "<=", 1e-12);
  v.add("(a) P(u0)", f_u0.P, "<", 0.0);

  EvolveOptions eo;
  eo.dt = opts.dt;
  eo.T = opts.T_max;
  eo.sample_stride = opts.sample_stride;
  eo.blow_up_factor = opts.blow_up_factor;
  std::size_t sample = 0;
  bool resolved = true;
  const double grad0 = f_u0.grad_sq;
  if (opts.comparison_stride > 0) {
    eo.observer = [&](double t, const ComplexField& u) {
      const std::size_t i = sample++;
      if (!resolved || i % static_cast<std::size_t>(opts.comparison_stride) != 0) return;
      const FunctionalReport f = functional_report(u, pot, m);
      if (f.grad_sq >= opts.growth_factor * grad0) {
        resolved = false;
        return;
      }
      double lam = std::numeric_limits<double>::quiet_NaN();
      try {
        lam = nehari_dilation(u, spec, m).lambda;
      } catch (const Error&) {
      }
      rep.comparison_times.push_back(t);
      rep.comparison_lambda.push_back(lam);
      rep.comparison_slack.push_back(f.E + (lam - 1.0) * f.P - f_phi.E);
    };
  }
  rep.trace = evolve(u0, spec, m.mu, m.p, eo);
  const EvolutionTrace& tr = rep.trace;

  std::size_t window = tr.size();
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (tr.grad_sq[i] >= opts.growth_factor * tr.grad_sq[0]) {
      window = i + 1;
      rep.growth_time = tr.times[i];
      break;
    }
  rep.window = window;
  if (rep.growth_time >= 0.0)
    while (!rep.comparison_times.empty() && rep.comparison_times.back() > rep.growth_time) {
      rep.comparison_times.pop_back();
      rep.comparison_lambda.pop_back();
      rep.comparison_slack.pop_back();
    }

  const double max_P = *std::max_element(tr.P.begin(), tr.P.begin() + static_cast<std::ptrdiff_t>(window));
  v.add("(b) max P(u(t)) over the window", max_P, "<=", -(f_phi.E - f_u0.E));

  const double step = window >= 2 ? tr.times[1] - tr.times[0] : 0.0;
  const std::vector<double> d2 = second_differences(tr.moment_xx, window, step);
  v.add("(c) max d2g/dt2 over the window", d2.empty() ? inf : *std::max_element(d2.begin(), d2.end()), "<", 0.0);
  const auto top = std::max_element(tr.moment_xx.begin(), tr.moment_xx.begin() + static_cast<std::ptrdiff_t>(window));
  double rise = 0.0;
  if (top + 1 == tr.moment_xx.begin() + static_cast<std::ptrdiff_t>(window)) {
    rise = inf;
  } else {
    rise = -inf;
    for (auto it = top; it + 1 != tr.moment_xx.begin() + static_cast<std::ptrdiff_t>(window); ++it)
      rise = std::max(rise, *(it + 1) - *it);
  }
  v.add("(c) max increment of g after its maximum", rise, "<", 0.0);

  double growth = *std::max_element(tr.grad_sq.begin(), tr.grad_sq.end()) / tr.grad_sq[0];
  if (tr.exit == EvolutionExit::blow_up_detected && !std::isfinite(tr.grad_sq.back())) growth = inf;
  if (tr.exit == EvolutionExit::blow_up_detected && tr.message.rfind("non-finite", 0) == 0) growth = inf;
  v.add("(d) max ||grad u||^2 / initial", growth, ">=", opts.growth_factor);

  v.notes.push_back(std::string("exit: ") + to_string(tr.exit) + " at t = " + std::to_string(tr.exit_time));
  if (!tr.message.empty()) v.notes.push_back(tr.message);
  if (tr.probe_run)
    v.notes.push_back(std::string("dt/2 probe ") + (tr.probe_confirmed ? "confirmed" : "did not confirm") +
                      " the blow-up");
  if (std::abs(opts.lambda - 1.0) < 1e-12) {
    v.verdict = Verdict::not_applicable;
    v.notes.push_back("lambda = 1 is the unperturbed ground state");
  }
  v.settle();
  return rep;
}

ComplexField stability_direction(const ComplexField& phi, const SampledPotential& pot, unsigned seed,
                                 double band_fraction) {
  require(band_fraction > 0.0 && band_fraction <= 1.0, ErrorCode::invalid_argument,
          "band fraction must be in (0, 1]");
  const GridPtr& grid = phi.grid_ptr();
  const SpectralGrid& g = *grid;
  const int n = g.n();
  const auto k = g.wavenumbers();
  const double kc = band_fraction * g.nyquist();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ComplexField w(grid);
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix, ++idx) {
        const double re = normal(rng), im = normal(rng);
        if (k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz] <= kc * kc) w[idx] = cplx(re, im);
      }
  g.fft().backward(w.data());

  const double top = max_abs(phi);
  require(top > 0.0, ErrorCode::invalid_argument, "perturbation of the zero field");
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::abs(phi[i]) / top;
  w = symmetrize_octahedral(w);

  const double phi_sq = std::real(x_inner(phi, phi, pot));
  for (int pass = 0; pass < 2; ++pass) w.axpy(-x_inner(phi, w, pot) / phi_sq, phi);
  const double norm = x_norm(w, pot);
  require(norm > 0.0, ErrorCode::runtime, "perturbation vanished after projection");
  w *= 1.0 / norm;
  return w;
}

ComplexField perturbed_state(const ComplexField& phi, const ComplexField& direction, double amplitude,
                             double* mass_defect) {
  ComplexField u = phi;
  u.axpy(amplitude, direction);
  const double n_phi = l2_norm(phi), n_u = l2_norm(u);
  require(n_u > 0.0, ErrorCode::invalid_argument, "perturbed state vanishes");
  if (mass_defect) *mass_defect = std::abs(n_u * n_u / (n_phi * n_phi) - 1.0);
  u *= n_phi / n_u;
  return u;
}

StabilityReport stability_experiment(const GroundStateResult& gs, const PotentialSpec& spec,
                                     const StabilityOptions& opts) {
  require(opts.epsilon >= 0.0 && std::isfinite(opts.epsilon), ErrorCode::invalid_argument,
          "epsilon must be nonnegative");
  require(opts.n_perturbations >= 1, ErrorCode::invalid_argument, "need at least one perturbation");
  require(opts.distance_factor > 0.0 && opts.distance_floor > 0.0, ErrorCode::invalid_argument,
          "distance thresholds must be positive");
  const ModelParams& m = gs.params;
  const ComplexField& phi = gs.phi;
  const SampledPotential pot = build_potential(spec, phi.grid_ptr());
  const FunctionalReport f_phi = functional_report(phi, pot, m);

  StabilityReport rep;
  ExperimentVerdict& v = rep.verdict;
  v.kind = ExperimentKind::stability;
  v.mu = m.mu, v.p = m.p, v.omega = m.omega, v.epsilon = opts.epsilon;
  if (!gs.converged) v.warnings.push_back("ground state not converged (residual " + std::to_string(gs.residual) + ")");
  rep.phi_x_norm = x_norm(phi, pot);

  const std::size_t count = static_cast<std::size_t>(opts.n_perturbations);
  std::vector<ComplexField> directions(count, ComplexField(phi.grid_ptr()));
  rep.runs.resize(count);
  parallel_for(count, [&](std::size_t i) {
    StabilityRun& run = rep.runs[i];
    run.seed = opts.seed + static_cast<unsigned>(i);
    directions[i] = stability_direction(phi, pot, run.seed, opts.band_fraction);
    const ComplexField u0 = perturbed_state(phi, directions[i], opts.epsilon, &run.mass_defect);
    const double edge = boundary_mass_fraction(u0, 2);
    require(edge <= 1e-6, ErrorCode::support,
            "perturbation (seed " + std::to_string(run.seed) + ") puts " + std::to_string(edge) +
                " of the mass at the box boundary");
    run.initial_distance = orbital_distance(u0, phi, pot).dist;
    run.delta_E = functional_report(u0, pot, m).E - f_phi.E;
    EvolveOptions eo;
    eo.dt = opts.dt;
    eo.T = opts.T;
    eo.sample_stride = opts.sample_stride;
    eo.blow_up_probe = false;
    eo.observer = [&](double, const ComplexField& u) {
      run.sup_distance = std::max(run.sup_distance, orbital_distance(u, phi, pot).dist);
    };
    const EvolutionTrace tr = evolve(u0, spec, m.mu, m.p, eo);
    run.exit = tr.exit;
    run.exit_time = tr.exit_time;
  });

  const double threshold = opts.epsilon > 0.0 ? opts.distance_factor * opts.epsilon : opts.distance_floor;
  int incomplete = 0;
  for (const StabilityRun& run : rep.runs) {
    v.add("sup_t dist (seed " + std::to_string(run.seed) + ")", run.sup_distance, "<", threshold);
    if (run.exit != EvolutionExit::completed) ++incomplete;
  }
  v.add("runs ending before T", incomplete, "<=", 0.0);

  if (opts.epsilon > 0.0) {
    for (std::size_t i = 0; i < count; ++i)
      for (double a : opts.ladder) {
        const ComplexField u = perturbed_state(phi, directions[i], a * opts.epsilon);
        const double d = orbital_distance(u, phi, pot).dist;
        rep.regression_dist_sq.push_back(d * d);
        rep.regression_delta_E.push_back(functional_report(u, pot, m).E - f_phi.E);
      }
    const auto& x = rep.regression_dist_sq;
    const auto& y = rep.regression_delta_E;
    double sxy = 0.0, sxx = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += x[i] * y[i], sxx += x[i] * x[i], mean += y[i];
    mean /= static_cast<double>(y.size());
    rep.fitted_C = sxx > 0.0 ? sxy / sxx : 0.0;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      ss_res += (y[i] - rep.fitted_C * x[i]) * (y[i] - rep.fitted_C * x[i]);
      ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    v.add("fitted C in E(u) - E(phi) = C dist^2", rep.fitted_C, ">", 0.0);
    v.add("regression R^2", rep.r_squared, ">", opts.min_r_squared);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] > 0.0) lo = std::min(lo, y[i] / x[i]), hi = std::max(hi, y[i] / x[i]);
    std::ostringstream os;
    os << "delta_E / dist^2 per pair in [" << lo << ", " << hi << "]";
    v.notes.push_back(os.str());
  } else {
    v.notes.push_back("epsilon = 0: regression skipped, distance floor " + std::to_string(opts.distance_floor));
  }
  v.settle();
  return rep;
}

LimitStudy rescaled_limit_study(const PotentialSpec& spec, double mu, double p, const std::vector<double>& omegas,
                                const GridPtr& grid, const SolverOptions& opts) {
  check_params(mu, p);
  require(!omegas.empty(), ErrorCode::invalid_argument, "empty omega list");
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    require(omegas[i] > 0.0, ErrorCode::domain, "omega must be positive");
    require(i == 0 || omegas[i] > omegas[i - 1], ErrorCode::invalid_argument, "omega list must increase");
  }
  LimitStudy study;
  ExperimentVerdict& v = study.verdict;
  v.kind = ExperimentKind::limit_study;
  v.mu = mu, v.p = p;

  const GroundStateResult psi1 = solve_psi1(mu, p, grid, opts);
  require(psi1.converged, ErrorCode::convergence, "psi1 did not converge: " + psi1.message);
  study.F_psi1 = psi1.report.F_mu;
  study.h1_sq_psi1 = h1_norm_sq(psi1.phi);

  study.rows.resize(omegas.size());
  parallel_for(omegas.size(), [&](std::size_t i) {
    LimitRow& row = study.rows[i];
    row.omega = omegas[i];
    try {
      const PotentialSpec scaled = spec.rescaled(row.omega);
      const GroundStateResult gs = solve_ground_state(scaled, ModelParams{1.0, mu, p}, grid, opts);
      row.converged = gs.converged;
      row.residual = gs.residual;
      row.F_tilde = gs.report.F_mu;
      row.potential_term = gs.report.pot_term;
      row.h1_sq = h1_norm_sq(gs.phi);
      ComplexField d = gs.phi;
      d -= psi1.phi;
      row.h1_distance = std::sqrt(h1_norm_sq(d));
      row.F_gap = std::abs(row.F_tilde - study.F_psi1);
      const ComplexField phi = rescale_omega_regrid(gs.phi, row.omega, mu, p, RescaleDirection::from_tilde);
      row.d2E = d2E_lambda(phi, build_potential(spec, phi.grid_ptr()), mu, p).raw;
      row.ok = gs.converged;
      if (!gs.converged) row.error = gs.message;
    } catch (const Error& e) {
      row.error = e.what();
    }
  });

  int failed = 0;
  std::vector<const LimitRow*> good;
  for (const LimitRow& row : study.rows) {
    if (row.ok)
      good.push_back(&row);
    else
      ++failed;
  }
  v.add("failed rows", failed, "<=", 0.0);
  if (spec.is_zero()) {
    double worst = 0.0;
    for (const LimitRow* r : good) worst = std::max(worst, r->h1_distance / std::sqrt(study.h1_sq_psi1));
    v.add("max ||phi_tilde - psi1||_H1 / ||psi1||_H1", worst, "<=", 1e-10);
  } else if (good.size() >= 2) {
    double per_decade = inf, F_ratio = 0.0, h1_ratio = 0.0;
    for (std::size_t i = 0; i + 1 < good.size(); ++i) {
      const LimitRow& a = *good[i];
      const LimitRow& b = *good[i + 1];
      const double decades = std::log10(b.omega / a.omega);
      per_decade = std::min(per_decade, std::pow(a.potential_term / b.potential_term, 1.0 / decades));
      F_ratio = std::max(F_ratio, b.F_gap / a.F_gap);
      h1_ratio = std::max(h1_ratio, b.h1_distance / a.h1_distance);
    }
    v.add("min decrease of the potential term per decade", per_decade, ">=", 10.0);
    v.add("max ratio of consecutive |F(phi_tilde) - F(psi1)|", F_ratio, "<", 1.0);
    v.add("max ratio of consecutive ||phi_tilde - psi1||_H1", h1_ratio, "<", 1.0);
  } else {
    v.warnings.push_back("fewer than two converged rows; trends not evaluated");
  }
  v.settle();
  return study;
}

}  // namespace chq
