#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>

#include "choquard/error.hpp"
#include "choquard/parallel.hpp"
#include "choquard/spectral.hpp"
#include "choquard/stability.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chq;

namespace {

ComplexField gaussian(const GridPtr& g, double width) {
  return ComplexField::sample(g, [width](double x, double y, double z) {
    return std::exp(-(x * x + y * y + z * z) / (2.0 * width * width));
  });
}

// Collapse regime: harmonic V, mu=1, p=3, omega=10. The profile is about 0.3
// wide, so L=2.5 on 64^3 keeps ~10 points across it.
const GroundStateResult& collapse_state() {
  static const GroundStateResult r =
      solve_ground_state(PotentialSpec::harmonic(1.0), ModelParams{10.0, 1.0, 3.0}, make_grid(64, 2.5));
  return r;
}

// Stable regime: harmonic V, mu=1, p=2.1, omega=10.
const GroundStateResult& stable_state() {
  static const GroundStateResult r =
      solve_ground_state(PotentialSpec::harmonic(1.0), ModelParams{10.0, 1.0, 2.1}, make_grid(32, 4.0));
  return r;
}

struct Scan {
  double coarse = 0.0;   // best of the grid points
  double refined = 0.0;  // golden-section search around the best grid point
  double bound = 0.0;    // worst-case excess of the grid value over the minimum
};

// ||u - e^{i theta} phi||_X over theta in [0, 2 pi).
Scan scan_distance(const ComplexField& u, const ComplexField& phi, const SampledPotential& pot, int points) {
  const double uu = std::real(x_inner(u, u, pot));
  const double pp = std::real(x_inner(phi, phi, pot));
  const cplx ip = x_inner(phi, u, pot);
  auto d2 = [&](double th) { return uu + pp - 2.0 * std::real(std::polar(1.0, -th) * ip); };
  const double step = 2.0 * std::numbers::pi / points;
  int best = 0;
  for (int j = 1; j < points; ++j)
    if (d2(step * j) < d2(step * best)) best = j;
  double a = step * (best - 1), b = step * (best + 1);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    (d2(c) < d2(d) ? b : a) = (d2(c) < d2(d) ? d : c);
  }
  Scan s;
  s.coarse = std::sqrt(std::max(0.0, d2(step * best)));
  s.refined = std::sqrt(std::max(0.0, d2(0.5 * (a + b))));
  // d2 exceeds its minimum by at most 2|ip|(1 - cos(step/2)) on the grid.
  const double excess = 2.0 * std::abs(ip) * (1.0 - std::cos(0.5 * step));
  s.bound = std::sqrt(s.refined * s.refined + excess) - s.refined;
  return s;
}

}  // namespace

TEST_CASE("orbital distance recovers phase and distance") {
  auto g = make_grid(16, 5.0);
  const SampledPotential pot = build_potential(PotentialSpec::harmonic(1.0), g);
  const ComplexField phi = gaussian(g, 1.0);

  OrbitalDistance d = orbital_distance(phi, phi, pot);
  CHECK(d.theta == 0.0);
  CHECK(d.dist == 0.0);
  CHECK_FALSE(d.degenerate);

  ComplexField turned = phi;
  turned *= std::polar(1.0, 0.7);
  d = orbital_distance(turned, phi, pot);
  CHECK(std::abs(d.theta - 0.7) < 1e-12);
  CHECK(d.dist < 1e-12 * x_norm(phi, pot));

  // w X-orthogonal to phi and i phi: Pythagoras.
  ComplexField w = test::random_bumps(g, 3);
  w.axpy(-x_inner(phi, w, pot) / x_inner(phi, phi, pot), phi);
  CHECK(std::abs(x_inner(phi, w, pot)) < 1e-12 * x_norm(w, pot) * x_norm(phi, pot));
  ComplexField u = phi;
  u.axpy(0.1, w);
  d = orbital_distance(u, phi, pot);
  CHECK(std::abs(d.dist - 0.1 * x_norm(w, pot)) < 1e-10 * x_norm(phi, pot));
  CHECK(std::abs(d.theta) < 1e-12);
  CHECK(std::abs(d.dist - scan_distance(u, phi, pot, 4096).refined) < 1e-10);

  d = orbital_distance(w, phi, pot);
  CHECK(d.degenerate);
  CHECK(d.theta == 0.0);
  CHECK(d.dist == doctest::Approx(std::sqrt(std::real(x_inner(w, w, pot) + x_inner(phi, phi, pot)))).epsilon(1e-12));
}

TEST_CASE("orbital distance matches a 4096-point theta scan") {
  auto g = make_grid(16, 5.0);
  const SampledPotential pot = build_potential(PotentialSpec::harmonic(1.0), g);
  for (unsigned seed = 0; seed < 8; ++seed) {
    ComplexField u = test::random_bumps(g, 100 + seed);
    ComplexField phi = test::random_bumps(g, 200 + seed);
    u *= 1.0 / x_norm(u, pot);
    phi *= 1.0 / x_norm(phi, pot);
    const OrbitalDistance d = orbital_distance(u, phi, pot);
    const Scan scan = scan_distance(u, phi, pot, 4096);
    CHECK(d.dist <= scan.coarse + 1e-12);
    CHECK(scan.coarse - d.dist <= scan.bound + 1e-12);
    CHECK(std::abs(scan.refined - d.dist) < 1e-8);
  }
}

TEST_CASE("orbital distance on mismatched grids throws") {
  const SampledPotential pot = build_potential(PotentialSpec::zero(), make_grid(16, 5.0));
  CHECK_THROWS_AS(orbital_distance(gaussian(make_grid(16, 5.0), 1.0), gaussian(make_grid(16, 4.0), 1.0), pot),
                  Error);
}

TEST_CASE("Nehari dilation") {
  const GroundStateResult& gs = stable_state();
  REQUIRE(gs.converged);
  const PotentialSpec V = PotentialSpec::harmonic(1.0);
  const ModelParams& m = gs.params;

  const NehariDilation at_phi = nehari_dilation(gs.phi, V, m);
  CHECK(std::abs(at_phi.lambda - 1.0) < 1e-6);
  CHECK(at_phi.I_relative < 1e-8);

  const SampledPotential pot = build_potential(V, gs.phi.grid_ptr());
  const ComplexField dir = stability_direction(gs.phi, pot, 5, 0.25);
  const ComplexField v = perturbed_state(gs.phi, dir, 0.05);
  const NehariDilation near = nehari_dilation(v, V, m);
  CHECK(near.I_relative < 1e-8);
  CHECK(std::abs(near.lambda - 1.0) < 0.1);

  // v = phi^1.1 is taken back by lambda = 1/1.1 up to resampling error.
  const ComplexField stretched = dilate(gs.phi, 1.1);
  CHECK(nehari_dilation(stretched, V, m).lambda == doctest::Approx(1.0 / 1.1).epsilon(1e-5));

  // The ladder agrees with resampling followed by the direct functional.
  const double ladder = nehari_along_dilation(v, V, m, 0.95);
  const double direct = functional_report(dilate(v, 0.95), pot, m).I_omega;
  const double scale = functional_report(v, pot, m).grad_sq;
  CHECK(std::abs(ladder - direct) < 1e-5 * scale);

  CHECK_THROWS_AS(nehari_dilation(gs.phi, V, m, 1.0), Error);
  CHECK_THROWS_AS(nehari_along_dilation(gs.phi, V, m, 0.0), Error);
}

TEST_CASE("verdicts follow their criteria") {
  ExperimentVerdict v;
  CHECK(v.add("a", 1.0, "<", 2.0).passed);
  CHECK(v.add("b", 2.0, "<=", 2.0).passed);
  CHECK_FALSE(v.add("c", 2.0, ">", 2.0).passed);
  CHECK(v.add("d", 2.0, ">=", 2.0).passed);
  v.settle();
  CHECK(v.verdict == Verdict::fail);
  CHECK(v.find("c") != nullptr);
  CHECK(v.find("e") == nullptr);
  CHECK_THROWS_AS(v.add("e", 1.0, "==", 1.0), Error);

  ExperimentVerdict ok;
  ok.add("a", 0.0, "<", 1.0);
  ok.settle();
  CHECK(ok.verdict == Verdict::pass);
  ok.verdict = Verdict::not_applicable;
  ok.settle();
  CHECK(ok.verdict == Verdict::not_applicable);
}

TEST_CASE("instability scenario above the critical exponent") {
  const GroundStateResult& gs = collapse_state();
  REQUIRE(gs.converged);
  InstabilityOptions o;
  o.lambda = 1.2;
  o.dt = 1e-4;
  o.T_max = 0.05;
  o.sample_stride = 5;
  const InstabilityReport r = instability_experiment(gs, PotentialSpec::harmonic(1.0), o);
  for (const Criterion& c : r.verdict.criteria) {
    INFO(c.name << ": " << c.measured << " " << c.relation << " " << c.threshold);
    CHECK(c.passed);
  }
  CHECK(r.verdict.verdict == Verdict::pass);
  CHECK(r.gate < 0.0);
  CHECK(r.verdict.warnings.empty());
  CHECK(r.growth_time > 0.0);
  CHECK(r.window >= 3);
  // Nehari-dilation comparison holds along the resolved trajectory.
  REQUIRE_FALSE(r.comparison_slack.empty());
  for (double s : r.comparison_slack) CHECK(s >= 0.0);
  CHECK(r.comparison_lambda.front() == doctest::Approx(1.0 / 1.2).epsilon(1e-3));
}

TEST_CASE("unperturbed ground state is not applicable") {
  const GroundStateResult& gs = collapse_state();
  InstabilityOptions o;
  o.lambda = 1.0;
  o.dt = 1e-4;
  o.T_max = 0.01;
  o.sample_stride = 10;
  o.comparison_stride = 0;
  const InstabilityReport r = instability_experiment(gs, PotentialSpec::harmonic(1.0), o);
  CHECK(r.verdict.verdict == Verdict::not_applicable);
  CHECK(r.trace.exit == EvolutionExit::completed);
  // Pohozaev identity holds up to the discretization error of the 64^3 grid.
  CHECK(std::abs(r.P_u0) < 1e-5 * gs.report.grad_sq);
  CHECK_FALSE(r.verdict.find("(d) max ||grad u||^2 / initial")->passed);
  CHECK(r.mass_defect < 1e-15);
}

TEST_CASE("contrast below the critical exponent does not blow up") {
  const GroundStateResult& gs = stable_state();
  InstabilityOptions o;
  o.lambda = 1.2;
  o.dt = 1e-3;
  o.T_max = 0.2;
  o.sample_stride = 10;
  o.comparison_stride = 0;
  const InstabilityReport r = instability_experiment(gs, PotentialSpec::harmonic(1.0), o);
  CHECK(r.verdict.verdict == Verdict::fail);
  CHECK(r.gate > 0.0);
  CHECK(r.verdict.warnings.size() == 2);
  CHECK(r.trace.exit == EvolutionExit::completed);
  CHECK(r.growth_time < 0.0);
  CHECK_FALSE(r.verdict.find("(d) max ||grad u||^2 / initial")->passed);
  CHECK_FALSE(r.verdict.find("(a) E(u0) - E(phi)")->passed);
}

TEST_CASE("stability perturbations") {
  const GroundStateResult& gs = stable_state();
  const SampledPotential pot = build_potential(PotentialSpec::harmonic(1.0), gs.phi.grid_ptr());
  const ComplexField a = stability_direction(gs.phi, pot, 11, 0.25);
  const ComplexField b = stability_direction(gs.phi, pot, 11, 0.25);
  const ComplexField c = stability_direction(gs.phi, pot, 12, 0.25);
  CHECK(max_abs(a - b) == 0.0);
  CHECK(max_abs(a - c) > 0.0);
  CHECK(x_norm(a, pot) == doctest::Approx(1.0).epsilon(1e-12));
  const double scale = x_norm(gs.phi, pot);
  CHECK(std::abs(x_inner(gs.phi, a, pot)) < 1e-12 * scale);
  ComplexField iphi = gs.phi;
  iphi *= cplx(0.0, 1.0);
  CHECK(std::abs(std::real(x_inner(iphi, a, pot))) < 1e-12 * scale);
  CHECK(max_abs(symmetrize_octahedral(a) - a) < 1e-12 * max_abs(a));
  CHECK(std::abs(std::imag(x_inner(a, a, pot))) < 1e-12);
  double mean_im = 0.0;
  for (const cplx& z : a.values()) mean_im += std::abs(z.imag());
  CHECK(mean_im > 0.0);

  double defect = 0.0;
  const ComplexField u = perturbed_state(gs.phi, a, 1e-2, &defect);
  CHECK(l2_norm(u) == doctest::Approx(l2_norm(gs.phi)).epsilon(1e-12));
  CHECK(defect > 0.0);
  CHECK(defect < 1e-2);
  CHECK_THROWS_AS(stability_direction(gs.phi, pot, 1, 0.0), Error);
}

TEST_CASE("stability scenario below the critical exponent") {
  const GroundStateResult& gs = stable_state();
  StabilityOptions o;
  o.epsilon = 1e-2;
  o.n_perturbations = 2;
  o.dt = 2e-3;
  o.T = 0.5;
  const StabilityReport r = stability_experiment(gs, PotentialSpec::harmonic(1.0), o);
  for (const Criterion& c : r.verdict.criteria) {
    INFO(c.name << ": " << c.measured << " " << c.relation << " " << c.threshold);
    CHECK(c.passed);
  }
  CHECK(r.verdict.verdict == Verdict::pass);
  REQUIRE(r.runs.size() == 2);
  for (const StabilityRun& run : r.runs) {
    CHECK(run.initial_distance == doctest::Approx(1e-2).epsilon(0.2));
    CHECK(run.sup_distance >= run.initial_distance);
    CHECK(run.delta_E > 0.0);
    CHECK(run.exit == EvolutionExit::completed);
  }
  CHECK(r.runs[0].seed == 1);
  CHECK(r.runs[1].seed == 2);
  CHECK(r.regression_dist_sq.size() == 8);
  CHECK(r.fitted_C > 0.0);
}

TEST_CASE("zero perturbation stays on the orbit") {
  const GroundStateResult& gs = stable_state();
  StabilityOptions o;
  o.epsilon = 0.0;
  o.n_perturbations = 1;
  o.dt = 5e-4;
  o.T = 0.1;
  o.sample_stride = 20;
  const StabilityReport r = stability_experiment(gs, PotentialSpec::harmonic(1.0), o);
  CHECK(r.verdict.verdict == Verdict::pass);
  CHECK(r.runs[0].initial_distance == 0.0);
  CHECK(r.runs[0].sup_distance < o.distance_floor);
  CHECK(r.regression_dist_sq.empty());
}

TEST_CASE("perturbation at the box boundary is rejected") {
  auto g = make_grid(16, 3.0);
  GroundStateResult wide{gaussian(g, 1.5)};
  wide.params = ModelParams{1.0, 1.0, 2.5};
  wide.converged = true;
  StabilityOptions o;
  o.n_perturbations = 1;
  o.T = 0.01;
  o.dt = 1e-3;
  try {
    stability_experiment(wide, PotentialSpec::harmonic(1.0), o);
    FAIL("expected a support error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::support);
  }
}

TEST_CASE("rescaled limit study") {
  auto g = make_grid(32, 10.0);
  const LimitStudy s = rescaled_limit_study(PotentialSpec::harmonic(1.0), 1.0, 2.2, {10.0, 100.0, 1000.0}, g);
  REQUIRE(s.rows.size() == 3);
  for (const LimitRow& row : s.rows) {
    CHECK(row.ok);
    CHECK(row.converged);
    CHECK(row.residual < 1e-8);
    // p = 2.2 is below 2 + (2 - mu)/3
    CHECK(row.d2E > 0.0);
  }
  for (const Criterion& c : s.verdict.criteria) {
    INFO(c.name << ": " << c.measured << " " << c.relation << " " << c.threshold);
    CHECK(c.passed);
  }
  CHECK(s.verdict.verdict == Verdict::pass);
  CHECK(s.rows[2].h1_sq == doctest::Approx(s.h1_sq_psi1).epsilon(1e-4));

  const LimitStudy free = rescaled_limit_study(PotentialSpec::zero(), 1.0, 2.2, {10.0, 100.0}, g);
  CHECK(free.verdict.verdict == Verdict::pass);
  for (const LimitRow& row : free.rows) {
    CHECK(row.h1_distance == 0.0);
    CHECK(row.F_gap == 0.0);
    CHECK(row.potential_term == 0.0);
  }

  CHECK_THROWS_AS(rescaled_limit_study(PotentialSpec::zero(), 1.0, 2.2, {100.0, 10.0}, g), Error);
  CHECK_THROWS_AS(rescaled_limit_study(PotentialSpec::zero(), 1.0, 2.2, {}, g), Error);
}

TEST_CASE("failed limit rows are flagged and the study continues") {
  auto g = make_grid(16, 8.0);
  // The rescaled trap at omega = 1e-3 is far too stiff for this grid.
  const LimitStudy s = rescaled_limit_study(PotentialSpec::harmonic(1.0), 1.0, 2.5, {1e-3, 10.0}, g);
  REQUIRE(s.rows.size() == 2);
  CHECK_FALSE(s.rows[0].ok);
  CHECK_FALSE(s.rows[0].error.empty());
  CHECK(s.rows[1].ok);
  CHECK_FALSE(s.verdict.find("failed rows")->passed);
  CHECK(s.verdict.verdict == Verdict::fail);
}

TEST_CASE("worker count honors CHQ_THREADS") {
  ::setenv("CHQ_THREADS", "3", 1);
  CHECK(worker_threads() == 3);
  ::setenv("CHQ_THREADS", "0", 1);
  CHECK(worker_threads() >= 1);
  ::unsetenv("CHQ_THREADS");
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(4, [](std::size_t i) {
                    if (i == 2) fail(ErrorCode::runtime, "boom");
                  }),
                  Error);
}
