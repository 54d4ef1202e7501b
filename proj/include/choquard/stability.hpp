#pragma once

#include <string>
#include <vector>

#include "choquard/dynamics.hpp"
#include "choquard/ground_state.hpp"

namespace chq {

// <a, b>_X = <a, b> + <grad a, grad b> + <V1 a, b>, conjugate-linear in a.
cplx x_inner(const ComplexField& a, const ComplexField& b, const SampledPotential& pot);
double x_norm(const ComplexField& a, const SampledPotential& pot);

struct OrbitalDistance {
  double theta = 0.0;       // minimizer of ||u - e^{i theta} phi||_X, in (-pi, pi]
  double dist = 0.0;
  bool degenerate = false;  // <phi, u>_X vanished; theta set to 0
};
// theta* = arg <phi, u>_X in closed form.
OrbitalDistance orbital_distance(const ComplexField& u, const ComplexField& phi, const SampledPotential& pot);
OrbitalDistance orbital_distance(const ComplexField& u, const ComplexField& phi, const PotentialSpec& spec);

// I(v^lambda) = lambda^2 ||grad v||^2 + omega ||v||^2 + int V(x/lambda)|v|^2 - lambda^s F(v),
// exact in lambda (no resampling).
double nehari_along_dilation(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m, double lambda);

struct NehariDilation {
  double lambda = 1.0;
  double I_relative = 0.0;  // |I(v^lambda)| over its quadratic part at the root
  int evaluations = 0;
};
// Root of lambda -> I(v^lambda) closest to 1. Throws ErrorCode::convergence
// when no sign change is found in [1/search, search].
NehariDilation nehari_dilation(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m,
                               double search = 2.0);

enum class ExperimentKind { instability, stability, limit_study };
enum class Verdict { pass, fail, not_applicable };
const char* to_string(ExperimentKind k);
const char* to_string(Verdict v);

struct Criterion {
  std::string name;
  std::string relation;  // one of < <= > >=
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ExperimentVerdict {
  ExperimentKind kind = ExperimentKind::instability;
  double mu = 0.0, p = 0.0, omega = 0.0;
  double lambda = 0.0;   // instability runs
  double epsilon = 0.0;  // stability runs
  std::vector<Criterion> criteria;
  Verdict verdict = Verdict::fail;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;

  // Appends a criterion; passed is computed from the relation.
  const Criterion& add(std::string name, double measured, std::string relation, double threshold);
  // pass iff every criterion passed; not_applicable is kept when already set.
  void settle();
  const Criterion* find(const std::string& name) const;
};

struct InstabilityOptions {
  double lambda = 1.2;
  double dt = 1e-4;
  double T_max = 10.0;
  double growth_factor = 10.0;  // criterion (d)
  double blow_up_factor = 1e3;
  int sample_stride = 1;
  // Nehari-dilation comparison E(phi) <= E(u) + (lambda(u) - 1) P(u) every
  // this many samples inside the resolved window; 0 disables it.
  int comparison_stride = 10;
};

struct InstabilityReport {
  ExperimentVerdict verdict;
  EvolutionTrace trace;
  double gate = 0.0;           // d^2/dlambda^2 E(phi^lambda) at lambda = 1
  double mass_defect = 0.0;    // relative mass change of the dilation before renormalization
  double E_phi = 0.0, E_u0 = 0.0, P_u0 = 0.0;
  double growth_time = -1.0;   // first sample with ||grad u||^2 >= growth_factor times initial, -1 if none
  std::size_t window = 0;      // samples used for (b) and (c)
  std::vector<double> comparison_times, comparison_lambda, comparison_slack;
};

// Dilated ground state phi^lambda (mass renormalized) evolved to T_max.
// Criteria: (a) E(u0) < E(phi), Q(u0) = Q(phi), P(u0) < 0; (b) P(u(t)) <=
// -(E(phi) - E(u0)) over the resolved window; (c) g = ||x u||^2 concave and
// decreasing after its maximum over the window; (d) ||grad u||^2 reaching
// growth_factor times its initial value. The window ends at the first sample
// satisfying (d). lambda = 1 gives the verdict not_applicable.
InstabilityReport instability_experiment(const GroundStateResult& gs, const PotentialSpec& spec,
                                         const InstabilityOptions& opts = {});

struct StabilityOptions {
  double epsilon = 1e-2;
  int n_perturbations = 10;
  unsigned seed = 1;
  double dt = 2e-3;
  double T = 20.0;
  int sample_stride = 10;
  double band_fraction = 0.25;        // retained wavenumbers, fraction of the grid Nyquist
  double distance_factor = 5.0;
  // Threshold for epsilon = 0, where distance_factor * epsilon vanishes.
  double distance_floor = 1e-3;
  std::vector<double> ladder = {0.25, 0.5, 1.0, 2.0};  // amplitudes (times epsilon) for the regression
  double min_r_squared = 0.9;
};

struct StabilityRun {
  unsigned seed = 0;
  double initial_distance = 0.0;
  double sup_distance = 0.0;
  double delta_E = 0.0;
  double mass_defect = 0.0;  // relative mass change removed by renormalization
  EvolutionExit exit = EvolutionExit::completed;
  double exit_time = 0.0;
};

struct StabilityReport {
  ExperimentVerdict verdict;
  std::vector<StabilityRun> runs;
  double phi_x_norm = 0.0;
  double fitted_C = 0.0;
  double r_squared = 0.0;
  std::vector<double> regression_dist_sq, regression_delta_E;
};

// Seeded perturbation of phi: band-limited complex noise under the |phi|
// envelope, restricted to the octahedral sector, X-orthogonal to phi and i phi,
// scaled to ||delta||_X = 1.
ComplexField stability_direction(const ComplexField& phi, const SampledPotential& pot, unsigned seed,
                                 double band_fraction);

// phi + amplitude * direction rescaled to the mass of phi.
ComplexField perturbed_state(const ComplexField& phi, const ComplexField& direction, double amplitude,
                             double* mass_defect = nullptr);

StabilityReport stability_experiment(const GroundStateResult& gs, const PotentialSpec& spec,
                                     const StabilityOptions& opts = {});

struct LimitRow {
  double omega = 0.0;
  bool ok = false;
  std::string error;
  bool converged = false;
  double residual = 0.0;
  double F_tilde = 0.0;        // F_mu of the rescaled ground state
  double potential_term = 0.0; // omega^-1 int V(x/sqrt(omega)) |phi_tilde|^2
  double h1_sq = 0.0;          // ||phi_tilde||_H1^2
  double h1_distance = 0.0;    // ||phi_tilde - psi1||_H1
  double F_gap = 0.0;          // |F(phi_tilde) - F(psi1)|
  double d2E = 0.0;            // d^2/dlambda^2 E(phi_omega^lambda) at 1, original frame
};

struct LimitStudy {
  std::vector<LimitRow> rows;
  double F_psi1 = 0.0;
  double h1_sq_psi1 = 0.0;
  ExperimentVerdict verdict;
};

// Ground states of the rescaled problem -Lap + 1 + omega^-1 V(x/sqrt(omega))
// on one grid, compared with psi1 on the same grid. A failed row is flagged and
// the study continues. Trend criteria need a nonzero potential; with V = 0 the
// rows are checked against psi1 instead.
LimitStudy rescaled_limit_study(const PotentialSpec& spec, double mu, double p, const std::vector<double>& omegas,
                                const GridPtr& grid, const SolverOptions& opts = {});

}  // namespace chq
