#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "choquard/functionals.hpp"

namespace chq {

// Time stepping for
//   i u_t = -Lap u + V u - (|x|^-mu * |u|^p) |u|^(p-2) u,
// the sign under which u = e^{i omega t} phi solves it whenever phi solves the
// stationary equation -Lap phi + omega phi + V phi = (|x|^-mu * phi^p) phi^(p-1).
//
// Strang splitting: half a step of the phase rotation
// exp(-i (V - W |u|^(p-2)) dt/2), a full free step exp(-i |k|^2 dt) in Fourier
// space, and another half rotation. |u| is unchanged by the rotations, so W
// is exact over each half step, and W after a step is the W of the next one.
class Propagator {
 public:
  // `coupling` multiplies the nonlinear term (1 for the model, 0 for the
  // linear flow).
  Propagator(const ComplexField& u0, const PotentialSpec& spec, double mu, double p, double dt,
             double coupling = 1.0);

  void step();
  void advance(int steps);

  const ComplexField& state() const noexcept { return u_; }
  double time() const noexcept { return t_; }
  double dt() const noexcept { return dt_; }
  std::int64_t steps_taken() const noexcept { return steps_; }

  struct Observables {
    double Q = 0.0;        // (1/2) ||u||^2
    double E = 0.0;
    double moment = 0.0;   // ||x u||^2
    double grad_sq = 0.0;
    double P = 0.0;
    double F = 0.0;
  };
  // Uses the cached Riesz potential of the current state.
  Observables observe() const;

 private:
  void refresh();

  ComplexField u_;
  double mu_, p_, dt_, coupling_;
  SampledPotential pot_;
  RealField r2_;
  cvector free_phase_;
  cvector rotation_;  // half-step phase factor for the current |u|
  RealField W_;
  RealField power_;    // |u|^(p-2)
  RealField density_;  // |u|^p
  double t_ = 0.0;
  std::int64_t steps_ = 0;
};

ComplexField strang_step(const ComplexField& u, const PotentialSpec& spec, double mu, double p, double dt);

enum class EvolutionExit { completed, blow_up_detected, support_violation };
const char* to_string(EvolutionExit e);

struct EvolveOptions {
  double dt = 1e-3;
  double T = 1.0;
  int sample_stride = 1;          // steps between recorded samples
  int snapshot_stride = 0;        // samples between stored fields; 0 stores none
  double blow_up_factor = 1e3;    // of the initial ||grad u||^2
  double support_tol = 1e-6;      // mass fraction within 2 cells of the boundary
  bool blow_up_probe = true;      // re-run the last interval at dt/2 when blow-up fires
  double coupling = 1.0;
  // Called at every recorded sample.
  std::function<void(double t, const ComplexField& u)> observer;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> Q, E, moment_xx, grad_sq, P;
  std::vector<double> snapshot_times;
  std::vector<ComplexField> snapshots;
  EvolutionExit exit = EvolutionExit::completed;
  double exit_time = 0.0;
  double dt = 0.0;
  std::int64_t steps = 0;
  // dt/2 probe after blow-up detection.
  bool probe_run = false;
  bool probe_confirmed = false;
  double probe_grad_sq = 0.0;
  std::string message;

  std::size_t size() const noexcept { return times.size(); }
  double max_relative_drift(const std::vector<double>& series) const;
};

// Evolves to T = dt * steps (T must be a whole number of steps up to 1e-9).
EvolutionTrace evolve(const ComplexField& u0, const PotentialSpec& spec, double mu, double p,
                      const EvolveOptions& opts);

// Backward in time by the same scheme: conj(evolve(conj(u), ...)).
ComplexField evolve_backward(const ComplexField& u, const PotentialSpec& spec, double mu, double p, double dt,
                             double T);

struct VirialReport {
  double max_mismatch = 0.0;     // max |g'' - 8P| / max |8P| over interior samples
  double max_abs_mismatch = 0.0;
  double max_second_difference = 0.0;
  double max_8P = 0.0;
  std::size_t samples = 0;
};

// Centered second differences of moment_xx against 8 P. Throws on fewer than
// three samples or non-uniform spacing.
VirialReport virial_check(const EvolutionTrace& trace);

// Columns: t,Q,E,moment_xx,grad_sq,P
void write_trace_csv(const EvolutionTrace& trace, std::ostream& out);

}  // namespace chq
