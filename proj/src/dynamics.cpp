#include "choquard/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

#include "choquard/error.hpp"
#include "choquard/grid.hpp"
#include "choquard/riesz.hpp"
#include "choquard/spectral.hpp"

namespace chq {

Propagator::Propagator(const ComplexField& u0, const PotentialSpec& spec, double mu, double p, double dt,
                       double coupling)
    : u_(u0),
      mu_(mu),
      p_(p),
      dt_(dt),
      coupling_(coupling),
      pot_(build_potential(spec, u0.grid_ptr())),
      r2_(radius_sq_field(u0.grid_ptr())),
      free_phase_(u0.size()),
      rotation_(u0.size()),
      W_(u0.grid_ptr()),
      power_(u0.grid_ptr()),
      density_(u0.grid_ptr()) {
  check_params(mu, p);
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "dt must be positive");
  require(u0.all_finite(), ErrorCode::invalid_argument, "initial field has non-finite values");
  const SpectralGrid& g = u0.grid();
  const int n = g.n();
  const auto k = g.wavenumbers();
  const double inv = 1.0 / static_cast<double>(u0.size());
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix, ++idx)
        free_phase_[idx] = std::polar(inv, -(k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz]) * dt);
  refresh();
}

// |u| is invariant under the rotation, so one factor serves the second half
// rotation of this step and the first half rotation of the next.
void Propagator::refresh() {
  const std::size_t n = u_.size();
  if (coupling_ != 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(u_[i]);
      power_[i] = modulus_power(a, p_ - 2.0);
      density_[i] = power_[i] * a * a;
    }
    u_.grid().riesz(mu_).convolve(density_.values(), W_.values());
  }
  const double h = 0.5 * dt_;
  for (std::size_t i = 0; i < n; ++i) {
    double phase = pot_.zero ? 0.0 : pot_.V[i];
    if (coupling_ != 0.0) phase -= coupling_ * W_[i] * power_[i];
    rotation_[i] = std::polar(1.0, -phase * h);
  }
}

void Propagator::step() {
  for (std::size_t i = 0; i < u_.size(); ++i) u_[i] *= rotation_[i];
  const Fft3d& fft = u_.grid().fft();
  fft.forward(u_.data());
  for (std::size_t i = 0; i < u_.size(); ++i) u_[i] *= free_phase_[i];
  fft.backward(u_.data());
  refresh();
  for (std::size_t i = 0; i < u_.size(); ++i) u_[i] *= rotation_[i];
  ++steps_;
  t_ = static_cast<double>(steps_) * dt_;
}

void Propagator::advance(int steps) {
  for (int i = 0; i < steps; ++i) step();
}

Propagator::Observables Propagator::observe() const {
  Observables o;
  const double h3 = u_.grid().cell_volume();
  double mass = 0.0, moment = 0.0, pot = 0.0, xg = 0.0, F = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i) {
    const double a2 = std::norm(u_[i]);
    mass += a2;
    moment += r2_[i] * a2;
    if (!pot_.zero) {
      pot += pot_.V[i] * a2;
      xg += pot_.x_grad_V[i] * a2;
    }
    if (coupling_ != 0.0) F += density_[i] * W_[i];
  }
  o.Q = 0.5 * mass * h3;
  o.moment = moment * h3;
  o.grad_sq = spectral_gradient_sqnorm(u_);
  o.F = coupling_ * F * h3;
  o.E = 0.5 * o.grad_sq + 0.5 * pot * h3 - o.F / (2.0 * p_);
  o.P = o.grad_sq - 0.5 * xg * h3 - dilation_exponent(mu_, p_) / (2.0 * p_) * o.F;
  return o;
}

ComplexField strang_step(const ComplexField& u, const PotentialSpec& spec, double mu, double p, double dt) {
  Propagator prop(u, spec, mu, p, dt);
  prop.step();
  return prop.state();
}

const char* to_string(EvolutionExit e) {
  switch (e) {
    case EvolutionExit::completed: return "completed";
    case EvolutionExit::blow_up_detected: return "blow_up_detected";
    case EvolutionExit::support_violation: return "support_violation";
  }
  return "?";
}

double EvolutionTrace::max_relative_drift(const std::vector<double>& series) const {
  if (series.empty() || series.front() == 0.0) return 0.0;
  double worst = 0.0;
  for (double v : series) worst = std::max(worst, std::abs(v - series.front()));
  return worst / std::abs(series.front());
}

namespace {

std::int64_t whole_steps(double T, double dt) {
  require(T >= 0.0 && std::isfinite(T), ErrorCode::invalid_argument, "T must be nonnegative");
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::invalid_argument, "dt must be positive");
  const double s = T / dt;
  const double r = std::round(s);
  require(std::abs(s - r) <= 1e-9 * std::max(1.0, s), ErrorCode::invalid_argument,
          "T must be a whole number of time steps");
  return static_cast<std::int64_t>(r);
}

void record(EvolutionTrace& tr, double t, const Propagator::Observables& o) {
  tr.times.push_back(t);
  tr.Q.push_back(o.Q);
  tr.E.push_back(o.E);
  tr.moment_xx.push_back(o.moment);
  tr.grad_sq.push_back(o.grad_sq);
  tr.P.push_back(o.P);
}

}  // namespace

EvolutionTrace evolve(const ComplexField& u0, const PotentialSpec& spec, double mu, double p,
                      const EvolveOptions& opts) {
  require(opts.sample_stride >= 1 && opts.snapshot_stride >= 0, ErrorCode::invalid_argument,
          "strides must be positive");
  require(opts.blow_up_factor > 1.0, ErrorCode::invalid_argument, "blow-up factor must exceed 1");
  const std::int64_t total = whole_steps(opts.T, opts.dt);

  Propagator prop(u0, spec, mu, p, opts.dt, opts.coupling);
  EvolutionTrace tr;
  tr.dt = opts.dt;
  const Propagator::Observables first = prop.observe();
  const double threshold = opts.blow_up_factor * first.grad_sq;

  ComplexField last_sample = u0;
  double last_time = 0.0;
  std::size_t sample_index = 0;
  auto sample = [&] {
    const double t = prop.time();
    const Propagator::Observables o = prop.observe();
    record(tr, t, o);
    if (opts.observer) opts.observer(t, prop.state());
    if (opts.snapshot_stride > 0 && sample_index % static_cast<std::size_t>(opts.snapshot_stride) == 0) {
      tr.snapshot_times.push_back(t);
      tr.snapshots.push_back(prop.state());
    }
    ++sample_index;
    return o;
  };
  sample();

  while (prop.steps_taken() < total) {
    const int chunk = static_cast<int>(std::min<std::int64_t>(opts.sample_stride, total - prop.steps_taken()));
    prop.advance(chunk);
    tr.steps = prop.steps_taken();

    if (!prop.state().all_finite()) {
      tr.exit = EvolutionExit::blow_up_detected;
      tr.exit_time = prop.time();
      tr.message = "non-finite values at t = " + std::to_string(prop.time());
      break;
    }
    const Propagator::Observables o = sample();
    if (first.grad_sq > 0.0 && o.grad_sq > threshold) {
      tr.exit = EvolutionExit::blow_up_detected;
      tr.exit_time = prop.time();
      tr.message = "||grad u||^2 passed " + std::to_string(opts.blow_up_factor) + " times its initial value at t = " +
                   std::to_string(prop.time());
      break;
    }
    const double edge = boundary_mass_fraction(prop.state(), 2);
    if (edge > opts.support_tol) {
      tr.exit = EvolutionExit::support_violation;
      tr.exit_time = prop.time();
      tr.message = "mass fraction " + std::to_string(edge) + " within 2 cells of the boundary at t = " +
                   std::to_string(prop.time());
      break;
    }
    last_sample = prop.state();
    last_time = prop.time();
  }
  if (tr.exit == EvolutionExit::completed) {
    tr.exit_time = prop.time();
    return tr;
  }

  if (tr.exit == EvolutionExit::blow_up_detected && opts.blow_up_probe && first.grad_sq > 0.0) {
    // Repeat the last interval at dt/2; a resolved blow-up shows the same growth.
    tr.probe_run = true;
    Propagator probe(last_sample, spec, mu, p, 0.5 * opts.dt, opts.coupling);
    const std::int64_t n = 2 * whole_steps(tr.exit_time - last_time, opts.dt);
    for (std::int64_t i = 0; i < n && probe.state().all_finite(); ++i) probe.step();
    if (probe.state().all_finite()) {
      tr.probe_grad_sq = probe.observe().grad_sq;
      tr.probe_confirmed = tr.probe_grad_sq > 0.5 * threshold;
    } else {
      tr.probe_grad_sq = std::numeric_limits<double>::infinity();
      tr.probe_confirmed = true;
    }
  }
  return tr;
}

ComplexField evolve_backward(const ComplexField& u, const PotentialSpec& spec, double mu, double p, double dt,
                             double T) {
  const std::int64_t n = whole_steps(T, dt);
  ComplexField c = u;
  for (cplx& v : c.values()) v = std::conj(v);
  Propagator prop(c, spec, mu, p, dt);
  for (std::int64_t i = 0; i < n; ++i) prop.step();
  ComplexField out = prop.state();
  for (cplx& v : out.values()) v = std::conj(v);
  return out;
}

VirialReport virial_check(const EvolutionTrace& tr) {
  const std::size_t n = tr.times.size();
  require(n >= 3, ErrorCode::invalid_argument, "virial check needs at least three samples");
  require(tr.moment_xx.size() == n && tr.P.size() == n, ErrorCode::invalid_argument, "trace series lengths differ");
  const double step = tr.times[1] - tr.times[0];
  require(step > 0.0, ErrorCode::invalid_argument, "sample times must increase");
  for (std::size_t i = 1; i < n; ++i)
    require(std::abs(tr.times[i] - tr.times[i - 1] - step) <= 1e-9 * step, ErrorCode::invalid_argument,
            "virial check needs uniformly spaced samples");
  VirialReport r;
  r.samples = n;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d2 = (tr.moment_xx[i + 1] - 2.0 * tr.moment_xx[i] + tr.moment_xx[i - 1]) / (step * step);
    const double rhs = 8.0 * tr.P[i];
    r.max_second_difference = std::max(r.max_second_difference, std::abs(d2));
    r.max_8P = std::max(r.max_8P, std::abs(rhs));
    r.max_abs_mismatch = std::max(r.max_abs_mismatch, std::abs(d2 - rhs));
  }
  r.max_mismatch = r.max_8P > 0.0 ? r.max_abs_mismatch / r.max_8P : r.max_abs_mismatch;
  return r;
}

void write_trace_csv(const EvolutionTrace& tr, std::ostream& out) {
  out << "t,Q,E,moment_xx,grad_sq,P\n";
  out.precision(17);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    out << tr.times[i] << ',' << tr.Q[i] << ',' << tr.E[i] << ',' << tr.moment_xx[i] << ',' << tr.grad_sq[i] << ','
        << tr.P[i] << '\n';
}

}  // namespace chq
