#include "choquard/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "choquard/error.hpp"
#include "choquard/preconditioner.hpp"
#include "choquard/spectral.hpp"

namespace chq {

namespace {

// A point on the Nehari manifold with its cached Riesz potential.
struct NehariPoint {
  RealField phi;
  RealField W;
  double F = 0.0;
  double S = 0.0;
};

double quadratic_part(const RealField& f, const SampledPotential& pot, double omega) {
  double a = spectral_gradient_sqnorm(f) + omega * integrate_weighted(f);
  if (!pot.zero) a += integrate_weighted(f, pot.V);
  return a;
}

// Scales f onto I_omega = 0; nullopt when f has collapsed.
std::optional<NehariPoint> project(RealField f, const SampledPotential& pot, const ModelParams& m) {
  HartreeTerms t = hartree_terms(f, m.mu, m.p);
  const double A = quadratic_part(f, pot, m.omega);
  if (!(t.F > 0.0) || !(A > 0.0)) return std::nullopt;
  const double theta = std::pow(A / t.F, 1.0 / (2.0 * m.p - 2.0));
  f *= theta;
  t.W *= std::pow(theta, m.p);
  const double F = t.F * std::pow(theta, 2.0 * m.p);
  return NehariPoint{std::move(f), std::move(t.W), F, (m.p - 1.0) / (2.0 * m.p) * F};
}

RealField gradient(const NehariPoint& x, const SampledPotential& pot, const ModelParams& m) {
  RealField g = neg_laplacian(x.phi);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double V = pot.zero ? 0.0 : pot.V[i];
    g[i] += (m.omega + V - x.W[i] * modulus_power(std::abs(x.phi[i]), m.p - 2.0)) * x.phi[i];
  }
  return g;
}

double boundary_ratio(const RealField& f) {
  const SpectralGrid& g = f.grid();
  const int n = g.n();
  double edge = 0.0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        if (ix == 0 || iy == 0 || iz == 0 || ix == n - 1 || iy == n - 1 || iz == n - 1)
          edge = std::max(edge, std::abs(f[g.index(ix, iy, iz)]));
  const double top = max_abs(f);
  return top > 0.0 ? edge / top : 0.0;
}

}  // namespace

GroundStateResult solve_ground_state(const PotentialSpec& spec, const ModelParams& params, const GridPtr& grid,
                                     const SolverOptions& opts) {
  check_params(params.mu, params.p);
  require(opts.tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  require(opts.max_iter >= 0, ErrorCode::invalid_argument, "max_iter must be nonnegative");
  const SampledPotential pot = build_potential(spec, grid);
  const ShiftedOperatorInverse prec(grid, params.omega, spec);

  RealField start = opts.initial ? *opts.initial
                                 : RealField::sample(grid, [](double x, double y, double z) {
                                     return std::exp(-0.5 * (x * x + y * y + z * z));
                                   });
  start.check_grid(*grid);
  if (opts.symmetrize) start = symmetrize_octahedral(start);
  auto current = project(std::move(start), pot, params);
  require(current.has_value(), ErrorCode::convergence, "initial profile has F_mu = 0 or a nonpositive quadratic part");

  GroundStateResult res{ComplexField(grid), params, {}, 0.0, 0, false, {}, 0.0, 0.0, {}};
  res.action_history.push_back(current->S);
  double tau = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iter; ++it) {
    const RealField g = gradient(*current, pot, params);
    residual = l2_norm(g) / l2_norm(current->phi);
    if (residual < opts.tol) break;
    const RealField d = prec.apply(g);
    bool accepted = false;
    while (tau >= 1e-8) {
      RealField cand = current->phi;
      cand.axpy(-tau, d);
      if (residual > opts.modulus_until)
        for (auto& v : cand.values()) v = std::abs(v);
      if (opts.symmetrize) cand = symmetrize_octahedral(cand);
      auto next = project(std::move(cand), pot, params);
      // Allow roundoff-level increases near convergence.
      if (next && next->S <= current->S + 1e-12 * std::abs(current->S)) {
        current = std::move(next);
        accepted = true;
        break;
      }
      if (!next) res.message = "trial step collapsed to zero";
      tau *= 0.5;
    }
    if (!accepted) {
      res.message = "step size underflow";
      break;
    }
    ++res.iterations;
    res.action_history.push_back(current->S);
    tau = std::min(1.0, 2.0 * tau);
  }

  res.phi = to_complex(current->phi);
  res.residual = residual_norm(res.phi, pot, params);
  res.report = functional_report(res.phi, pot, params);
  res.converged = res.residual < opts.tol;
  res.boundary_ratio = boundary_ratio(current->phi);
  const double lowest = *std::min_element(current->phi.values().begin(), current->phi.values().end());
  res.negative_ratio = std::min(0.0, lowest) / max_abs(current->phi);
  if (res.converged) res.message = "converged";
  else if (res.message.empty()) res.message = "max_iter reached";
  if (res.boundary_ratio > 1e-8) res.message += "; profile not negligible at the box boundary";
  return res;
}

GroundStateResult solve_psi1(double mu, double p, const GridPtr& grid, const SolverOptions& opts) {
  return solve_ground_state(PotentialSpec::zero(), ModelParams{1.0, mu, p}, grid, opts);
}

double residual_norm(const ComplexField& phi, const SampledPotential& pot, const ModelParams& params) {
  const double norm = l2_norm(phi);
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  return l2_norm(action_gradient(phi, pot, params)) / norm;
}

double residual_norm(const ComplexField& phi, const PotentialSpec& spec, const ModelParams& params) {
  return residual_norm(phi, build_potential(spec, phi.grid_ptr()), params);
}

}  // namespace chq
