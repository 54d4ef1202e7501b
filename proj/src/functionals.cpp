#include "choquard/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "choquard/error.hpp"
#include "choquard/riesz.hpp"
#include "choquard/spectral.hpp"

namespace chq {

void check_params(double mu, double p) {
  check_riesz_exponent(mu);
  require(p > 1.0 && std::isfinite(p), ErrorCode::domain, "p must satisfy p > 1 (got " + std::to_string(p) + ")");
}

bool p_in_energy_range(double mu, double p) { return p > 2.0 - mu / 3.0 && p < 6.0 - mu; }

double modulus_power(double abs_v, double exponent) {
  if (abs_v == 0.0) return exponent == 0.0 ? 1.0 : 0.0;
  return std::pow(abs_v, exponent);
}

namespace {

template <class Field>
HartreeTerms hartree_impl(const Field& v, double mu, double p) {
  check_params(mu, p);
  HartreeTerms t{RealField(v.grid_ptr()), RealField(v.grid_ptr()), 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) t.density[i] = modulus_power(std::abs(v[i]), p);
  v.grid().riesz(mu).convolve(t.density.values(), t.W.values());
  t.F = inner(t.density, t.W);
  return t;
}

double rel(double residual, std::initializer_list<double> terms) {
  double scale = 0.0;
  for (double t : terms) scale = std::max(scale, std::abs(t));
  return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
}

}  // namespace

HartreeTerms hartree_terms(const ComplexField& v, double mu, double p) { return hartree_impl(v, mu, p); }
HartreeTerms hartree_terms(const RealField& v, double mu, double p) { return hartree_impl(v, mu, p); }

double hartree_term(const ComplexField& v, double mu, double p) { return hartree_terms(v, mu, p).F; }

double FunctionalReport::residual_action() const { return rel(S_omega - (E + omega * Q), {S_omega, E, omega * Q}); }

double FunctionalReport::residual_energy() const {
  return rel(E - (0.5 * grad_sq + 0.5 * pot_term - F_mu / (2.0 * p)), {E, grad_sq, pot_term, F_mu / p});
}

double FunctionalReport::residual_nehari() const {
  return rel(I_omega - (grad_sq + 2.0 * omega * Q + pot_term - F_mu), {I_omega, grad_sq, omega * Q, pot_term, F_mu});
}

double FunctionalReport::residual_split() const {
  return rel(S_omega - (0.5 * I_omega + (p - 1.0) / (2.0 * p) * F_mu), {S_omega, I_omega, F_mu});
}

FunctionalReport functional_report(const ComplexField& v, const SampledPotential& pot, const ModelParams& m) {
  v.check_grid(pot.V.grid());
  FunctionalReport r;
  r.omega = m.omega;
  r.mu = m.mu;
  r.p = m.p;
  r.F_mu = hartree_term(v, m.mu, m.p);
  const double mass = integrate_weighted(v);
  r.Q = 0.5 * mass;
  r.grad_sq = spectral_gradient_sqnorm(v);
  const double xgrad = pot.zero ? 0.0 : integrate_weighted(v, pot.x_grad_V);
  const double v1 = pot.zero ? 0.0 : integrate_weighted(v, pot.V1);
  r.pot_term = pot.zero ? 0.0 : integrate_weighted(v, pot.V);
  r.E = 0.5 * r.grad_sq + 0.5 * r.pot_term - r.F_mu / (2.0 * m.p);
  r.S_omega = r.E + m.omega * r.Q;
  r.I_omega = r.grad_sq + 2.0 * m.omega * r.Q + r.pot_term - r.F_mu;
  r.P = r.grad_sq - 0.5 * xgrad - dilation_exponent(m.mu, m.p) / (2.0 * m.p) * r.F_mu;
  r.x_norm_sq = mass + r.grad_sq + v1;
  return r;
}

FunctionalReport functional_report(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m) {
  return functional_report(v, build_potential(spec, v.grid_ptr()), m);
}

ComplexField dilate(const ComplexField& v, double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::invalid_argument, "dilation factor must be positive");
  return resample(v, lambda, std::pow(lambda, 1.5));
}

NehariScaling nehari_scale(const ComplexField& v, const SampledPotential& pot, const ModelParams& m) {
  const FunctionalReport r = functional_report(v, pot, m);
  require(r.F_mu > 0.0, ErrorCode::invalid_argument, "Nehari scaling needs F_mu(v) > 0");
  const double A = r.grad_sq + 2.0 * m.omega * r.Q + r.pot_term;
  require(A > 0.0, ErrorCode::domain, "Nehari scaling needs a positive quadratic part");
  const double theta = std::pow(A / r.F_mu, 1.0 / (2.0 * m.p - 2.0));
  return {theta, theta * v};
}

ComplexField rescale_omega(const ComplexField& v, double omega, double mu, double p, RescaleDirection dir) {
  require(omega > 0.0, ErrorCode::domain, "omega must be positive");
  check_params(mu, p);
  const double a = rescale_amplitude_exponent(mu, p);
  const double s = std::sqrt(omega);
  if (dir == RescaleDirection::from_tilde) return resample(v, s, std::pow(omega, a));
  return resample(v, 1.0 / s, std::pow(omega, -a));
}

ComplexField rescale_omega_regrid(const ComplexField& v, double omega, double mu, double p, RescaleDirection dir) {
  require(omega > 0.0, ErrorCode::domain, "omega must be positive");
  check_params(mu, p);
  const double a = rescale_amplitude_exponent(mu, p);
  const double s = std::sqrt(omega);
  const bool from = dir == RescaleDirection::from_tilde;
  const GridPtr grid = make_grid(v.grid().n(), from ? v.grid().half_width() / s : v.grid().half_width() * s);
  cvector data(v.values().begin(), v.values().end());
  const double amp = std::pow(omega, from ? a : -a);
  for (auto& c : data) c *= amp;
  return ComplexField(grid, std::move(data));
}

DilationSecondDerivative d2E_lambda(const ComplexField& v, const SampledPotential& pot, double mu, double p) {
  v.check_grid(pot.V.grid());
  const double F = hartree_term(v, mu, p);
  const double grad = spectral_gradient_sqnorm(v);
  const double s = dilation_exponent(mu, p);
  double xg = 0.0, xx = 0.0, vs = 0.0;
  if (!pot.zero) {
    xg = integrate_weighted(v, pot.x_grad_V);
    xx = integrate_weighted(v, pot.xx_hess_V);
    vs = integrate_weighted(v, pot.v_star);
  }
  DilationSecondDerivative d;
  d.raw = grad + 0.5 * (2.0 * xg + xx) - s * (s - 1.0) / (2.0 * p) * F;
  d.reduced = 0.5 * vs - s * (s - 2.0) / (2.0 * p) * F;
  d.P = grad - 0.5 * xg - s / (2.0 * p) * F;
  return d;
}

double energy_dilation_ladder(const ComplexField& v, const PotentialSpec& spec, double mu, double p, double lambda) {
  const double F = hartree_term(v, mu, p);
  const double grad = spectral_gradient_sqnorm(v);
  double pot = 0.0;
  if (!spec.is_zero()) {
    const GridPtr& g = v.grid_ptr();
    const RealField Vl = RealField::sample(g, [&](double x, double y, double z) {
      return spec.evaluate(std::sqrt(x * x + y * y + z * z) / lambda);
    });
    pot = integrate_weighted(v, Vl);
  }
  return 0.5 * lambda * lambda * grad + 0.5 * pot - std::pow(lambda, dilation_exponent(mu, p)) / (2.0 * p) * F;
}

double hls_ratio(const ComplexField& v, double mu, double p) {
  const HartreeTerms t = hartree_terms(v, mu, p);
  const double r = 6.0 / (6.0 - mu);
  double s = 0.0;
  for (double d : t.density.values()) s += std::pow(d, r);
  const double norm = std::pow(s * v.grid().cell_volume(), 1.0 / r);
  require(norm > 0.0, ErrorCode::invalid_argument, "HLS ratio of the zero field");
  return t.F / (norm * norm);
}

ComplexField action_gradient(const ComplexField& v, const SampledPotential& pot, const ModelParams& m) {
  v.check_grid(pot.V.grid());
  const HartreeTerms t = hartree_terms(v, m.mu, m.p);
  ComplexField g = neg_laplacian(v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double V = pot.zero ? 0.0 : pot.V[i];
    g[i] += (m.omega + V - t.W[i] * modulus_power(std::abs(v[i]), m.p - 2.0)) * v[i];
  }
  return g;
}

RealField action_gradient(const RealField& v, const SampledPotential& pot, const ModelParams& m,
                          HartreeTerms* terms) {
  v.check_grid(pot.V.grid());
  HartreeTerms t = hartree_terms(v, m.mu, m.p);
  RealField g = neg_laplacian(v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double V = pot.zero ? 0.0 : pot.V[i];
    g[i] += (m.omega + V - t.W[i] * modulus_power(std::abs(v[i]), m.p - 2.0)) * v[i];
  }
  if (terms) *terms = std::move(t);
  return g;
}

}  // namespace chq
