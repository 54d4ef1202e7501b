#pragma once

#include "choquard/field.hpp"
#include "choquard/potential.hpp"

namespace chq {

// Physical parameters of the model i u_t = -Lap u + V u - (|x|^-mu * |u|^p)|u|^(p-2) u.
struct ModelParams {
  double omega = 1.0;
  double mu = 1.0;
  double p = 2.5;
};

// Throws on mu outside (0, 3) or p <= 1; p outside (2 - mu/3, 6 - mu) is
// allowed (see p_in_energy_range).
void check_params(double mu, double p);
bool p_in_energy_range(double mu, double p);

// Exponent of lambda in F_mu(v^lambda): 3(p-2) + mu.
inline double dilation_exponent(double mu, double p) { return 3.0 * (p - 2.0) + mu; }

// Riesz potential of |v|^p and the resulting Hartree term.
struct HartreeTerms {
  RealField density;  // |v|^p
  RealField W;        // |x|^-mu * |v|^p
  double F = 0.0;     // int |v|^p W
};
HartreeTerms hartree_terms(const ComplexField& v, double mu, double p);
HartreeTerms hartree_terms(const RealField& v, double mu, double p);

// F_mu(v) = int int |v(x)|^p |v(y)|^p / |x-y|^mu dx dy.
double hartree_term(const ComplexField& v, double mu, double p);

struct FunctionalReport {
  double E = 0.0;
  double Q = 0.0;
  double S_omega = 0.0;
  double I_omega = 0.0;
  double P = 0.0;
  double F_mu = 0.0;
  double grad_sq = 0.0;
  double pot_term = 0.0;
  double x_norm_sq = 0.0;
  double omega = 0.0, mu = 0.0, p = 0.0;

  // Residuals of the defining identities, relative to the largest term.
  double residual_action() const;      // S - (E + omega Q)
  double residual_energy() const;      // E - (grad/2 + pot/2 - F/(2p))
  double residual_nehari() const;      // I - (grad + 2 omega Q + pot - F)
  double residual_split() const;       // S - (I/2 + (p-1)/(2p) F)
};

FunctionalReport functional_report(const ComplexField& v, const SampledPotential& pot, const ModelParams& m);
FunctionalReport functional_report(const ComplexField& v, const PotentialSpec& spec, const ModelParams& m);

// v^lambda(x) = lambda^(3/2) v(lambda x), mass preserving.
ComplexField dilate(const ComplexField& v, double lambda);

struct NehariScaling {
  double theta = 1.0;
  ComplexField scaled;
};
// theta = (A / F)^(1/(2p-2)) with A = grad + 2 omega Q + pot, so I(theta v) = 0.
NehariScaling nehari_scale(const ComplexField& v, const SampledPotential& pot, const ModelParams& m);

enum class RescaleDirection { to_tilde, from_tilde };

// phi(x) = omega^((5-mu)/(4(p-1))) phi_tilde(sqrt(omega) x), resampled on the
// same grid. Throws ErrorCode::support if the stretched field leaves the box.
ComplexField rescale_omega(const ComplexField& v, double omega, double mu, double p, RescaleDirection dir);

// The same map realized exactly by changing the grid: the samples are scaled
// by omega^(+-(5-mu)/(4(p-1))) and L by omega^(-+1/2).
ComplexField rescale_omega_regrid(const ComplexField& v, double omega, double mu, double p, RescaleDirection dir);

inline double rescale_amplitude_exponent(double mu, double p) { return (5.0 - mu) / (4.0 * (p - 1.0)); }

struct DilationSecondDerivative {
  double raw = 0.0;      // grad + 1/2 int (2 x.grad V + x x : Hess V)|v|^2 - s(s-1)/(2p) F
  double reduced = 0.0;  // 1/2 int V*|v|^2 - s(s-2)/(2p) F, equal to raw when P(v) = 0
  double P = 0.0;
};
// d^2/dlambda^2 E(v^lambda) at lambda = 1, s = 3(p-2) + mu.
DilationSecondDerivative d2E_lambda(const ComplexField& v, const SampledPotential& pot, double mu, double p);

// E(v^lambda) evaluated from the dilation ladder formula
// (lambda^2/2) grad + (1/2) int V(x/lambda)|v|^2 - lambda^s/(2p) F.
double energy_dilation_ladder(const ComplexField& v, const PotentialSpec& spec, double mu, double p, double lambda);

// F_mu(v) / || |v|^p ||_{6/(6-mu)}^2, bounded above by the HLS constant.
double hls_ratio(const ComplexField& v, double mu, double p);

// S'_omega(v) = -Lap v + omega v + V v - W |v|^(p-2) v.
ComplexField action_gradient(const ComplexField& v, const SampledPotential& pot, const ModelParams& m);
RealField action_gradient(const RealField& v, const SampledPotential& pot, const ModelParams& m,
                          HartreeTerms* terms = nullptr);

// |v|^(p-2) with the value 0 where v = 0.
double modulus_power(double abs_v, double exponent);

}  // namespace chq
