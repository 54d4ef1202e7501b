#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "choquard/functionals.hpp"
#include "choquard/preconditioner.hpp"

namespace chq {

// L1, L2 linearize at psi1 (V = 0, omega = 1); the _omega variants at a
// ground state of the problem with potential.
enum class OperatorTag { L1, L2, L1_omega, L2_omega };
const char* to_string(OperatorTag tag);
inline bool is_first_kind(OperatorTag t) { return t == OperatorTag::L1 || t == OperatorTag::L1_omega; }

// With W = |x|^-mu * phi^p for a real state phi:
//   L2 v = (-Lap + omega + V) v - W phi^(p-2) v
//   L1 v = (-Lap + omega + V) v - (p-1) W phi^(p-2) v - p (|x|^-mu * (phi^(p-1) v)) phi^(p-1)
// so that <S''(phi) v, v> = <L1 Re v, Re v> + <L2 Im v, Im v>.
class LinearizedOperator {
 public:
  LinearizedOperator(OperatorTag tag, const ComplexField& state, const PotentialSpec& spec, const ModelParams& m);

  RealField apply(const RealField& v) const;
  // Acts on real and imaginary parts separately.
  ComplexField apply(const ComplexField& v) const;
  double form(const RealField& v) const;  // <L v, v>

  // X_omega Gram operator -Lap + omega + V1 and its quadratic form.
  RealField apply_gram(const RealField& v) const;
  double x_norm_sq(const RealField& v) const;
  // Approximate inverse of the Gram operator.
  RealField precondition(const RealField& r) const;

  OperatorTag tag() const noexcept { return tag_; }
  const ModelParams& params() const noexcept { return params_; }
  const RealField& state() const noexcept { return state_; }
  const GridPtr& grid() const noexcept { return state_.grid_ptr(); }

 private:
  OperatorTag tag_;
  ModelParams params_;
  RealField state_;
  SampledPotential pot_;
  RealField local_;     // W phi^(p-2), times (p-1) for L1
  RealField phi_pm1_;   // phi^(p-1), L1 only
  ShiftedOperatorInverse prec_;
};

ComplexField apply_linearized(OperatorTag tag, const ComplexField& state, const PotentialSpec& spec,
                              const ModelParams& m, const ComplexField& v);

struct SpectrumOptions {
  int count = 4;
  double tol = 1e-7;
  int max_iter = 2000;
  std::uint64_t seed = 1;
  // Restrict to fields invariant under the 48 octahedral symmetries.
  bool radial_sector = false;
  // Work in the orthogonal complement (L^2) of these fields.
  std::vector<RealField> constraints;
  // Minimize <Lv,v>/||v||_X^2 instead of <Lv,v>/||v||_2^2.
  bool x_normalized = false;
  std::optional<double> kernel_tol;  // default 1e-4 |lambda_1|
  std::optional<double> morse_tol;   // default 1e-6 max(1, max |lambda|)
};

struct SpectrumReport {
  OperatorTag tag = OperatorTag::L1;
  std::vector<double> eigenvalues;  // ascending
  std::vector<RealField> eigenvectors;
  std::vector<double> residuals;
  int morse_index = 0;
  int kernel_dim_estimate = 0;
  double kernel_tol = 0.0;
  double morse_tol = 0.0;
  // Lowest Rayleigh quotient under the declared constraints and sector.
  double coercivity = 0.0;
  std::string constraints;
  std::string normalization;  // "l2" or "x"
  int iterations = 0;
};

// Throws ErrorCode::convergence if the eigensolver does not reach tol.
SpectrumReport lowest_eigenpairs(const LinearizedOperator& op, const SpectrumOptions& opts);

struct CoercivityReport {
  double l2 = 0.0;  // min <Lv,v>/||v||_2^2
  double x = 0.0;   // min <Lv,v>/||v||_X^2
  RealField l2_minimizer;
  RealField x_minimizer;
};

// Both normalizations over the orthogonal complement of the constraints.
// Throws on zero or linearly dependent constraints.
CoercivityReport constrained_coercivity(const LinearizedOperator& op, const std::vector<RealField>& constraints,
                                        bool radial_sector, const SpectrumOptions& base = {});

struct ScalingModeReport {
  double residual = 0.0;          // ||L1 phi + psi1||_2 / ||psi1||_2
  double quotient = 0.0;          // <L1 phi, phi> / ||psi1||_2^2
  double target = 0.0;            // -(a - 3/4), a = (5-mu)/(4(p-1)); -(7-3p)/(4(p-1)) at mu = 1
  double relative_error = 0.0;
  double l1_psi_form = 0.0;       // <L1 psi1, psi1>
  double l2_psi_form = 0.0;       // <L2 psi1, psi1>
  double hartree = 0.0;           // F_mu(psi1)
  double split_error = 0.0;       // |<L1 psi,psi> - <L2 psi,psi> + 2(p-1)F| / |<L1 psi,psi>|
};

// phi = a psi1 + (1/2) x.grad psi1, the omega-derivative of the psi1 family.
ScalingModeReport scaling_mode_check(const ComplexField& psi1, double mu, double p);

struct RescaledIdentityReport {
  double form_error[2] = {0.0, 0.0};  // k = 1, 2
  double norm_error = 0.0;
  double inner_error = 0.0;
  double max_error = 0.0;
};

// regrid: the tilde fields live on a box stretched by sqrt(omega) with the
// same samples, where the discrete map is exact. same_grid: resampled on the
// grid of phi, accurate to the interpolation error of phi.
enum class RescaleFrame { regrid, same_grid };

// Compares <L^k_omega v, v> with omega^(2a - 1/2) <L~^k v~, v~>, the X norms
// likewise, and (phi, v) with omega^(2a - 3/2) (phi~, v~), for random smooth v
// localized like phi. With same_grid, throws ErrorCode::support if the stretch
// leaves the box.
RescaledIdentityReport rescaled_operator_identity_check(const ComplexField& phi, const PotentialSpec& spec,
                                                        const ModelParams& m, int samples = 3,
                                                        std::uint64_t seed = 7,
                                                        RescaleFrame frame = RescaleFrame::regrid);

// (p-1) int |w|^(p-2) v^2 (K*|w|^p) + p int (K*(|w|^(p-2) w v)) |w|^(p-2) w v
// with signed v.
double cross_form(const ComplexField& w, const RealField& v, double mu, double p);

// Largest principal angle (radians, plain l2) between span(b) and span(a);
// requires b.size() <= a.size().
double largest_principal_angle(const std::vector<RealField>& a, const std::vector<RealField>& b);

struct BlockCheck {
  double direct = 0.0;  // second difference of S_omega along v, Richardson extrapolated
  double blocks = 0.0;  // <L1 Re v, Re v> + <L2 Im v, Im v>
  double relative_error = 0.0;
};
BlockCheck second_variation_check(const ComplexField& state, const PotentialSpec& spec, const ModelParams& m,
                                  const ComplexField& v);

}  // namespace chq
