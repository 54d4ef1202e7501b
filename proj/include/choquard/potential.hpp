#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "choquard/field.hpp"

namespace chq {

// Radial profile f(r) with its first two derivatives.
struct RadialProfile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

// V = V1 + V2, both radial.
struct PotentialSpec {
  enum class V1Kind { zero, harmonic, radial_polynomial, exponential, custom };
  enum class V2Kind { zero, radial_table };

  V1Kind v1_kind = V1Kind::zero;
  double harmonic_a = 1.0;            // a |x|^2
  std::vector<double> poly_coeffs;    // sum_j c_j r^j
  double exp_a = 1.0, exp_b = 1.0;    // a exp(b r)
  RadialProfile custom;

  V2Kind v2_kind = V2Kind::zero;
  double v2_dr = 0.0;                 // table spacing, samples at r = j * dr
  std::vector<double> v2_samples;
  double q = 2.0;                     // integrability exponent of V2

  // Declared constants for the sampled condition checks.
  std::optional<double> growth_m;     // V1 <= M (1 + |x|^m)
  std::optional<double> growth_M;
  std::map<int, double> derivative_bounds;  // |alpha| -> M_alpha

  static PotentialSpec zero() { return {}; }
  static PotentialSpec harmonic(double a);
  static PotentialSpec radial_polynomial(std::vector<double> coeffs);
  static PotentialSpec exponential(double a, double b);

  bool is_zero() const noexcept { return v1_kind == V1Kind::zero && v2_kind == V2Kind::zero; }

  // Radial profiles; derivatives are exact for the analytic kinds.
  RadialProfile v1_profile() const;
  RadialProfile v2_profile() const;
  double evaluate(double r) const;

  // Potential of the omega-rescaled problem, omega^-1 V(x / sqrt(omega)).
  PotentialSpec rescaled(double omega) const;

  std::string describe() const;
};

// Sampled potential on a grid.
struct SampledPotential {
  RealField V;          // V1 + V2
  RealField V1;         // weight of the X norm
  RealField x_grad_V;   // x . grad V = r f'
  RealField xx_hess_V;  // sum x_i x_j d_i d_j V = r^2 f''
  RealField v_star;     // 3 x . grad V + sum x_i x_j d_i d_j V
  bool zero = false;
};

// Throws on a V2 table not covering the grid or q <= 3/2 with nonzero V2.
SampledPotential build_potential(const PotentialSpec& spec, const GridPtr& grid);

struct ConditionCheck {
  ConditionCheck() = default;
  explicit ConditionCheck(std::string n) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  bool evaluated = true;  // false when the condition cannot be sampled
  double measured = 0.0;  // worst sampled ratio or value
  double bound = 0.0;
  std::vector<double> witness;  // grid point (x, y, z) of the worst sample
  std::string note;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  bool all_passed() const;
  // Grid sampling gives evidence, never proof.
  static constexpr const char* kind = "sampled evidence";
};

ConditionReport validate_conditions(const PotentialSpec& spec, const GridPtr& grid);

}  // namespace chq
