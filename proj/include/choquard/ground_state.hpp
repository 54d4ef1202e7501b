#pragma once

#include <optional>
#include <string>
#include <vector>

#include "choquard/functionals.hpp"

namespace chq {

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 20000;
  // Project onto octahedrally symmetric fields after every step.
  bool symmetrize = true;
  // Replace phi by |phi| after each step while the residual exceeds this.
  // The discrete ground state has sign-changing tails far below max|phi|,
  // so the modulus must be switched off to converge to tight tolerances.
  double modulus_until = 1e-1;
  // Starting profile; defaults to exp(-|x|^2/2).
  std::optional<RealField> initial;
};

struct GroundStateResult {
  ComplexField phi;  // real
  ModelParams params;
  FunctionalReport report;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> action_history;  // S_omega after each accepted step
  // max |phi| on the outermost grid layer relative to max |phi|.
  double boundary_ratio = 0.0;
  // min phi / max |phi|; zero when phi has no negative values.
  double negative_ratio = 0.0;
  std::string message;
};

// Minimizes S_omega on the Nehari manifold by a gradient flow preconditioned
// with (-Lap + omega + V1)^-1. Each step symmetrizes and rescales back onto the
// manifold, taking the modulus first during the early phase; backtracking keeps
// S_omega nonincreasing.
// Non-convergence is reported through `converged`, not thrown.
GroundStateResult solve_ground_state(const PotentialSpec& spec, const ModelParams& params, const GridPtr& grid,
                                     const SolverOptions& opts = {});

// Ground state of the potential-free problem with omega = 1.
GroundStateResult solve_psi1(double mu, double p, const GridPtr& grid, const SolverOptions& opts = {});

// ||-Lap phi + omega phi + V phi - W |phi|^(p-2) phi||_2 / ||phi||_2, +inf for phi = 0.
double residual_norm(const ComplexField& phi, const SampledPotential& pot, const ModelParams& params);
double residual_norm(const ComplexField& phi, const PotentialSpec& spec, const ModelParams& params);

}  // namespace chq
