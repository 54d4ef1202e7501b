#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "choquard/field.hpp"

namespace chq {

using FieldMap = std::function<RealField(const RealField&)>;

// Lowest eigenpairs of A v = lambda B v for symmetric A and symmetric
// positive definite B, restricted to the range of an orthogonal projector.
struct EigenProblem {
  FieldMap A;
  FieldMap B;               // identity when empty
  FieldMap preconditioner;  // approximates A^-1 on high modes; identity when empty
  FieldMap projector;       // orthogonal in the plain l2 sense; identity when empty
};

struct EigenOptions {
  int count = 4;
  int guard = 3;           // extra block columns
  double tol = 1e-7;       // on ||A x - lambda B x|| with x^T B x = 1 in grid units
  int max_iter = 1000;
  std::uint64_t seed = 1;
};

struct EigenResult {
  std::vector<double> values;  // ascending
  std::vector<RealField> vectors;
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

// Block preconditioned conjugate gradient (LOBPCG) with an eigen-decomposition
// based B-orthonormalization of the search basis. Returns the best iterate
// when max_iter is reached; `converged` tells whether the residuals met tol.
EigenResult lowest_eigenpairs(const EigenProblem& problem, const GridPtr& grid, const EigenOptions& opts);

}  // namespace chq
