#pragma once

#include <vector>

#include "choquard/field.hpp"
#include "choquard/potential.hpp"

namespace chq {

// Inverse of -Lap + shift + V1 on real fields.
//
// For harmonic V1 = a|x|^2 the operator is a sum of three identical 1D
// operators -d^2/dx^2 + a x^2 (spectral second derivative), inverted exactly
// through the 1D eigendecomposition applied along each axis. For any other
// V1 only -Lap + shift is inverted, diagonally in Fourier space.
class ShiftedOperatorInverse {
 public:
  ShiftedOperatorInverse(const GridPtr& grid, double shift, const PotentialSpec& spec);

  RealField apply(const RealField& f) const;
  bool exact() const noexcept { return separable_; }

 private:
  GridPtr grid_;
  double shift_;
  bool separable_ = false;
  std::vector<double> basis_;   // n x n eigenvectors, column-major
  std::vector<double> values_;  // n eigenvalues
};

}  // namespace chq
