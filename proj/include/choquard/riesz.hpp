#pragma once

#include <span>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/grid.hpp"

namespace chq {

// Fourier transform of |x|^-mu restricted to the ball |x| < radius, as a
// function of |k|: 4*pi * int_0^radius r^(2-mu) sin(kr)/(kr) dr.
double truncated_kernel_transform(double k, double mu, double radius);

// Free-space discrete convolution with |x|^-mu on a SpectralGrid.
//
// The kernel is truncated at R = 2*sqrt(3)*L (every pair of points in the box
// is closer than R), transformed analytically, sampled on a 4x oversampled
// frequency lattice and folded back to the 2n zero-padded lattice. The result
// is exact, up to roundoff, for the discrete sum
//   g_i = h^3 * sum_j K(x_i - x_j) f_j
// where K is the band-limited truncated kernel exposed by kernel_sample().
// The padded multiplier is clipped at zero, so the operator is positive
// semidefinite.
class RieszKernel {
 public:
  RieszKernel(const SpectralGrid& grid, double mu);

  double mu() const noexcept { return mu_; }
  double truncation_radius() const noexcept { return radius_; }

  // g = K * f for real f of length n^3.
  void convolve(std::span<const double> f, std::span<double> g) const;

  // Effective kernel at the lattice offset (a, b, c) * h, |a|,|b|,|c| <= n.
  double kernel_sample(int a, int b, int c) const;

  // Multiplier on the zero-padded lattice (side 2n) in octant storage,
  // index (i, j, l) with each in [0, n]; includes the h^3 quadrature weight.
  double multiplier(int i, int j, int l) const;
  std::size_t octant_side() const noexcept { return static_cast<std::size_t>(n_) + 1; }

 private:
  const SpectralGrid* grid_;
  int n_;
  double mu_;
  double radius_;
  std::vector<double> octant_multiplier_;  // (n+1)^3
  std::vector<double> octant_kernel_;      // (n+1)^3
  rvector padded_multiplier_;              // r2c layout of side 2n, normalized
};

void check_riesz_exponent(double mu);

RealField riesz_convolve(const RealField& f, double mu);
// Convolves real and imaginary parts separately.
ComplexField riesz_convolve(const ComplexField& f, double mu);

}  // namespace chq
