#pragma once

#include <array>
#include <complex>

#include "choquard/field.hpp"

namespace chq {

// Spectral differentiation, quadrature and resampling on a SpectralGrid.
// Quadrature is the plain h^3 Riemann sum, exact on the torus for
// band-limited integrands.

// Forward transform of u (unnormalized).
cvector to_spectrum(const ComplexField& u);

// -Laplacian with k^2 using the full Nyquist wavenumber.
ComplexField neg_laplacian(const ComplexField& u);
RealField neg_laplacian(const RealField& u);

// d/dx_axis, Nyquist mode dropped.
ComplexField partial(const ComplexField& u, int axis);
RealField partial(const RealField& u, int axis);

// sum_j x_j d_j u with box-centered coordinates.
RealField x_dot_grad(const RealField& u);

// ||grad u||^2 = (h^3/N) sum |k|^2 |u_hat|^2 (Nyquist kept, matching the
// quadratic form of neg_laplacian).
double spectral_gradient_sqnorm(const ComplexField& u);
double spectral_gradient_sqnorm(const RealField& u);

// h^3 sum w |u|^2.
double integrate_weighted(const ComplexField& u, const RealField& w);
double integrate_weighted(const ComplexField& u);
double integrate_weighted(const RealField& u, const RealField& w);
double integrate_weighted(const RealField& u);

// ||u||^2 evaluated in spectral space, (h^3/N) sum |u_hat|^2.
double spectral_l2_sqnorm(const ComplexField& u);

double integrate(const RealField& f);
// h^3 sum conj(a) b.
cplx inner(const ComplexField& a, const ComplexField& b);
double inner(const RealField& a, const RealField& b);
double l2_norm(const ComplexField& u);
double l2_norm(const RealField& u);
double max_abs(const ComplexField& u);
double max_abs(const RealField& u);

// Fraction of h^3 sum |u|^2 carried by points within `cells` cells of the
// box boundary. Returns 0 for the zero field.
double boundary_mass_fraction(const ComplexField& u, int cells = 2);

// w(x) = amplitude * u(scale * x) by separable trigonometric interpolation.
// Points with scale * x outside [-L, L) read zero. Throws ErrorCode::support
// when the part of u that cannot be represented exceeds `support_tol` of its
// mass (u leaves the sampled window, or the stretched field reaches the
// boundary).
ComplexField resample(const ComplexField& u, double scale, double amplitude,
                      double support_tol = 1e-6);
RealField resample(const RealField& u, double scale, double amplitude,
                   double support_tol = 1e-6);

// Periodic shift by whole cells: out(i) = u(i - shift).
ComplexField shift_cells(const ComplexField& u, std::array<int, 3> shift);
RealField shift_cells(const RealField& u, std::array<int, 3> shift);

// Average over the 48 axis permutations and reflections of the cube. This is
// the orthogonal projector onto octahedrally invariant fields.
RealField symmetrize_octahedral(const RealField& u);
ComplexField symmetrize_octahedral(const ComplexField& u);

// Sampled |x| and |x|^2 on the box-centered grid.
RealField radius_field(const GridPtr& grid);
RealField radius_sq_field(const GridPtr& grid);

}  // namespace chq
