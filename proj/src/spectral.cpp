#include "choquard/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "choquard/error.hpp"

namespace chq {

namespace {

// Visits the full spectrum with k-vector components.
template <class F>
void for_each_mode(const SpectralGrid& g, F&& f) {
  const int n = g.n();
  const auto k = g.wavenumbers();
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix, ++idx) f(idx, ix, iy, iz, k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz]);
}

// Same for the r2c half spectrum; `weight` counts the mirrored partner.
template <class F>
void for_each_half_mode(const SpectralGrid& g, F&& f) {
  const int n = g.n();
  const int nh = n / 2 + 1;
  const auto k = g.wavenumbers();
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < nh; ++ix, ++idx) {
        const double weight = (ix == 0 || ix == n / 2) ? 1.0 : 2.0;
        f(idx, ix, iy, iz, k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz], weight);
      }
}

cvector real_spectrum(const RealField& u) {
  const auto& fft = u.grid().fft();
  cvector spec(fft.half_size());
  fft.forward_real(u.data(), spec.data());
  return spec;
}

RealField from_real_spectrum(const GridPtr& grid, cvector& spec) {
  RealField out(grid);
  grid->fft().backward_real(spec.data(), out.data());
  out *= 1.0 / static_cast<double>(grid->size());
  return out;
}

template <class Field>
double weighted_sum(const Field& u, const RealField* w) {
  if (w) u.check_grid(w->grid());
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (w ? (*w)[i] : 1.0) * std::norm(u[i]);
  return s * u.grid().cell_volume();
}

// Row a holds the weights of the trigonometric interpolant evaluated at
// scale * x_a; rows whose target falls outside [-L, L) are zero.
std::vector<double> interpolation_matrix(const SpectralGrid& g, double scale) {
  const int n = g.n();
  const double L = g.half_width();
  const double k0 = std::numbers::pi / L;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    const double t = scale * g.coord(r);
    if (t < -L || t >= L) continue;
    for (int i = 0; i < n; ++i) {
      const double tau = t - g.coord(i);
      double d = 1.0 + std::cos(0.5 * n * k0 * tau);
      for (int m = 1; m < n / 2; ++m) d += 2.0 * std::cos(m * k0 * tau);
      a[static_cast<std::size_t>(r) * n + i] = d / n;
    }
  }
  return a;
}

template <class Field>
void apply_along_axis(const std::vector<double>& a, const Field& in, Field& out, int axis) {
  const SpectralGrid& g = in.grid();
  const int n = g.n();
  const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? n : static_cast<std::size_t>(n) * n);
  using T = typename Field::value_type;
  std::vector<T> line(n);
  for (int q = 0; q < n; ++q)
    for (int s = 0; s < n; ++s) {
      std::size_t base;
      if (axis == 0) base = g.index(0, s, q);
      else if (axis == 1) base = g.index(s, 0, q);
      else base = g.index(s, q, 0);
      for (int i = 0; i < n; ++i) line[i] = in[base + i * stride];
      for (int r = 0; r < n; ++r) {
        const double* row = a.data() + static_cast<std::size_t>(r) * n;
        T acc{};
        for (int i = 0; i < n; ++i) acc += row[i] * line[i];
        out[base + r * stride] = acc;
      }
    }
}

// Mass of u outside the cube |y|_inf < extent.
template <class Field>
double mass_outside(const Field& u, double extent) {
  const SpectralGrid& g = u.grid();
  const int n = g.n();
  double outside = 0.0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double m = std::max({std::abs(g.coord(ix)), std::abs(g.coord(iy)), std::abs(g.coord(iz))});
        if (m >= extent) outside += std::norm(u[g.index(ix, iy, iz)]);
      }
  return outside * g.cell_volume();
}

template <class Field>
double boundary_fraction(const Field& u, int cells) {
  const SpectralGrid& g = u.grid();
  const int n = g.n();
  double total = 0.0, edge = 0.0;
  auto near = [&](int i) { return i < cells || i >= n - cells; };
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double m = std::norm(u[g.index(ix, iy, iz)]);
        total += m;
        if (near(ix) || near(iy) || near(iz)) edge += m;
      }
  return total > 0.0 ? edge / total : 0.0;
}

template <class Field>
Field resample_impl(const Field& u, double scale, double amplitude, double support_tol) {
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::invalid_argument,
          "resampling scale must be positive");
  const SpectralGrid& g = u.grid();
  const double total = weighted_sum(u, nullptr);
  if (total == 0.0) return Field(u.grid_ptr());
  if (scale < 1.0) {
    const double lost = mass_outside(u, scale * g.half_width()) / total;
    require(lost <= support_tol, ErrorCode::support,
            "resampling window drops " + std::to_string(lost) + " of the mass");
  } else {
    const double edge = boundary_fraction(u, 2);
    require(edge <= support_tol, ErrorCode::support,
            "field reaches the box boundary before resampling (fraction " + std::to_string(edge) + ")");
  }
  const auto a = interpolation_matrix(g, scale);
  Field t1(u.grid_ptr()), t2(u.grid_ptr());
  apply_along_axis(a, u, t1, 0);
  apply_along_axis(a, t1, t2, 1);
  apply_along_axis(a, t2, t1, 2);
  t1 *= amplitude;
  const double edge_out = boundary_fraction(t1, 2);
  require(edge_out <= support_tol, ErrorCode::support,
          "resampled field reaches the box boundary (fraction " + std::to_string(edge_out) + ")");
  return t1;
}

template <class Field>
Field shift_impl(const Field& u, std::array<int, 3> shift) {
  const SpectralGrid& g = u.grid();
  const int n = g.n();
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  Field out(u.grid_ptr());
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        out[g.index(wrap(ix + shift[0]), wrap(iy + shift[1]), wrap(iz + shift[2]))] = u[g.index(ix, iy, iz)];
  return out;
}

template <class Field>
Field symmetrize_impl(const Field& u) {
  const SpectralGrid& g = u.grid();
  const int n = g.n();
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  // Reflection x -> -x maps index i to (n - i) mod n.
  std::vector<int> flip(n);
  for (int i = 0; i < n; ++i) flip[i] = (n - i) % n;
  Field out(u.grid_ptr());
  std::array<int, 3> idx{}, src{};
  for (const auto& perm : perms)
    for (int signs = 0; signs < 8; ++signs)
      for (idx[2] = 0; idx[2] < n; ++idx[2])
        for (idx[1] = 0; idx[1] < n; ++idx[1])
          for (idx[0] = 0; idx[0] < n; ++idx[0]) {
            for (int d = 0; d < 3; ++d) {
              const int j = idx[perm[d]];
              src[d] = (signs >> d) & 1 ? flip[j] : j;
            }
            out[g.index(idx[0], idx[1], idx[2])] += u[g.index(src[0], src[1], src[2])];
          }
  out *= 1.0 / 48.0;
  return out;
}

}  // namespace

cvector to_spectrum(const ComplexField& u) {
  cvector spec(u.values().begin(), u.values().end());
  u.grid().fft().forward(spec.data());
  return spec;
}

ComplexField neg_laplacian(const ComplexField& u) {
  cvector spec = to_spectrum(u);
  const double inv = 1.0 / static_cast<double>(u.size());
  for_each_mode(u.grid(), [&](std::size_t i, int, int, int, double k2) { spec[i] *= k2 * inv; });
  u.grid().fft().backward(spec.data());
  return ComplexField(u.grid_ptr(), std::move(spec));
}

RealField neg_laplacian(const RealField& u) {
  cvector spec = real_spectrum(u);
  for_each_half_mode(u.grid(), [&](std::size_t i, int, int, int, double k2, double) { spec[i] *= k2; });
  return from_real_spectrum(u.grid_ptr(), spec);
}

ComplexField partial(const ComplexField& u, int axis) {
  require(axis >= 0 && axis < 3, ErrorCode::invalid_argument, "axis must be 0, 1 or 2");
  cvector spec = to_spectrum(u);
  const auto kd = u.grid().derivative_wavenumbers();
  const double inv = 1.0 / static_cast<double>(u.size());
  for_each_mode(u.grid(), [&](std::size_t i, int ix, int iy, int iz, double) {
    const int j = axis == 0 ? ix : (axis == 1 ? iy : iz);
    spec[i] *= cplx(0.0, kd[j] * inv);
  });
  u.grid().fft().backward(spec.data());
  return ComplexField(u.grid_ptr(), std::move(spec));
}

RealField partial(const RealField& u, int axis) {
  require(axis >= 0 && axis < 3, ErrorCode::invalid_argument, "axis must be 0, 1 or 2");
  cvector spec = real_spectrum(u);
  const auto kd = u.grid().derivative_wavenumbers();
  for_each_half_mode(u.grid(), [&](std::size_t i, int ix, int iy, int iz, double, double) {
    const int j = axis == 0 ? ix : (axis == 1 ? iy : iz);
    spec[i] *= cplx(0.0, kd[j]);
  });
  return from_real_spectrum(u.grid_ptr(), spec);
}

RealField x_dot_grad(const RealField& u) {
  const SpectralGrid& g = u.grid();
  const int n = g.n();
  RealField out(u.grid_ptr());
  for (int axis = 0; axis < 3; ++axis) {
    const RealField d = partial(u, axis);
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const int j = axis == 0 ? ix : (axis == 1 ? iy : iz);
          const std::size_t i = g.index(ix, iy, iz);
          out[i] += g.coord(j) * d[i];
        }
  }
  return out;
}

double spectral_gradient_sqnorm(const ComplexField& u) {
  const cvector spec = to_spectrum(u);
  double s = 0.0;
  for_each_mode(u.grid(), [&](std::size_t i, int, int, int, double k2) { s += k2 * std::norm(spec[i]); });
  return s * u.grid().cell_volume() / static_cast<double>(u.size());
}

double spectral_gradient_sqnorm(const RealField& u) {
  const cvector spec = real_spectrum(u);
  double s = 0.0;
  for_each_half_mode(u.grid(), [&](std::size_t i, int, int, int, double k2, double w) {
    s += w * k2 * std::norm(spec[i]);
  });
  return s * u.grid().cell_volume() / static_cast<double>(u.size());
}

double integrate_weighted(const ComplexField& u, const RealField& w) { return weighted_sum(u, &w); }
double integrate_weighted(const ComplexField& u) { return weighted_sum(u, nullptr); }
double integrate_weighted(const RealField& u, const RealField& w) { return weighted_sum(u, &w); }
double integrate_weighted(const RealField& u) { return weighted_sum(u, nullptr); }

double spectral_l2_sqnorm(const ComplexField& u) {
  const cvector spec = to_spectrum(u);
  double s = 0.0;
  for (const cplx& c : spec) s += std::norm(c);
  return s * u.grid().cell_volume() / static_cast<double>(u.size());
}

double integrate(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

cplx inner(const ComplexField& a, const ComplexField& b) {
  a.check_same_grid(b);
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * a.grid().cell_volume();
}

double inner(const RealField& a, const RealField& b) {
  a.check_same_grid(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

double l2_norm(const ComplexField& u) { return std::sqrt(integrate_weighted(u)); }
double l2_norm(const RealField& u) { return std::sqrt(integrate_weighted(u)); }

double max_abs(const ComplexField& u) {
  double m = 0.0;
  for (const cplx& v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const RealField& u) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

double boundary_mass_fraction(const ComplexField& u, int cells) { return boundary_fraction(u, cells); }

ComplexField resample(const ComplexField& u, double scale, double amplitude, double support_tol) {
  return resample_impl(u, scale, amplitude, support_tol);
}

RealField resample(const RealField& u, double scale, double amplitude, double support_tol) {
  return resample_impl(u, scale, amplitude, support_tol);
}

ComplexField shift_cells(const ComplexField& u, std::array<int, 3> shift) { return shift_impl(u, shift); }
RealField shift_cells(const RealField& u, std::array<int, 3> shift) { return shift_impl(u, shift); }

RealField symmetrize_octahedral(const RealField& u) { return symmetrize_impl(u); }
ComplexField symmetrize_octahedral(const ComplexField& u) { return symmetrize_impl(u); }

RealField radius_sq_field(const GridPtr& grid) {
  return RealField::sample(grid, [](double x, double y, double z) { return x * x + y * y + z * z; });
}

RealField radius_field(const GridPtr& grid) {
  return RealField::sample(grid, [](double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); });
}

}  // namespace chq
