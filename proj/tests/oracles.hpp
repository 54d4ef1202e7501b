#pragma once

// Reference computations used by the tests. None of these call into the
// library's transforms; they are slow direct sums and quadratures.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/riesz.hpp"

namespace test {

// Composite Simpson on [a, b] with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// 4 pi int_0^R r^(2-mu) sin(kr)/(kr) dr, with r = t^2 to smooth the origin.
inline double radial_transform_quadrature(double k, double mu, double R) {
  auto f = [&](double t) {
    const double r = t * t;
    const double sinc = k * r == 0.0 ? 1.0 : std::sin(k * r) / (k * r);
    return 2.0 * std::pow(t, 5.0 - 2.0 * mu) * sinc;
  };
  return 4.0 * std::numbers::pi * simpson(f, 0.0, std::sqrt(R), 200000);
}

// int e^{-|y|^2} / |x - y| dy as a function of r = |x|.
inline double gaussian_coulomb(double r) {
  const double c = std::pow(std::numbers::pi, 1.5);
  return r == 0.0 ? 2.0 * std::numbers::pi : c * std::erf(r) / r;
}

// Shell theorem: 4 pi [ r^-1 int_0^r s^2 e^{-s^2} ds + int_r^inf s e^{-s^2} ds ].
inline double gaussian_coulomb_quadrature(double r) {
  const double inner = r == 0.0 ? 0.0 : simpson([](double s) { return s * s * std::exp(-s * s); }, 0.0, r, 20000) / r;
  const double outer = simpson([](double s) { return s * std::exp(-s * s); }, r, r + 12.0, 40000);
  return 4.0 * std::numbers::pi * (inner + outer);
}

// 1D cosine-sum matrix C[a][j] = w_j cos(pi a j / half) for a in [0, rows),
// j in [0, half], with end weights 1 and interior weights 2.
inline std::vector<double> cosine_matrix(int rows, int half) {
  std::vector<double> c(static_cast<std::size_t>(rows) * (half + 1));
  for (int a = 0; a < rows; ++a)
    for (int j = 0; j <= half; ++j) {
      const double w = (j == 0 || j == half) ? 1.0 : 2.0;
      c[static_cast<std::size_t>(a) * (half + 1) + j] = w * std::cos(std::numbers::pi * a * j / half);
    }
  return c;
}

// out(a,b,c) = sum_{ijl} C[a][i] C[b][j] C[c][l] in(i,j,l), cubes stored x-fastest.
inline std::vector<double> separable_cosine_sum(const std::vector<double>& in, int in_side, int out_side,
                                                const std::vector<double>& c) {
  auto at = [](int a, int b, int cc, int side) { return a + static_cast<std::size_t>(side) * (b + static_cast<std::size_t>(side) * cc); };
  std::vector<double> s1(static_cast<std::size_t>(out_side) * in_side * in_side, 0.0);
  for (int l = 0; l < in_side; ++l)
    for (int j = 0; j < in_side; ++j)
      for (int a = 0; a < out_side; ++a) {
        double acc = 0.0;
        for (int i = 0; i < in_side; ++i) acc += c[static_cast<std::size_t>(a) * in_side + i] * in[at(i, j, l, in_side)];
        s1[a + static_cast<std::size_t>(out_side) * (j + static_cast<std::size_t>(in_side) * l)] = acc;
      }
  std::vector<double> s2(static_cast<std::size_t>(out_side) * out_side * in_side, 0.0);
  for (int l = 0; l < in_side; ++l)
    for (int b = 0; b < out_side; ++b)
      for (int a = 0; a < out_side; ++a) {
        double acc = 0.0;
        for (int j = 0; j < in_side; ++j)
          acc += c[static_cast<std::size_t>(b) * in_side + j] * s1[a + static_cast<std::size_t>(out_side) * (j + static_cast<std::size_t>(in_side) * l)];
        s2[a + static_cast<std::size_t>(out_side) * (b + static_cast<std::size_t>(out_side) * l)] = acc;
      }
  std::vector<double> out(static_cast<std::size_t>(out_side) * out_side * out_side, 0.0);
  for (int cc = 0; cc < out_side; ++cc)
    for (int b = 0; b < out_side; ++b)
      for (int a = 0; a < out_side; ++a) {
        double acc = 0.0;
        for (int l = 0; l < in_side; ++l)
          acc += c[static_cast<std::size_t>(cc) * in_side + l] * s2[a + static_cast<std::size_t>(out_side) * (b + static_cast<std::size_t>(out_side) * l)];
        out[at(a, b, cc, out_side)] = acc;
      }
  return out;
}

// Real-space kernel of the truncated-kernel convolution at offsets (a,b,c)h,
// 0 <= a,b,c <= n, built from the analytic transform by explicit cosine sums:
// band-limit on the period-8L lattice, transform to the period-2n padded
// lattice with quadrature weight h^3, clip negatives, transform back.
inline std::vector<double> effective_kernel_table(const chq::SpectralGrid& g, double mu) {
  const int n = g.n();
  const double L = g.half_width(), h = g.spacing();
  const double period = 8.0 * L;
  const double dk = 2.0 * std::numbers::pi / period;
  const double R = std::sqrt(3.0) * 2.0 * L;
  const int big = 2 * n + 1, oct = n + 1;
  std::vector<double> t(static_cast<std::size_t>(big) * big * big);
  for (int c = 0; c < big; ++c)
    for (int b = 0; b < big; ++b)
      for (int a = 0; a < big; ++a)
        t[a + static_cast<std::size_t>(big) * (b + static_cast<std::size_t>(big) * c)] =
            chq::truncated_kernel_transform(dk * std::sqrt(double(a * a + b * b + c * c)), mu, R);
  std::vector<double> kernel = separable_cosine_sum(t, big, oct, cosine_matrix(oct, 2 * n));
  for (double& v : kernel) v /= period * period * period;
  std::vector<double> mult = separable_cosine_sum(kernel, oct, oct, cosine_matrix(oct, n));
  for (double& v : mult) v = std::max(0.0, v * h * h * h);
  std::vector<double> table = separable_cosine_sum(mult, oct, oct, cosine_matrix(oct, n));
  const double inv = 1.0 / (h * h * h * std::pow(2.0 * n, 3));
  for (double& v : table) v *= inv;
  return table;
}

// g_i = h^3 sum_j K(x_i - x_j) f_j with K from effective_kernel_table.
inline std::vector<double> direct_convolution(const chq::RealField& f, const std::vector<double>& table) {
  const auto& g = f.grid();
  const int n = g.n(), oct = n + 1;
  const double h3 = g.cell_volume();
  std::vector<double> out(g.size(), 0.0);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        double acc = 0.0;
        for (int jz = 0; jz < n; ++jz)
          for (int jy = 0; jy < n; ++jy) {
            const std::size_t row = static_cast<std::size_t>(oct) * (std::abs(iy - jy) + static_cast<std::size_t>(oct) * std::abs(iz - jz));
            for (int jx = 0; jx < n; ++jx) acc += table[std::abs(ix - jx) + row] * f[g.index(jx, jy, jz)];
          }
        out[g.index(ix, iy, iz)] = h3 * acc;
      }
  return out;
}

// Sum of a few complex Gaussian bumps near the origin. Below 1e-8 of the peak
// outside |x| = 5.5, and resolved to roundoff at spacing 0.2.
inline chq::ComplexField random_bumps(const chq::GridPtr& g, unsigned seed, int count = 3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> c(-0.5, 0.5), w(0.6, 0.9), a(0.5, 1.5), ph(0.0, 2.0 * std::numbers::pi);
  struct Bump {
    double x, y, z, width;
    std::complex<double> amp;
  };
  std::vector<Bump> bumps;
  for (int i = 0; i < count; ++i) bumps.push_back({c(rng), c(rng), c(rng), w(rng), std::polar(a(rng), ph(rng))});
  return chq::ComplexField::sample(g, [&](double x, double y, double z) {
    std::complex<double> s = 0.0;
    for (const Bump& b : bumps) {
      const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y) + (z - b.z) * (z - b.z);
      s += b.amp * std::exp(-d2 / (2.0 * b.width * b.width));
    }
    return s;
  });
}

}  // namespace test
