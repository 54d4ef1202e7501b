#include "choquard/riesz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "choquard/error.hpp"

namespace chq {

namespace {

constexpr double pi = std::numbers::pi;

struct GaussLegendre16 {
  std::array<double, 16> x{};
  std::array<double, 16> w{};

  GaussLegendre16() {
    constexpr int n = 16;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre16& gauss16() {
  static const GaussLegendre16 rule;
  return rule;
}

// int_0^a r^(2-mu) sinc(kr) dr by the power series of sinc, valid for ka <= 1.
double small_interval_series(double k, double mu, double a) {
  double sum = 0.0;
  double term_coeff = 1.0;  // (-1)^j k^{2j} a^{2j} / (2j+1)!
  const double ka2 = (k * a) * (k * a);
  for (int j = 0; j < 40; ++j) {
    const double e = 3.0 - mu + 2.0 * j;
    const double term = term_coeff / e;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    term_coeff *= -ka2 / ((2.0 * j + 2.0) * (2.0 * j + 3.0));
  }
  return sum * std::pow(a, 3.0 - mu);
}

// REDFT00 (DCT-I) in place on a cube of side m, unnormalized.
void dct1_cube(std::vector<double>& data, int m) {
  std::vector<double> out(data.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_r2r_3d(m, m, m, data.data(), out.data(), FFTW_REDFT00, FFTW_REDFT00,
                            FFTW_REDFT00, FFTW_ESTIMATE);
  }
  require(plan != nullptr, ErrorCode::runtime, "FFTW DCT planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  data.swap(out);
}

}  // namespace

void check_riesz_exponent(double mu) {
  require(mu > 0.0 && mu < 3.0, ErrorCode::domain,
          "Riesz exponent must satisfy 0<mu<3 (got " + std::to_string(mu) + ")");
}

double truncated_kernel_transform(double k, double mu, double radius) {
  check_riesz_exponent(mu);
  k = std::abs(k);
  if (k == 0.0) return 4.0 * pi * std::pow(radius, 3.0 - mu) / (3.0 - mu);
  if (mu == 1.0) {
    const double half = std::sin(0.5 * k * radius);
    return 8.0 * pi * half * half / (k * k);  // 4 pi (1 - cos kR) / k^2
  }
  const double a = std::min(radius, 1.0 / k);
  double integral = small_interval_series(k, mu, a);
  if (a < radius) {
    const auto& gl = gauss16();
    const double max_panel = 2.0 / k;
    const int panels = static_cast<int>(std::ceil((radius - a) / max_panel));
    const double width = (radius - a) / panels;
    for (int q = 0; q < panels; ++q) {
      const double lo = a + q * width;
      const double mid = lo + 0.5 * width;
      double s = 0.0;
      for (int i = 0; i < 16; ++i) {
        const double r = mid + 0.5 * width * gl.x[i];
        s += gl.w[i] * std::pow(r, 2.0 - mu) * std::sin(k * r) / (k * r);
      }
      integral += 0.5 * width * s;
    }
  }
  return 4.0 * pi * integral;
}

RieszKernel::RieszKernel(const SpectralGrid& grid, double mu)
    : grid_(&grid), n_(grid.n()), mu_(mu) {
  check_riesz_exponent(mu);
  const int n = n_;
  const double L = grid.half_width();
  const double h = grid.spacing();
  const double side = 2.0 * L;
  radius_ = std::sqrt(3.0) * side;

  // Transform sampled on the lattice of period 4*side, octant of side 2n+1.
  const int big = 2 * n + 1;
  const double dk = 2.0 * pi / (4.0 * side);
  std::vector<double> transform_by_norm(3 * (2 * n) * (2 * n) + 1,
                                        std::numeric_limits<double>::quiet_NaN());
  std::vector<double> work(static_cast<std::size_t>(big) * big * big);
  for (int c = 0; c < big; ++c)
    for (int b = 0; b < big; ++b)
      for (int a = 0; a < big; ++a) {
        const int s = a * a + b * b + c * c;
        double& cached = transform_by_norm[s];
        if (std::isnan(cached)) cached = truncated_kernel_transform(dk * std::sqrt(double(s)), mu, radius_);
        work[a + static_cast<std::size_t>(big) * (b + static_cast<std::size_t>(big) * c)] = cached;
      }
  dct1_cube(work, big);

  // Band-limited truncated kernel at offsets 0..n, then its transform on the
  // padded lattice of side 2n (even sequence of period 2n, DCT-I of n+1).
  const int oct = n + 1;
  const double kernel_norm = 1.0 / std::pow(4.0 * side, 3);
  std::vector<double> kernel(static_cast<std::size_t>(oct) * oct * oct);
  for (int c = 0; c < oct; ++c)
    for (int b = 0; b < oct; ++b)
      for (int a = 0; a < oct; ++a)
        kernel[a + static_cast<std::size_t>(oct) * (b + static_cast<std::size_t>(oct) * c)] =
            kernel_norm * work[a + static_cast<std::size_t>(big) * (b + static_cast<std::size_t>(big) * c)];
  std::vector<double> mult = kernel;
  dct1_cube(mult, oct);
  const double h3 = h * h * h;
  for (double& m : mult) m = std::max(0.0, m * h3);
  octant_multiplier_ = mult;

  // Kernel table consistent with the clipped multiplier (inverse DCT-I).
  std::vector<double> table = mult;
  dct1_cube(table, oct);
  const double inv = 1.0 / (h3 * std::pow(2.0 * n, 3));
  for (double& t : table) t *= inv;
  octant_kernel_ = std::move(table);

  // Expand to the r2c layout of the padded transform (x halved).
  const int m = 2 * n;
  const int mh = m / 2 + 1;
  padded_multiplier_.assign(static_cast<std::size_t>(m) * m * mh, 0.0);
  const double norm = 1.0 / (double(m) * m * m);
  auto fold = [m](int i) { return std::min(i, m - i); };
  for (int iz = 0; iz < m; ++iz)
    for (int iy = 0; iy < m; ++iy)
      for (int ix = 0; ix < mh; ++ix)
        padded_multiplier_[ix + static_cast<std::size_t>(mh) * (iy + static_cast<std::size_t>(m) * iz)] =
            norm * octant_multiplier_[ix + static_cast<std::size_t>(oct) *
                                               (fold(iy) + static_cast<std::size_t>(oct) * fold(iz))];
}

double RieszKernel::kernel_sample(int a, int b, int c) const {
  a = std::abs(a);
  b = std::abs(b);
  c = std::abs(c);
  require(a <= n_ && b <= n_ && c <= n_, ErrorCode::invalid_argument, "kernel offset out of range");
  const std::size_t oct = octant_side();
  return octant_kernel_[a + oct * (b + oct * c)];
}

double RieszKernel::multiplier(int i, int j, int l) const {
  const std::size_t oct = octant_side();
  return octant_multiplier_[static_cast<std::size_t>(i) + oct * (j + oct * l)];
}

void RieszKernel::convolve(std::span<const double> f, std::span<double> g) const {
  const int n = n_;
  require(f.size() == grid_->size() && g.size() == grid_->size(), ErrorCode::invalid_argument,
          "field/grid mismatch in riesz convolution");
  const Fft3d& fft = grid_->padded_fft();
  const std::size_t m = 2 * static_cast<std::size_t>(n);
  rvector padded(m * m * m, 0.0);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy) {
      const double* src = f.data() + grid_->index(0, iy, iz);
      std::copy(src, src + n, padded.data() + m * (iy + m * iz));
    }
  cvector spectrum(fft.half_size());
  fft.forward_real(padded.data(), spectrum.data());
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= padded_multiplier_[i];
  fft.backward_real(spectrum.data(), padded.data());
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy) {
      const double* src = padded.data() + m * (iy + m * iz);
      std::copy(src, src + n, g.data() + grid_->index(0, iy, iz));
    }
}

RealField riesz_convolve(const RealField& f, double mu) {
  check_riesz_exponent(mu);
  RealField g(f.grid_ptr());
  f.grid().riesz(mu).convolve(f.values(), g.values());
  return g;
}

ComplexField riesz_convolve(const ComplexField& f, double mu) {
  check_riesz_exponent(mu);
  const RieszKernel& kernel = f.grid().riesz(mu);
  RealField re = real_part(f);
  RealField out_re(f.grid_ptr());
  kernel.convolve(re.values(), out_re.values());
  RealField im = imag_part(f);
  bool has_imag = false;
  for (double v : im.values())
    if (v != 0.0) {
      has_imag = true;
      break;
    }
  if (!has_imag) return to_complex(out_re);
  RealField out_im(f.grid_ptr());
  kernel.convolve(im.values(), out_im.values());
  return to_complex(out_re, out_im);
}

}  // namespace chq
