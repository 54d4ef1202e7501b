#include "choquard/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "choquard/error.hpp"
#include "choquard/riesz.hpp"

namespace chq {

SpectralGrid::SpectralGrid(int n, double half_width) : n_(n), half_width_(half_width) {
  require(n >= 8 && (n & (n - 1)) == 0, ErrorCode::invalid_argument,
          "grid size n must be a power of two >= 8 (got " + std::to_string(n) + ")");
  require(half_width > 0.0 && std::isfinite(half_width), ErrorCode::invalid_argument,
          "box half-width L must be positive");
  spacing_ = 2.0 * half_width / n;
  size_ = static_cast<std::size_t>(n) * n * n;
  k_.resize(n);
  kd_.resize(n);
  const double base = std::numbers::pi / half_width;
  for (int j = 0; j < n; ++j) {
    const int f = j < n / 2 ? j : j - n;
    k_[j] = base * f;
    kd_[j] = (j == n / 2) ? 0.0 : base * f;
  }
  fft_ = std::make_unique<Fft3d>(n, Fft3d::Kinds::both);
}

SpectralGrid::~SpectralGrid() = default;

double SpectralGrid::nyquist() const noexcept { return std::numbers::pi / spacing_; }

const Fft3d& SpectralGrid::padded_fft() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  if (!padded_fft_) padded_fft_ = std::make_unique<Fft3d>(2 * n_, Fft3d::Kinds::real);
  return *padded_fft_;
}

const RieszKernel& SpectralGrid::riesz(double mu) const {
  check_riesz_exponent(mu);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = riesz_cache_.find(mu);
    if (it != riesz_cache_.end()) return *it->second;
  }
  // Built outside the lock; a concurrent duplicate build is discarded.
  auto kernel = std::make_shared<const RieszKernel>(*this, mu);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = riesz_cache_.emplace(mu, std::move(kernel));
  return *it->second;
}

GridPtr make_grid(int n, double half_width) {
  return std::make_shared<const SpectralGrid>(n, half_width);
}

}  // namespace chq
