#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "choquard/fft.hpp"

namespace chq {

class RieszKernel;

// Uniform periodic grid on [-L, L)^3 with n points per axis. Immutable once
// built apart from the lazily filled Riesz multiplier cache, which is guarded
// internally; share it freely between threads.
class SpectralGrid {
 public:
  SpectralGrid(int n, double half_width);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int n() const noexcept { return n_; }
  double half_width() const noexcept { return half_width_; }
  double spacing() const noexcept { return spacing_; }
  double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }
  std::size_t size() const noexcept { return size_; }

  double coord(int i) const noexcept { return -half_width_ + i * spacing_; }
  std::size_t index(int ix, int iy, int iz) const noexcept {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n_) * (static_cast<std::size_t>(iy) +
                                            static_cast<std::size_t>(n_) * iz);
  }

  // Per-axis wavenumbers in FFT order, k_j = (pi/L) f_j with the Nyquist
  // entry f = -n/2 kept (used for k^2 so -Laplacian is symmetric).
  std::span<const double> wavenumbers() const noexcept { return k_; }
  // Same with the Nyquist entry set to zero, for odd-order derivatives.
  std::span<const double> derivative_wavenumbers() const noexcept { return kd_; }
  // Largest axis wavenumber pi/h.
  double nyquist() const noexcept;

  const Fft3d& fft() const noexcept { return *fft_; }
  const Fft3d& padded_fft() const;

  // Cached free-space kernel for exponent mu in (0, 3).
  const RieszKernel& riesz(double mu) const;

  bool same_as(const SpectralGrid& other) const noexcept {
    return this == &other || (n_ == other.n_ && half_width_ == other.half_width_);
  }

 private:
  int n_;
  double half_width_;
  double spacing_;
  std::size_t size_;
  std::vector<double> k_;
  std::vector<double> kd_;
  std::unique_ptr<Fft3d> fft_;
  mutable std::unique_ptr<Fft3d> padded_fft_;
  mutable std::map<double, std::shared_ptr<const RieszKernel>> riesz_cache_;
  mutable std::mutex cache_mutex_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

// Rejects n that is not a power of two or below 8, and L <= 0.
GridPtr make_grid(int n, double half_width);

}  // namespace chq
