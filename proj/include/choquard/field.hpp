#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <utility>

#include "choquard/error.hpp"
#include "choquard/fft.hpp"
#include "choquard/grid.hpp"

namespace chq {

// Samples of a scalar field on a SpectralGrid, row-major with x fastest.
// Value semantics: copies are deep, the grid is shared.
template <class T, class Storage>
class GridField {
 public:
  using value_type = T;

  explicit GridField(GridPtr grid) : grid_(std::move(grid)), data_(grid_->size()) {}

  GridField(GridPtr grid, Storage data) : grid_(std::move(grid)), data_(std::move(data)) {
    require(data_.size() == grid_->size(), ErrorCode::invalid_argument,
            "field data length does not match grid size n^3");
  }

  // Fills from f(x, y, z).
  template <class F>
  static GridField sample(GridPtr grid, F&& f) {
    GridField out(grid);
    const int n = grid->n();
    for (int iz = 0; iz < n; ++iz) {
      const double z = grid->coord(iz);
      for (int iy = 0; iy < n; ++iy) {
        const double y = grid->coord(iy);
        for (int ix = 0; ix < n; ++ix)
          out.data_[grid->index(ix, iy, iz)] = static_cast<T>(f(grid->coord(ix), y, z));
      }
    }
    return out;
  }

  const SpectralGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> values() noexcept { return {data_.data(), data_.size()}; }
  std::span<const T> values() const noexcept { return {data_.data(), data_.size()}; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  GridField& operator+=(const GridField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  GridField& operator-=(const GridField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  template <class S>
  GridField& operator*=(S s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  // this += a * o
  template <class S>
  GridField& axpy(S a, const GridField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    return *this;
  }

  bool all_finite() const noexcept {
    for (const auto& v : data_)
      if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v))) return false;
    return true;
  }

  void check_same_grid(const GridField& o) const { check_grid(o.grid()); }
  void check_grid(const SpectralGrid& g) const {
    require(grid_->same_as(g), ErrorCode::invalid_argument, "field/grid mismatch");
  }

 private:
  GridPtr grid_;
  Storage data_;
};

template <class T, class S>
GridField<T, S> operator+(GridField<T, S> a, const GridField<T, S>& b) {
  return a += b;
}
template <class T, class S>
GridField<T, S> operator-(GridField<T, S> a, const GridField<T, S>& b) {
  return a -= b;
}
template <class T, class S, class K>
GridField<T, S> operator*(K s, GridField<T, S> a) {
  return a *= s;
}

using ComplexField = GridField<cplx, cvector>;
using RealField = GridField<double, rvector>;

RealField real_part(const ComplexField& u);
RealField imag_part(const ComplexField& u);
RealField modulus(const ComplexField& u);
ComplexField to_complex(const RealField& re);
ComplexField to_complex(const RealField& re, const RealField& im);

}  // namespace chq
