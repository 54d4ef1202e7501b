#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <new>
#include <vector>

#include <fftw3.h>

namespace chq {

// Allocator returning FFTW-aligned storage so every buffer can be handed to a
// plan created on a different buffer.
template <class T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    void* p = fftw_malloc(count * sizeof(T));
    if (p == nullptr && count != 0) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept {
    return true;
  }
};

// FFTW's planner is not re-entrant; every plan creation and destruction in
// the library takes this lock.
std::mutex& fftw_planner_mutex();

using cplx = std::complex<double>;
using cvector = std::vector<cplx, FftwAllocator<cplx>>;
using rvector = std::vector<double, FftwAllocator<double>>;

// Cubic 3D transforms of side n (complex-to-complex) plus real-to-complex
// transforms of the same side. Data layout is row-major with the last index
// fastest, i.e. index = ix + n*(iy + n*iz). Backward transforms are
// unnormalized. Execution is thread-safe; plan creation is serialized.
class Fft3d {
 public:
  enum class Kinds { complex = 1, real = 2, both = 3 };

  explicit Fft3d(int n, Kinds kinds = Kinds::both);
  ~Fft3d();
  Fft3d(const Fft3d&) = delete;
  Fft3d& operator=(const Fft3d&) = delete;

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  // Number of complex coefficients produced by the real transform.
  std::size_t half_size() const noexcept { return half_size_; }

  void forward(cplx* data) const;
  void backward(cplx* data) const;
  // r2c: input preserved.
  void forward_real(const double* in, cplx* out) const;
  // c2r: input is overwritten.
  void backward_real(cplx* in, double* out) const;

 private:
  int n_;
  std::size_t size_;
  std::size_t half_size_;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace chq
