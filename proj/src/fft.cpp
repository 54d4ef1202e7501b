#include "choquard/fft.hpp"

#include <mutex>

#include "choquard/error.hpp"

namespace chq {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {
fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

Fft3d::Fft3d(int n, Kinds kinds) : n_(n) {
  require(n > 0, ErrorCode::invalid_argument, "fft size must be positive");
  size_ = static_cast<std::size_t>(n) * n * n;
  half_size_ = static_cast<std::size_t>(n) * n * (n / 2 + 1);

  const bool want_complex = (static_cast<int>(kinds) & 1) != 0;
  const bool want_real = (static_cast<int>(kinds) & 2) != 0;
  const unsigned flags = FFTW_ESTIMATE;

  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  if (want_complex) {
    cvector cbuf(size_);
    fwd_ = fftw_plan_dft_3d(n, n, n, as_fftw(cbuf.data()), as_fftw(cbuf.data()),
                            FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_3d(n, n, n, as_fftw(cbuf.data()), as_fftw(cbuf.data()),
                            FFTW_BACKWARD, flags);
    if (!fwd_ || !bwd_) fail(ErrorCode::runtime, "FFTW planning failed");
  }
  if (want_real) {
    cvector hbuf(half_size_);
    rvector rbuf(size_);
    r2c_ = fftw_plan_dft_r2c_3d(n, n, n, rbuf.data(), as_fftw(hbuf.data()), flags);
    c2r_ = fftw_plan_dft_c2r_3d(n, n, n, as_fftw(hbuf.data()), rbuf.data(), flags);
    if (!r2c_ || !c2r_) fail(ErrorCode::runtime, "FFTW planning failed");
  }
}

Fft3d::~Fft3d() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  for (fftw_plan p : {fwd_, bwd_, r2c_, c2r_})
    if (p) fftw_destroy_plan(p);
}

void Fft3d::forward(cplx* data) const {
  require(fwd_ != nullptr, ErrorCode::runtime, "complex transform not planned");
  fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data));
}

void Fft3d::backward(cplx* data) const {
  require(bwd_ != nullptr, ErrorCode::runtime, "complex transform not planned");
  fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data));
}

void Fft3d::forward_real(const double* in, cplx* out) const {
  require(r2c_ != nullptr, ErrorCode::runtime, "real transform not planned");
  // r2c plans never write to their input.
  fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), as_fftw(out));
}

void Fft3d::backward_real(cplx* in, double* out) const {
  require(c2r_ != nullptr, ErrorCode::runtime, "real transform not planned");
  fftw_execute_dft_c2r(c2r_, as_fftw(in), out);
}

}  // namespace chq
