#include "choquard/preconditioner.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "choquard/error.hpp"

namespace chq {

namespace {

using Mat = Eigen::Map<Eigen::MatrixXd>;
using ConstMat = Eigen::Map<const Eigen::MatrixXd>;

// out = B^T f along every axis (transpose = true) or B f.
void transform_axes(const Eigen::MatrixXd& B, bool transpose, std::vector<double>& f, int n) {
  const Eigen::MatrixXd M = transpose ? Eigen::MatrixXd(B.transpose()) : B;
  const Eigen::Index n2 = static_cast<Eigen::Index>(n) * n;
  std::vector<double> tmp(f.size());
  {
    // x fastest: columns are x-lines.
    ConstMat in(f.data(), n, n2);
    Mat out(tmp.data(), n, n2);
    out.noalias() = M * in;
  }
  for (int iz = 0; iz < n; ++iz) {
    ConstMat in(tmp.data() + static_cast<std::size_t>(iz) * n2, n, n);
    Mat out(f.data() + static_cast<std::size_t>(iz) * n2, n, n);
    out.noalias() = in * M.transpose();
  }
  {
    ConstMat in(f.data(), n2, n);
    Mat out(tmp.data(), n2, n);
    out.noalias() = in * M.transpose();
  }
  f.swap(tmp);
}

}  // namespace

ShiftedOperatorInverse::ShiftedOperatorInverse(const GridPtr& grid, double shift, const PotentialSpec& spec)
    : grid_(grid), shift_(shift) {
  const int n = grid->n();
  if (spec.v1_kind == PotentialSpec::V1Kind::harmonic && spec.harmonic_a >= 0.0) {
    separable_ = true;
    const auto k = grid->wavenumbers();
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += k[m] * k[m] * std::cos(k[m] * (grid->coord(i) - grid->coord(j)));
        H(i, j) = s / n;
      }
    for (int i = 0; i < n; ++i) H(i, i) += spec.harmonic_a * grid->coord(i) * grid->coord(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    require(es.info() == Eigen::Success, ErrorCode::runtime, "1D eigendecomposition failed");
    basis_.assign(es.eigenvectors().data(), es.eigenvectors().data() + static_cast<std::size_t>(n) * n);
    values_.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    require(values_[0] + values_[0] + values_[0] + shift > 0.0, ErrorCode::domain,
            "-Lap + omega + V1 is not positive on this grid");
  } else {
    require(shift > 0.0, ErrorCode::domain, "preconditioner shift must be positive");
  }
}

RealField ShiftedOperatorInverse::apply(const RealField& f) const {
  f.check_grid(*grid_);
  const int n = grid_->n();
  if (separable_) {
    const Eigen::MatrixXd B = ConstMat(basis_.data(), n, n);
    std::vector<double> work(f.values().begin(), f.values().end());
    transform_axes(B, true, work, n);
    std::size_t idx = 0;
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix, ++idx) work[idx] /= values_[ix] + values_[iy] + values_[iz] + shift_;
    transform_axes(B, false, work, n);
    return RealField(grid_, rvector(work.begin(), work.end()));
  }
  const auto& fft = grid_->fft();
  cvector spec(fft.half_size());
  fft.forward_real(f.data(), spec.data());
  const auto k = grid_->wavenumbers();
  const int nh = n / 2 + 1;
  std::size_t idx = 0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < nh; ++ix, ++idx)
        spec[idx] /= (k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz] + shift_) * static_cast<double>(grid_->size());
  RealField out(grid_);
  fft.backward_real(spec.data(), out.data());
  return out;
}

}  // namespace chq
