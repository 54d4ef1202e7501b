#include "choquard/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "choquard/error.hpp"

namespace chq {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Block {
 public:
  Block(const GridPtr& grid, const FieldMap* map) : grid_(grid), map_(map) {}

  Mat apply(const Mat& X) const {
    if (!*map_) return X;
    Mat out(X.rows(), X.cols());
    RealField f(grid_);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      Eigen::Map<Vec>(f.data(), X.rows()) = X.col(j);
      const RealField g = (*map_)(f);
      out.col(j) = Eigen::Map<const Vec>(g.data(), X.rows());
    }
    return out;
  }

 private:
  GridPtr grid_;
  const FieldMap* map_;
};

// Coefficients C such that (S C)^T B (S C) = I, dropping near-dependent
// directions of S. SB = B S.
Mat orthonormalizer(const Mat& S, const Mat& SB) {
  Mat G = S.transpose() * SB;
  G = 0.5 * (G + G.transpose());
  Vec d = G.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? 1.0 / d(i) : 0.0;
  const Mat Gs = d.asDiagonal() * G * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(Gs);
  const Vec& w = es.eigenvalues();
  const double top = w.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > 1e-12 * top) keep.push_back(i);
  Mat C(S.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    C.col(static_cast<Eigen::Index>(j)) = d.asDiagonal() * es.eigenvectors().col(keep[j]) / std::sqrt(w(keep[j]));
  return C;
}

// V -= U (BU^T V), carrying the A and B images along. AV is left alone
// when with_a is false.
void project_out(Mat& V, Mat& AV, Mat& BV, const Mat& U, const Mat& AU, const Mat& BU, bool with_a) {
  const Mat c = BU.transpose() * V;
  V -= U * c;
  BV -= BU * c;
  if (with_a) AV -= AU * c;
}

}  // namespace

EigenResult lowest_eigenpairs(const EigenProblem& pb, const GridPtr& grid, const EigenOptions& opts) {
  require(static_cast<bool>(pb.A), ErrorCode::invalid_argument, "eigen problem needs an operator");
  require(opts.count >= 1 && opts.guard >= 0, ErrorCode::invalid_argument, "eigenpair count must be positive");
  require(opts.tol > 0.0 && opts.max_iter >= 1, ErrorCode::invalid_argument, "bad eigensolver tolerance or iteration cap");
  const Eigen::Index N = static_cast<Eigen::Index>(grid->size());
  const Eigen::Index m = opts.count + opts.guard;
  require(m < N, ErrorCode::invalid_argument, "block larger than the grid");

  const Block A(grid, &pb.A), B(grid, &pb.B), T(grid, &pb.preconditioner), Pi(grid, &pb.projector);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Mat X(N, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < N; ++i) X(i, j) = normal(rng);
  X = Pi.apply(X);

  // B-orthonormal start and initial Rayleigh-Ritz.
  Mat BX = B.apply(X);
  Mat C = orthonormalizer(X, BX);
  require(C.cols() >= opts.count, ErrorCode::invalid_argument,
          "projected subspace is too small for the requested eigenpairs");
  X = X * C;
  BX = BX * C;
  Mat AX = A.apply(X);
  {
    Mat H = X.transpose() * AX;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    BX = BX * es.eigenvectors();
  }
  const Eigen::Index mb = X.cols();
  Vec theta = (X.transpose() * AX).diagonal();

  Mat P(N, 0), AP(N, 0), BP(N, 0);
  EigenResult res;
  Vec resid(mb);
  for (int it = 0; it < opts.max_iter; ++it) {
    // The images AX, BX are carried along by linear updates and drift;
    // refresh them now and then.
    if (it > 0 && it % 20 == 0) {
      AX = A.apply(X);
      BX = B.apply(X);
      if (P.cols() > 0) {
        AP = A.apply(P);
        BP = B.apply(P);
      }
    }
    // Residual of the compressed problem Pi (A - theta B) Pi.
    const Mat R = Pi.apply(AX - BX * theta.asDiagonal());
    for (Eigen::Index j = 0; j < mb; ++j) resid(j) = R.col(j).norm();
    res.iterations = it;
    const Eigen::Index wanted = std::min<Eigen::Index>(opts.count, mb);
    if (resid.head(wanted).maxCoeff() < opts.tol) {
      res.converged = true;
      break;
    }

    // Converged columns are soft-locked: they stay in X but get no new
    // search direction.
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < mb; ++j)
      if (resid(j) >= opts.tol) active.push_back(j);
    Mat Ra(N, static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) Ra.col(static_cast<Eigen::Index>(j)) = R.col(active[j]);
    Mat W = Pi.apply(T.apply(Ra));
    Mat BW = B.apply(W);
    // Conjugate directions first, then the new block, each B-orthogonal to
    // everything before it. Two passes keep orthogonality near round-off.
    for (int pass = 0; pass < 2 && P.cols() > 0; ++pass) project_out(P, AP, BP, X, AX, BX, true);
    if (P.cols() > 0) {
      const Mat Cp = orthonormalizer(P, BP);
      P = P * Cp;
      AP = AP * Cp;
      BP = BP * Cp;
    }
    for (int pass = 0; pass < 2; ++pass) {
      project_out(W, W, BW, X, AX, BX, false);
      if (P.cols() > 0) project_out(W, W, BW, P, AP, BP, false);
    }
    {
      const Mat Cw = orthonormalizer(W, BW);
      W = W * Cw;
      BW = BW * Cw;
    }
    const Mat AW = A.apply(W);

    const Eigen::Index np = P.cols();
    Mat S(N, mb + W.cols() + np), AS(N, S.cols()), BS(N, S.cols());
    S << X, W, P;
    AS << AX, AW, AP;
    BS << BX, BW, BP;
    C = orthonormalizer(S, BS);
    if (C.cols() < mb) break;
    Mat H = C.transpose() * (S.transpose() * AS) * C;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()));
    const Mat Y = C * es.eigenvectors().leftCols(mb);

    const Mat Xn = S * Y, AXn = AS * Y, BXn = BS * Y;
    // New conjugate directions: the part of X_new B-orthogonal to X_old.
    const Mat M = BX.transpose() * Xn;
    P = Xn - X * M;
    AP = AXn - AX * M;
    BP = BXn - BX * M;
    X = Xn;
    AX = AXn;
    BX = BXn;
    theta = es.eigenvalues().head(mb);
    res.iterations = it + 1;
  }

  {
    const Mat R = Pi.apply(AX - BX * theta.asDiagonal());
    for (Eigen::Index j = 0; j < mb; ++j) resid(j) = R.col(j).norm();
  }
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(opts.count, mb); ++j) {
    RealField f(grid);
    Eigen::Map<Vec>(f.data(), N) = X.col(j);
    res.values.push_back(theta(j));
    res.vectors.push_back(std::move(f));
    res.residuals.push_back(resid(j));
  }
  return res;
}

}  // namespace chq
