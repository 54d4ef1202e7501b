#include "choquard/linearized.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "choquard/eigensolver.hpp"
#include "choquard/error.hpp"
#include "choquard/riesz.hpp"
#include "choquard/spectral.hpp"

namespace chq {

const char* to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::L1: return "L1";
    case OperatorTag::L2: return "L2";
    case OperatorTag::L1_omega: return "L1_omega";
    case OperatorTag::L2_omega: return "L2_omega";
  }
  return "?";
}

namespace {

RealField real_state(const ComplexField& state) {
  double im = 0.0, re = 0.0;
  for (const cplx& v : state.values()) {
    im = std::max(im, std::abs(v.imag()));
    re = std::max(re, std::abs(v.real()));
  }
  require(re > 0.0, ErrorCode::invalid_argument, "linearization state is zero");
  require(im <= 1e-10 * re, ErrorCode::invalid_argument, "linearization state must be real");
  return real_part(state);
}

ModelParams checked_params(OperatorTag tag, const PotentialSpec& spec, const ModelParams& m) {
  check_params(m.mu, m.p);
  if (tag == OperatorTag::L1 || tag == OperatorTag::L2)
    require(spec.is_zero() && m.omega == 1.0, ErrorCode::invalid_argument,
            "L1 and L2 are defined at psi1: zero potential and omega = 1");
  return m;
}

}  // namespace

LinearizedOperator::LinearizedOperator(OperatorTag tag, const ComplexField& state, const PotentialSpec& spec,
                                       const ModelParams& m)
    : tag_(tag),
      params_(checked_params(tag, spec, m)),
      state_(real_state(state)),
      pot_(build_potential(spec, state.grid_ptr())),
      local_(state.grid_ptr()),
      phi_pm1_(state.grid_ptr()),
      prec_(state.grid_ptr(), m.omega, spec) {
  const HartreeTerms t = hartree_terms(state_, m.mu, m.p);
  const double c = is_first_kind(tag) ? m.p - 1.0 : 1.0;
  for (std::size_t i = 0; i < state_.size(); ++i) {
    const double a = std::abs(state_[i]);
    local_[i] = c * t.W[i] * modulus_power(a, m.p - 2.0);
    phi_pm1_[i] = modulus_power(a, m.p - 2.0) * state_[i];
  }
}

RealField LinearizedOperator::apply_gram(const RealField& v) const {
  v.check_grid(state_.grid());
  RealField out = neg_laplacian(v);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] += (params_.omega + (pot_.zero ? 0.0 : pot_.V1[i])) * v[i];
  return out;
}

RealField LinearizedOperator::apply(const RealField& v) const {
  v.check_grid(state_.grid());
  RealField out = neg_laplacian(v);
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] += (params_.omega + (pot_.zero ? 0.0 : pot_.V[i]) - local_[i]) * v[i];
  if (is_first_kind(tag_)) {
    RealField f(v.grid_ptr());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = phi_pm1_[i] * v[i];
    const RealField k = riesz_convolve(f, params_.mu);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] -= params_.p * k[i] * phi_pm1_[i];
  }
  return out;
}

ComplexField LinearizedOperator::apply(const ComplexField& v) const {
  return to_complex(apply(real_part(v)), apply(imag_part(v)));
}

double LinearizedOperator::form(const RealField& v) const { return inner(apply(v), v); }

double LinearizedOperator::x_norm_sq(const RealField& v) const { return inner(apply_gram(v), v); }

RealField LinearizedOperator::precondition(const RealField& r) const { return prec_.apply(r); }

ComplexField apply_linearized(OperatorTag tag, const ComplexField& state, const PotentialSpec& spec,
                              const ModelParams& m, const ComplexField& v) {
  v.check_grid(state.grid());
  return LinearizedOperator(tag, state, spec, m).apply(v);
}

namespace {

// Orthonormal basis (plain l2) of the constraints; throws on degeneracy.
std::vector<RealField> orthonormal_constraints(const std::vector<RealField>& cs, bool sector, const GridPtr& grid) {
  if (cs.empty()) return {};
  const Eigen::Index N = static_cast<Eigen::Index>(grid->size());
  Eigen::MatrixXd M(N, static_cast<Eigen::Index>(cs.size()));
  for (std::size_t j = 0; j < cs.size(); ++j) {
    cs[j].check_grid(*grid);
    const RealField c = sector ? symmetrize_octahedral(cs[j]) : cs[j];
    const double before = l2_norm(cs[j]);
    require(before > 0.0 && l2_norm(c) > 1e-10 * before, ErrorCode::invalid_argument,
            "constraint field is zero (in the chosen sector)");
    M.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(c.data(), N);
  }
  const Eigen::VectorXd norms = M.colwise().norm();
  M = M * norms.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.transpose() * M);
  require(es.eigenvalues().minCoeff() > 1e-10 * es.eigenvalues().maxCoeff(), ErrorCode::invalid_argument,
          "constraint fields are linearly dependent");
  const Eigen::MatrixXd Q = M * es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  std::vector<RealField> out;
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    RealField f(grid);
    Eigen::Map<Eigen::VectorXd>(f.data(), N) = Q.col(j);
    out.push_back(std::move(f));
  }
  return out;
}

double plain_dot(const RealField& a, const RealField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SpectrumReport lowest_eigenpairs(const LinearizedOperator& op, const SpectrumOptions& opts) {
  require(opts.count >= 1 && opts.count <= 16, ErrorCode::invalid_argument, "eigenpair count must be in [1, 16]");
  const GridPtr& grid = op.grid();
  const std::vector<RealField> Q = orthonormal_constraints(opts.constraints, opts.radial_sector, grid);
  const bool sector = opts.radial_sector;

  EigenProblem pb;
  pb.A = [&op](const RealField& v) { return op.apply(v); };
  pb.preconditioner = [&op](const RealField& r) { return op.precondition(r); };
  if (opts.x_normalized) pb.B = [&op](const RealField& v) { return op.apply_gram(v); };
  if (sector || !Q.empty())
    pb.projector = [&Q, sector](const RealField& v) {
      RealField w = sector ? symmetrize_octahedral(v) : v;
      for (const RealField& q : Q) w.axpy(-plain_dot(q, w), q);
      return w;
    };

  EigenOptions eo;
  eo.count = opts.count;
  eo.tol = opts.tol;
  eo.max_iter = opts.max_iter;
  eo.seed = opts.seed;
  EigenResult er = lowest_eigenpairs(pb, grid, eo);
  if (!er.converged) {
    const double worst = *std::max_element(er.residuals.begin(), er.residuals.end());
    fail(ErrorCode::convergence, std::string("eigen iteration for ") + to_string(op.tag()) + " did not converge in " +
                                     std::to_string(er.iterations) + " iterations (residual " +
                                     std::to_string(worst) + ")");
  }

  SpectrumReport rep;
  rep.tag = op.tag();
  rep.eigenvalues = er.values;
  rep.residuals = er.residuals;
  rep.iterations = er.iterations;
  rep.normalization = opts.x_normalized ? "x" : "l2";
  rep.coercivity = er.values.front();
  double top = 1.0;
  for (double v : er.values) top = std::max(top, std::abs(v));
  rep.morse_tol = opts.morse_tol.value_or(1e-6 * top);
  rep.kernel_tol = opts.kernel_tol.value_or(1e-4 * std::abs(er.values.front()));
  for (double v : er.values) {
    if (v < -rep.morse_tol) ++rep.morse_index;
    if (std::abs(v) < rep.kernel_tol) ++rep.kernel_dim_estimate;
  }
  rep.constraints = std::to_string(opts.constraints.size()) + " L2 constraint(s)";
  if (sector) rep.constraints += ", octahedral sector";
  // Scale eigenvectors to unit L2 norm in physical units.
  for (RealField& v : er.vectors) {
    v *= 1.0 / l2_norm(v);
    rep.eigenvectors.push_back(std::move(v));
  }
  return rep;
}

CoercivityReport constrained_coercivity(const LinearizedOperator& op, const std::vector<RealField>& constraints,
                                        bool radial_sector, const SpectrumOptions& base) {
  SpectrumOptions o = base;
  o.count = 1;
  o.constraints = constraints;
  o.radial_sector = radial_sector;
  o.x_normalized = false;
  SpectrumReport a = lowest_eigenpairs(op, o);
  o.x_normalized = true;
  SpectrumReport b = lowest_eigenpairs(op, o);
  return {a.coercivity, b.coercivity, std::move(a.eigenvectors.front()), std::move(b.eigenvectors.front())};
}

ScalingModeReport scaling_mode_check(const ComplexField& psi1, double mu, double p) {
  const ModelParams m{1.0, mu, p};
  const PotentialSpec zero = PotentialSpec::zero();
  const LinearizedOperator L1(OperatorTag::L1, psi1, zero, m);
  const LinearizedOperator L2(OperatorTag::L2, psi1, zero, m);
  const RealField& psi = L1.state();
  const double a = rescale_amplitude_exponent(mu, p);
  RealField phi = x_dot_grad(psi);
  phi *= 0.5;
  phi.axpy(a, psi);

  ScalingModeReport r;
  const double psi_sq = integrate_weighted(psi);
  RealField res = L1.apply(phi);
  res += psi;
  r.residual = l2_norm(res) / std::sqrt(psi_sq);
  r.quotient = L1.form(phi) / psi_sq;
  r.target = -(a - 0.75);
  r.relative_error = std::abs(r.quotient - r.target) / std::abs(r.target);
  r.l1_psi_form = L1.form(psi);
  r.l2_psi_form = L2.form(psi);
  r.hartree = hartree_term(psi1, mu, p);
  r.split_error = std::abs(r.l1_psi_form - r.l2_psi_form + 2.0 * (p - 1.0) * r.hartree) / std::abs(r.l1_psi_form);
  return r;
}

RescaledIdentityReport rescaled_operator_identity_check(const ComplexField& phi, const PotentialSpec& spec,
                                                        const ModelParams& m, int samples, std::uint64_t seed,
                                                        RescaleFrame frame) {
  require(samples >= 1, ErrorCode::invalid_argument, "need at least one sample");
  const double w = m.omega;
  const double a = rescale_amplitude_exponent(m.mu, m.p);
  auto to_tilde = [&](const ComplexField& u) {
    return frame == RescaleFrame::regrid ? rescale_omega_regrid(u, w, m.mu, m.p, RescaleDirection::to_tilde)
                                         : rescale_omega(u, w, m.mu, m.p, RescaleDirection::to_tilde);
  };
  const ComplexField tilde = to_tilde(phi);
  const PotentialSpec spec_t = spec.rescaled(w);
  const ModelParams m_t{1.0, m.mu, m.p};
  const double form_factor = std::pow(w, 2.0 * a - 0.5);
  const double inner_factor = std::pow(w, 2.0 * a - 1.5);

  const LinearizedOperator ops[2] = {LinearizedOperator(OperatorTag::L1_omega, phi, spec, m),
                                     LinearizedOperator(OperatorTag::L2_omega, phi, spec, m)};
  const LinearizedOperator ops_t[2] = {LinearizedOperator(OperatorTag::L1_omega, tilde, spec_t, m_t),
                                       LinearizedOperator(OperatorTag::L2_omega, tilde, spec_t, m_t)};
  const RealField& state = ops[0].state();
  const RealField& state_t = ops_t[0].state();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  RescaledIdentityReport rep;
  for (int s = 0; s < samples; ++s) {
    const double c[4] = {coef(rng), coef(rng), coef(rng), coef(rng)};
    const double width = phi.grid().half_width() / 4.0;
    RealField v = RealField::sample(phi.grid_ptr(), [&](double x, double y, double z) {
      return c[0] + c[1] * x / width + c[2] * y * z / (width * width) + c[3] * (x * x - z * z) / (width * width);
    });
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= state[i];
    const RealField vt = real_part(to_tilde(to_complex(v)));

    const double xn = ops[0].x_norm_sq(v);
    const double xn_t = ops_t[0].x_norm_sq(vt);
    rep.norm_error = std::max(rep.norm_error, std::abs(xn - form_factor * xn_t) / xn);
    for (int k = 0; k < 2; ++k)
      rep.form_error[k] =
          std::max(rep.form_error[k], std::abs(ops[k].form(v) - form_factor * ops_t[k].form(vt)) / xn);
    const double ip = inner(state, v);
    const double ip_t = inner(state_t, vt);
    rep.inner_error = std::max(rep.inner_error, std::abs(ip - inner_factor * ip_t) /
                                                    (l2_norm(state) * l2_norm(v)));
  }
  rep.max_error = std::max({rep.form_error[0], rep.form_error[1], rep.norm_error, rep.inner_error});
  return rep;
}

double cross_form(const ComplexField& w, const RealField& v, double mu, double p) {
  v.check_grid(w.grid());
  check_params(mu, p);
  RealField dens(w.grid_ptr()), f(w.grid_ptr());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::abs(w[i]);
    dens[i] = modulus_power(a, p);
    // |w|^(p-2) w v; w is real up to a global phase for a ground state.
    f[i] = modulus_power(a, p - 2.0) * std::real(w[i]) * v[i];
  }
  const RealField Kd = riesz_convolve(dens, mu);
  const RealField Kf = riesz_convolve(f, mu);
  double first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    first += modulus_power(std::abs(w[i]), p - 2.0) * v[i] * v[i] * Kd[i];
    second += Kf[i] * f[i];
  }
  const double h3 = w.grid().cell_volume();
  return ((p - 1.0) * first + p * second) * h3;
}

namespace {

Eigen::MatrixXd orthonormal_columns(const std::vector<RealField>& fs) {
  const Eigen::Index N = static_cast<Eigen::Index>(fs.front().size());
  Eigen::MatrixXd M(N, static_cast<Eigen::Index>(fs.size()));
  for (std::size_t j = 0; j < fs.size(); ++j) {
    fs[j].check_grid(fs.front().grid());
    M.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(fs[j].data(), N);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
  require(diag.minCoeff() > 1e-12 * diag.maxCoeff(), ErrorCode::invalid_argument, "fields are linearly dependent");
  return qr.householderQ() * Eigen::MatrixXd::Identity(N, M.cols());
}

}  // namespace

double largest_principal_angle(const std::vector<RealField>& a, const std::vector<RealField>& b) {
  require(!a.empty() && !b.empty() && b.size() <= a.size(), ErrorCode::invalid_argument,
          "principal angle needs 1 <= |b| <= |a|");
  b.front().check_grid(a.front().grid());
  const Eigen::MatrixXd Qa = orthonormal_columns(a), Qb = orthonormal_columns(b);
  const Eigen::MatrixXd rest = Qb - Qa * (Qa.transpose() * Qb);
  const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(rest).singularValues()(0);
  return std::asin(std::min(1.0, s));
}

BlockCheck second_variation_check(const ComplexField& state, const PotentialSpec& spec, const ModelParams& m,
                                  const ComplexField& v) {
  v.check_grid(state.grid());
  const SampledPotential pot = build_potential(spec, state.grid_ptr());
  const double eps = 1e-3 * l2_norm(state) / l2_norm(v);
  auto S = [&](double e) {
    ComplexField u = state;
    u.axpy(cplx(e), v);
    return functional_report(u, pot, m).S_omega;
  };
  const double S0 = S(0.0);
  auto second = [&](double e) { return (S(e) - 2.0 * S0 + S(-e)) / (e * e); };
  BlockCheck r;
  r.direct = (4.0 * second(0.5 * eps) - second(eps)) / 3.0;
  const LinearizedOperator L1(OperatorTag::L1_omega, state, spec, m);
  const LinearizedOperator L2(OperatorTag::L2_omega, state, spec, m);
  r.blocks = L1.form(real_part(v)) + L2.form(imag_part(v));
  r.relative_error = std::abs(r.direct - r.blocks) / std::abs(r.blocks);
  return r;
}

}  // namespace chq
