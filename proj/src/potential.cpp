#include "choquard/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "choquard/error.hpp"

namespace chq {

PotentialSpec PotentialSpec::harmonic(double a) {
  PotentialSpec s;
  s.v1_kind = V1Kind::harmonic;
  s.harmonic_a = a;
  return s;
}

PotentialSpec PotentialSpec::radial_polynomial(std::vector<double> coeffs) {
  PotentialSpec s;
  s.v1_kind = V1Kind::radial_polynomial;
  s.poly_coeffs = std::move(coeffs);
  return s;
}

PotentialSpec PotentialSpec::exponential(double a, double b) {
  PotentialSpec s;
  s.v1_kind = V1Kind::exponential;
  s.exp_a = a;
  s.exp_b = b;
  return s;
}

RadialProfile PotentialSpec::v1_profile() const {
  auto zero_fn = [](double) { return 0.0; };
  switch (v1_kind) {
    case V1Kind::zero:
      return {zero_fn, zero_fn, zero_fn};
    case V1Kind::harmonic: {
      const double a = harmonic_a;
      return {[a](double r) { return a * r * r; }, [a](double r) { return 2.0 * a * r; },
              [a](double) { return 2.0 * a; }};
    }
    case V1Kind::radial_polynomial: {
      const std::vector<double> c = poly_coeffs;
      auto eval = [c](double r, int order) {
        double s = 0.0;
        for (std::size_t j = order; j < c.size(); ++j) {
          double fac = 1.0;
          for (int t = 0; t < order; ++t) fac *= static_cast<double>(j - t);
          s += fac * c[j] * std::pow(r, static_cast<double>(j - order));
        }
        return s;
      };
      return {[eval](double r) { return eval(r, 0); }, [eval](double r) { return eval(r, 1); },
              [eval](double r) { return eval(r, 2); }};
    }
    case V1Kind::exponential: {
      const double a = exp_a, b = exp_b;
      return {[a, b](double r) { return a * std::exp(b * r); },
              [a, b](double r) { return a * b * std::exp(b * r); },
              [a, b](double r) { return a * b * b * std::exp(b * r); }};
    }
    case V1Kind::custom:
      require(custom.f && custom.df && custom.d2f, ErrorCode::invalid_argument,
              "custom V1 needs f, f' and f''");
      return custom;
  }
  fail(ErrorCode::invalid_argument, "unknown V1 kind");
}

RadialProfile PotentialSpec::v2_profile() const {
  auto zero_fn = [](double) { return 0.0; };
  if (v2_kind == V2Kind::zero) return {zero_fn, zero_fn, zero_fn};
  const double dr = v2_dr;
  const std::vector<double> s = v2_samples;
  // Linear interpolation: piecewise-constant slope, zero curvature.
  auto locate = [dr, s](double r) {
    const double t = r / dr;
    const std::size_t j = std::min(static_cast<std::size_t>(t), s.size() - 2);
    return std::pair<std::size_t, double>(j, t - static_cast<double>(j));
  };
  return {[locate, s](double r) {
            auto [j, w] = locate(r);
            return (1.0 - w) * s[j] + w * s[j + 1];
          },
          [locate, s, dr](double r) {
            auto [j, w] = locate(r);
            return (s[j + 1] - s[j]) / dr;
          },
          zero_fn};
}

double PotentialSpec::evaluate(double r) const { return v1_profile().f(r) + v2_profile().f(r); }

PotentialSpec PotentialSpec::rescaled(double omega) const {
  require(omega > 0.0, ErrorCode::domain, "omega must be positive");
  const double s = std::sqrt(omega);
  PotentialSpec out = *this;
  switch (v1_kind) {
    case V1Kind::zero:
      break;
    case V1Kind::harmonic:
      out.harmonic_a = harmonic_a / (omega * omega);
      break;
    case V1Kind::radial_polynomial:
      for (std::size_t j = 0; j < out.poly_coeffs.size(); ++j)
        out.poly_coeffs[j] = poly_coeffs[j] / (omega * std::pow(s, static_cast<double>(j)));
      break;
    case V1Kind::exponential:
      out.exp_a = exp_a / omega;
      out.exp_b = exp_b / s;
      break;
    case V1Kind::custom: {
      const RadialProfile p = v1_profile();
      out.custom = {[p, omega, s](double r) { return p.f(r / s) / omega; },
                    [p, omega, s](double r) { return p.df(r / s) / (omega * s); },
                    [p, omega, s](double r) { return p.d2f(r / s) / (omega * s * s); }};
      break;
    }
  }
  if (v2_kind == V2Kind::radial_table) {
    out.v2_dr = v2_dr * s;
    for (double& v : out.v2_samples) v /= omega;
  }
  // Declared constants refer to the unscaled potential.
  out.growth_m.reset();
  out.growth_M.reset();
  out.derivative_bounds.clear();
  return out;
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  switch (v1_kind) {
    case V1Kind::zero: os << "V1=0"; break;
    case V1Kind::harmonic: os << "V1=" << harmonic_a << "|x|^2"; break;
    case V1Kind::radial_polynomial:
      os << "V1=poly(";
      for (std::size_t j = 0; j < poly_coeffs.size(); ++j) os << (j ? "," : "") << poly_coeffs[j];
      os << ")";
      break;
    case V1Kind::exponential: os << "V1=" << exp_a << "exp(" << exp_b << "|x|)"; break;
    case V1Kind::custom: os << "V1=custom"; break;
  }
  if (v2_kind == V2Kind::radial_table) os << " V2=table(" << v2_samples.size() << ",dr=" << v2_dr << ",q=" << q << ")";
  return os.str();
}

namespace {

double max_grid_radius(const SpectralGrid& g) { return std::sqrt(3.0) * g.half_width(); }

void check_v2(const PotentialSpec& spec, const SpectralGrid& g) {
  if (spec.v2_kind == PotentialSpec::V2Kind::zero) return;
  require(spec.q > 1.5, ErrorCode::domain,
          "V2 requires q > 3/2 (got q=" + std::to_string(spec.q) + ")");
  require(spec.v2_dr > 0.0 && spec.v2_samples.size() >= 2, ErrorCode::invalid_argument,
          "V2 table needs dr > 0 and at least two samples");
  const double covered = spec.v2_dr * static_cast<double>(spec.v2_samples.size() - 1);
  require(covered >= max_grid_radius(g), ErrorCode::invalid_argument,
          "V2 table covers r <= " + std::to_string(covered) + " but the grid reaches r = " +
              std::to_string(max_grid_radius(g)));
  for (double v : spec.v2_samples) require(std::isfinite(v), ErrorCode::invalid_argument, "V2 table has non-finite samples");
}

}  // namespace

SampledPotential build_potential(const PotentialSpec& spec, const GridPtr& grid) {
  check_v2(spec, *grid);
  const RadialProfile p1 = spec.v1_profile();
  const RadialProfile p2 = spec.v2_profile();
  SampledPotential out{RealField(grid), RealField(grid), RealField(grid), RealField(grid), RealField(grid),
                       spec.is_zero()};
  if (out.zero) return out;
  const int n = grid->n();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double x = grid->coord(ix), y = grid->coord(iy), z = grid->coord(iz);
        const double r = std::sqrt(x * x + y * y + z * z);
        const std::size_t i = grid->index(ix, iy, iz);
        const double v1 = p1.f(r);
        const double rdf = r * (p1.df(r) + p2.df(r));
        const double r2d2f = r * r * (p1.d2f(r) + p2.d2f(r));
        out.V1[i] = v1;
        out.V[i] = v1 + p2.f(r);
        out.x_grad_V[i] = rdf;
        out.xx_hess_V[i] = r2d2f;
        out.v_star[i] = 3.0 * rdf + r2d2f;
      }
  return out;
}

bool ConditionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

namespace {

// Radii along a ray beyond the box used for growth trends.
constexpr double kTrendFactor = 1.5;

// Fails when the sampled quantity keeps growing by more than kTrendFactor per
// doubling of r over four doublings past the box.
ConditionCheck trend_check(std::string name, double box_radius, const std::function<double(double)>& q,
                           const std::string& what) {
  ConditionCheck c;
  c.name = std::move(name);
  c.bound = kTrendFactor;
  bool growing = true;
  double prev = q(box_radius), worst_r = box_radius, worst = prev;
  double min_growth = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 4; ++d) {
    const double r = box_radius * std::ldexp(1.0, d);
    const double v = q(r);
    if (!std::isfinite(v)) break;
    const double growth = prev > 0.0 ? v / prev : (v > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    min_growth = std::min(min_growth, growth);
    if (growth <= kTrendFactor) growing = false;
    if (v > worst) worst = v, worst_r = r;
    prev = v;
  }
  c.passed = !growing;
  c.measured = min_growth;
  c.witness = {worst_r, 0.0, 0.0};
  c.note = "no declared bound; " + what + " along the x axis for r = L*2^k, k=0..4; fails when it grows more than 1.5x per doubling";
  return c;
}

}  // namespace

ConditionReport validate_conditions(const PotentialSpec& spec, const GridPtr& grid) {
  ConditionReport rep;
  const SpectralGrid& g = *grid;
  const int n = g.n();
  const RadialProfile p = spec.v1_profile();
  const double L = g.half_width();

  // (V1.1) nonnegativity and growth bound on grid points.
  ConditionCheck nonneg{"V1.1 V1 >= 0"};
  ConditionCheck growth{"V1.1 V1 <= M(1+|x|^m)"};
  const bool have_growth = spec.growth_m && spec.growth_M;
  growth.evaluated = have_growth;
  if (have_growth) growth.bound = 1.0;
  else growth.note = "m and M not declared";
  double vmin = std::numeric_limits<double>::infinity(), gmax = -std::numeric_limits<double>::infinity();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
        const double r = std::sqrt(x * x + y * y + z * z);
        const double v = p.f(r);
        if (v < vmin) vmin = v, nonneg.witness = {x, y, z};
        if (have_growth) {
          const double ratio = v / (*spec.growth_M * (1.0 + std::pow(r, *spec.growth_m)));
          if (ratio > gmax) gmax = ratio, growth.witness = {x, y, z};
        }
      }
  nonneg.measured = vmin;
  nonneg.passed = vmin >= 0.0;
  if (have_growth) {
    growth.measured = gmax;
    growth.passed = gmax <= 1.0;
  }
  rep.checks.push_back(nonneg);
  rep.checks.push_back(growth);

  // (V1.2) |x^alpha d^alpha V1| <= M_alpha (1 + V1). On the x axis the worst
  // multi-indices are alpha = e1 (r f') and alpha = 2 e1 (r^2 f'').
  const std::function<double(double)> q1 = [p](double r) { return std::abs(r * p.df(r)) / (1.0 + std::abs(p.f(r))); };
  const std::function<double(double)> q2 = [p](double r) { return std::abs(r * r * p.d2f(r)) / (1.0 + std::abs(p.f(r))); };
  for (int order : {1, 2}) {
    const auto& q = order == 1 ? q1 : q2;
    const std::string name = "V1.2 |alpha|=" + std::to_string(order);
    auto it = spec.derivative_bounds.find(order);
    if (it != spec.derivative_bounds.end()) {
      ConditionCheck c{name};
      c.bound = it->second;
      double worst = 0.0;
      for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
          for (int ix = 0; ix < n; ++ix) {
            const double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
            const double r = std::sqrt(x * x + y * y + z * z);
            if (r == 0.0) continue;
            const double f = p.f(r), df = p.df(r), d2f = p.d2f(r);
            const double xs[3] = {x, y, z};
            double val = 0.0;
            for (int a = 0; a < 3; ++a) {
              if (order == 1) {
                val = std::max(val, std::abs(xs[a] * xs[a] * df / r));
              } else {
                const double w = xs[a] * xs[a] / (r * r);
                val = std::max(val, std::abs(xs[a] * xs[a] * (d2f * w + df * (1.0 - w) / r)));
                for (int b = a + 1; b < 3; ++b)
                  val = std::max(val, std::abs(xs[a] * xs[a] * xs[b] * xs[b] * (d2f / (r * r) - df / (r * r * r))));
              }
            }
            const double ratio = val / (1.0 + std::abs(f));
            if (ratio > worst) worst = ratio, c.witness = {x, y, z};
          }
      c.measured = worst;
      c.passed = worst <= c.bound;
      rep.checks.push_back(c);
    } else {
      rep.checks.push_back(trend_check(name, L, q, "|x^alpha d^alpha V1|/(1+V1)"));
    }
  }

  // (V1.3) smoothness, positivity (read as >= 0), bounded second derivatives.
  ConditionCheck smooth{"V1.3 V1 smooth"};
  switch (spec.v1_kind) {
    case PotentialSpec::V1Kind::radial_polynomial:
      for (std::size_t j = 1; j < spec.poly_coeffs.size(); j += 2)
        if (spec.poly_coeffs[j] != 0.0) {
          smooth.passed = false;
          smooth.note = "odd power of |x| is not smooth at the origin";
        }
      break;
    case PotentialSpec::V1Kind::exponential:
      if (spec.exp_b != 0.0) {
        smooth.passed = false;
        smooth.note = "exp(b|x|) is not smooth at the origin";
      }
      break;
    case PotentialSpec::V1Kind::custom:
      smooth.evaluated = false;
      smooth.note = "custom profile: smoothness not checkable";
      break;
    default:
      break;
  }
  rep.checks.push_back(smooth);
  ConditionCheck positive = nonneg;
  positive.name = "V1.3 V1 positive";
  positive.note = "checked as V1 >= 0";
  rep.checks.push_back(positive);
  const std::function<double(double)> hess = [p](double r) {
    return std::max(std::abs(p.d2f(r)), r > 0.0 ? std::abs(p.df(r) / r) : 0.0);
  };
  rep.checks.push_back(trend_check("V1.3 bounded second derivatives", L, hess, "Hessian norm of V1"));

  // (V2)
  ConditionCheck v2{"V2 x^alpha d^alpha V2 in L^q + L^inf, q > 3/2"};
  if (spec.v2_kind == PotentialSpec::V2Kind::zero) {
    v2.note = "V2 = 0";
  } else {
    v2.measured = spec.q;
    v2.bound = 1.5;
    v2.passed = spec.q > 1.5;
    for (double s : spec.v2_samples)
      if (!std::isfinite(s)) v2.passed = false;
    v2.note = "bounded table, hence in L^inf";
  }
  rep.checks.push_back(v2);
  return rep;
}

}  // namespace chq
