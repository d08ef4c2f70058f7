#include "curve.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "polynomial.hpp"

namespace tvar {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

void require_unit_interval(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("curve evaluation time must lie in [0,1], got " +
                      std::to_string(t));
  }
}
}  // namespace

const char* curve_kind_name(CurveKind kind) {
  switch (kind) {
    case CurveKind::ClosedForm: return "closed_form";
    case CurveKind::PiecewiseLinear: return "piecewise_linear";
    case CurveKind::RootTrajectory: return "root_trajectory";
  }
  return "?";
}

ParamCurve::ParamCurve(int d, CurveKind kind, std::string id,
                       double declared_beta, std::optional<double> declared_rho)
    : d_(d),
      kind_(kind),
      id_(std::move(id)),
      declared_beta_(declared_beta),
      declared_rho_opt_(declared_rho) {
  if (d_ < 1 || d_ > kMaxOrder) {
    throw ValidationError("curve order d must be in [1, " +
                          std::to_string(kMaxOrder) + "], got " +
                          std::to_string(d_));
  }
  if (!(declared_beta_ > 0.0 && declared_beta_ <= 2.0)) {
    throw ValidationError("declared_beta must lie in (0, 2], got " +
                          std::to_string(declared_beta_));
  }
  if (declared_rho_opt_ && !(*declared_rho_opt_ > 0.0 && *declared_rho_opt_ < 1.0)) {
    throw ValidationError("declared_rho must lie in (0, 1), got " +
                          std::to_string(*declared_rho_opt_));
  }
}

void ParamCurve::finalize_construction() {
  // Construction-grid walk: realized spectral radius and sigma bounds.
  const int grid = 257;
  Eigen::VectorXd th(d_);
  double worst = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  double smax = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = static_cast<double>(i) / (grid - 1);
    eval_theta_impl(t, th.data());
    worst = std::max(worst, spectral_radius(th));
    const double s = eval_sigma_impl(t);
    if (!(s > 0.0)) {
      throw ValidationError("sigma(t) must be > 0 on [0,1]; sigma(" +
                            std::to_string(t) + ") = " + std::to_string(s));
    }
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  realized_radius_ = worst;
  declared_rho_ = declared_rho_opt_.value_or(std::min(worst, 0.999999));
  sigma_min_ = smin;
  sigma_max_ = smax;
}

void ParamCurve::eval_theta(double t, double* out) const {
  require_unit_interval(t);
  eval_theta_impl(t, out);
}

double ParamCurve::eval_sigma(double t) const {
  require_unit_interval(t);
  return eval_sigma_impl(t);
}

Eigen::VectorXd ParamCurve::theta(double t) const {
  Eigen::VectorXd out(d_);
  eval_theta(t, out.data());
  return out;
}

double ParamCurve::sigma(double t) const { return eval_sigma(t); }

Eigen::VectorXd ParamCurve::theta_dot(double /*t*/) const {
  throw ValidationError("curve '" + id() +
                        "' does not register a derivative d theta/dt");
}

// ---- SigmaFunc --------------------------------------------------------------

double SigmaFunc::eval(double t) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Poly: {
      double acc = 0.0;
      for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * t + coeffs[j];
      return acc;
    }
    case Kind::Cosine:
      return offset + amplitude * std::cos(kPi * (frequency * t + phase));
  }
  return 0.0;
}

SigmaFunc SigmaFunc::constant(double v) {
  SigmaFunc f;
  f.kind = Kind::Constant;
  f.value = v;
  return f;
}

// ---- ClosedFormCurve --------------------------------------------------------

namespace {

int closed_form_order(const ClosedFormTheta& f) {
  switch (f.family) {
    case ClosedFormTheta::Family::Poly:
      return static_cast<int>(f.coeffs.size());
    case ClosedFormTheta::Family::Cosine:
      if (f.offset.size() != f.amplitude.size() ||
          f.offset.size() != f.frequency.size() ||
          f.offset.size() != f.phase.size()) {
        throw ValidationError(
            "cosine curve: offset/amplitude/frequency/phase must have equal "
            "length");
      }
      return static_cast<int>(f.offset.size());
    case ClosedFormTheta::Family::SqrtDrift:
      if (f.base.size() != f.coef.size()) {
        throw ValidationError("sqrt_drift curve: base/coef must have equal length");
      }
      if (!(f.anchor > 0.0 && f.anchor <= 1.0)) {
        throw ValidationError("sqrt_drift curve: anchor must lie in (0, 1]");
      }
      return static_cast<int>(f.base.size());
  }
  return 0;
}

}  // namespace

ClosedFormCurve::ClosedFormCurve(ClosedFormTheta theta, SigmaFunc sigma,
                                 double declared_beta,
                                 std::optional<double> declared_rho,
                                 std::string id)
    : ParamCurve(closed_form_order(theta), CurveKind::ClosedForm,
                 std::move(id), declared_beta, declared_rho),
      theta_(std::move(theta)),
      sigma_(std::move(sigma)) {
  if (theta_.family == ClosedFormTheta::Family::Poly) {
    for (const auto& row : theta_.coeffs) {
      if (row.empty())
        throw ValidationError("poly curve: each coordinate needs >= 1 coefficient");
    }
  }
  finalize_construction();
}

void ClosedFormCurve::eval_theta_impl(double t, double* out) const {
  switch (theta_.family) {
    case ClosedFormTheta::Family::Poly:
      for (std::size_t i = 0; i < theta_.coeffs.size(); ++i) {
        const auto& row = theta_.coeffs[i];
        double acc = 0.0;
        for (std::size_t j = row.size(); j-- > 0;) acc = acc * t + row[j];
        out[i] = acc;
      }
      return;
    case ClosedFormTheta::Family::Cosine:
      for (std::size_t i = 0; i < theta_.offset.size(); ++i) {
        out[i] = theta_.offset[i] +
                 theta_.amplitude[i] *
                     std::cos(kPi * (theta_.frequency[i] * t + theta_.phase[i]));
      }
      return;
    case ClosedFormTheta::Family::SqrtDrift:
      for (std::size_t i = 0; i < theta_.base.size(); ++i) {
        out[i] = theta_.base[i] +
                 theta_.coef[i] * std::sqrt(std::max(theta_.anchor - t, 0.0));
      }
      return;
  }
}

double ClosedFormCurve::eval_sigma_impl(double t) const {
  return sigma_.eval(t);
}

bool ClosedFormCurve::has_derivative() const {
  return theta_.family != ClosedFormTheta::Family::SqrtDrift;
}

Eigen::VectorXd ClosedFormCurve::theta_dot(double t) const {
  if (!has_derivative()) return ParamCurve::theta_dot(t);
  require_unit_interval(t);
  Eigen::VectorXd out(order());
  if (theta_.family == ClosedFormTheta::Family::Poly) {
    for (std::size_t i = 0; i < theta_.coeffs.size(); ++i) {
      const auto& row = theta_.coeffs[i];
      double acc = 0.0;
      for (std::size_t j = row.size(); j-- > 1;)
        acc = acc * t + static_cast<double>(j) * row[j];
      out[static_cast<Eigen::Index>(i)] = acc;
    }
  } else {  // Cosine
    for (std::size_t i = 0; i < theta_.offset.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] =
          -theta_.amplitude[i] * kPi * theta_.frequency[i] *
          std::sin(kPi * (theta_.frequency[i] * t + theta_.phase[i]));
    }
  }
  return out;
}

// ---- PiecewiseLinearCurve ---------------------------------------------------

namespace {

int knots_order(const std::vector<Knot>& knots) {
  if (knots.size() < 2)
    throw ValidationError("piecewise_linear curve: need >= 2 knots");
  return static_cast<int>(knots.front().theta.size());
}

}  // namespace

PiecewiseLinearCurve::PiecewiseLinearCurve(std::vector<Knot> knots,
                                           double declared_beta,
                                           std::optional<double> declared_rho,
                                           std::string id)
    : ParamCurve(knots_order(knots), CurveKind::PiecewiseLinear, std::move(id),
                 declared_beta, declared_rho),
      knots_(std::move(knots)) {
  if (knots_.front().t != 0.0 || knots_.back().t != 1.0) {
    throw ValidationError(
        "piecewise_linear curve: knots must start at t=0 and end at t=1");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i].theta.size() != order()) {
      throw ValidationError("piecewise_linear curve: knot " +
                            std::to_string(i) + " has theta of length " +
                            std::to_string(knots_[i].theta.size()) +
                            ", expected " + std::to_string(order()));
    }
    if (i > 0 && !(knots_[i].t > knots_[i - 1].t)) {
      throw ValidationError(
          "piecewise_linear curve: knot times must be strictly increasing");
    }
  }
  finalize_construction();
}

void PiecewiseLinearCurve::eval_theta_impl(double t, double* out) const {
  auto it = std::upper_bound(
      knots_.begin(), knots_.end(), t,
      [](double value, const Knot& k) { return value < k.t; });
  const std::size_t hi = std::min<std::size_t>(
      std::max<std::ptrdiff_t>(it - knots_.begin(), 1), knots_.size() - 1);
  const Knot& a = knots_[hi - 1];
  const Knot& b = knots_[hi];
  const double w = (t - a.t) / (b.t - a.t);
  for (int i = 0; i < order(); ++i)
    out[i] = (1.0 - w) * a.theta(i) + w * b.theta(i);
}

double PiecewiseLinearCurve::eval_sigma_impl(double t) const {
  auto it = std::upper_bound(
      knots_.begin(), knots_.end(), t,
      [](double value, const Knot& k) { return value < k.t; });
  const std::size_t hi = std::min<std::size_t>(
      std::max<std::ptrdiff_t>(it - knots_.begin(), 1), knots_.size() - 1);
  const Knot& a = knots_[hi - 1];
  const Knot& b = knots_[hi];
  const double w = (t - a.t) / (b.t - a.t);
  return (1.0 - w) * a.sigma + w * b.sigma;
}

// ---- RootTrajectoryCurve ----------------------------------------------------

namespace {

int roots_order(const std::vector<RootSpec>& roots) {
  if (roots.empty())
    throw ValidationError("root_trajectory curve: need >= 1 root spec");
  int d = 0;
  for (const auto& r : roots) d += (r.kind == RootSpec::Kind::Real) ? 1 : 2;
  return d;
}

}  // namespace

RootTrajectoryCurve::RootTrajectoryCurve(std::vector<RootSpec> roots,
                                         SigmaFunc sigma, double declared_beta,
                                         std::optional<double> declared_rho,
                                         std::string id)
    : ParamCurve(roots_order(roots), CurveKind::RootTrajectory, std::move(id),
                 declared_beta, declared_rho),
      roots_(std::move(roots)),
      sigma_(std::move(sigma)) {
  // Structural conjugate closure plus a belt-and-braces multiset check.
  for (const double t : {0.0, 0.37, 1.0}) {
    if (!conjugate_closed(roots_at(t), 1e-10)) {
      throw ValidationError(
          "root_trajectory curve: root set is not closed under conjugation");
    }
  }
  finalize_construction();
}

std::vector<std::complex<double>> RootTrajectoryCurve::roots_at(double t) const {
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(order()));
  for (const auto& r : roots_) {
    if (r.kind == RootSpec::Kind::Real) {
      out.emplace_back(r.value0 + r.value1 * t, 0.0);
    } else {
      const double m = r.modulus0 + r.modulus1 * t;
      const double a = r.argument0 + r.argument1 * t;
      out.emplace_back(m * std::cos(a), m * std::sin(a));
      out.emplace_back(m * std::cos(a), -m * std::sin(a));
    }
  }
  return out;
}

void RootTrajectoryCurve::eval_theta_impl(double t, double* out) const {
  // Multiply out prod(1 - lambda z) without heap traffic: a real root
  // contributes the linear factor (1 - m z); a conjugate pair contributes
  // the real quadratic (1 - 2 m cos(a) z + m^2 z^2).
  double coeffs[kMaxOrder + 1] = {1.0};
  int degree = 0;
  for (const auto& r : roots_) {
    if (r.kind == RootSpec::Kind::Real) {
      const double m = r.value0 + r.value1 * t;
      for (int k = degree + 1; k >= 1; --k) coeffs[k] -= m * coeffs[k - 1];
      ++degree;
    } else {
      const double m = r.modulus0 + r.modulus1 * t;
      const double a = r.argument0 + r.argument1 * t;
      const double b1 = -2.0 * m * std::cos(a);
      const double b2 = m * m;
      for (int k = degree + 2; k >= 1; --k) {
        double acc = coeffs[k];
        if (k >= 1) acc += b1 * coeffs[k - 1];
        if (k >= 2) acc += b2 * coeffs[k - 2];
        coeffs[k] = acc;
      }
      degree += 2;
    }
  }
  // theta(z) = 1 - sum theta_k z^k  =>  theta_k = -coeff_k.
  for (int k = 1; k <= degree; ++k) out[k - 1] = -coeffs[k];
}

double RootTrajectoryCurve::eval_sigma_impl(double t) const {
  return sigma_.eval(t);
}

// ---- curve-level analysis ---------------------------------------------------

StabilityCheck check_stability_class(const ParamCurve& curve, double rho,
                                     int grid_points) {
  if (!(rho > 0.0 && rho < 1.0))
    throw ValidationError("check_stability_class: rho must lie in (0,1)");
  if (grid_points < 2)
    throw ValidationError("check_stability_class: grid_points must be >= 2");

  Eigen::VectorXd th(curve.order());
  StabilityCheck out;
  for (int i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / (grid_points - 1);
    curve.eval_theta(t, th.data());
    const double r = spectral_radius(th);
    if (r > out.worst_radius) {
      out.worst_radius = r;
      out.worst_t = t;
    }
  }
  out.is_member = out.worst_radius <= rho;
  out.margin = rho - out.worst_radius;
  return out;
}

double lipschitz_seminorm(const ParamCurve& curve, double beta,
                          int grid_points) {
  if (!(beta > 0.0 && beta <= 2.0))
    throw ValidationError("lipschitz_seminorm: beta must lie in (0,2]");
  if (grid_points < 2)
    throw ValidationError("lipschitz_seminorm: grid_points must be >= 2");

  const int d = curve.order();
  std::vector<Eigen::VectorXd> values(static_cast<std::size_t>(grid_points));
  std::vector<double> times(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    times[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / (grid_points - 1);
    values[static_cast<std::size_t>(i)].resize(d);
    curve.eval_theta(times[static_cast<std::size_t>(i)],
                     values[static_cast<std::size_t>(i)].data());
  }
  double sup = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    for (int j = i + 1; j < grid_points; ++j) {
      const double gap =
          (values[static_cast<std::size_t>(i)] - values[static_cast<std::size_t>(j)])
              .norm();
      const double dt = times[static_cast<std::size_t>(j)] -
                        times[static_cast<std::size_t>(i)];
      sup = std::max(sup, gap / std::pow(dt, beta));
    }
  }
  return sup;
}

StabilityBallBounds stability_ball_bounds(double rho, int d) {
  if (!(rho > 0.0 && rho < 1.0))
    throw ValidationError("stability_ball_bounds: rho must lie in (0,1)");
  if (d < 1 || d > kMaxOrder)
    throw ValidationError("stability_ball_bounds: d must lie in [1, " +
                          std::to_string(kMaxOrder) + "]");
  double sum = 0.0;
  for (int i = 1; i <= d; ++i) sum += std::pow(rho, -2 * i);
  StabilityBallBounds out;
  out.inner_radius = 1.0 / std::sqrt(sum);
  out.outer_radius = std::pow(1.0 + rho, d) - 1.0;
  return out;
}

}  // namespace tvar
