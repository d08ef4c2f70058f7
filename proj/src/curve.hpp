#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// Time-varying AR parameter curves on [0,1]: the coefficient path
// t -> theta(t) in R^d and the innovation scale t -> sigma(t) > 0.  Three
// kinds are supported:
//
//   * closed-form families (polynomial, cosine, sqrt-drift coordinates),
//   * piecewise-linear interpolation through knots,
//   * root trajectories: theta(t) assembled from time-varying zeros of the
//     AR polynomial via prod(1 - lambda_i(t) z) = 1 - sum theta_k(t) z^k.
//
// Each curve declares a Hölder exponent beta (smoothness claim) and a
// stability margin rho (claim that the curve stays in S(rho), i.e. the
// companion spectral radius never exceeds rho).  Claims are checkable with
// check_stability_class / lipschitz_seminorm below.

namespace tvar {

inline constexpr int kMaxOrder = 8;
inline constexpr int kDefaultGrid = 1024;

enum class CurveKind { ClosedForm, PiecewiseLinear, RootTrajectory };

const char* curve_kind_name(CurveKind kind);

class ParamCurve {
 public:
  virtual ~ParamCurve() = default;

  int order() const { return d_; }
  CurveKind kind() const { return kind_; }
  const std::string& id() const { return id_; }
  double declared_beta() const { return declared_beta_; }
  // Stability margin the curve claims; defaults to the spectral-radius
  // supremum realized on the construction grid when not supplied.
  double declared_rho() const { return declared_rho_; }
  // sup over the construction grid of the companion spectral radius.
  double realized_radius() const { return realized_radius_; }
  double sigma_min() const { return sigma_min_; }
  double sigma_max() const { return sigma_max_; }

  // Allocation-free evaluation; out must hold order() doubles.
  // t must lie in [0,1] (DomainError otherwise).
  void eval_theta(double t, double* out) const;
  double eval_sigma(double t) const;

  Eigen::VectorXd theta(double t) const;
  double sigma(double t) const;

  virtual bool has_derivative() const { return false; }
  // d theta / dt; ValidationError unless the family registers one.
  virtual Eigen::VectorXd theta_dot(double t) const;

 protected:
  ParamCurve(int d, CurveKind kind, std::string id, double declared_beta,
             std::optional<double> declared_rho);
  virtual void eval_theta_impl(double t, double* out) const = 0;
  virtual double eval_sigma_impl(double t) const = 0;

  // Walks the construction grid: realized radius, sigma bounds, positivity.
  // Must be called at the end of every concrete constructor.
  void finalize_construction();

 private:
  int d_;
  CurveKind kind_;
  std::string id_;
  double declared_beta_;
  std::optional<double> declared_rho_opt_;
  double declared_rho_ = 0.0;
  double realized_radius_ = 0.0;
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
};

// ---- scale function sigma(t) ------------------------------------------------

struct SigmaFunc {
  enum class Kind { Constant, Poly, Cosine };
  Kind kind = Kind::Constant;
  double value = 1.0;                 // Constant
  std::vector<double> coeffs;         // Poly: sum coeffs[j] t^j
  double offset = 0.0, amplitude = 0.0, frequency = 0.0, phase = 0.0;  // Cosine

  double eval(double t) const;
  static SigmaFunc constant(double v);
};

// ---- closed forms -----------------------------------------------------------

struct ClosedFormTheta {
  enum class Family { Poly, Cosine, SqrtDrift };
  Family family = Family::Poly;
  // Poly: theta_i(t) = sum_j coeffs[i][j] t^j
  std::vector<std::vector<double>> coeffs;
  // Cosine: theta_i(t) = offset[i] + amplitude[i] cos(pi (frequency[i] t + phase[i]))
  std::vector<double> offset, amplitude, frequency, phase;
  // SqrtDrift: theta_i(u) = base[i] + coef[i] sqrt(max(anchor - u, 0)),
  // the canonical Hölder-beta=1/2 drift toward the anchor time.
  std::vector<double> base, coef;
  double anchor = 1.0;
};

class ClosedFormCurve final : public ParamCurve {
 public:
  ClosedFormCurve(ClosedFormTheta theta, SigmaFunc sigma, double declared_beta,
                  std::optional<double> declared_rho = std::nullopt,
                  std::string id = "closed_form");

  bool has_derivative() const override;
  Eigen::VectorXd theta_dot(double t) const override;

 protected:
  void eval_theta_impl(double t, double* out) const override;
  double eval_sigma_impl(double t) const override;

 private:
  ClosedFormTheta theta_;
  SigmaFunc sigma_;
};

// ---- piecewise linear -------------------------------------------------------

struct Knot {
  double t = 0.0;
  Eigen::VectorXd theta;
  double sigma = 1.0;
};

class PiecewiseLinearCurve final : public ParamCurve {
 public:
  // Knots must have strictly increasing t with t_first = 0 and t_last = 1.
  PiecewiseLinearCurve(std::vector<Knot> knots, double declared_beta = 1.0,
                       std::optional<double> declared_rho = std::nullopt,
                       std::string id = "piecewise_linear");

 protected:
  void eval_theta_impl(double t, double* out) const override;
  double eval_sigma_impl(double t) const override;

 private:
  std::vector<Knot> knots_;
};

// ---- root trajectories ------------------------------------------------------

// One zero trajectory of the AR polynomial, affine in t.  A Real spec
// contributes the root value(t) = value0 + value1 t; a Pair spec contributes
// the conjugate pair modulus(t) e^{+- i argument(t)} with both modulus and
// argument affine in t.
struct RootSpec {
  enum class Kind { Real, Pair };
  Kind kind = Kind::Real;
  double value0 = 0.0, value1 = 0.0;        // Real
  double modulus0 = 0.0, modulus1 = 0.0;    // Pair
  double argument0 = 0.0, argument1 = 0.0;  // Pair, radians
};

class RootTrajectoryCurve final : public ParamCurve {
 public:
  RootTrajectoryCurve(std::vector<RootSpec> roots, SigmaFunc sigma,
                      double declared_beta = 1.0,
                      std::optional<double> declared_rho = std::nullopt,
                      std::string id = "root_trajectory");

  // The root multiset at time t (conjugate-closed by construction).
  std::vector<std::complex<double>> roots_at(double t) const;

 protected:
  void eval_theta_impl(double t, double* out) const override;
  double eval_sigma_impl(double t) const override;

 private:
  std::vector<RootSpec> roots_;
  SigmaFunc sigma_;
};

// ---- curve-level analysis ---------------------------------------------------

struct StabilityCheck {
  bool is_member = false;   // sup radius <= rho on the grid
  double worst_radius = 0;  // sup over the grid
  double worst_t = 0;       // argmax
  double margin = 0;        // rho - worst_radius
};

// Grid certificate of membership in S(rho); grid_points >= 2.
StabilityCheck check_stability_class(const ParamCurve& curve, double rho,
                                     int grid_points = kDefaultGrid);

// max over all grid pairs s != t of |theta(s) - theta(t)| / |s - t|^beta.
double lipschitz_seminorm(const ParamCurve& curve, double beta,
                          int grid_points = kDefaultGrid);

struct StabilityBallBounds {
  double inner_radius = 0;  // Euclidean ball inside S(rho)
  double outer_radius = 0;  // S(rho) inside this coefficient-norm ball
};

// inner = 1/sqrt(sum_{i=1..d} rho^{-2i}), outer = (1+rho)^d - 1,
// for 0 < rho < 1 and 1 <= d <= kMaxOrder.
StabilityBallBounds stability_ball_bounds(double rho, int d);

}  // namespace tvar
