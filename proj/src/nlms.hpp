#pragma once

#include <Eigen/Dense>
#include <vector>

#include "curve.hpp"
#include "simulate.hpp"

// The normalized least mean squares recursion on a simulated path:
//
//   thetahat_0 = 0,
//   thetahat_{k+1} = thetahat_k
//       + mu (X_{k+1} - thetahat_k^T X_k) X_k / (1 + mu |X_k|^2),
//
// with X_k the lag vector at time k.  Pointwise estimates read the
// trajectory at index [t n] (t = 1 maps to n); the two-step-size
// bias-corrected (Richardson/Romberg) estimate combines runs at mu and
// gamma mu on the same path:
//
//   thetatilde = (thetahat(mu) - gamma thetahat(gamma mu)) / (1 - gamma).
//
// The error delta_k = thetahat_k - theta(k/n) splits exactly into three
// recursions sharing the contraction I - mu F_mu(X_k):
//
//   delta_u: transient    delta_u_0 = -theta(0), homogeneous
//   delta_v: noise        driven by mu L_mu(X_k) sigma((k+1)/n) eps_{k+1}
//   delta_w: drift        driven by theta(k/n) - theta((k+1)/n)
//
// and delta_u + delta_v + delta_w = delta identically (up to roundoff).

namespace tvar {

struct NlmsTrajectory {
  double mu = 0.0;
  long n = 0;
  int d = 0;
  std::vector<double> estimates;  // (n+1) x d row-major, row k = thetahat_k

  const double* row(long k) const {
    return estimates.data() + static_cast<std::size_t>(k) * d;
  }
  Eigen::VectorXd estimate(long k) const;
};

// L_nu(x) = x / (1 + nu |x|^2); optionally also F_nu(x) = L_nu(x) x^T
// (row-major d x d) when f_out is non-null.  nu must be >= 0.
void normalized_gain(const double* x, int d, double nu, double* l_out,
                     double* f_out);

// One recursion step, out may alias theta_hat.
void nlms_step(const double* theta_hat, const double* x_state, int d,
               double x_next, double mu, double* out);

NlmsTrajectory nlms_run(const TvarPath& path, double mu);

// Index map for pointwise reads: [t n] with t in (0,1], t = 1 -> n.
long pointwise_index(double t, long n);

Eigen::VectorXd pointwise_estimate(const NlmsTrajectory& trajectory, double t);

// (a - gamma b) / (1 - gamma), gamma in (0,1).
Eigen::VectorXd romberg_combine(const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b, double gamma);

// Runs the recursion twice on the same path (mu and gamma mu) and combines
// pointwise at t.
Eigen::VectorXd bias_corrected_estimate(const TvarPath& path, double mu,
                                        double gamma, double t);

struct ErrorDecomposition {
  double mu = 0.0;
  long n = 0;
  int d = 0;
  // (n+1) x d row-major each; u[0] = -theta(0), v[0] = w[0] = 0.
  std::vector<double> u, v, w;

  const double* u_row(long k) const { return u.data() + static_cast<std::size_t>(k) * d; }
  const double* v_row(long k) const { return v.data() + static_cast<std::size_t>(k) * d; }
  const double* w_row(long k) const { return w.data() + static_cast<std::size_t>(k) * d; }
};

// Exact transient/noise/drift decomposition along the path.  Validates that
// the path replays under the given curve (guards against curve/path
// mismatches) before running the three recursions.
ErrorDecomposition error_decomposition(const TvarPath& path, double mu,
                                       const ParamCurve& curve);

}  // namespace tvar
