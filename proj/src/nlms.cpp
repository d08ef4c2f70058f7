#include "nlms.hpp"

#include <cmath>

#include "errors.hpp"

namespace tvar {

Eigen::VectorXd NlmsTrajectory::estimate(long k) const {
  if (k < 0 || k > n)
    throw ValidationError("trajectory index " + std::to_string(k) +
                          " outside [0, n]");
  return Eigen::Map<const Eigen::VectorXd>(row(k), d);
}

void normalized_gain(const double* x, int d, double nu, double* l_out,
                     double* f_out) {
  if (d < 1) throw ValidationError("normalized_gain: d must be >= 1");
  if (!(nu >= 0.0)) throw ValidationError("normalized_gain: nu must be >= 0");
  double sq = 0.0;
  for (int i = 0; i < d; ++i) sq += x[i] * x[i];
  const double denom = 1.0 + nu * sq;
  for (int i = 0; i < d; ++i) l_out[i] = x[i] / denom;
  if (f_out != nullptr) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) f_out[i * d + j] = l_out[i] * x[j];
  }
}

void nlms_step(const double* theta_hat, const double* x_state, int d,
               double x_next, double mu, double* out) {
  if (d < 1) throw ValidationError("nlms_step: d must be >= 1");
  if (!(mu > 0.0)) throw ValidationError("nlms_step: mu must be > 0");
  double sq = 0.0, dot = 0.0;
  for (int i = 0; i < d; ++i) {
    sq += x_state[i] * x_state[i];
    dot += theta_hat[i] * x_state[i];
  }
  const double gain = mu * (x_next - dot) / (1.0 + mu * sq);
  for (int i = 0; i < d; ++i) out[i] = theta_hat[i] + gain * x_state[i];
}

NlmsTrajectory nlms_run(const TvarPath& path, double mu) {
  if (!(mu > 0.0)) throw ValidationError("nlms_run: mu must be > 0");
  const int d = path.d;
  const long n = path.n;

  NlmsTrajectory traj;
  traj.mu = mu;
  traj.n = n;
  traj.d = d;
  traj.estimates.assign(static_cast<std::size_t>(n + 1) * d, 0.0);

  double state[kMaxOrder];
  double est[kMaxOrder];
  for (int i = 0; i < d; ++i) {
    state[i] = path.x0(i);
    est[i] = 0.0;  // thetahat_0 = 0
  }

  for (long k = 0; k < n; ++k) {
    const double x_next = path.samples[static_cast<std::size_t>(k)];
    double sq = 0.0, dot = 0.0;
    for (int i = 0; i < d; ++i) {
      sq += state[i] * state[i];
      dot += est[i] * state[i];
    }
    const double gain = mu * (x_next - dot) / (1.0 + mu * sq);
    for (int i = 0; i < d; ++i) est[i] += gain * state[i];
    double* out_row = traj.estimates.data() + static_cast<std::size_t>(k + 1) * d;
    for (int i = 0; i < d; ++i) out_row[i] = est[i];
    // Advance the lag vector to time k+1.
    for (int i = d - 1; i >= 1; --i) state[i] = state[i - 1];
    state[0] = x_next;
  }
  return traj;
}

long pointwise_index(double t, long n) {
  if (n < 1) throw ValidationError("pointwise_index: n must be >= 1");
  if (!(t > 0.0 && t <= 1.0)) {
    throw DomainError("pointwise time t must lie in (0, 1], got " +
                      std::to_string(t));
  }
  const long k = static_cast<long>(std::floor(t * static_cast<double>(n)));
  return std::min(k, n);  // t = 1 maps to n
}

Eigen::VectorXd pointwise_estimate(const NlmsTrajectory& trajectory, double t) {
  return trajectory.estimate(pointwise_index(t, trajectory.n));
}

Eigen::VectorXd romberg_combine(const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError("romberg_combine: gamma must lie in (0,1), got " +
                          std::to_string(gamma));
  }
  if (a.size() != b.size())
    throw ValidationError("romberg_combine: size mismatch");
  return (a - gamma * b) / (1.0 - gamma);
}

Eigen::VectorXd bias_corrected_estimate(const TvarPath& path, double mu,
                                        double gamma, double t) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError(
        "bias_corrected_estimate: gamma must lie in (0,1), got " +
        std::to_string(gamma));
  }
  const NlmsTrajectory full = nlms_run(path, mu);
  const NlmsTrajectory slow = nlms_run(path, gamma * mu);
  return romberg_combine(pointwise_estimate(full, t),
                         pointwise_estimate(slow, t), gamma);
}

ErrorDecomposition error_decomposition(const TvarPath& path, double mu,
                                       const ParamCurve& curve) {
  if (!(mu > 0.0)) throw ValidationError("error_decomposition: mu must be > 0");
  const double replay = replay_max_abs_diff(curve, path);
  if (replay > 1e-12) {
    throw ValidationError(
        "error_decomposition: path does not replay under this curve "
        "(max deviation " +
        std::to_string(replay) + "); curve/path mismatch");
  }

  const int d = path.d;
  const long n = path.n;
  ErrorDecomposition dec;
  dec.mu = mu;
  dec.n = n;
  dec.d = d;
  dec.u.assign(static_cast<std::size_t>(n + 1) * d, 0.0);
  dec.v.assign(static_cast<std::size_t>(n + 1) * d, 0.0);
  dec.w.assign(static_cast<std::size_t>(n + 1) * d, 0.0);

  double state[kMaxOrder];
  double du[kMaxOrder], dv[kMaxOrder], dw[kMaxOrder];
  double th_now[kMaxOrder], th_next[kMaxOrder];
  const double inv_n = 1.0 / static_cast<double>(n);

  curve.eval_theta(0.0, th_now);
  for (int i = 0; i < d; ++i) {
    state[i] = path.x0(i);
    du[i] = -th_now[i];  // delta_u_0 = -theta(0)
    dv[i] = 0.0;
    dw[i] = 0.0;
    dec.u[static_cast<std::size_t>(i)] = du[i];
  }

  for (long k = 0; k < n; ++k) {
    curve.eval_theta(static_cast<double>(k + 1) * inv_n, th_next);
    const double sig_next = curve.eval_sigma(static_cast<double>(k + 1) * inv_n);
    const double eps_next = path.innovations[static_cast<std::size_t>(k)];

    double sq = 0.0, dot_u = 0.0, dot_v = 0.0, dot_w = 0.0;
    for (int i = 0; i < d; ++i) {
      sq += state[i] * state[i];
      dot_u += du[i] * state[i];
      dot_v += dv[i] * state[i];
      dot_w += dw[i] * state[i];
    }
    const double denom = 1.0 + mu * sq;
    // (I - mu F_mu(X_k)) delta = delta - mu (X_k . delta) L_mu(X_k)
    const double cu = mu * dot_u / denom;
    const double cv = mu * dot_v / denom;
    const double cw = mu * dot_w / denom;
    const double noise = mu * sig_next * eps_next / denom;  // xi_v coefficient
    for (int i = 0; i < d; ++i) {
      du[i] -= cu * state[i];
      dv[i] += (noise - cv) * state[i];
      dw[i] += (th_now[i] - th_next[i]) - cw * state[i];
    }

    double* u_row = dec.u.data() + static_cast<std::size_t>(k + 1) * d;
    double* v_row = dec.v.data() + static_cast<std::size_t>(k + 1) * d;
    double* w_row = dec.w.data() + static_cast<std::size_t>(k + 1) * d;
    for (int i = 0; i < d; ++i) {
      u_row[i] = du[i];
      v_row[i] = dv[i];
      w_row[i] = dw[i];
    }

    for (int i = d - 1; i >= 1; --i) state[i] = state[i - 1];
    state[0] = path.samples[static_cast<std::size_t>(k)];
    for (int i = 0; i < d; ++i) th_now[i] = th_next[i];
  }
  return dec;
}

}  // namespace tvar
