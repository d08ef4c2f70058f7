#include "simulate.hpp"

#include <cmath>

#include "errors.hpp"
#include "local_stationary.hpp"
#include "rng.hpp"

namespace tvar {

void TvarPath::state_at(long k, double* out) const {
  if (k < 0 || k > n) {
    throw ValidationError("state_at: index " + std::to_string(k) +
                          " outside [0, n]");
  }
  for (int i = 0; i < d; ++i) {
    const long idx = k - i;  // absolute time of lag i
    out[i] = (idx >= 1) ? samples[static_cast<std::size_t>(idx - 1)]
                        : x0(static_cast<Eigen::Index>(-idx));
  }
}

TvarPath simulate(const ParamCurve& curve, long n, const InnovationSpec& spec,
                  std::uint64_t master_seed, InitKind init,
                  const Eigen::VectorXd* x0_explicit) {
  if (n < 1) throw ValidationError("simulate: n must be >= 1");
  spec.validate();
  const int d = curve.order();

  TvarPath path;
  path.n = n;
  path.d = d;
  path.seed = master_seed;
  path.curve_id = curve.id();
  path.samples.resize(static_cast<std::size_t>(n));
  path.innovations.resize(static_cast<std::size_t>(n));

  switch (init) {
    case InitKind::Zero:
      path.x0 = Eigen::VectorXd::Zero(d);
      break;
    case InitKind::Explicit:
      if (x0_explicit == nullptr || x0_explicit->size() != d) {
        throw ValidationError(
            "simulate: explicit init requires an x0 of length d = " +
            std::to_string(d));
      }
      path.x0 = *x0_explicit;
      break;
    case InitKind::StationaryAtZero: {
      // x0 ~ N(0, Sigma(0)); requires theta(0) stable (checked by the
      // Yule-Walker solve) and uses the symmetric square root of Sigma(0).
      const LocalCovariance cov0 =
          local_covariance_yw(curve.theta(0.0), curve.sigma(0.0));
      const Eigen::MatrixXd root = fractional_power(cov0.matrix, 0.5);
      InnovationSpec gauss;
      gauss.family = InnovationFamily::Gaussian;
      InnovationSampler init_sampler(
          gauss, rng::mix_stream(master_seed, rng::kTagInitState, 0));
      Eigen::VectorXd z(d);
      for (int i = 0; i < d; ++i) z(i) = init_sampler.next_normal();
      path.x0 = root * z;
      break;
    }
  }

  InnovationSampler sampler(
      spec, rng::mix_stream(master_seed, rng::kTagInnovations, 0));

  double state[kMaxOrder];  // (X_{k-1}, ..., X_{k-d})
  double th[kMaxOrder];
  for (int i = 0; i < d; ++i) state[i] = path.x0(i);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (long k = 1; k <= n; ++k) {
    curve.eval_theta(static_cast<double>(k - 1) * inv_n, th);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += th[i] * state[i];
    const double eps = sampler.next();
    const double x =
        acc + curve.eval_sigma(static_cast<double>(k) * inv_n) * eps;
    path.innovations[static_cast<std::size_t>(k - 1)] = eps;
    path.samples[static_cast<std::size_t>(k - 1)] = x;
    for (int i = d - 1; i >= 1; --i) state[i] = state[i - 1];
    state[0] = x;
  }
  return path;
}

double replay_max_abs_diff(const ParamCurve& curve, const TvarPath& path) {
  const int d = curve.order();
  if (path.d != d) {
    throw ValidationError("replay: path order " + std::to_string(path.d) +
                          " does not match curve order " + std::to_string(d));
  }
  if (path.x0.size() != d ||
      path.samples.size() != static_cast<std::size_t>(path.n) ||
      path.innovations.size() != static_cast<std::size_t>(path.n)) {
    throw ValidationError("replay: path buffers are inconsistent with n and d");
  }

  double state[kMaxOrder];
  double th[kMaxOrder];
  for (int i = 0; i < d; ++i) state[i] = path.x0(i);
  const double inv_n = 1.0 / static_cast<double>(path.n);
  double worst = 0.0;
  for (long k = 1; k <= path.n; ++k) {
    curve.eval_theta(static_cast<double>(k - 1) * inv_n, th);
    double acc = 0.0;
    for (int i = 0; i < d; ++i) acc += th[i] * state[i];
    const double x = acc + curve.eval_sigma(static_cast<double>(k) * inv_n) *
                               path.innovations[static_cast<std::size_t>(k - 1)];
    worst = std::max(
        worst, std::abs(x - path.samples[static_cast<std::size_t>(k - 1)]));
    for (int i = d - 1; i >= 1; --i) state[i] = state[i - 1];
    state[0] = x;
  }
  return worst;
}

}  // namespace tvar
