#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "curve.hpp"
#include "innovations.hpp"

// Path simulation of the time-varying AR recursion
//
//   X_k = sum_{i=1..d} theta_i((k-1)/n) X_{k-i} + sigma(k/n) eps_k,   k = 1..n,
//
// started from the lag vector x0 = (X_0, X_{-1}, ..., X_{-d+1}).  The path
// carries its innovations and master seed so that any run is replayable and
// any derived quantity is attributable to a seed.

namespace tvar {

enum class InitKind { Zero, Explicit, StationaryAtZero };

struct TvarPath {
  long n = 0;
  int d = 0;
  Eigen::VectorXd x0;               // lags at time 0, x0(i) = X_{-i}
  std::vector<double> samples;      // X_1..X_n
  std::vector<double> innovations;  // eps_1..eps_n
  std::uint64_t seed = 0;           // master seed the streams derive from
  std::string curve_id;

  // Lag vector (X_k, X_{k-1}, ..., X_{k-d+1}) into out[0..d).
  void state_at(long k, double* out) const;
};

// Simulates one path.  Streams derive from master_seed per the rng contract:
// innovations from mix_stream(master_seed, kTagInnovations, 0), the
// stationary initial state from mix_stream(master_seed, kTagInitState, 0).
// StationaryAtZero draws x0 ~ N(0, Sigma(0)) through the symmetric square
// root of the Yule-Walker covariance at t=0 and requires the frozen
// coefficients theta(0) to be stable.  Explicit requires x0_explicit of
// length d.
TvarPath simulate(const ParamCurve& curve, long n, const InnovationSpec& spec,
                  std::uint64_t master_seed, InitKind init = InitKind::Zero,
                  const Eigen::VectorXd* x0_explicit = nullptr);

// Re-runs the recursion from the stored x0 + innovations and returns the
// maximum absolute deviation from the stored samples (0 for an untampered
// path).
double replay_max_abs_diff(const ParamCurve& curve, const TvarPath& path);

}  // namespace tvar
