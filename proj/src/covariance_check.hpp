#pragma once

#include <cstdint>
#include <vector>

#include "curve.hpp"
#include "innovations.hpp"
#include "simulate.hpp"

// Measures how far the running second moment E[X_k X_k^T] of the
// time-varying process sits from the frozen local covariance Sigma(k/n).
// Two evaluation modes:
//
//   MonteCarlo — averages X_k X_k^T over replicates with derived streams
//     (replicate r simulates from mix_stream(seed, kTagPath, r));
//     aggregation is sequential in replicate order with compensated
//     summation, so results are invariant to the worker count.
//
//   Exact — E[X_k X_k^T] satisfies the Lyapunov recursion
//     M_k = Theta((k-1)/n) M_{k-1} Theta((k-1)/n)^T + sigma(k/n)^2 e1 e1^T
//     exactly under independent, unit-variance innovations, with
//     M_0 = Sigma(0) (stationary init), x0 x0^T (explicit) or 0 (zero init).
//     This evaluates the deviation with zero Monte Carlo noise, which is the
//     only way to resolve it once the signal drops toward 1e-4.
//
// Reported per requested k: the operator-norm deviation
// |Ehat[X_k X_k^T] - Sigma(k/n)|.

namespace tvar {

enum class SecondMomentMode { MonteCarlo, Exact };

struct CovarianceApproxResult {
  std::vector<long> k;
  std::vector<double> deviation;  // operator norm per k
};

CovarianceApproxResult covariance_approx_error(
    const ParamCurve& curve, const InnovationSpec& spec, long n,
    const std::vector<long>& k_list, long replicates, std::uint64_t seed,
    InitKind init = InitKind::StationaryAtZero,
    SecondMomentMode mode = SecondMomentMode::MonteCarlo, int workers = 1);

}  // namespace tvar
