#pragma once

#include <Eigen/Dense>

#include "curve.hpp"

// Frozen-time (locally stationary) quantities of the AR process with
// coefficients theta and scale sigma:
//
//   spectral density   f(lambda) = sigma^2 / (2 pi) * |theta(e^{i lambda})|^{-2}
//   covariance         Sigma_{k,l} = gamma(|k-l|), 1 <= k,l <= d,
//
// where gamma are the autocovariances of the stationary AR(d) process.  The
// primary covariance path solves the extended Yule-Walker system; the
// quadrature path integrates e^{i h lambda} f(lambda) with the periodic
// trapezoid rule (spectrally accurate) and serves as an independent oracle.

namespace tvar {

enum class CovarianceMethod { YuleWalker, Quadrature };

struct LocalCovariance {
  double t = 0.0;  // curve time the snapshot was taken at (if any)
  Eigen::MatrixXd matrix;
  CovarianceMethod method = CovarianceMethod::YuleWalker;
};

inline constexpr int kDefaultQuadratureNodes = 1 << 14;

// f(lambda) for the frozen coefficients; DomainError if spectral radius >= 1.
double local_spectral_density(const Eigen::VectorXd& theta, double sigma,
                              double lambda);

// Autocovariances gamma_0..gamma_m via the extended Yule-Walker solve.
Eigen::VectorXd yule_walker_autocov(const Eigen::VectorXd& theta, double sigma,
                                    int max_lag);

// d x d local covariance via Yule-Walker (primary).
LocalCovariance local_covariance_yw(const Eigen::VectorXd& theta, double sigma);

// d x d local covariance via trapezoid quadrature of the spectral density;
// node_count must be a power of two >= 256.  NumericError if the imaginary
// residue exceeds 1e-10 of the gamma_0 scale.
LocalCovariance local_covariance_quadrature(
    const Eigen::VectorXd& theta, double sigma,
    int node_count = kDefaultQuadratureNodes);

// Convenience: covariance of the curve frozen at time t.
LocalCovariance local_covariance_at(
    const ParamCurve& curve, double t,
    CovarianceMethod method = CovarianceMethod::YuleWalker,
    int node_count = kDefaultQuadratureNodes);

// Re-exported symmetric fractional power (validates symmetry and positive
// definiteness); see matrix_utils.
Eigen::MatrixXd fractional_power(const Eigen::MatrixXd& a, double alpha);

}  // namespace tvar
