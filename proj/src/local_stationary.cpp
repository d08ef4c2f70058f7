#include "local_stationary.hpp"

#include <cmath>

#include "errors.hpp"
#include "matrix_utils.hpp"
#include "polynomial.hpp"

namespace tvar {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_stable(const Eigen::VectorXd& theta, const char* where) {
  const double r = spectral_radius(theta);
  if (!(r < 1.0)) {
    throw DomainError(std::string(where) +
                      ": coefficients are outside the stability region "
                      "(spectral radius = " +
                      std::to_string(r) + " >= 1)");
  }
}

void require_sigma(double sigma, const char* where) {
  if (!(sigma > 0.0))
    throw ValidationError(std::string(where) + ": sigma must be > 0");
}

}  // namespace

double local_spectral_density(const Eigen::VectorXd& theta, double sigma,
                              double lambda) {
  require_sigma(sigma, "local_spectral_density");
  require_stable(theta, "local_spectral_density");
  return sigma * sigma / (kTwoPi * ar_transfer_sq(theta, lambda));
}

Eigen::VectorXd yule_walker_autocov(const Eigen::VectorXd& theta, double sigma,
                                    int max_lag) {
  require_sigma(sigma, "yule_walker_autocov");
  require_stable(theta, "yule_walker_autocov");
  const int d = static_cast<int>(theta.size());
  const int m = std::max(max_lag, d);

  // Unknowns gamma_0..gamma_d.  Row k of the extended Yule-Walker system:
  //   gamma_k - sum_j theta_j gamma_{|k-j|} = sigma^2 [k == 0].
  const int n = d + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(0) = sigma * sigma;
  for (int k = 0; k <= d; ++k) {
    a(k, k) += 1.0;
    for (int j = 1; j <= d; ++j) a(k, std::abs(k - j)) -= theta(j - 1);
  }
  Eigen::VectorXd gamma_head = a.partialPivLu().solve(b);
  if (!gamma_head.allFinite()) {
    throw NumericError("yule_walker_autocov: singular Yule-Walker system");
  }

  Eigen::VectorXd gamma(m + 1);
  gamma.head(d + 1) = gamma_head;
  // Higher lags from the homogeneous recursion gamma_k = sum theta_j gamma_{k-j}.
  for (int k = d + 1; k <= m; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= d; ++j) acc += theta(j - 1) * gamma(k - j);
    gamma(k) = acc;
  }
  return gamma.head(max_lag + 1);
}

LocalCovariance local_covariance_yw(const Eigen::VectorXd& theta,
                                    double sigma) {
  const int d = static_cast<int>(theta.size());
  const Eigen::VectorXd gamma =
      yule_walker_autocov(theta, sigma, std::max(d - 1, 0));
  LocalCovariance out;
  out.method = CovarianceMethod::YuleWalker;
  out.matrix.resize(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) out.matrix(k, l) = gamma(std::abs(k - l));
  return out;
}

LocalCovariance local_covariance_quadrature(const Eigen::VectorXd& theta,
                                            double sigma, int node_count) {
  require_sigma(sigma, "local_covariance_quadrature");
  if (node_count < 256 || (node_count & (node_count - 1)) != 0) {
    throw ValidationError(
        "local_covariance_quadrature: node_count must be a power of two >= "
        "256, got " +
        std::to_string(node_count));
  }
  require_stable(theta, "local_covariance_quadrature");

  const int d = static_cast<int>(theta.size());
  // Periodic composite trapezoid on [-pi, pi): equal weights, and the
  // spectral density is sampled once per node (f(-pi) = f(pi)).
  const double h = kTwoPi / node_count;
  const double sig2 = sigma * sigma;
  Eigen::VectorXd re = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd im = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < node_count; ++j) {
    const double lambda = -0.5 * kTwoPi + j * h;
    const double f = sig2 / (kTwoPi * ar_transfer_sq(theta, lambda));
    for (int lag = 0; lag < d; ++lag) {
      re(lag) += f * std::cos(lag * lambda);
      im(lag) += f * std::sin(lag * lambda);
    }
  }
  re *= h;
  im *= h;

  const double scale = std::max(1.0, std::abs(re(0)));
  for (int lag = 0; lag < d; ++lag) {
    if (std::abs(im(lag)) > 1e-10 * scale) {
      throw NumericError(
          "local_covariance_quadrature: imaginary residue " +
          std::to_string(im(lag)) + " at lag " + std::to_string(lag) +
          " exceeds tolerance");
    }
  }

  LocalCovariance out;
  out.method = CovarianceMethod::Quadrature;
  out.matrix.resize(d, d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) out.matrix(k, l) = re(std::abs(k - l));
  return out;
}

LocalCovariance local_covariance_at(const ParamCurve& curve, double t,
                                    CovarianceMethod method, int node_count) {
  const Eigen::VectorXd th = curve.theta(t);
  const double s = curve.sigma(t);
  LocalCovariance out = (method == CovarianceMethod::YuleWalker)
                            ? local_covariance_yw(th, s)
                            : local_covariance_quadrature(th, s, node_count);
  out.t = t;
  return out;
}

Eigen::MatrixXd fractional_power(const Eigen::MatrixXd& a, double alpha) {
  return fractional_power_sym(a, alpha);
}

}  // namespace tvar
