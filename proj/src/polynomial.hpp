#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

// AR characteristic-polynomial tools.  For a coefficient vector
// theta = (theta_1..theta_d) the AR polynomial is
//
//   theta(z) = 1 - theta_1 z - ... - theta_d z^d,
//
// and the process is stable (in the class S(rho)) when theta(z) has no zero
// with |z| < 1/rho.  The reciprocals of those zeros are exactly the
// eigenvalues of the companion matrix, i.e. the roots of the monic polynomial
// lambda^d - theta_1 lambda^{d-1} - ... - theta_d, which is what the solver
// works on: spectral_radius(theta) = max |lambda_i| and membership in S(rho)
// is spectral_radius <= rho.

namespace tvar {

// d x d companion matrix: first row theta^T, identity on the subdiagonal.
Eigen::MatrixXd companion(const Eigen::VectorXd& theta);

// Eigenvalues of the companion matrix (= reciprocal zeros of theta(z)).
// Closed forms for d <= 2; Durand–Kerner simultaneous iteration for d >= 3
// with a companion-matrix eigensolve as fallback if the iteration fails its
// residual check.
std::vector<std::complex<double>> companion_roots(const Eigen::VectorXd& theta);

// max_i |lambda_i| over the companion eigenvalues.
double spectral_radius(const Eigen::VectorXd& theta);

// |theta(e^{i lambda})|^2, the squared transfer-function denominator.
double ar_transfer_sq(const Eigen::VectorXd& theta, double lambda);

// Expands prod_i (1 - lambda_i z) = 1 - sum_k theta_k z^k for a root multiset
// closed under conjugation and returns (theta_1..theta_d).  Throws
// NumericError if the imaginary residue of a coefficient exceeds tolerance
// (i.e. the input was not conjugate-closed).
Eigen::VectorXd theta_from_roots(const std::vector<std::complex<double>>& roots);

// Checks closure of a root multiset under complex conjugation (within tol,
// via greedy matching).  Used to validate root-trajectory curves.
bool conjugate_closed(const std::vector<std::complex<double>>& roots,
                      double tol);

}  // namespace tvar
